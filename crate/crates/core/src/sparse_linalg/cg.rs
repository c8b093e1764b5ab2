use super::csr::{axpy, dot, norm2, CsrMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preconditioner {
    None,
    #[default]
    Jacobi,
}

/// `A x = b` with stopping data. The iteration cap defaults to `10·n`.
#[derive(Debug, Clone)]
pub struct LinearSystem<'a> {
    pub matrix: &'a CsrMatrix,
    pub rhs: &'a [f64],
    pub tolerance: f64,
    pub max_iterations: Option<usize>,
}

impl<'a> LinearSystem<'a> {
    pub fn new(matrix: &'a CsrMatrix, rhs: &'a [f64], tolerance: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                context: "linear system (matrix must be square)",
                expected: matrix.nrows(),
                actual: matrix.ncols(),
            });
        }
        if rhs.len() != matrix.nrows() {
            return Err(Error::DimensionMismatch {
                context: "linear system right side",
                expected: matrix.nrows(),
                actual: rhs.len(),
            });
        }
        Ok(Self {
            matrix,
            rhs,
            tolerance,
            max_iterations: None,
        })
    }

    pub fn with_max_iterations(mut self, cap: usize) -> Self {
        self.max_iterations = Some(cap);
        self
    }
}

#[derive(Debug, Clone)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `‖b − A x‖ / ‖b‖` at exit.
    pub relative_residual: f64,
    /// Unpreconditioned residual norms, one per iteration, starting with the initial guess.
    pub residual_history: Vec<f64>,
}

pub fn cg_solve(system: &LinearSystem<'_>, preconditioner: Preconditioner) -> Result<CgSolution> {
    cg_solve_from(system, preconditioner, None)
}

/// Preconditioned conjugate gradients, optionally warm-started.
///
/// Stops when `‖b − A x‖ ≤ tol·‖b‖`. A zero right side returns the zero vector
/// without iterating.
pub fn cg_solve_from(
    system: &LinearSystem<'_>,
    preconditioner: Preconditioner,
    initial_guess: Option<&[f64]>,
) -> Result<CgSolution> {
    let a = system.matrix;
    let b = system.rhs;
    let n = b.len();
    let cap = system.max_iterations.unwrap_or(10 * n.max(1));

    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericBreakdown("non-finite right side".into()));
    }
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok(CgSolution {
            x: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
            residual_history: vec![0.0],
        });
    }

    let inv_diag: Vec<f64> = match preconditioner {
        Preconditioner::None => vec![1.0; n],
        Preconditioner::Jacobi => {
            let d = a.diagonal();
            if let Some(i) = d.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
                return Err(Error::NumericBreakdown(format!(
                    "Jacobi preconditioner needs a positive diagonal (entry {i} is {})",
                    d[i]
                )));
            }
            d.iter().map(|v| 1.0 / v).collect()
        }
    };

    let mut x = match initial_guess {
        Some(g) => {
            if g.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "cg initial guess",
                    expected: n,
                    actual: g.len(),
                });
            }
            g.to_vec()
        }
        None => vec![0.0; n],
    };
    let mut r = b.to_vec();
    let ax = a.spmv(&x)?;
    axpy(-1.0, &ax, &mut r);
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];

    let mut res = norm2(&r);
    let mut history = vec![res];
    let target = system.tolerance * b_norm;
    let mut iterations = 0;

    while res > target {
        if iterations >= cap {
            return Err(Error::NonConvergence {
                iterations,
                residual: res / b_norm,
            });
        }
        a.spmv_into(&p, &mut ap)?;
        let pap = dot(&p, &ap);
        if !pap.is_finite() || pap <= 0.0 {
            return Err(Error::NumericBreakdown(format!(
                "non-positive curvature pᵀAp = {pap:.3e} at iteration {iterations}; matrix is not positive definite"
            )));
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        for ((zi, ri), di) in z.iter_mut().zip(&r).zip(&inv_diag) {
            *zi = ri * di;
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
        iterations += 1;
        res = norm2(&r);
        if !res.is_finite() {
            return Err(Error::NumericBreakdown(format!(
                "non-finite residual at iteration {iterations}"
            )));
        }
        history.push(res);
    }

    Ok(CgSolution {
        x,
        iterations,
        relative_residual: res / b_norm,
        residual_history: history,
    })
}
