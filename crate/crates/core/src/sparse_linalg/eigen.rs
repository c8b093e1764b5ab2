use super::cg::{cg_solve_from, LinearSystem, Preconditioner};
use super::csr::{dot, CsrMatrix};
use crate::error::{Error, Result};

pub const EIGEN_MAX_OUTER: usize = 500;

/// Number of vectors iterated together; clustered low eigenvalues then
/// converge at the rate of the first eigenvalue outside the block.
const BLOCK: usize = 6;

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    /// Normalized so that `vᵀ B v = 1`.
    pub vector: Vec<f64>,
    pub iterations: usize,
}

/// Smallest eigenvalue of the pencil `A v = λ B v` by block inverse
/// iteration with Rayleigh–Ritz.
///
/// `A` must be symmetric positive definite (the inner solves are CG), `B`
/// symmetric positive definite. Stops when the smallest Ritz value changes
/// by less than `tol` relative between iterations.
pub fn smallest_generalized_eigenvalue(a: &CsrMatrix, b: &CsrMatrix, tol: f64) -> Result<EigenPair> {
    let n = a.nrows();
    if a.shape() != (n, n) || b.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            context: "generalized eigenproblem",
            expected: n,
            actual: b.nrows(),
        });
    }
    if n == 0 {
        return Err(Error::config("empty eigenproblem"));
    }
    let p = BLOCK.min(n);
    let inner_tol = (tol * 1e-2).clamp(1e-14, 1e-10);

    // deterministic start vectors with components along every low mode
    let mut x: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            (0..n)
                .map(|i| {
                    1.0 + 0.25 * ((i as f64) * (0.713 + 0.37 * j as f64)).sin() + 0.1 * j as f64 * (i % (j + 2)) as f64
                })
                .collect()
        })
        .collect();
    let (mut ritz, mut vals) = rayleigh_ritz(a, b, &mut x)?;
    let mut lambda = vals[0];
    for it in 1..=EIGEN_MAX_OUTER {
        for (j, xj) in ritz.iter().enumerate() {
            let bx = b.spmv(xj)?;
            let guess: Vec<f64> = xj.iter().map(|v| v / vals[j].max(f64::MIN_POSITIVE)).collect();
            let sys = LinearSystem::new(a, &bx, inner_tol)?;
            x[j] = cg_solve_from(&sys, Preconditioner::Jacobi, Some(&guess))?.x;
        }
        let (r, v) = rayleigh_ritz(a, b, &mut x)?;
        ritz = r;
        vals = v;
        let change = (vals[0] - lambda).abs();
        lambda = vals[0];
        if it >= 2 && change <= tol * lambda.abs().max(f64::MIN_POSITIVE) {
            return Ok(EigenPair {
                value: lambda,
                vector: ritz.swap_remove(0),
                iterations: it,
            });
        }
    }
    Err(Error::EigenNonConvergence {
        iterations: EIGEN_MAX_OUTER,
        estimate: lambda,
    })
}

/// B-orthonormalizes the block, drops dependent vectors and returns the
/// Ritz vectors and values of the projected pencil, ascending.
fn rayleigh_ritz(a: &CsrMatrix, b: &CsrMatrix, y: &mut [Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(y.len());
    for v in y.iter() {
        let mut v = v.clone();
        let norm0 = b.quadratic(&v)?.max(0.0).sqrt();
        for _ in 0..2 {
            for q in &basis {
                let bq = b.spmv(q)?;
                let c = dot(&v, &bq);
                v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= c * qi);
            }
        }
        let nrm = b.quadratic(&v)?;
        if !nrm.is_finite() {
            return Err(Error::NumericBreakdown(
                "non-finite iterate in inverse iteration".into(),
            ));
        }
        if nrm > (1e-10 * norm0).powi(2) && nrm > 0.0 {
            let s = 1.0 / nrm.sqrt();
            v.iter_mut().for_each(|x| *x *= s);
            basis.push(v);
        }
    }
    if basis.is_empty() {
        return Err(Error::NumericBreakdown(
            "inverse iteration block collapsed; B must be positive definite".into(),
        ));
    }
    let m = basis.len();
    let ab: Vec<Vec<f64>> = basis.iter().map(|q| a.spmv(q)).collect::<Result<_>>()?;
    let mut c = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i..m {
            let v = 0.5 * (dot(&basis[i], &ab[j]) + dot(&basis[j], &ab[i]));
            c[i][j] = v;
            c[j][i] = v;
        }
    }
    let (vals, vecs) = symmetric_eigen(c);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
    let n = basis[0].len();
    let ritz: Vec<Vec<f64>> = order
        .iter()
        .map(|&k| {
            let mut v = vec![0.0; n];
            for (i, q) in basis.iter().enumerate() {
                let w = vecs[i][k];
                v.iter_mut().zip(q).for_each(|(vi, qi)| *vi += w * qi);
            }
            v
        })
        .collect();
    let sorted: Vec<f64> = order.iter().map(|&k| vals[k]).collect();
    for (dst, src) in y.iter_mut().zip(&ritz) {
        dst.clone_from(src);
    }
    Ok((ritz, sorted))
}

/// Cyclic Jacobi rotations for a small dense symmetric matrix. Returns the
/// eigenvalues and the eigenvectors as columns.
fn symmetric_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let diag: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}
