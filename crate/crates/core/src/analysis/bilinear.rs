use super::lifting::{harmonic_extension, solve_lifting, LiftingSolution};
use crate::error::{Error, Result};
use crate::sparse_linalg::{smallest_generalized_eigenvalue, CsrMatrix};
use crate::stepper::Problem;

/// `a((w,r),(w̄,s))` from two lifting solutions:
/// `∫_B σ_i∇(w+W)·∇(w̄+W̄) + ∫_B σ_e∇W·∇W̄ + ∫_D σ_d∇W·∇W̄ + β∫_Γ r s`.
pub fn bilinear_from_liftings(problem: &Problem, x: &LiftingSolution, y: &LiftingSolution, beta: f64) -> Result<f64> {
    let o = problem.ops();
    let d = problem.dofs();
    let (xb, xd) = d.split_u(&x.field);
    let (yb, yd) = d.split_u(&y.field);
    let zx: Vec<f64> = x.w.iter().zip(xb).map(|(a, b)| a + b).collect();
    let zy: Vec<f64> = y.w.iter().zip(yb).map(|(a, b)| a + b).collect();
    Ok(o.a_i.bilinear(&zx, &zy)?
        + o.a_e.bilinear(xb, yb)?
        + o.a_d.bilinear(xd, yd)?
        + beta * o.m_gamma.bilinear(&x.r, &y.r)?)
}

/// Evaluates the bilinear form, solving both liftings.
pub fn bilinear_form(problem: &Problem, x: (&[f64], &[f64]), y: (&[f64], &[f64]), beta: f64, tol: f64) -> Result<f64> {
    let lx = solve_lifting(problem, x.0, x.1, tol)?;
    let ly = solve_lifting(problem, y.0, y.1, tol)?;
    bilinear_from_liftings(problem, &lx, &ly, beta)
}

/// Dense matrix of the form on the `(w, r)` space, one lifted unit vector
/// per column: `w` over the V dofs, then `r` over the jump pairs.
pub fn bilinear_matrix(problem: &Problem, beta: f64, tol: f64) -> Result<Vec<Vec<f64>>> {
    let d = problem.dofs();
    let (nv, nj) = (d.n_v(), d.n_jump());
    let n = nv + nj;
    let o = problem.ops();
    let mut cols: Vec<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> = Vec::with_capacity(n);
    let mut images = Vec::with_capacity(n);
    for k in 0..n {
        let mut w = vec![0.0; nv];
        let mut r = vec![0.0; nj];
        if k < nv {
            w[k] = 1.0;
        } else {
            r[k - nv] = 1.0;
        }
        let l = solve_lifting(problem, &w, &r, tol)?;
        let (wb, wd) = d.split_u(&l.field);
        let z: Vec<f64> = w.iter().zip(wb).map(|(a, b)| a + b).collect();
        images.push((o.a_i.spmv(&z)?, o.a_e.spmv(wb)?, o.a_d.spmv(wd)?, o.m_gamma.spmv(&r)?));
        cols.push((z, wb.to_vec(), wd.to_vec(), r));
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let (zi, bi, di, ri) = &cols[i];
            let (azj, aej, adj, mrj) = &images[j];
            let v = dot(zi, azj) + dot(bi, aej) + dot(di, adj) + beta * dot(ri, mrj);
            a[i][j] = v;
            a[j][i] = v;
        }
    }
    Ok(a)
}

/// Gram matrix of `‖w‖²_{H¹(B)} + ‖r‖²_{1/2,h}` on the `(w, r)` space.
pub fn norm_gram_matrix(problem: &Problem, tol: f64) -> Result<CsrMatrix> {
    let d = problem.dofs();
    let o = problem.ops();
    let (nv, nj) = (d.n_v(), d.n_jump());
    let h1 = o.k1_b.linear_combination(1.0, &o.mass_b, 1.0)?;
    let mut ext = Vec::with_capacity(nj);
    for k in 0..nj {
        let mut r = vec![0.0; nj];
        r[k] = 1.0;
        ext.push(harmonic_extension(problem, &o.k1_b, &r, tol)?);
    }
    let mut trip: Vec<(usize, usize, f64)> = h1.triplets().collect();
    for i in 0..nj {
        let ki = o.k1_b.spmv(&ext[i])?;
        for j in i..nj {
            let s: f64 = ki.iter().zip(&ext[j]).map(|(a, b)| a * b).sum();
            let v = s + o.m_gamma.get(i, j);
            if v != 0.0 {
                trip.push((nv + i, nv + j, v));
                if j != i {
                    trip.push((nv + j, nv + i, v));
                }
            }
        }
    }
    Ok(CsrMatrix::from_triplets(nv + nj, nv + nj, &trip))
}

#[derive(Debug, Clone)]
pub struct CoercivityEstimate {
    /// Smallest eigenvalue of the form against the norm Gram matrix.
    pub c_min: f64,
    pub dimension: usize,
    pub eigen_iterations: usize,
}

/// `c_min = min a(x,x) / (‖w‖²_{H¹} + ‖r‖²_{1/2,h})` over the discrete `(w, r)` space.
pub fn coercivity_estimate(problem: &Problem, beta: f64, tol: f64) -> Result<CoercivityEstimate> {
    let d = problem.dofs();
    let n = d.n_v() + d.n_jump();
    if n > 2000 {
        return Err(Error::config(format!(
            "coercivity estimate assembles a dense {n}x{n} form; use a coarser mesh"
        )));
    }
    let a = CsrMatrix::from_dense(&bilinear_matrix(problem, beta, tol)?);
    let g = norm_gram_matrix(problem, tol)?;
    let e = smallest_generalized_eigenvalue(&a, &g, 1e-10)?;
    Ok(CoercivityEstimate {
        c_min: e.value,
        dimension: n,
        eigen_iterations: e.iterations,
    })
}

/// Discrete Poincaré constant `C` in
/// `‖U‖²_{L²} ≤ C (‖∇U‖²_B + ‖∇U‖²_D [+ ‖[U]‖²_Γ])` on the U block.
pub fn poincare_constant(problem: &Problem, with_jump: bool) -> Result<f64> {
    let o = problem.ops();
    let d = problem.dofs();
    let (nb, nd) = (d.n_ub(), d.n_ud());
    let mut blocks = vec![(0, 0, &o.k1_b, 1.0), (nb, nb, &o.k1_d, 1.0)];
    if with_jump {
        blocks.push((0, 0, &o.g, 1.0));
    }
    let k = CsrMatrix::from_blocks(nb + nd, nb + nd, &blocks);
    let m = CsrMatrix::from_blocks(nb + nd, nb + nd, &[(0, 0, &o.mass_b, 1.0), (nb, nb, &o.mass_d, 1.0)]);
    let e = smallest_generalized_eigenvalue(&k, &m, 1e-10)?;
    Ok(1.0 / e.value)
}
