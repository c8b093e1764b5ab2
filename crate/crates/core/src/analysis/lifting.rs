use crate::error::{Error, Result};
use crate::sparse_linalg::{cg_solve, dense_solve, CsrMatrix, LinearSystem, Preconditioner};
use crate::stepper::{constrained_u_solve, merged_jump_map, Problem};

/// `W` solving the transmission problem with data `(w, r)`:
/// `−div((σ_i+σ_e)∇W) = div(σ_i∇w)` in `B`, `−div(σ_d∇W) = 0` in `D`,
/// continuous flux across `Γ`, `[W] = r`, `W = 0` on `∂Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftingSolution {
    /// Input on the V dofs.
    pub w: Vec<f64>,
    /// Input jump on the jump pairs.
    pub r: Vec<f64>,
    /// `W` on the U block.
    pub field: Vec<f64>,
    /// `‖W‖²_{X¹₀} = ‖∇W‖²_B + ‖∇W‖²_D + ‖[W]‖²_Γ`
    pub norm_x_sq: f64,
    /// `‖w‖²_{H¹(B)} = ‖∇w‖² + ‖w‖²`
    pub norm_w_sq: f64,
    /// Discrete `H^{1/2}` norm of `r`, see [`half_norm_sq`].
    pub norm_r_sq: f64,
}

fn check_inputs(problem: &Problem, w: &[f64], r: &[f64]) -> Result<()> {
    let d = problem.dofs();
    if w.len() != d.n_v() {
        return Err(Error::DimensionMismatch {
            context: "lifting input w",
            expected: d.n_v(),
            actual: w.len(),
        });
    }
    if r.len() != d.n_jump() {
        return Err(Error::DimensionMismatch {
            context: "lifting input r",
            expected: d.n_jump(),
            actual: r.len(),
        });
    }
    Ok(())
}

/// Right side `−A_i w` on the B part of the U block.
fn lifting_rhs(problem: &Problem, w: &[f64]) -> Result<Vec<f64>> {
    let d = problem.dofs();
    let aw = problem.ops().a_i.spmv(w)?;
    let mut rhs = vec![0.0; d.n_u()];
    for (x, a) in rhs.iter_mut().zip(&aw) {
        *x = -a;
    }
    Ok(rhs)
}

/// `‖W‖²_{X¹₀}` of a U-block field.
pub fn broken_norm_sq(problem: &Problem, u: &[f64]) -> Result<f64> {
    let o = problem.ops();
    let d = problem.dofs();
    let (ub, ud) = d.split_u(u);
    let j = d.jump(u);
    Ok(o.k1_b.quadratic(ub)? + o.k1_d.quadratic(ud)? + o.m_gamma.quadratic(&j)?)
}

/// B-side dofs that are not interface dofs, with their local numbering.
fn interior_b_map(problem: &Problem) -> (Vec<Option<usize>>, usize) {
    let d = problem.dofs();
    let mut on_gamma = vec![false; d.n_ub()];
    for p in d.jump_pairs() {
        on_gamma[p.u_b] = true;
    }
    let mut map = vec![None; d.n_ub()];
    let mut n = 0;
    for (i, g) in on_gamma.iter().enumerate() {
        if !g {
            map[i] = Some(n);
            n += 1;
        }
    }
    (map, n)
}

/// Discrete extension of `r` into `B` that is `K`-harmonic away from `Γ`
/// (equal to `r` on the interface dofs, zero on `∂Ω ∩ ∂Ω^B`).
pub fn harmonic_extension(problem: &Problem, k: &CsrMatrix, r: &[f64], tol: f64) -> Result<Vec<f64>> {
    let d = problem.dofs();
    let mut ext = vec![0.0; d.n_ub()];
    for (p, &rk) in d.jump_pairs().iter().zip(r) {
        ext[p.u_b] = rk;
    }
    let (map, n) = interior_b_map(problem);
    if n == 0 {
        return Ok(ext);
    }
    let kr = k.spmv(&ext)?;
    let mut rhs = vec![0.0; n];
    for (i, m) in map.iter().enumerate() {
        if let Some(l) = m {
            rhs[*l] = -kr[i];
        }
    }
    let kii = k.congruence_by_map(&map, n);
    let x = cg_solve(&LinearSystem::new(&kii, &rhs, tol)?, Preconditioner::Jacobi)?.x;
    for (i, m) in map.iter().enumerate() {
        if let Some(l) = m {
            ext[i] = x[*l];
        }
    }
    Ok(ext)
}

/// `‖r‖²_{1/2,h} = ‖r‖²_{L²(Γ)} + ‖∇E_h r‖²_{L²(B)}` with `E_h` the discrete
/// harmonic extension.
pub fn half_norm_sq(problem: &Problem, r: &[f64], tol: f64) -> Result<f64> {
    let o = problem.ops();
    let ext = harmonic_extension(problem, &o.k1_b, r, tol)?;
    Ok(o.m_gamma.quadratic(r)? + o.k1_b.quadratic(&ext)?)
}

/// Single constrained solve: the D-side interface dofs are eliminated through
/// `U_D|Γ = U_B|Γ − r`, so `[W] = r` holds exactly.
pub fn solve_lifting(problem: &Problem, w: &[f64], r: &[f64], tol: f64) -> Result<LiftingSolution> {
    check_inputs(problem, w, r)?;
    let rhs = lifting_rhs(problem, w)?;
    let field = constrained_u_solve(problem, &rhs, r, tol)?;
    let o = problem.ops();
    Ok(LiftingSolution {
        norm_x_sq: broken_norm_sq(problem, &field)?,
        norm_w_sq: o.k1_b.quadratic(w)? + o.mass_b.quadratic(w)?,
        norm_r_sq: half_norm_sq(problem, r, tol)?,
        w: w.to_vec(),
        r: r.to_vec(),
        field,
    })
}

/// The two-stage construction with dense LU, kept as an independent check
/// of [`solve_lifting`].
///
/// Stage one takes `W̄₁` equal to `r` on the B-side interface dofs,
/// `(σ_i+σ_e)`-harmonic in `B` and zero in `D`, so `[W̄₁] = r`. Stage two
/// finds the jump-free `W̄₂` with
/// `a_U(W̄₂, φ) = −∫σ_i∇w·∇φ − ∫(σ_i+σ_e)∇W̄₁·∇φ` for all jump-free `φ`.
pub fn two_stage_lifting(problem: &Problem, w: &[f64], r: &[f64]) -> Result<Vec<f64>> {
    check_inputs(problem, w, r)?;
    let d = problem.dofs();
    let o = problem.ops();
    let k_b = o.a_i.linear_combination(1.0, &o.a_e, 1.0)?;

    let mut w1 = vec![0.0; d.n_u()];
    for (p, &rk) in d.jump_pairs().iter().zip(r) {
        w1[p.u_b] = rk;
    }
    let (imap, ni) = interior_b_map(problem);
    if ni > 0 {
        let kr = k_b.spmv(&w1[..d.n_ub()])?;
        let mut rhs = vec![0.0; ni];
        for (i, m) in imap.iter().enumerate() {
            if let Some(l) = m {
                rhs[*l] = -kr[i];
            }
        }
        let x = dense_solve(&k_b.congruence_by_map(&imap, ni).to_dense(), &rhs)?;
        for (i, m) in imap.iter().enumerate() {
            if let Some(l) = m {
                w1[i] = x[*l];
            }
        }
    }

    let ku = o.u_stiffness();
    let mut rhs = lifting_rhs(problem, w)?;
    let kw1 = ku.spmv(&w1)?;
    for (x, k) in rhs.iter_mut().zip(&kw1) {
        *x -= k;
    }
    let (map, nr) = merged_jump_map(d, 0);
    let mut reduced_rhs = vec![0.0; nr];
    for (i, m) in map.iter().enumerate() {
        if let Some(l) = m {
            reduced_rhs[*l] += rhs[i];
        }
    }
    let y = dense_solve(&ku.congruence_by_map(&map, nr).to_dense(), &reduced_rhs)?;
    Ok(w1.iter().zip(&map).map(|(a, m)| a + m.map_or(0.0, |l| y[l])).collect())
}
