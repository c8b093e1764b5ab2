use crate::error::{Error, Result};
use crate::sparse_linalg::{cg_solve, norm2, LinearSystem, Preconditioner};
use crate::stepper::{
    constrained_u_solve, run, run_with, Field, Problem, SourceSet, State, StepLoads, StepOperator, StepperConfig,
    Trajectory,
};

/// `ũ` on the B-side dofs: `(A_i + A_e) ũ = F1 − F2` with the natural
/// condition `(σ_i+σ_e)∇ũ·ν = 0` on `Γ` and `ũ = 0` on `∂Ω ∩ ∂Ω^B`.
/// It is extended by zero into `D`, so `[ũ] = ũ|_B` on `Γ`.
pub fn solve_source_shift(
    problem: &Problem,
    f1: &Option<Field>,
    f2: &Option<Field>,
    t: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    let l1 = problem.load_b(f1, t);
    let l2 = problem.load_b(f2, t);
    let rhs: Vec<f64> = l1.iter().zip(&l2).map(|(a, b)| a - b).collect();
    let o = problem.ops();
    let k = o.a_i.linear_combination(1.0, &o.a_e, 1.0)?;
    Ok(cg_solve(&LinearSystem::new(&k, &rhs, tol)?, Preconditioner::Jacobi)?.x)
}

/// `[ũ]` at the jump pairs.
pub fn shift_jump(problem: &Problem, shift: &[f64]) -> Vec<f64> {
    problem.dofs().jump_pairs().iter().map(|p| shift[p.u_b]).collect()
}

/// `q = −α([ũ]ⁿ⁺¹ − [ũ]ⁿ)/dt − β[ũ]ⁿ⁺¹`, nodewise on `Γ`.
pub fn interface_charge_source(jump_prev: &[f64], jump_next: &[f64], alpha: f64, beta: f64, dt: f64) -> Vec<f64> {
    jump_prev
        .iter()
        .zip(jump_next)
        .map(|(p, n)| -alpha * (n - p) / dt - beta * n)
        .collect()
}

#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    /// `max_n ‖V_A − V_B‖ + ‖U_A − U_B‖`, Euclidean dof norms.
    pub max_discrepancy: f64,
    /// `max_discrepancy / max_n (‖V_A‖ + ‖U_A‖)`, or the absolute value when that is 0.
    pub relative: f64,
    pub direct: Trajectory,
    /// Shifted-scheme states with `U = u + ũ` already reconstructed.
    pub reconstructed: Vec<State>,
}

/// Runs the scheme on the original problem and on the shifted problem
/// (sources moved into `ũ` and the interface charge `q`), reconstructs
/// `V = v`, `U = u + ũ` and compares every time level. Requires the
/// ionic term to be off.
pub fn shifted_equivalence_check(
    problem: &Problem,
    config: &StepperConfig,
    sources: &SourceSet,
    v0: &dyn Fn([f64; 2]) -> f64,
    s0: &dyn Fn([f64; 2]) -> f64,
) -> Result<EquivalenceReport> {
    if config.ionic {
        return Err(Error::config(
            "the shifted problem is only equivalent with the ionic term off",
        ));
    }
    if !sources.is_physical() {
        return Err(Error::config("the shifted problem takes only f1 and f2 sources"));
    }
    let tol = config.tolerance;
    let d = problem.dofs();
    let mesh = problem.mesh();
    let zero_w = |_: [f64; 2]| 0.0;

    let direct_init = crate::stepper::initialize_state(problem, v0, s0, &zero_w, sources, tol)?;
    let direct = run(problem, config, sources, direct_init, 1)?;

    let shift_at = |t: f64| solve_source_shift(problem, &sources.f1, &sources.f2, t, tol);
    let shift0 = shift_at(0.0)?;
    let jump0 = shift_jump(problem, &shift0);
    let s0_nodal = d.interpolate_jump(mesh, s0);
    let r0: Vec<f64> = s0_nodal.iter().zip(&jump0).map(|(s, j)| s - j).collect();
    let v_init = d.interpolate_b(mesh, v0);
    let av = problem.ops().a_i.spmv(&v_init)?;
    let rhs0: Vec<f64> = (0..d.n_u()).map(|i| if i < d.n_ub() { -av[i] } else { 0.0 }).collect();
    let u_init = constrained_u_solve(problem, &rhs0, &r0, tol)?;
    let shifted_init = State {
        t: 0.0,
        v: v_init,
        u: u_init,
        w: vec![0.0; d.n_v()],
    };

    let op = StepOperator::new(problem, config)?;
    let mut shifts = vec![shift0];
    let mut prev_jump = jump0;
    let shifted = run_with(problem, config, shifted_init, 1, |state, k| {
        let t_next = (k + 1) as f64 * config.dt;
        let shift = shift_at(t_next)?;
        let jump = shift_jump(problem, &shift);
        let q = interface_charge_source(&prev_jump, &jump, config.alpha, config.beta, config.dt);
        let moments = problem.ops().m_gamma.spmv(&q)?;
        let u_load =
            crate::discretization::spread_interface_moments(d, &moments, crate::discretization::InterfaceTarget::Jump);
        let f1 = problem.load_b(&sources.f1, t_next);
        let a_shift = problem.ops().a_i.spmv(&shift)?;
        let v_load: Vec<f64> = f1.iter().zip(&a_shift).map(|(f, a)| f - a).collect();
        let loads = StepLoads { v: v_load, u: u_load };
        let (mut next, it) = op.advance(problem, state, &loads, false, tol)?;
        next.t = t_next;
        prev_jump = jump;
        shifts.push(shift);
        Ok((next, it))
    })?;

    let reconstructed: Vec<State> = shifted
        .snapshots
        .iter()
        .zip(&shifts)
        .map(|(s, sh)| {
            let mut u = s.u.clone();
            for (x, y) in u.iter_mut().zip(sh) {
                *x += y;
            }
            State { u, ..s.clone() }
        })
        .collect();

    let mut max_disc: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (a, b) in direct.snapshots.iter().zip(&reconstructed) {
        let dv: Vec<f64> = a.v.iter().zip(&b.v).map(|(x, y)| x - y).collect();
        let du: Vec<f64> = a.u.iter().zip(&b.u).map(|(x, y)| x - y).collect();
        max_disc = max_disc.max(norm2(&dv) + norm2(&du));
        scale = scale.max(norm2(&a.v) + norm2(&a.u));
    }
    Ok(EquivalenceReport {
        max_discrepancy: max_disc,
        relative: if scale > 0.0 { max_disc / scale } else { max_disc },
        direct,
        reconstructed,
    })
}
