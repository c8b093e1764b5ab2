use crate::discretization::assemble_vertex_mass;
use crate::mesh::Region;
use crate::stepper::{Field, Problem, SourceSet, Trajectory};

/// Data of a run as needed by the right side of the energy inequality.
pub struct EnergyData<'a> {
    pub sources: &'a SourceSet,
    pub v0: &'a dyn Fn([f64; 2]) -> f64,
    pub s0: &'a dyn Fn([f64; 2]) -> f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerRow {
    pub t: f64,
    /// `‖Vⁿ‖²_{L²(B)}`
    pub v_sq: f64,
    /// `‖∇Vⁿ‖² + ‖∇Uⁿ‖²_B + ‖∇Uⁿ‖²_D`
    pub grad_sq: f64,
    /// `‖[Uⁿ]‖²_{L²(Γ)}`
    pub jump_sq: f64,
}

/// Terms of
/// `sup‖Vⁿ‖² + Σdt(‖∇Vⁿ‖² + ‖∇Uⁿ‖²_B + ‖∇Uⁿ‖²_D) + sup‖[Uⁿ]‖²_Γ + Σdt‖[Uⁿ]‖²_Γ
///  ≤ C (‖f1‖² + ‖f2‖² + ‖v0‖² + ‖s0‖²_Γ + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub rows: Vec<LedgerRow>,
    pub sup_v_sq: f64,
    pub dissipation: f64,
    /// `Σ dt ‖∇Vⁿ‖²` alone.
    pub grad_v_sum: f64,
    pub sup_jump_sq: f64,
    pub jump_sum: f64,
    pub lhs: f64,
    /// Right-side data functional, including the constant 1.
    pub data: f64,
    /// `lhs / data`
    pub ratio: f64,
}

fn space_time_norm_sq(problem: &Problem, lumped: &[f64], f: &Option<Field>, times: &[f64], dt: f64) -> f64 {
    let Some(f) = f else { return 0.0 };
    let x = problem.mesh().vertices();
    times
        .iter()
        .map(|&t| dt * lumped.iter().zip(x).map(|(m, &p)| m * f(p, t).powi(2)).sum::<f64>())
        .sum()
}

/// Sums over `n ≥ 1`, suprema over `n ≥ 0`. Data norms use the vertex rule
/// at the step times.
pub fn energy_report(problem: &Problem, trajectory: &Trajectory, data: &EnergyData<'_>, dt: f64) -> EnergyReport {
    let all = std::iter::once(&trajectory.initial).chain(&trajectory.steps);
    let rows: Vec<LedgerRow> = all
        .map(|d| LedgerRow {
            t: d.t,
            v_sq: d.v_l2 * d.v_l2,
            grad_sq: d.grad_v_sq + d.grad_ub_sq + d.grad_ud_sq,
            jump_sq: d.jump_l2 * d.jump_l2,
        })
        .collect();
    let sup_v_sq = rows.iter().map(|r| r.v_sq).fold(0.0, f64::max);
    let sup_jump_sq = rows.iter().map(|r| r.jump_sq).fold(0.0, f64::max);
    let dissipation: f64 = rows[1..].iter().map(|r| dt * r.grad_sq).sum();
    let jump_sum: f64 = rows[1..].iter().map(|r| dt * r.jump_sq).sum();
    let grad_v_sum: f64 = trajectory.steps.iter().map(|d| dt * d.grad_v_sq).sum();
    let lhs = sup_v_sq + dissipation + sup_jump_sq + jump_sum;

    let mesh = problem.mesh();
    let lumped = assemble_vertex_mass(mesh, Region::B, true).diagonal();
    let times: Vec<f64> = trajectory.steps.iter().map(|d| d.t).collect();
    let f1 = space_time_norm_sq(problem, &lumped, &data.sources.f1, &times, dt);
    let f2 = space_time_norm_sq(problem, &lumped, &data.sources.f2, &times, dt);
    let v0: f64 = lumped
        .iter()
        .zip(mesh.vertices())
        .map(|(m, &p)| m * (data.v0)(p).powi(2))
        .sum();
    let s0_nodal = problem.dofs().interpolate_gamma(mesh, data.s0);
    let s0 = problem
        .ops()
        .m_gamma_vertices
        .quadratic(&s0_nodal)
        .expect("Γ samples match Γ mass");
    let data_sum = f1 + f2 + v0 + s0 + 1.0;
    EnergyReport {
        rows,
        sup_v_sq,
        dissipation,
        grad_v_sum,
        sup_jump_sq,
        jump_sum,
        lhs,
        data: data_sum,
        ratio: lhs / data_sum,
    }
}
