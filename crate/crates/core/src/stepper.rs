//! Semi-implicit time stepping for `(V, U, w)`.
//!
//! Each step first advances the gating variable exactly with `V` frozen, then
//! solves one symmetric block system for `(V⁺, U⁺)`: backward Euler on the
//! `V` mass term and on the interface term `α ∂t[U]`, implicit diffusion and
//! `β[U]`, explicit ionic current `I_ion(Vⁿ, w⁺)` with a lumped mass.
//!
//! ```text
//! (M/dt + A_i) V⁺ + A_i U_B⁺                          = M/dt Vⁿ + l_V
//! A_i V⁺ + (A_i + A_e) U_B⁺ ⊕ A_d U_D⁺ + c G U⁺       = α/dt G Uⁿ + l_U,   c = α/dt + β
//! ```
//!
//! `U` carries no volume time derivative; the system stays definite because
//! Dirichlet data anchors `B` and either Dirichlet data or `c G` anchors `D`.

use std::fmt;
use std::sync::Arc;

use crate::discretization::{
    assemble_gamma_vertex_mass, assemble_interface_jump_mass, assemble_interface_mass, assemble_mass,
    assemble_stiffness, assemble_unit_stiffness, Block, DofMap, InterfaceTarget,
};
use crate::discretization::{build_dof_map, interface_moments, spread_interface_moments};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Region};
use crate::model::{Conductivities, IonicModel};
use crate::sparse_linalg::{cg_solve_from, CsrMatrix, LinearSystem, Preconditioner};

/// Scalar field of space and time.
pub type Field = Arc<dyn Fn([f64; 2], f64) -> f64 + Send + Sync>;

/// Volume and interface sources. `None` means identically zero.
///
/// The physical model only uses `f1` and `f2`; `f_d`, the flux mismatches
/// and `q_gamma` exist for manufactured solutions and the shifted problem.
#[derive(Clone, Default)]
pub struct SourceSet {
    /// Intracellular stimulus on `B`.
    pub f1: Option<Field>,
    /// Extracellular stimulus on `B`.
    pub f2: Option<Field>,
    /// Volume source on `D`.
    pub f_d: Option<Field>,
    /// `σ_i∇u₁·ν` on `Γ`.
    pub g_flux1: Option<Field>,
    /// `σ_e∇u₂·ν − σ_d∇u_D·ν` on `Γ`.
    pub g_flux2: Option<Field>,
    /// Source in the interface law `α∂t[U] + β[U] = σ_e∇u₂·ν + q`.
    pub q_gamma: Option<Field>,
}

impl fmt::Debug for SourceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let on = |x: &Option<Field>| if x.is_some() { "set" } else { "zero" };
        f.debug_struct("SourceSet")
            .field("f1", &on(&self.f1))
            .field("f2", &on(&self.f2))
            .field("f_d", &on(&self.f_d))
            .field("g_flux1", &on(&self.g_flux1))
            .field("g_flux2", &on(&self.g_flux2))
            .field("q_gamma", &on(&self.q_gamma))
            .finish()
    }
}

impl SourceSet {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn stimulus(f1: Field, f2: Field) -> Self {
        Self {
            f1: Some(f1),
            f2: Some(f2),
            ..Self::default()
        }
    }

    /// True when only `f1`, `f2` are present.
    pub fn is_physical(&self) -> bool {
        self.f_d.is_none() && self.g_flux1.is_none() && self.g_flux2.is_none() && self.q_gamma.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    /// Resistive-capacitive interface law.
    Imperfect,
    /// `[U] = 0`: the two sides share their interface dofs.
    Perfect,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub dt: f64,
    pub horizon: f64,
    /// Interface capacitance per area.
    pub alpha: f64,
    /// Interface conductance per area.
    pub beta: f64,
    /// Relative residual target for CG.
    pub tolerance: f64,
    pub ionic: bool,
    pub coupling: Coupling,
}

impl StepperConfig {
    pub fn new(dt: f64, horizon: f64, alpha: f64, beta: f64) -> Self {
        Self {
            dt,
            horizon,
            alpha,
            beta,
            tolerance: 1e-10,
            ionic: true,
            coupling: Coupling::Imperfect,
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn with_ionic(mut self, on: bool) -> Self {
        self.ionic = on;
        self
    }

    pub fn with_coupling(mut self, coupling: Coupling) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::config(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.horizon >= 0.0) || !self.horizon.is_finite() {
            return Err(Error::config(format!("T must be >= 0, got {}", self.horizon)));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::config(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::config(format!("beta must be >= 0, got {}", self.beta)));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::config(format!(
                "solver tolerance must lie in (0,1), got {}",
                self.tolerance
            )));
        }
        Ok(())
    }

    /// Number of steps to reach `T`: `ceil(T/dt)`, with ratios within 1e−9 of
    /// an integer rounded.
    pub fn n_steps(&self) -> usize {
        let r = self.horizon / self.dt;
        let k = r.round();
        if (r - k).abs() <= 1e-9 * r.max(1.0) {
            k as usize
        } else {
            r.ceil() as usize
        }
    }

    /// `α/dt + β`
    pub fn interface_coefficient(&self) -> f64 {
        self.alpha / self.dt + self.beta
    }
}

/// Dynamic unknowns. `v` and `w` live on the V dofs, `u` on the U block.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
}

impl State {
    pub fn zero(dofs: &DofMap) -> Self {
        Self {
            t: 0.0,
            v: vec![0.0; dofs.n_v()],
            u: vec![0.0; dofs.n_u()],
            w: vec![0.0; dofs.n_v()],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.v.iter().chain(&self.u).chain(&self.w).all(|x| x.is_finite())
    }

    /// Intracellular potential `u₁ = V + U` on the B-side dofs.
    pub fn u1_b(&self) -> Vec<f64> {
        self.v.iter().zip(&self.u).map(|(v, u)| v + u).collect()
    }
}

/// Every matrix the schemes and diagnostics use, assembled once.
#[derive(Debug, Clone)]
pub struct Operators {
    /// Consistent mass on the V dofs.
    pub mass_b: CsrMatrix,
    /// Consistent mass on the U_D dofs.
    pub mass_d: CsrMatrix,
    /// Lumped mass on the V dofs.
    pub lumped_b: Vec<f64>,
    pub lumped_d: Vec<f64>,
    pub a_i: CsrMatrix,
    pub a_e: CsrMatrix,
    pub a_d: CsrMatrix,
    /// Unit-coefficient stiffness on the B-side and D-side dofs.
    pub k1_b: CsrMatrix,
    pub k1_d: CsrMatrix,
    /// `Jᵀ M_Γ J` on the U block.
    pub g: CsrMatrix,
    /// `M_Γ` on the jump pairs.
    pub m_gamma: CsrMatrix,
    /// `M_Γ` on every interface vertex.
    pub m_gamma_vertices: CsrMatrix,
}

impl Operators {
    pub fn assemble(mesh: &Mesh, dofs: &DofMap, sigma: &Conductivities) -> Result<Self> {
        Ok(Self {
            mass_b: assemble_mass(mesh, dofs, Region::B, false),
            mass_d: assemble_mass(mesh, dofs, Region::D, false),
            lumped_b: assemble_mass(mesh, dofs, Region::B, true).diagonal(),
            lumped_d: assemble_mass(mesh, dofs, Region::D, true).diagonal(),
            a_i: assemble_stiffness(mesh, dofs, &sigma.sigma_i, Block::VV)?,
            a_e: assemble_stiffness(mesh, dofs, &sigma.sigma_e, Block::UbUb)?,
            a_d: assemble_stiffness(mesh, dofs, &sigma.sigma_d, Block::UdUd)?,
            k1_b: assemble_unit_stiffness(mesh, dofs, Region::B),
            k1_d: assemble_unit_stiffness(mesh, dofs, Region::D),
            g: assemble_interface_jump_mass(mesh, dofs),
            m_gamma: assemble_interface_mass(mesh, dofs),
            m_gamma_vertices: assemble_gamma_vertex_mass(mesh, dofs),
        })
    }

    /// `(A_i + A_e) ⊕ A_d` on the U block.
    pub fn u_stiffness(&self) -> CsrMatrix {
        let nb = self.a_i.nrows();
        let nd = self.a_d.nrows();
        CsrMatrix::from_blocks(
            nb + nd,
            nb + nd,
            &[(0, 0, &self.a_i, 1.0), (0, 0, &self.a_e, 1.0), (nb, nb, &self.a_d, 1.0)],
        )
    }
}

/// Mesh, dof layout, coefficients, ionic model and assembled operators.
#[derive(Debug, Clone)]
pub struct Problem {
    mesh: Mesh,
    dofs: DofMap,
    sigma: Conductivities,
    ionic: IonicModel,
    ops: Operators,
}

impl Problem {
    pub fn new(mesh: Mesh, sigma: Conductivities, ionic: IonicModel) -> Result<Self> {
        for f in [&sigma.sigma_i, &sigma.sigma_e, &sigma.sigma_d] {
            if f.values().len() != mesh.n_cells() {
                return Err(Error::DimensionMismatch {
                    context: "conductivity field for this mesh",
                    expected: mesh.n_cells(),
                    actual: f.values().len(),
                });
            }
        }
        let dofs = build_dof_map(&mesh);
        let ops = Operators::assemble(&mesh, &dofs, &sigma)?;
        Ok(Self {
            mesh,
            dofs,
            sigma,
            ionic,
            ops,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn dofs(&self) -> &DofMap {
        &self.dofs
    }

    pub fn conductivities(&self) -> &Conductivities {
        &self.sigma
    }

    pub fn ionic(&self) -> &IonicModel {
        &self.ionic
    }

    pub fn ops(&self) -> &Operators {
        &self.ops
    }

    /// Vertex-rule volume load on the V dofs.
    pub fn load_b(&self, f: &Option<Field>, t: f64) -> Vec<f64> {
        match f {
            None => vec![0.0; self.dofs.n_v()],
            Some(f) => self
                .dofs
                .v_vertices()
                .iter()
                .zip(&self.ops.lumped_b)
                .map(|(&v, m)| f(self.mesh.vertices()[v], t) * m)
                .collect(),
        }
    }

    pub fn load_d(&self, f: &Option<Field>, t: f64) -> Vec<f64> {
        match f {
            None => vec![0.0; self.dofs.n_ud()],
            Some(f) => self
                .dofs
                .ud_vertices()
                .iter()
                .zip(&self.ops.lumped_d)
                .map(|(&v, m)| f(self.mesh.vertices()[v], t) * m)
                .collect(),
        }
    }

    /// `M_Γ g` on the jump pairs, `g` sampled at every interface vertex.
    pub fn interface_moments(&self, g: &Option<Field>, t: f64) -> Vec<f64> {
        match g {
            None => vec![0.0; self.dofs.n_jump()],
            Some(g) => {
                let samples = self.dofs.interpolate_gamma(&self.mesh, |x| g(x, t));
                interface_moments(&self.mesh, &self.dofs, &samples).expect("sample count matches Γ")
            }
        }
    }

    /// Source contributions `(l_V, l_U)` at time `t`, ionic term excluded.
    pub fn source_loads(&self, sources: &SourceSet, t: f64) -> StepLoads {
        let f1 = self.load_b(&sources.f1, t);
        let f2 = self.load_b(&sources.f2, t);
        let fd = self.load_d(&sources.f_d, t);
        let g1 = self.interface_moments(&sources.g_flux1, t);
        let g2 = self.interface_moments(&sources.g_flux2, t);
        let q = self.interface_moments(&sources.q_gamma, t);

        let trace1 = spread_interface_moments(&self.dofs, &g1, InterfaceTarget::BTrace);
        let g12: Vec<f64> = g1.iter().zip(&g2).map(|(a, b)| a + b).collect();
        let trace12 = spread_interface_moments(&self.dofs, &g12, InterfaceTarget::BTrace);
        let qg2: Vec<f64> = q.iter().zip(&g2).map(|(a, b)| a + b).collect();
        let jump = spread_interface_moments(&self.dofs, &qg2, InterfaceTarget::Jump);

        let v: Vec<f64> = f1.iter().zip(&trace1).map(|(f, g)| f - g).collect();
        let mut u = Vec::with_capacity(self.dofs.n_u());
        u.extend((0..self.dofs.n_ub()).map(|i| f1[i] - f2[i] - trace12[i]));
        u.extend(fd);
        for (x, j) in u.iter_mut().zip(&jump) {
            *x += j;
        }
        StepLoads { v, u }
    }

    /// `½VᵀMV`, `(α/2)[U]ᵀM_Γ[U]` and the gradient/jump norms of one state.
    pub fn diagnostics(&self, state: &State, alpha: f64, cg_iterations: usize) -> StepDiagnostics {
        let o = &self.ops;
        let vmv = o.mass_b.quadratic(&state.v).expect("state matches layout");
        let jump = self.dofs.jump(&state.u);
        let jj = o.m_gamma.quadratic(&jump).expect("jump matches layout");
        let (ub, ud) = self.dofs.split_u(&state.u);
        StepDiagnostics {
            t: state.t,
            v_l2: vmv.max(0.0).sqrt(),
            jump_l2: jj.max(0.0).sqrt(),
            energy_v: 0.5 * vmv,
            energy_jump: 0.5 * alpha * jj,
            energy: 0.5 * vmv + 0.5 * alpha * jj,
            cg_iterations,
            grad_v_sq: o.k1_b.quadratic(&state.v).expect("layout"),
            grad_ub_sq: o.k1_b.quadratic(ub).expect("layout"),
            grad_ud_sq: o.k1_d.quadratic(ud).expect("layout"),
        }
    }
}

/// Right-side contributions other than the previous-step terms.
#[derive(Debug, Clone, PartialEq)]
pub struct StepLoads {
    /// On the V dofs.
    pub v: Vec<f64>,
    /// On the U block.
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub t: f64,
    /// `‖V‖_{L²(B)}`
    pub v_l2: f64,
    /// `‖[U]‖_{L²(Γ)}`
    pub jump_l2: f64,
    pub energy_v: f64,
    pub energy_jump: f64,
    pub energy: f64,
    pub cg_iterations: usize,
    /// `‖∇V‖²_{L²(B)}`
    pub grad_v_sq: f64,
    /// `‖∇U‖²_{L²(B)}`
    pub grad_ub_sq: f64,
    /// `‖∇U‖²_{L²(D)}`
    pub grad_ud_sq: f64,
}

/// Index map that merges each D-side interface dof into its B-side partner.
/// `offset` dofs before the U block are kept as they are.
pub fn merged_jump_map(dofs: &DofMap, offset: usize) -> (Vec<Option<usize>>, usize) {
    let n = offset + dofs.n_u();
    let mut partner = vec![None; dofs.n_u()];
    for p in dofs.jump_pairs() {
        partner[p.u_d] = Some(p.u_b);
    }
    let mut map = vec![None; n];
    let mut next = 0;
    for i in 0..n {
        let merged = i.checked_sub(offset).and_then(|k| partner[k]);
        if merged.is_none() {
            map[i] = Some(next);
            next += 1;
        }
    }
    for (k, p) in partner.iter().enumerate() {
        if let Some(b) = p {
            map[offset + k] = map[offset + b];
        }
    }
    (map, next)
}

/// A symmetric system, optionally solved on a subspace given by an index map.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    matrix: CsrMatrix,
    map: Option<(Vec<Option<usize>>, usize)>,
    n_full: usize,
}

impl ReducedSystem {
    pub fn full(matrix: CsrMatrix) -> Self {
        let n_full = matrix.nrows();
        Self {
            matrix,
            map: None,
            n_full,
        }
    }

    pub fn merged(matrix: &CsrMatrix, map: Vec<Option<usize>>, n_reduced: usize) -> Self {
        let n_full = matrix.nrows();
        Self {
            matrix: matrix.congruence_by_map(&map, n_reduced),
            map: Some((map, n_reduced)),
            n_full,
        }
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Solves and returns the full-length solution and the CG iteration count.
    pub fn solve(&self, rhs: &[f64], guess: Option<&[f64]>, tol: f64) -> Result<(Vec<f64>, usize)> {
        if rhs.len() != self.n_full {
            return Err(Error::DimensionMismatch {
                context: "system right side",
                expected: self.n_full,
                actual: rhs.len(),
            });
        }
        match &self.map {
            None => {
                let sys = LinearSystem::new(&self.matrix, rhs, tol)?;
                let sol = cg_solve_from(&sys, Preconditioner::Jacobi, guess)?;
                Ok((sol.x, sol.iterations))
            }
            Some((map, nr)) => {
                let mut r = vec![0.0; *nr];
                let mut g = vec![f64::NAN; *nr];
                for (i, m) in map.iter().enumerate() {
                    if let Some(k) = m {
                        r[*k] += rhs[i];
                        if let Some(x) = guess {
                            if g[*k].is_nan() {
                                g[*k] = x[i];
                            }
                        }
                    }
                }
                let sys = LinearSystem::new(&self.matrix, &r, tol)?;
                let sol = cg_solve_from(&sys, Preconditioner::Jacobi, guess.map(|_| g.as_slice()))?;
                let x = map.iter().map(|m| m.map_or(0.0, |k| sol.x[k])).collect();
                Ok((x, sol.iterations))
            }
        }
    }
}

/// The step matrix for fixed `dt`, `α`, `β` and coupling.
#[derive(Debug, Clone)]
pub struct StepOperator {
    system: ReducedSystem,
    dt: f64,
    alpha: f64,
    n_v: usize,
}

impl StepOperator {
    pub fn new(problem: &Problem, config: &StepperConfig) -> Result<Self> {
        config.validate()?;
        let o = problem.ops();
        let d = problem.dofs();
        let (nv, nu) = (d.n_v(), d.n_u());
        let c = config.interface_coefficient();
        let ku = o.u_stiffness();
        let mdt = o.mass_b.scaled(1.0 / config.dt);
        let k = CsrMatrix::from_blocks(
            nv + nu,
            nv + nu,
            &[
                (0, 0, &mdt, 1.0),
                (0, 0, &o.a_i, 1.0),
                (0, nv, &o.a_i, 1.0),
                (nv, 0, &o.a_i, 1.0),
                (nv, nv, &ku, 1.0),
                (nv, nv, &o.g, c),
            ],
        );
        let system = match config.coupling {
            Coupling::Imperfect => ReducedSystem::full(k),
            Coupling::Perfect => {
                let (map, nr) = merged_jump_map(d, nv);
                ReducedSystem::merged(&k, map, nr)
            }
        };
        Ok(Self {
            system,
            dt: config.dt,
            alpha: config.alpha,
            n_v: nv,
        })
    }

    /// The matrix actually handed to CG (reduced under perfect coupling).
    pub fn matrix(&self) -> &CsrMatrix {
        self.system.matrix()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// One step with explicit loads: gating update, ionic term, block solve.
    /// Returns the new state and the CG iteration count.
    pub fn advance(
        &self,
        problem: &Problem,
        state: &State,
        loads: &StepLoads,
        ionic: bool,
        tol: f64,
    ) -> Result<(State, usize)> {
        let o = problem.ops();
        let model = problem.ionic();
        let nv = self.n_v;
        if state.v.len() != nv || state.w.len() != nv || state.u.len() != problem.dofs().n_u() {
            return Err(Error::DimensionMismatch {
                context: "state for this problem",
                expected: nv,
                actual: state.v.len(),
            });
        }
        let w_next: Vec<f64> = state
            .w
            .iter()
            .zip(&state.v)
            .map(|(&w, &v)| model.gating_exact_step(w, v, self.dt))
            .collect();

        let mv = o.mass_b.spmv(&state.v)?;
        let gu = o.g.spmv(&state.u)?;
        let mut rhs = Vec::with_capacity(nv + state.u.len());
        for i in 0..nv {
            let mut r = mv[i] / self.dt + loads.v[i];
            if ionic {
                r -= o.lumped_b[i] * model.ionic_current(state.v[i], w_next[i]);
            }
            rhs.push(r);
        }
        rhs.extend(gu.iter().zip(&loads.u).map(|(g, l)| self.alpha / self.dt * g + l));
        if rhs.iter().any(|x| !x.is_finite()) {
            return Err(Error::NumericBreakdown(format!(
                "non-finite right side at t = {}",
                state.t
            )));
        }

        let mut guess = state.v.clone();
        guess.extend_from_slice(&state.u);
        let (x, iterations) = self.system.solve(&rhs, Some(&guess), tol)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericBreakdown(format!(
                "non-finite solution at t = {}",
                state.t + self.dt
            )));
        }
        let (v, u) = x.split_at(nv);
        Ok((
            State {
                t: state.t + self.dt,
                v: v.to_vec(),
                u: u.to_vec(),
                w: w_next,
            },
            iterations,
        ))
    }
}

/// One step of the scheme with sources evaluated at `t + dt`.
pub fn step(problem: &Problem, state: &State, config: &StepperConfig, sources: &SourceSet) -> Result<State> {
    let op = StepOperator::new(problem, config)?;
    let loads = problem.source_loads(sources, state.t + config.dt);
    Ok(op.advance(problem, state, &loads, config.ionic, config.tolerance)?.0)
}

/// Solves the U equations with `[U] = r` on the jump pairs for a given right
/// side on the U block. Test functions are restricted to `[φ] = 0`, so the
/// interface law does not enter.
pub fn constrained_u_solve(problem: &Problem, rhs_u: &[f64], r: &[f64], tol: f64) -> Result<Vec<f64>> {
    let d = problem.dofs();
    if r.len() != d.n_jump() {
        return Err(Error::DimensionMismatch {
            context: "prescribed jump",
            expected: d.n_jump(),
            actual: r.len(),
        });
    }
    if rhs_u.len() != d.n_u() {
        return Err(Error::DimensionMismatch {
            context: "U right side",
            expected: d.n_u(),
            actual: rhs_u.len(),
        });
    }
    let ku = problem.ops().u_stiffness();
    // U = P y − E r with E placing r on the D-side partners
    let mut shift = vec![0.0; d.n_u()];
    for (p, &rk) in d.jump_pairs().iter().zip(r) {
        shift[p.u_d] = -rk;
    }
    let ks = ku.spmv(&shift)?;
    let b: Vec<f64> = rhs_u.iter().zip(&ks).map(|(b, k)| b - k).collect();
    let (map, nr) = merged_jump_map(d, 0);
    let sys = ReducedSystem::merged(&ku, map, nr);
    let (mut u, _) = sys.solve(&b, None, tol)?;
    for (x, s) in u.iter_mut().zip(&shift) {
        *x += s;
    }
    Ok(u)
}

/// `V(0)` by nodal interpolation of `v0`; `U(0)` from the elliptic U
/// equations at `t = 0` with `V = V(0)` and `[U(0)] = s0`; `w = w_in`.
pub fn initialize_state(
    problem: &Problem,
    v0: &dyn Fn([f64; 2]) -> f64,
    s0: &dyn Fn([f64; 2]) -> f64,
    w_in: &dyn Fn([f64; 2]) -> f64,
    sources: &SourceSet,
    tol: f64,
) -> Result<State> {
    let d = problem.dofs();
    let mesh = problem.mesh();
    let v = d.interpolate_b(mesh, v0);
    let s = d.interpolate_jump(mesh, s0);
    let w = d.interpolate_b(mesh, w_in);
    if let Some(i) = w.iter().position(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::config(format!(
            "initial gating value {} at V dof {i} outside [0,1]",
            w[i]
        )));
    }
    let loads = problem.source_loads(sources, 0.0);
    initial_state_from(problem, v, &s, w, &loads.u, tol)
}

/// Same as [`initialize_state`] with dof vectors and an explicit U load
/// (the interface-law part of the load is ignored since `[φ] = 0`).
pub fn initial_state_from(
    problem: &Problem,
    v: Vec<f64>,
    s: &[f64],
    w: Vec<f64>,
    load_u: &[f64],
    tol: f64,
) -> Result<State> {
    let d = problem.dofs();
    if v.len() != d.n_v() || w.len() != d.n_v() {
        return Err(Error::DimensionMismatch {
            context: "initial V or w",
            expected: d.n_v(),
            actual: v.len(),
        });
    }
    let av = problem.ops().a_i.spmv(&v)?;
    let mut rhs = load_u.to_vec();
    for (x, a) in rhs.iter_mut().zip(&av) {
        *x -= a;
    }
    let u = constrained_u_solve(problem, &rhs, s, tol)?;
    Ok(State { t: 0.0, v, u, w })
}

/// Run output: snapshots and one diagnostics record per step.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Initial state, every `cadence`-th state, and the final state.
    pub snapshots: Vec<State>,
    pub initial: StepDiagnostics,
    pub steps: Vec<StepDiagnostics>,
    pub final_state: State,
}

impl Trajectory {
    pub fn energies(&self) -> Vec<f64> {
        std::iter::once(self.initial.energy)
            .chain(self.steps.iter().map(|d| d.energy))
            .collect()
    }
}

/// Advances `initial` for `ceil(T/dt)` steps. `cadence = 0` keeps only the
/// initial and final states.
pub fn run(
    problem: &Problem,
    config: &StepperConfig,
    sources: &SourceSet,
    initial: State,
    cadence: usize,
) -> Result<Trajectory> {
    let op = StepOperator::new(problem, config)?;
    let t0 = initial.t;
    run_with(problem, config, initial, cadence, |state, k| {
        let t_next = t0 + (k + 1) as f64 * config.dt;
        let loads = problem.source_loads(sources, t_next);
        let (mut next, it) = op.advance(problem, state, &loads, config.ionic, config.tolerance)?;
        next.t = t_next;
        Ok((next, it))
    })
}

/// Generic time loop used by [`run`] and the shifted scheme. `advance`
/// receives the current state and step index.
pub fn run_with(
    problem: &Problem,
    config: &StepperConfig,
    initial: State,
    cadence: usize,
    mut advance: impl FnMut(&State, usize) -> Result<(State, usize)>,
) -> Result<Trajectory> {
    config.validate()?;
    if !initial.is_finite() {
        return Err(Error::NumericBreakdown("initial state is not finite".into()));
    }
    let n = config.n_steps();
    let init_diag = problem.diagnostics(&initial, config.alpha, 0);
    let mut snapshots = vec![initial.clone()];
    let mut steps = Vec::with_capacity(n);
    let mut state = initial;
    for k in 0..n {
        let (next, it) = advance(&state, k)?;
        if !next.is_finite() {
            return Err(Error::NumericBreakdown(format!(
                "state became non-finite at step {}",
                k + 1
            )));
        }
        steps.push(problem.diagnostics(&next, config.alpha, it));
        state = next;
        if cadence > 0 && (k + 1) % cadence == 0 && k + 1 < n {
            snapshots.push(state.clone());
        }
    }
    if n > 0 {
        snapshots.push(state.clone());
    }
    Ok(Trajectory {
        snapshots,
        initial: init_diag,
        steps,
        final_state: state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_interval_mesh;

    fn problem_1d(nb: usize, nd: usize) -> Problem {
        let mesh = build_interval_mesh(nb, nd, 0.5).unwrap();
        let sigma = Conductivities::uniform(&mesh, 1.0, 1.0, 1.0).unwrap();
        Problem::new(mesh, sigma, IonicModel::zero()).unwrap()
    }

    #[test]
    fn step_count_rounds_near_integers() {
        assert_eq!(StepperConfig::new(0.1, 0.3, 1.0, 1.0).n_steps(), 3);
        assert_eq!(StepperConfig::new(0.1, 0.35, 1.0, 1.0).n_steps(), 4);
        assert_eq!(StepperConfig::new(0.1, 0.0, 1.0, 1.0).n_steps(), 0);
    }

    #[test]
    fn config_rejects_bad_values() {
        assert!(StepperConfig::new(0.0, 1.0, 1.0, 1.0).validate().is_err());
        assert!(StepperConfig::new(0.1, 1.0, 0.0, 1.0).validate().is_err());
        assert!(StepperConfig::new(0.1, 1.0, 1.0, -1.0).validate().is_err());
        assert!(StepperConfig::new(0.1, 1.0, 1.0, 0.0).validate().is_ok());
    }

    #[test]
    fn merged_map_shares_interface_dofs() {
        let p = problem_1d(2, 2);
        let (map, n) = merged_jump_map(p.dofs(), 2);
        let pair = p.dofs().jump_pairs()[0];
        assert_eq!(n, 2 + p.dofs().n_u() - 1);
        assert_eq!(map[2 + pair.u_b], map[2 + pair.u_d]);
    }

    #[test]
    fn zero_data_stays_zero() {
        let p = problem_1d(3, 3);
        let cfg = StepperConfig::new(0.1, 0.5, 1.0, 1.0);
        let traj = run(&p, &cfg, &SourceSet::zero(), State::zero(p.dofs()), 1).unwrap();
        assert_eq!(traj.steps.len(), 5);
        assert!(traj.final_state.v.iter().chain(&traj.final_state.u).all(|&x| x == 0.0));
    }

    #[test]
    fn unit_jump_initial_field_by_hand() {
        // B = (0,.5) and D = (.5,1), one cell each: unknowns U_B(.5), U_D(.5)
        // with U_B − U_D = 1. Minimizing ½(2/h)U_B² + ½(1/h)U_D²:
        // 2 U_B + U_D = 0 → U_B = 1/3, U_D = −2/3.
        let p = problem_1d(1, 1);
        let s = initialize_state(&p, &|_| 0.0, &|_| 1.0, &|_| 0.0, &SourceSet::zero(), 1e-14).unwrap();
        assert!((s.u[0] - 1.0 / 3.0).abs() < 1e-12, "{:?}", s.u);
        assert!((s.u[1] + 2.0 / 3.0).abs() < 1e-12, "{:?}", s.u);
    }
}
