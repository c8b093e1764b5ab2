//! Manufactured solutions on the unit interval with `B = (0, s)`, `D = (s, 1)`.
//!
//! Oscillating family, `k = π/s`, `b(t) = ½e^{−t}`, `a(t) = (1 + b(t)(1−s))/s`:
//!
//! ```text
//! V   = e^{−t} sin(kx)         on B
//! U_B = a(t) x                 on B
//! U_D = b(t) (1 − x)           on D          [U] = a s − b(1−s) = 1
//! ```
//!
//! With `I_ion = κ V` (ionic slope `κ`, `h2 ≡ 0`) and `ν = −e_x`:
//!
//! ```text
//! f1 = (σ_i k² − 1 + κ) V      f2 = (κ − 1) V      f_d = 0
//! g1 = σ_i (k e^{−t} − a)      g2 = −σ_e a − σ_d b  q = β + σ_e a
//! ```
//!
//! Linear family (exactly representable, time independent), `c = 1`, `d = ½`:
//! `V = x`, `U_B = c x`, `U_D = d(1 − x)`, `f1 = f2 = κx`,
//! `g1 = −σ_i(1 + c)`, `g2 = −σ_e c − σ_d d`, `q = β(cs − d(1−s)) + σ_e c`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{build_interval_mesh, Mesh, Region};
use crate::model::{Conductivities, IonicModel};
use crate::stepper::{initialize_state, run, Field, Problem, SourceSet, State, StepperConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManufacturedKind {
    Oscillating,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedSolution {
    pub kind: ManufacturedKind,
    pub split: f64,
    pub sigma_i: f64,
    pub sigma_e: f64,
    pub sigma_d: f64,
    pub alpha: f64,
    pub beta: f64,
    /// `κ` in `I_ion = κ V`; `None` runs with the ionic term off.
    pub ionic_slope: Option<f64>,
}

impl ManufacturedSolution {
    pub fn oscillating() -> Self {
        Self {
            kind: ManufacturedKind::Oscillating,
            split: 0.5,
            sigma_i: 1.0,
            sigma_e: 1.0,
            sigma_d: 1.0,
            alpha: 1.0,
            beta: 1.0,
            ionic_slope: Some(1.0),
        }
    }

    pub fn linear() -> Self {
        Self {
            kind: ManufacturedKind::Linear,
            ..Self::oscillating()
        }
    }

    fn k(&self) -> f64 {
        PI / self.split
    }

    fn coefficients(&self, t: f64) -> (f64, f64) {
        match self.kind {
            ManufacturedKind::Oscillating => {
                let b = 0.5 * (-t).exp();
                ((1.0 + b * (1.0 - self.split)) / self.split, b)
            }
            ManufacturedKind::Linear => (1.0, 0.5),
        }
    }

    pub fn v(&self, x: f64, t: f64) -> f64 {
        match self.kind {
            ManufacturedKind::Oscillating => (-t).exp() * (self.k() * x).sin(),
            ManufacturedKind::Linear => x,
        }
    }

    pub fn u_b(&self, x: f64, t: f64) -> f64 {
        self.coefficients(t).0 * x
    }

    pub fn u_d(&self, x: f64, t: f64) -> f64 {
        self.coefficients(t).1 * (1.0 - x)
    }

    pub fn jump(&self, t: f64) -> f64 {
        let (a, b) = self.coefficients(t);
        a * self.split - b * (1.0 - self.split)
    }

    pub fn sources(&self) -> SourceSet {
        let m = *self;
        let kappa = m.ionic_slope.unwrap_or(0.0);
        let field = |f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>| -> Option<Field> {
            Some(Arc::new(move |x: [f64; 2], t: f64| f(x[0], t)))
        };
        match m.kind {
            ManufacturedKind::Oscillating => {
                let k2 = m.k() * m.k();
                SourceSet {
                    f1: field(Arc::new(move |x, t| (m.sigma_i * k2 - 1.0 + kappa) * m.v(x, t))),
                    f2: field(Arc::new(move |x, t| (kappa - 1.0) * m.v(x, t))),
                    f_d: None,
                    g_flux1: field(Arc::new(move |_, t| {
                        m.sigma_i * (m.k() * (-t).exp() - m.coefficients(t).0)
                    })),
                    g_flux2: field(Arc::new(move |_, t| {
                        let (a, b) = m.coefficients(t);
                        -m.sigma_e * a - m.sigma_d * b
                    })),
                    q_gamma: field(Arc::new(move |_, t| {
                        m.beta * m.jump(t) + m.sigma_e * m.coefficients(t).0
                    })),
                }
            }
            ManufacturedKind::Linear => SourceSet {
                f1: field(Arc::new(move |x, _| kappa * x)),
                f2: field(Arc::new(move |x, _| kappa * x)),
                f_d: None,
                g_flux1: field(Arc::new(move |_, _| -m.sigma_i * 2.0)),
                g_flux2: field(Arc::new(move |_, _| -m.sigma_e - 0.5 * m.sigma_d)),
                q_gamma: field(Arc::new(move |_, t| m.beta * m.jump(t) + m.sigma_e)),
            },
        }
    }

    pub fn problem(&self, n_b: usize, n_d: usize) -> Result<Problem> {
        let mesh = build_interval_mesh(n_b, n_d, self.split)?;
        let sigma = Conductivities::uniform(&mesh, self.sigma_i, self.sigma_e, self.sigma_d)?;
        let model = match self.ionic_slope {
            Some(k) => IonicModel::linear(k)?,
            None => IonicModel::zero(),
        };
        Problem::new(mesh, sigma, model)
    }

    pub fn stepper_config(&self, dt: f64, horizon: f64, tol: f64) -> StepperConfig {
        StepperConfig::new(dt, horizon, self.alpha, self.beta)
            .with_tolerance(tol)
            .with_ionic(self.ionic_slope.is_some())
    }

    pub fn initial_state(&self, problem: &Problem, tol: f64) -> Result<State> {
        let m = *self;
        initialize_state(
            problem,
            &move |x| m.v(x[0], 0.0),
            &move |_| m.jump(0.0),
            &|_| 0.0,
            &self.sources(),
            tol,
        )
    }

    /// `(‖V_h − V‖_{L²(B)}, ‖U_h − U‖_{L²(B)∪L²(D)})` at the state's time.
    pub fn errors(&self, problem: &Problem, state: &State) -> (f64, f64) {
        let d = problem.dofs();
        let mesh = problem.mesh();
        let t = state.t;
        let (ub, ud) = d.split_u(&state.u);
        let ev = l2_error(mesh, Region::B, &d.b_to_vertices(&state.v), |x| self.v(x[0], t));
        let eb = l2_error(mesh, Region::B, &d.b_to_vertices(ub), |x| self.u_b(x[0], t));
        let ed = l2_error(mesh, Region::D, &d.d_to_vertices(ud), |x| self.u_d(x[0], t));
        (ev, (eb * eb + ed * ed).sqrt())
    }
}

/// `‖u_h − u‖_{L²(region)}` for a P1 field given by vertex values, with
/// three-point Gauss per segment or edge-midpoint quadrature per triangle.
pub fn l2_error(mesh: &Mesh, region: Region, nodal: &[f64], exact: impl Fn([f64; 2]) -> f64) -> f64 {
    let mut sum = 0.0;
    for (c, cell) in mesh.cells().iter().enumerate() {
        if cell.region != region {
            continue;
        }
        let ids = &cell.vertices;
        let meas = mesh.cell_measure(c);
        let p = |i: usize| mesh.vertices()[ids[i]];
        if mesh.dim() == 1 {
            let g = (0.6f64).sqrt();
            for (xi, wt) in [(-g, 5.0 / 9.0), (0.0, 8.0 / 9.0), (g, 5.0 / 9.0)] {
                let lam = 0.5 * (1.0 + xi);
                let x = [p(0)[0] + lam * (p(1)[0] - p(0)[0]), 0.0];
                let uh = (1.0 - lam) * nodal[ids[0]] + lam * nodal[ids[1]];
                sum += 0.5 * meas * wt * (uh - exact(x)).powi(2);
            }
        } else {
            for (i, j) in [(0, 1), (1, 2), (2, 0)] {
                let x = [0.5 * (p(i)[0] + p(j)[0]), 0.5 * (p(i)[1] + p(j)[1])];
                let uh = 0.5 * (nodal[ids[i]] + nodal[ids[j]]);
                sum += meas / 3.0 * (uh - exact(x)).powi(2);
            }
        }
    }
    sum.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    /// Refine `h` with `dt ∝ h²`; rates measured in `h`.
    Spatial,
    /// Refine `dt` at fixed `h`; rates measured in `dt`.
    Temporal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmsLevel {
    pub n_b: usize,
    pub n_d: usize,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmsStudy {
    pub solution: ManufacturedSolution,
    pub ladder: Ladder,
    pub levels: Vec<MmsLevel>,
    pub horizon: f64,
    pub tolerance: f64,
}

impl MmsStudy {
    /// `n_b = n_d = n0·2^l`, `dt = dt_factor·h²`.
    pub fn spatial(solution: ManufacturedSolution, n0: usize, levels: usize, dt_factor: f64, horizon: f64) -> Self {
        let levels = (0..levels)
            .map(|l| {
                let n = n0 << l;
                let h = solution.split / n as f64;
                MmsLevel {
                    n_b: n,
                    n_d: n,
                    dt: dt_factor * h * h,
                }
            })
            .collect();
        Self {
            solution,
            ladder: Ladder::Spatial,
            levels,
            horizon,
            tolerance: 1e-12,
        }
    }

    /// `dt = dt0 / 2^l` on a fixed mesh with `n` cells per region.
    pub fn temporal(solution: ManufacturedSolution, n: usize, dt0: f64, levels: usize, horizon: f64) -> Self {
        let levels = (0..levels)
            .map(|l| MmsLevel {
                n_b: n,
                n_d: n,
                dt: dt0 / (1u64 << l) as f64,
            })
            .collect();
        Self {
            solution,
            ladder: Ladder::Temporal,
            levels,
            horizon,
            tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub dt: f64,
    pub steps: usize,
    pub error_v: f64,
    pub error_u: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub ladder: Ladder,
    pub rows: Vec<ConvergenceRow>,
    /// Observed orders between consecutive levels.
    pub rates_v: Vec<f64>,
    pub rates_u: Vec<f64>,
}

impl ConvergenceTable {
    pub fn min_rate_v(&self) -> f64 {
        self.rates_v.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn mms_convergence(study: &MmsStudy) -> Result<ConvergenceTable> {
    if study.levels.is_empty() {
        return Err(Error::config("convergence study needs at least one level"));
    }
    let mut rows = Vec::with_capacity(study.levels.len());
    for lvl in &study.levels {
        let sol = &study.solution;
        let problem = sol.problem(lvl.n_b, lvl.n_d)?;
        let cfg = sol.stepper_config(lvl.dt, study.horizon, study.tolerance);
        let init = sol.initial_state(&problem, study.tolerance)?;
        let traj = run(&problem, &cfg, &sol.sources(), init, 0)?;
        let (ev, eu) = sol.errors(&problem, &traj.final_state);
        rows.push(ConvergenceRow {
            h: sol.split / lvl.n_b as f64,
            dt: lvl.dt,
            steps: traj.steps.len(),
            error_v: ev,
            error_u: eu,
        });
    }
    let param = |r: &ConvergenceRow| match study.ladder {
        Ladder::Spatial => r.h,
        Ladder::Temporal => r.dt,
    };
    let rate = |e: fn(&ConvergenceRow) -> f64| -> Vec<f64> {
        rows.windows(2)
            .map(|w| (e(&w[0]) / e(&w[1])).ln() / (param(&w[0]) / param(&w[1])).ln())
            .collect()
    };
    let rates_v = rate(|r| r.error_v);
    let rates_u = rate(|r| r.error_u);
    Ok(ConvergenceTable {
        ladder: study.ladder,
        rows,
        rates_v,
        rates_u,
    })
}
