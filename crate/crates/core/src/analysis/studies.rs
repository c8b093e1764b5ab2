use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::energy::{energy_report, EnergyData};
use crate::error::{Error, Result};
use crate::mesh::build_split_rectangle_mesh;
use crate::model::{Conductivities, IonicModel};
use crate::sparse_linalg::CsrMatrix;
use crate::stepper::{initialize_state, run, Coupling, Field, Problem, SourceSet, State, StepOperator, StepperConfig};

/// Smooth random data: a few sine/cosine modes with random amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomData {
    f1: Vec<[f64; 5]>,
    f2: Vec<[f64; 5]>,
    v0: Vec<[f64; 3]>,
    s0: [f64; 3],
}

fn modes<const N: usize>(rng: &mut ChaCha8Rng, count: usize, amp: f64) -> Vec<[f64; N]> {
    (0..count)
        .map(|_| {
            let mut m = [0.0; N];
            m[0] = rng.gen_range(-amp..amp);
            m[1] = rng.gen_range(1..=3) as f64;
            m[2] = rng.gen_range(0..=2) as f64;
            for x in m.iter_mut().skip(3) {
                *x = rng.gen_range(0.0..2.0 * PI);
            }
            m
        })
        .collect()
}

impl RandomData {
    pub fn sample(rng: &mut ChaCha8Rng) -> Self {
        Self {
            f1: modes(rng, 3, 2.0),
            f2: modes(rng, 3, 2.0),
            v0: modes(rng, 3, 1.0),
            s0: [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.5..0.5),
            ],
        }
    }

    /// Independent data sets from one seed.
    pub fn batch(seed: u64, count: usize) -> Vec<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| Self::sample(&mut rng)).collect()
    }

    fn source(m: &[[f64; 5]]) -> Field {
        let m = m.to_vec();
        Arc::new(move |x: [f64; 2], t: f64| {
            m.iter()
                .map(|c| c[0] * (c[1] * PI * x[0]).sin() * (c[2] * PI * x[1]).cos() * (2.0 * PI * t + c[3]).cos())
                .sum()
        })
    }

    pub fn sources(&self) -> SourceSet {
        SourceSet::stimulus(Self::source(&self.f1), Self::source(&self.f2))
    }

    pub fn v0(&self) -> impl Fn([f64; 2]) -> f64 + Send + Sync + 'static {
        let m = self.v0.clone();
        move |x: [f64; 2]| {
            m.iter()
                .map(|c| c[0] * (c[1] * PI * x[0]).sin() * (c[2] * PI * x[1]).cos())
                .sum()
        }
    }

    pub fn s0(&self) -> impl Fn([f64; 2]) -> f64 + Send + Sync + 'static {
        let s = self.s0;
        move |x: [f64; 2]| s[0] + s[1] * (PI * x[1]).cos() + s[2] * (2.0 * PI * x[1]).cos()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyStudyConfig {
    /// `nx = ny` of the split-rectangle meshes, coarsest first.
    pub mesh_sizes: Vec<usize>,
    pub split: f64,
    pub datasets: usize,
    pub seed: u64,
    pub dt: f64,
    pub horizon: f64,
    pub alpha: f64,
    pub beta: f64,
    pub sigma: [f64; 3],
    pub tolerance: f64,
}

impl Default for EnergyStudyConfig {
    fn default() -> Self {
        Self {
            mesh_sizes: vec![8, 16],
            split: 0.5,
            datasets: 20,
            seed: 7,
            dt: 1e-2,
            horizon: 1.0,
            alpha: 1.0,
            beta: 1.0,
            sigma: [1.0, 1.0, 1.0],
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyStudyResult {
    /// `ratios[mesh][dataset]`
    pub ratios: Vec<Vec<f64>>,
    /// Same layout, `Σdt‖∇Vⁿ‖²` over the data functional.
    pub grad_v_ratios: Vec<Vec<f64>>,
    /// Largest ratio on the coarsest mesh.
    pub calibrated: f64,
    pub max_ratio: Vec<f64>,
}

impl EnergyStudyResult {
    /// Every refined-mesh ratio is at most `factor` times the calibrated constant.
    pub fn within(&self, factor: f64) -> bool {
        self.max_ratio.iter().all(|&m| m <= factor * self.calibrated)
    }
}

/// Runs the scheme with the default ionic model on random data and records
/// the energy-inequality ratio for every mesh and data set.
pub fn energy_study(cfg: &EnergyStudyConfig) -> Result<EnergyStudyResult> {
    if cfg.mesh_sizes.is_empty() || cfg.datasets == 0 {
        return Err(Error::config("energy study needs at least one mesh and one data set"));
    }
    let data = RandomData::batch(cfg.seed, cfg.datasets);
    let stepper = StepperConfig::new(cfg.dt, cfg.horizon, cfg.alpha, cfg.beta).with_tolerance(cfg.tolerance);
    let mut ratios = Vec::new();
    let mut grad = Vec::new();
    for &n in &cfg.mesh_sizes {
        let mesh = build_split_rectangle_mesh(n, n, cfg.split)?;
        let sigma = Conductivities::uniform(&mesh, cfg.sigma[0], cfg.sigma[1], cfg.sigma[2])?;
        let problem = Problem::new(mesh, sigma, IonicModel::default_hh())?;
        let mut row = Vec::new();
        let mut grow = Vec::new();
        for d in &data {
            let sources = d.sources();
            let (v0, s0) = (d.v0(), d.s0());
            let init = initialize_state(&problem, &v0, &s0, &|_| 0.0, &sources, cfg.tolerance)?;
            let traj = run(&problem, &stepper, &sources, init, 0)?;
            let rep = energy_report(
                &problem,
                &traj,
                &EnergyData {
                    sources: &sources,
                    v0: &v0,
                    s0: &s0,
                },
                cfg.dt,
            );
            row.push(rep.ratio);
            grow.push(rep.grad_v_sum / rep.data);
        }
        ratios.push(row);
        grad.push(grow);
    }
    let max_ratio: Vec<f64> = ratios.iter().map(|r| r.iter().copied().fold(0.0, f64::max)).collect();
    Ok(EnergyStudyResult {
        calibrated: max_ratio[0],
        ratios,
        grad_v_ratios: grad,
        max_ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityRow {
    pub delta: f64,
    pub dt: f64,
    /// `sup_n ‖ΔVⁿ‖_{L²} / δ`, so at least 1 since `‖ΔV⁰‖ = δ`.
    pub amplification: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub rows: Vec<StabilityRow>,
    /// Two runs with identical data produced identical states bit for bit.
    pub identical_runs_bitwise: bool,
    /// `exp(C_I T)` from the declared Lipschitz constants, for reference.
    pub gronwall_bound: f64,
}

impl StabilityReport {
    pub fn max_amplification(&self) -> f64 {
        self.rows.iter().map(|r| r.amplification).fold(0.0, f64::max)
    }

    /// For each δ, amplification at the coarse dt over the fine one.
    pub fn dt_ratios(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for r in &self.rows {
            if let Some(fine) = self
                .rows
                .iter()
                .filter(|o| o.delta == r.delta && o.dt < r.dt)
                .min_by(|a, b| a.dt.total_cmp(&b.dt))
            {
                if fine.amplification > 0.0 {
                    out.push(r.amplification / fine.amplification);
                }
            }
        }
        out
    }
}

pub struct StabilityInput<'a> {
    pub problem: &'a Problem,
    pub config: StepperConfig,
    pub sources: &'a SourceSet,
    pub v0: &'a dyn Fn([f64; 2]) -> f64,
    pub s0: &'a dyn Fn([f64; 2]) -> f64,
    /// Direction of the perturbation; normalized to unit `L²(B)` norm.
    pub perturbation: &'a dyn Fn([f64; 2]) -> f64,
    pub deltas: Vec<f64>,
    /// Time steps to try, e.g. `[dt, dt/2]`.
    pub dts: Vec<f64>,
}

/// Paired runs from `v0` and `v0 + δ p`; reports `sup‖ΔVⁿ‖/δ`.
pub fn stability_study(input: &StabilityInput<'_>) -> Result<StabilityReport> {
    let p = input.problem;
    let d = p.dofs();
    let mesh = p.mesh();
    let tol = input.config.tolerance;
    let mass = &p.ops().mass_b;
    let mut dir = d.interpolate_b(mesh, input.perturbation);
    let nrm = mass.quadratic(&dir)?.sqrt();
    if !(nrm > 0.0) {
        return Err(Error::config("stability perturbation vanishes on the V dofs"));
    }
    dir.iter_mut().for_each(|x| *x /= nrm);

    let base = initialize_state(p, input.v0, input.s0, &|_| 0.0, input.sources, tol)?;
    let mut rows = Vec::new();
    let mut identical = true;
    for &dt in &input.dts {
        let cfg = StepperConfig { dt, ..input.config };
        let reference = run(p, &cfg, input.sources, base.clone(), 1)?;
        let again = run(p, &cfg, input.sources, base.clone(), 1)?;
        identical &= bitwise_equal(&reference.snapshots, &again.snapshots);
        for &delta in &input.deltas {
            if delta == 0.0 {
                rows.push(StabilityRow {
                    delta,
                    dt,
                    amplification: 0.0,
                });
                continue;
            }
            let v: Vec<f64> = base.v.iter().zip(&dir).map(|(v, e)| v + delta * e).collect();
            let s = d.interpolate_jump(mesh, input.s0);
            let load = p.source_loads(input.sources, 0.0);
            let init = crate::stepper::initial_state_from(p, v, &s, base.w.clone(), &load.u, tol)?;
            let pert = run(p, &cfg, input.sources, init, 1)?;
            let amp = sup_difference(mass, &reference.snapshots, &pert.snapshots)? / delta;
            rows.push(StabilityRow {
                delta,
                dt,
                amplification: amp,
            });
        }
    }
    let horizon = input.config.horizon;
    let c = if input.config.ionic {
        p.ionic().composed_lipschitz_bound(horizon, input.config.dt)
    } else {
        0.0
    };
    Ok(StabilityReport {
        rows,
        identical_runs_bitwise: identical,
        gronwall_bound: (c * horizon).exp(),
    })
}

fn bitwise_equal(a: &[State], b: &[State]) -> bool {
    let bits = |s: &State| -> Vec<u64> { s.v.iter().chain(&s.u).chain(&s.w).map(|x| x.to_bits()).collect() };
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| bits(x) == bits(y))
}

fn sup_difference(mass: &CsrMatrix, a: &[State], b: &[State]) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        let dv: Vec<f64> = x.v.iter().zip(&y.v).map(|(p, q)| p - q).collect();
        sup = sup.max(mass.quadratic(&dv)?.max(0.0).sqrt());
    }
    Ok(sup)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaStudyConfig {
    pub betas: Vec<f64>,
    pub alpha: f64,
    /// Largest time step; smaller ones are used where `α/β` requires it.
    pub dt_max: f64,
    /// The step is at most `layer_resolution · α/β`, to resolve the
    /// initial relaxation of the jump.
    pub layer_resolution: f64,
    pub horizon: f64,
    pub tolerance: f64,
}

impl Default for BetaStudyConfig {
    fn default() -> Self {
        Self {
            betas: vec![10.0, 100.0, 1000.0, 10000.0],
            alpha: 1.0,
            dt_max: 1e-2,
            layer_resolution: 0.1,
            horizon: 0.5,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaRow {
    pub beta: f64,
    pub dt: f64,
    /// `‖[U]‖_{L²(Γ×(0,T))}`
    pub jump_norm: f64,
    /// `‖U_β − U_perfect‖_{L²(0,T; L²(Ω))}`
    pub distance_to_perfect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaStudyResult {
    pub rows: Vec<BetaRow>,
    /// Least-squares slope of `log ‖[U]‖` against `log β`.
    pub slope: f64,
}

impl BetaStudyResult {
    pub fn distances_non_increasing(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].distance_to_perfect <= w[0].distance_to_perfect)
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::config("a log-log slope needs at least two points"));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::config("a log-log slope needs positive values"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::config("a log-log slope needs distinct abscissae"));
    }
    Ok(sxy / sxx)
}

/// For each β, runs the imperfect and the perfectly coupled scheme side by
/// side with the same step and data, accumulating `‖[U]‖` and the distance
/// between the two `U` fields.
pub fn beta_limit_study(
    problem: &Problem,
    cfg: &BetaStudyConfig,
    sources: &SourceSet,
    v0: &dyn Fn([f64; 2]) -> f64,
    s0: &dyn Fn([f64; 2]) -> f64,
) -> Result<BetaStudyResult> {
    if cfg.betas.len() < 2 {
        return Err(Error::config(
            "beta study needs at least two beta values to fit a slope",
        ));
    }
    let d = problem.dofs();
    let o = problem.ops();
    let (nb, nd) = (d.n_ub(), d.n_ud());
    let mass_u = CsrMatrix::from_blocks(nb + nd, nb + nd, &[(0, 0, &o.mass_b, 1.0), (nb, nb, &o.mass_d, 1.0)]);
    let tol = cfg.tolerance;

    let imperfect0 = initialize_state(problem, v0, s0, &|_| 0.0, sources, tol)?;
    let perfect0 = initialize_state(problem, v0, &|_| 0.0, &|_| 0.0, sources, tol)?;

    let mut rows = Vec::with_capacity(cfg.betas.len());
    for &beta in &cfg.betas {
        let dt = cfg.dt_max.min(cfg.layer_resolution * cfg.alpha / beta);
        let base = StepperConfig::new(dt, cfg.horizon, cfg.alpha, beta).with_tolerance(tol);
        base.validate()?;
        let op_i = StepOperator::new(problem, &base)?;
        let op_p = StepOperator::new(problem, &base.with_coupling(Coupling::Perfect))?;
        let (mut si, mut sp) = (imperfect0.clone(), perfect0.clone());
        let (mut jump_sq, mut dist_sq) = (0.0, 0.0);
        for k in 0..base.n_steps() {
            let t = (k + 1) as f64 * dt;
            let loads = problem.source_loads(sources, t);
            si = op_i.advance(problem, &si, &loads, base.ionic, tol)?.0;
            sp = op_p.advance(problem, &sp, &loads, base.ionic, tol)?.0;
            let j = d.jump(&si.u);
            jump_sq += dt * o.m_gamma.quadratic(&j)?;
            let du: Vec<f64> = si.u.iter().zip(&sp.u).map(|(a, b)| a - b).collect();
            dist_sq += dt * mass_u.quadratic(&du)?;
        }
        rows.push(BetaRow {
            beta,
            dt,
            jump_norm: jump_sq.sqrt(),
            distance_to_perfect: dist_sq.sqrt(),
        });
    }
    let betas: Vec<f64> = rows.iter().map(|r| r.beta).collect();
    let norms: Vec<f64> = rows.iter().map(|r| r.jump_norm).collect();
    Ok(BetaStudyResult {
        slope: loglog_slope(&betas, &norms)?,
        rows,
    })
}
