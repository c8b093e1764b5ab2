use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use super::config::{Command, MeshSpec, RunConfig, SourcePreset};
use super::csv::{write_csv_series, write_csv_table};
use super::vtk::write_vtk_snapshot;
use crate::analysis::{
    beta_limit_study, coercivity_estimate, energy_study, mms_convergence, stability_study, ConvergenceTable,
    ManufacturedSolution, MmsStudy, StabilityInput,
};
use crate::error::{Error, Result};
use crate::stepper::{initialize_state, run, Problem};

/// Environment variable that overrides `output.dir` (but not `--out`).
pub const OUT_DIR_ENV: &str = "BIDOMAIN_OUT";

/// Text to show, files written and, for verification commands, the verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutcome {
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
    pub verdict: Option<bool>,
}

impl CommandOutcome {
    fn new() -> Self {
        Self {
            lines: Vec::new(),
            files: Vec::new(),
            verdict: None,
        }
    }

    fn check(&mut self, label: &str, pass: bool) {
        self.lines
            .push(format!("{}: {label}", if pass { "PASS" } else { "FAIL" }));
        self.verdict = Some(self.verdict.unwrap_or(true) && pass);
    }
}

/// `--out`, then the environment override, then the config.
pub fn resolve_out_dir(cli: Option<&Path>, env: Option<&str>, cfg: &RunConfig) -> PathBuf {
    match (cli, env.filter(|s| !s.is_empty())) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(e)) => PathBuf::from(e),
        (None, None) => cfg.output.dir.clone(),
    }
}

/// Runs `command` with `cfg`, writing into `out`.
pub fn execute(command: Command, cfg: &RunConfig, out: &Path) -> Result<CommandOutcome> {
    cfg.validate()?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    match command {
        Command::Run => run_simulation(cfg, out),
        Command::Mms => mms(cfg, out),
        Command::Energy => energy(cfg, out),
        Command::Coercivity => coercivity(cfg, out),
        Command::BetaSweep => beta_sweep(cfg, out),
        Command::Stability => stability(cfg, out),
    }
}

fn run_simulation(cfg: &RunConfig, out: &Path) -> Result<CommandOutcome> {
    let p = cfg.problem()?;
    let sc = cfg.stepper_config();
    let sources = cfg.sources();
    let w_in = cfg.ionic.w_in;
    let init = initialize_state(&p, &*cfg.v0(), &*cfg.s0(), &|_| w_in, &sources, sc.tolerance)?;
    let cadence = cfg.output.cadence;
    let traj = run(&p, &sc, &sources, init, cadence)?;

    let mut o = CommandOutcome::new();
    let series = out.join("series.csv");
    write_csv_series(&traj.steps, &series)?;
    o.files.push(series);
    if p.mesh().dim() == 2 {
        for (k, s) in traj.snapshots.iter().enumerate() {
            let path = out.join(format!("state_{k:04}.vtk"));
            write_vtk_snapshot(&p, s, &path)?;
            o.files.push(path);
        }
    }
    let last = traj.steps.last().copied().unwrap_or(traj.initial);
    let iters: usize = traj.steps.iter().map(|d| d.cg_iterations).sum();
    o.lines.push(format!(
        "{} steps of dt {} on {} vertices ({} dofs); CG iterations {iters}",
        traj.steps.len(),
        sc.dt,
        p.mesh().n_vertices(),
        p.dofs().n_total()
    ));
    o.lines.push(format!(
        "t = {:.6}: |V| = {:.6e}, |[U]| = {:.6e}, energy = {:.6e}",
        last.t, last.v_l2, last.jump_l2, last.energy
    ));
    Ok(o)
}

fn convergence_rows(t: &ConvergenceTable) -> Vec<Vec<f64>> {
    t.rows
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let rate = |v: &[f64]| if k == 0 { f64::NAN } else { v[k - 1] };
            vec![
                r.h,
                r.dt,
                r.steps as f64,
                r.error_v,
                r.error_u,
                rate(&t.rates_v),
                rate(&t.rates_u),
            ]
        })
        .collect()
}

const CONVERGENCE_HEADER: [&str; 7] = ["h", "dt", "steps", "error_v", "error_u", "rate_v", "rate_u"];

fn mms(cfg: &RunConfig, out: &Path) -> Result<CommandOutcome> {
    let m = &cfg.mms;
    let sol = ManufacturedSolution::oscillating();
    let space = mms_convergence(&MmsStudy::spatial(
        sol,
        m.spatial_n0,
        m.spatial_levels,
        m.dt_factor,
        m.spatial_horizon,
    ))?;
    let time = mms_convergence(&MmsStudy::temporal(
        sol,
        m.temporal_n,
        m.temporal_dt0,
        m.temporal_levels,
        m.temporal_horizon,
    ))?;
    let mut o = CommandOutcome::new();
    for (name, table) in [("spatial", &space), ("temporal", &time)] {
        let path = out.join(format!("mms_{name}.csv"));
        write_csv_table(&CONVERGENCE_HEADER, &convergence_rows(table), &path)?;
        o.files.push(path);
        o.lines.push(format!("{name} ladder"));
        o.lines.push(format!(
            "{:>12} {:>12} {:>12} {:>12} {:>8}",
            "h", "dt", "err V", "err U", "rate V"
        ));
        for (k, r) in table.rows.iter().enumerate() {
            let rate = if k == 0 {
                "-".to_string()
            } else {
                format!("{:.3}", table.rates_v[k - 1])
            };
            o.lines.push(format!(
                "{:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {rate:>8}",
                r.h, r.dt, r.error_v, r.error_u
            ));
        }
    }
    o.check(
        &format!("spatial V rate {:.3} >= 1.9", space.min_rate_v()),
        space.min_rate_v() >= 1.9,
    );
    o.check(
        &format!("temporal V rate {:.3} >= 0.9", time.min_rate_v()),
        time.min_rate_v() >= 0.9,
    );
    Ok(o)
}

fn energy(cfg: &RunConfig, out: &Path) -> Result<CommandOutcome> {
    let r = energy_study(&cfg.energy_study_config())?;
    let mut rows = Vec::new();
    for (m, (ratios, grads)) in r.ratios.iter().zip(&r.grad_v_ratios).enumerate() {
        for (k, (x, g)) in ratios.iter().zip(grads).enumerate() {
            rows.push(vec![cfg.energy.mesh_sizes[m] as f64, k as f64, *x, *g]);
        }
    }
    let path = out.join("energy_ratios.csv");
    write_csv_table(&["mesh_n", "dataset", "ratio", "grad_v_ratio"], &rows, &path)?;
    let mut o = CommandOutcome::new();
    o.files.push(path);
    o.lines
        .push(format!("calibrated constant (coarsest mesh) {:.6}", r.calibrated));
    for (n, m) in cfg.energy.mesh_sizes.iter().zip(&r.max_ratio) {
        o.lines.push(format!("mesh {n}x{n}: max ratio {m:.6}"));
    }
    o.check(
        "refined ratios within factor 2 of the calibrated constant",
        r.within(2.0),
    );
    Ok(o)
}

/// Same geometry with every cell split in two along each axis.
pub fn refine_mesh_spec(spec: &MeshSpec) -> MeshSpec {
    match spec {
        MeshSpec::Interval { n_b, n_d, split } => MeshSpec::Interval {
            n_b: 2 * n_b,
            n_d: 2 * n_d,
            split: *split,
        },
        MeshSpec::SplitRectangle { nx, ny, split } => MeshSpec::SplitRectangle {
            nx: 2 * nx,
            ny: 2 * ny,
            split: *split,
        },
        MeshSpec::Inclusion { n, boxes } => MeshSpec::Inclusion {
            n: 2 * n,
            boxes: boxes.iter().map(|b| b.map(|i| 2 * i)).collect(),
        },
    }
}

fn coercivity(cfg: &RunConfig, out: &Path) -> Result<CommandOutcome> {
    let mut rows = Vec::new();
    let mut o = CommandOutcome::new();
    let mut values = Vec::new();
    for (level, spec) in [cfg.mesh.clone(), refine_mesh_spec(&cfg.mesh)].iter().enumerate() {
        let c = RunConfig {
            mesh: spec.clone(),
            ..cfg.clone()
        };
        let p = c.problem()?;
        let e = coercivity_estimate(&p, cfg.interface.beta, 1e-12)?;
        o.lines.push(format!(
            "level {level}: c_min = {:.6e} (dimension {}, {} iterations)",
            e.c_min, e.dimension, e.eigen_iterations
        ));
        rows.push(vec![level as f64, e.dimension as f64, e.c_min]);
        values.push(e.c_min);
    }
    let path = out.join("coercivity.csv");
    write_csv_table(&["level", "dimension", "c_min"], &rows, &path)?;
    o.files.push(path);
    o.check("c_min > 0 on both levels", values.iter().all(|&c| c > 0.0));
    o.check(
        &format!("c_min ratio {:.3} >= 0.5 across one refinement", values[1] / values[0]),
        values[1] / values[0] >= 0.5,
    );
    Ok(o)
}

fn beta_sweep(cfg: &RunConfig, out: &Path) -> Result<CommandOutcome> {
    let p = cfg.problem()?;
    let sources = cfg.sources();
    let r = beta_limit_study(&p, &cfg.beta_study_config(), &sources, &*cfg.v0(), &*cfg.s0())?;
    let rows: Vec<Vec<f64>> = r
        .rows
        .iter()
        .map(|b| vec![b.beta, b.dt, b.jump_norm, b.distance_to_perfect])
        .collect();
    let path = out.join("beta_sweep.csv");
    write_csv_table(&["beta", "dt", "jump_norm", "distance_to_perfect"], &rows, &path)?;
    let mut o = CommandOutcome::new();
    o.files.push(path);
    for b in &r.rows {
        o.lines.push(format!(
            "beta {:>10.3e}: |[U]| = {:.6e}, |U - U_perfect| = {:.6e}",
            b.beta, b.jump_norm, b.distance_to_perfect
        ));
    }
    o.check(
        &format!("log-log slope {:.3} in [-0.65, -0.35]", r.slope),
        (-0.65..=-0.35).contains(&r.slope),
    );
    o.check(
        "distance to perfect coupling non-increasing",
        r.distances_non_increasing(),
    );
    Ok(o)
}

fn stability(cfg: &RunConfig, out: &Path) -> Result<CommandOutcome> {
    let p: Problem = cfg.problem()?;
    let sc = cfg.stepper_config();
    let sources = cfg.sources();
    let (v0, s0) = (cfg.v0(), cfg.s0());
    let bump = |x: [f64; 2]| (PI * x[0]).sin() * (1.0 + (PI * x[1]).cos());
    let r = stability_study(&StabilityInput {
        problem: &p,
        config: sc,
        sources: &sources,
        v0: &*v0,
        s0: &*s0,
        perturbation: &bump,
        deltas: cfg.stability.deltas.clone(),
        dts: vec![sc.dt, sc.dt / 2.0],
    })?;
    let rows: Vec<Vec<f64>> = r.rows.iter().map(|s| vec![s.delta, s.dt, s.amplification]).collect();
    let path = out.join("stability.csv");
    write_csv_table(&["delta", "dt", "amplification"], &rows, &path)?;
    let mut o = CommandOutcome::new();
    o.files.push(path);
    for s in &r.rows {
        o.lines.push(format!(
            "delta {:.1e}, dt {:.3e}: amplification {:.6}",
            s.delta, s.dt, s.amplification
        ));
    }
    let amp = r.max_amplification();
    o.check("identical runs bitwise equal", r.identical_runs_bitwise);
    o.check(&format!("amplification {amp:.4} finite"), amp.is_finite());
    let ratios = r.dt_ratios();
    o.check(
        &format!("dt ratios {ratios:?} within [0.8, 1.25]"),
        ratios.iter().all(|x| (0.8..=1.25).contains(x)),
    );
    if !sc.ionic && cfg.sources.preset == SourcePreset::Zero {
        o.check("linear zero-source amplification <= 1 + 1e-10", amp <= 1.0 + 1e-10);
    }
    Ok(o)
}
