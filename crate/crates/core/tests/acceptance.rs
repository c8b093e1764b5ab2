//! Acceptance criteria 1–10. Each test prints one PASS/FAIL line, then
//! asserts. Tolerances are the published thresholds, not tuned values.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bidomain_lab::analysis::*;
use bidomain_lab::mesh::*;
use bidomain_lab::model::*;
use bidomain_lab::sparse_linalg::*;
use bidomain_lab::stepper::*;

static REPORTED: AtomicBool = AtomicBool::new(false);

fn verdict(n: u32, name: &str, pass: bool, detail: String, started: Instant) {
    println!(
        "criterion {n:>2} {name}: {} ({detail}; {:.2?})",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed()
    );
    REPORTED.store(true, Ordering::SeqCst);
    assert!(pass, "criterion {n} {name} failed: {detail}");
}

fn problem(mesh: Mesh, ionic: IonicModel) -> Problem {
    let sigma = Conductivities::uniform(&mesh, 1.0, 1.0, 1.0).unwrap();
    Problem::new(mesh, sigma, ionic).unwrap()
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn c01_linear_energy_decay() {
    let t0 = Instant::now();
    let p = problem(build_split_rectangle_mesh(16, 16, 0.5).unwrap(), IonicModel::zero());
    let data = RandomData::batch(11, 1).remove(0);
    let cfg = StepperConfig::new(1e-2, 1.0, 1.0, 1.0).with_ionic(false);
    let init = initialize_state(&p, &data.v0(), &data.s0(), &|_| 0.0, &SourceSet::zero(), 1e-12).unwrap();
    let traj = run(&p, &cfg, &SourceSet::zero(), init, 0).unwrap();
    let e = traj.energies();
    let worst = e
        .windows(2)
        .map(|w| (w[1] - w[0]) / w[0].abs().max(f64::MIN_POSITIVE))
        .fold(f64::NEG_INFINITY, f64::max);
    let pass = e.len() == 101 && e[0] > 0.0 && worst <= 1e-12 && t0.elapsed().as_secs_f64() < 10.0;
    verdict(
        1,
        "linear energy decay",
        pass,
        format!("steps {} worst relative increase {worst:.3e}", e.len() - 1),
        t0,
    );
}

fn c02_energy_inequality_constant() {
    let t0 = Instant::now();
    let r = energy_study(&EnergyStudyConfig::default()).unwrap();
    let finite = r.ratios.iter().flatten().all(|x| x.is_finite() && *x > 0.0);
    let pass = finite && r.ratios.iter().all(|m| m.len() == 20) && r.within(2.0) && t0.elapsed().as_secs_f64() < 120.0;
    verdict(
        2,
        "energy inequality",
        pass,
        format!("calibrated C {:.4}, max ratio per mesh {:?}", r.calibrated, r.max_ratio),
        t0,
    );
}

fn c03_bilinear_symmetry_and_coercivity() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = problem(build_split_rectangle_mesh(6, 6, 0.5).unwrap(), IonicModel::zero());
    let (nv, nj) = (p.dofs().n_v(), p.dofs().n_jump());
    let mut worst_asym: f64 = 0.0;
    let mut min_diag = f64::INFINITY;
    for _ in 0..50 {
        let (w1, r1) = (random_vec(&mut rng, nv), random_vec(&mut rng, nj));
        let (w2, r2) = (random_vec(&mut rng, nv), random_vec(&mut rng, nj));
        let x = solve_lifting(&p, &w1, &r1, 1e-14).unwrap();
        let y = solve_lifting(&p, &w2, &r2, 1e-14).unwrap();
        let axy = bilinear_from_liftings(&p, &x, &y, 1.0).unwrap();
        let ayx = bilinear_from_liftings(&p, &y, &x, 1.0).unwrap();
        let scale = (bilinear_from_liftings(&p, &x, &x, 1.0).unwrap()
            * bilinear_from_liftings(&p, &y, &y, 1.0).unwrap())
        .sqrt();
        worst_asym = worst_asym.max((axy - ayx).abs() / scale);
        min_diag = min_diag.min(bilinear_from_liftings(&p, &x, &x, 1.0).unwrap());
    }

    let families: [(&str, Mesh, Mesh); 3] = [
        (
            "interval",
            build_interval_mesh(4, 4, 0.5).unwrap(),
            build_interval_mesh(8, 8, 0.5).unwrap(),
        ),
        (
            "split rectangle",
            build_split_rectangle_mesh(4, 4, 0.5).unwrap(),
            build_split_rectangle_mesh(8, 8, 0.5).unwrap(),
        ),
        (
            "inclusion",
            build_inclusion_mesh(6, &[CellBox::new(2, 4, 2, 4)]).unwrap(),
            build_inclusion_mesh(12, &[CellBox::new(4, 8, 4, 8)]).unwrap(),
        ),
    ];
    let mut ok = worst_asym <= 1e-12 && min_diag >= 0.0;
    let mut detail = format!("max asymmetry {worst_asym:.2e}");
    for (name, coarse, fine) in families {
        let c = coercivity_estimate(&problem(coarse, IonicModel::zero()), 1.0, 1e-12)
            .unwrap()
            .c_min;
        let f = coercivity_estimate(&problem(fine, IonicModel::zero()), 1.0, 1e-12)
            .unwrap()
            .c_min;
        ok &= c > 0.0 && f > 0.0 && f / c >= 0.5;
        detail += &format!("; {name} c_min {c:.4} -> {f:.4}");
    }
    ok &= t0.elapsed().as_secs_f64() < 60.0;
    verdict(3, "bilinear form", ok, detail, t0);
}

fn c04_lifting_matches_two_stage_construction() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let meshes = [
        build_interval_mesh(6, 5, 0.4).unwrap(),
        build_split_rectangle_mesh(6, 6, 0.5).unwrap(),
        build_inclusion_mesh(8, &[CellBox::new(2, 5, 3, 6)]).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    for mesh in meshes {
        let p = problem(mesh, IonicModel::zero());
        for _ in 0..10 {
            let w = random_vec(&mut rng, p.dofs().n_v());
            let r = random_vec(&mut rng, p.dofs().n_jump());
            let single = solve_lifting(&p, &w, &r, 1e-14).unwrap().field;
            let oracle = two_stage_lifting(&p, &w, &r).unwrap();
            let diff: Vec<f64> = single.iter().zip(&oracle).map(|(a, b)| a - b).collect();
            worst = worst.max(norm2(&diff) / norm2(&oracle));
        }
    }
    let pass = worst <= 1e-10 && t0.elapsed().as_secs_f64() < 30.0;
    verdict(
        4,
        "lifting oracle",
        pass,
        format!("max relative difference {worst:.2e}"),
        t0,
    );
}

fn c05_shifted_problem_equivalence() {
    let t0 = Instant::now();
    let data = RandomData::batch(5, 1).remove(0);
    let sources = data.sources();
    let mut worst: f64 = 0.0;
    for mesh in [
        build_interval_mesh(16, 16, 0.5).unwrap(),
        build_split_rectangle_mesh(8, 8, 0.5).unwrap(),
    ] {
        let p = problem(mesh, IonicModel::default_hh());
        for dt in [2e-2, 1e-2] {
            let cfg = StepperConfig::new(dt, 0.2, 1.0, 2.0)
                .with_ionic(false)
                .with_tolerance(1e-12);
            let r = shifted_equivalence_check(&p, &cfg, &sources, &data.v0(), &data.s0()).unwrap();
            worst = worst.max(r.relative);
        }
    }
    let pass = worst <= 1e-8 && t0.elapsed().as_secs_f64() < 60.0;
    verdict(
        5,
        "shifted equivalence",
        pass,
        format!("max relative discrepancy {worst:.2e}"),
        t0,
    );
}

fn c06_manufactured_convergence_rates() {
    let t0 = Instant::now();
    let osc = ManufacturedSolution::oscillating();
    let space = mms_convergence(&MmsStudy::spatial(osc, 8, 3, 1.0, 0.1)).unwrap();
    let time = mms_convergence(&MmsStudy::temporal(osc, 1024, 0.02, 3, 0.2)).unwrap();
    let (rs, rt) = (space.min_rate_v(), time.min_rate_v());
    let pass = rs >= 1.9 && rt >= 0.9 && t0.elapsed().as_secs_f64() < 180.0;
    verdict(
        6,
        "manufactured solutions",
        pass,
        format!(
            "spatial V rates {:?}, temporal V rates {:?}",
            space.rates_v, time.rates_v
        ),
        t0,
    );
}

fn c07_gating_invariants() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let m = IonicModel::default_hh();
    let mut out_of_range: f64 = 0.0;
    let mut split_err: f64 = 0.0;
    for _ in 0..10_000 {
        let w = rng.gen_range(0.0..=1.0);
        let v = rng.gen_range(-50.0..50.0);
        let dt = 10f64.powf(rng.gen_range(-6.0..1.0));
        let next = m.gating_exact_step(w, v, dt);
        out_of_range = out_of_range.max(-next).max(next - 1.0);
        let s = rng.gen_range(0.0..1.0) * dt;
        let split = m.gating_exact_step(m.gating_exact_step(w, v, s), v, dt - s);
        split_err = split_err.max((split - next).abs());
    }
    let mut sign_ok = true;
    for _ in 0..1_000 {
        let p = rng.gen_range(-100.0..100.0);
        sign_ok &= m.g(p, 1.0) >= 0.0 && m.g(p, 0.0) <= 0.0;
    }
    let pass = out_of_range <= 1e-14 && split_err <= 1e-13 && sign_ok;
    verdict(
        7,
        "gating invariants",
        pass,
        format!("range excess {out_of_range:.1e}, split error {split_err:.1e}, signs {sign_ok}"),
        t0,
    );
}

fn c08_stability_and_uniqueness() {
    let t0 = Instant::now();
    let data = RandomData::batch(8, 1).remove(0);
    let bump = |x: [f64; 2]| (PI * x[0]).sin() * (PI * x[1]).sin();

    let p = problem(build_split_rectangle_mesh(8, 8, 0.5).unwrap(), IonicModel::default_hh());
    let sources = data.sources();
    let (v0, s0) = (data.v0(), data.s0());
    let nonlinear = stability_study(&StabilityInput {
        problem: &p,
        config: StepperConfig::new(2e-2, 0.5, 1.0, 1.0),
        sources: &sources,
        v0: &v0,
        s0: &s0,
        perturbation: &bump,
        deltas: vec![1e-3, 1e-2],
        dts: vec![2e-2, 1e-2],
    })
    .unwrap();
    let ratios = nonlinear.dt_ratios();

    let zero = SourceSet::zero();
    let linear = stability_study(&StabilityInput {
        problem: &p,
        config: StepperConfig::new(2e-2, 0.5, 1.0, 1.0).with_ionic(false),
        sources: &zero,
        v0: &v0,
        s0: &s0,
        perturbation: &bump,
        deltas: vec![1e-2, 1.0],
        dts: vec![2e-2, 1e-2],
    })
    .unwrap();

    // an anti-dissipative current makes differences grow, so the supremum
    // is reached late in the run and the dt comparison is not trivial
    let growing = problem(
        build_split_rectangle_mesh(8, 8, 0.5).unwrap(),
        IonicModel::linear(-13.0).unwrap(),
    );
    let growth = stability_study(&StabilityInput {
        problem: &growing,
        config: StepperConfig::new(2e-2, 0.5, 1.0, 1.0),
        sources: &sources,
        v0: &v0,
        s0: &s0,
        perturbation: &bump,
        deltas: vec![1e-2],
        dts: vec![2e-2, 1e-2],
    })
    .unwrap();
    let ratios: Vec<f64> = ratios.into_iter().chain(growth.dt_ratios()).collect();

    let amp = nonlinear.max_amplification();
    let grown = growth.max_amplification();
    let pass = nonlinear.identical_runs_bitwise
        && linear.identical_runs_bitwise
        && growth.identical_runs_bitwise
        && amp.is_finite()
        && amp <= nonlinear.gronwall_bound
        && grown.is_finite()
        && grown <= growth.gronwall_bound
        && ratios.len() == 3
        && ratios.iter().all(|r| (0.8..=1.25).contains(r))
        && linear.max_amplification() <= 1.0 + 1e-10;
    verdict(
        8,
        "stability",
        pass,
        format!(
            "amplification {amp:.4} (bound {:.2}), growing case {grown:.4} (bound {:.2}), dt ratios {ratios:?}, linear {:.12}",
            nonlinear.gronwall_bound,
            growth.gronwall_bound,
            linear.max_amplification()
        ),
        t0,
    );
}

fn c09_resistive_limit() {
    let t0 = Instant::now();
    let p = problem(build_interval_mesh(8, 8, 0.5).unwrap(), IonicModel::default_hh());
    let src = SourceSet::stimulus(Arc::new(|x: [f64; 2], _| (3.0 * x[0]).sin()), Arc::new(|_, _| 0.0));
    let r = beta_limit_study(&p, &BetaStudyConfig::default(), &src, &|x| x[0].sin(), &|_| 1.0).unwrap();
    let pass = (-0.65..=-0.35).contains(&r.slope) && r.distances_non_increasing() && t0.elapsed().as_secs_f64() < 120.0;
    let dist: Vec<String> = r
        .rows
        .iter()
        .map(|row| format!("{:.3e}", row.distance_to_perfect))
        .collect();
    verdict(
        9,
        "beta limit",
        pass,
        format!("slope {:.3}, distances {}", r.slope, dist.join(" ")),
        t0,
    );
}

fn dirichlet_laplacian_pencil(n: usize) -> (CsrMatrix, CsrMatrix) {
    let h = 1.0 / n as f64;
    let m = n - 1;
    let mut k = Vec::new();
    let mut b = Vec::new();
    for i in 0..m {
        k.push((i, i, 2.0 / h));
        b.push((i, i, 4.0 * h / 6.0));
        if i + 1 < m {
            for (r, c) in [(i, i + 1), (i + 1, i)] {
                k.push((r, c, -1.0 / h));
                b.push((r, c, h / 6.0));
            }
        }
    }
    (CsrMatrix::from_triplets(m, m, &k), CsrMatrix::from_triplets(m, m, &b))
}

fn c10_solver_cross_checks() {
    let t0 = Instant::now();
    let tol = 1e-10;
    let meshes = [
        build_interval_mesh(4, 4, 0.5).unwrap(),
        build_interval_mesh(20, 13, 0.6).unwrap(),
        build_split_rectangle_mesh(4, 4, 0.5).unwrap(),
        build_split_rectangle_mesh(5, 5, 0.4).unwrap(),
        build_inclusion_mesh(6, &[CellBox::new(2, 4, 2, 4)]).unwrap(),
        build_inclusion_mesh(8, &[CellBox::new(2, 5, 3, 6)]).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    let mut systems = 0;
    for mesh in meshes {
        let p = problem(mesh, IonicModel::default_hh());
        let o = p.ops();
        let step = StepOperator::new(&p, &StepperConfig::new(1e-2, 1.0, 1.0, 1.0)).unwrap();
        for a in [
            o.mass_b.clone(),
            o.a_i.linear_combination(1.0, &o.a_e, 1.0).unwrap(),
            o.u_stiffness().linear_combination(1.0, &o.g, 1.0).unwrap(),
            step.matrix().clone(),
        ] {
            if a.nrows() == 0 || a.nrows() > 200 {
                continue;
            }
            let rhs: Vec<f64> = (0..a.nrows()).map(|i| ((i * 7 + 3) as f64).sin()).collect();
            let x_cg = cg_solve(&LinearSystem::new(&a, &rhs, tol).unwrap(), Preconditioner::Jacobi)
                .unwrap()
                .x;
            let x_lu = dense_solve(&a.to_dense(), &rhs).unwrap();
            let diff: Vec<f64> = x_cg.iter().zip(&x_lu).map(|(a, b)| a - b).collect();
            worst = worst.max(norm2(&diff) / norm2(&x_lu));
            systems += 1;
        }
    }
    let (k, b) = dirichlet_laplacian_pencil(64);
    let lambda = smallest_generalized_eigenvalue(&k, &b, 1e-10).unwrap().value;
    let eig_err = (lambda - PI * PI).abs() / (PI * PI);
    let pass = systems >= 12 && worst <= 10.0 * tol && eig_err <= 0.05;
    verdict(
        10,
        "solver cross-checks",
        pass,
        format!("{systems} systems, max CG/LU difference {worst:.2e}, lambda {lambda:.6} (pi^2 rel err {eig_err:.2e})"),
        t0,
    );
}

/// Runs every criterion in order, one PASS/FAIL line each. Positional
/// arguments filter by substring of the function name.
fn main() -> ExitCode {
    let checks: [(u32, &str, fn()); 10] = [
        (1, "c01_linear_energy_decay", c01_linear_energy_decay),
        (2, "c02_energy_inequality_constant", c02_energy_inequality_constant),
        (
            3,
            "c03_bilinear_symmetry_and_coercivity",
            c03_bilinear_symmetry_and_coercivity,
        ),
        (
            4,
            "c04_lifting_matches_two_stage_construction",
            c04_lifting_matches_two_stage_construction,
        ),
        (5, "c05_shifted_problem_equivalence", c05_shifted_problem_equivalence),
        (
            6,
            "c06_manufactured_convergence_rates",
            c06_manufactured_convergence_rates,
        ),
        (7, "c07_gating_invariants", c07_gating_invariants),
        (8, "c08_stability_and_uniqueness", c08_stability_and_uniqueness),
        (9, "c09_resistive_limit", c09_resistive_limit),
        (10, "c10_solver_cross_checks", c10_solver_cross_checks),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (n, name, check) in checks {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        REPORTED.store(false, Ordering::SeqCst);
        if std::panic::catch_unwind(check).is_err() {
            failed += 1;
            if !REPORTED.load(Ordering::SeqCst) {
                println!("criterion {n:>2} {name}: FAIL (panicked before a verdict)");
            }
        }
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
