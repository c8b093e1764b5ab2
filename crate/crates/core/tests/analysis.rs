use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bidomain_lab::analysis::*;
use bidomain_lab::mesh::*;
use bidomain_lab::model::*;
use bidomain_lab::sparse_linalg::norm2;
use bidomain_lab::stepper::*;

fn problem_with(mesh: Mesh, s: [f64; 3]) -> Problem {
    let sigma = Conductivities::uniform(&mesh, s[0], s[1], s[2]).unwrap();
    Problem::new(mesh, sigma, IonicModel::zero()).unwrap()
}

fn problem(mesh: Mesh) -> Problem {
    problem_with(mesh, [1.0, 1.0, 1.0])
}

fn random(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn field(f: impl Fn([f64; 2], f64) -> f64 + Send + Sync + 'static) -> Option<Field> {
    Some(Arc::new(f))
}

#[test]
fn source_shift_vanishes_for_equal_sources() {
    let p = problem(build_split_rectangle_mesh(6, 6, 0.5).unwrap());
    let f = field(|x, t| x[0] + t);
    let u = solve_source_shift(&p, &f, &f, 0.3, 1e-12).unwrap();
    assert!(u.iter().all(|&x| x == 0.0));
}

#[test]
fn source_shift_matches_the_quadratic_in_1d() {
    // σ_i + σ_e = 1, f1 − f2 = 1 on (0, s): ũ = s x − x²/2, ũ'(s) = 0
    let s = 0.5;
    let p = problem_with(build_interval_mesh(8, 8, s).unwrap(), [0.25, 0.75, 1.0]);
    let u = solve_source_shift(&p, &field(|_, _| 3.0), &field(|_, _| 2.0), 0.0, 1e-14).unwrap();
    for (k, &v) in p.dofs().v_vertices().iter().enumerate() {
        let x = p.mesh().vertices()[v][0];
        let exact = s * x - x * x / 2.0;
        assert!((u[k] - exact).abs() < 1e-3 / 64.0 + 1e-12, "x {x}: {} vs {exact}", u[k]);
    }
}

#[test]
fn interface_charge_for_constant_and_linear_data() {
    let p = problem(build_inclusion_mesh(6, &[CellBox::new(2, 4, 2, 4)]).unwrap());
    let (alpha, beta, dt) = (0.7, 3.0, 0.05);

    let f1 = field(|x, _| 1.0 + x[0]);
    let f2 = field(|_, _| 0.5);
    let j0 = shift_jump(&p, &solve_source_shift(&p, &f1, &f2, 0.0, 1e-14).unwrap());
    let j1 = shift_jump(&p, &solve_source_shift(&p, &f1, &f2, dt, 1e-14).unwrap());
    let q = interface_charge_source(&j0, &j1, alpha, beta, dt);
    for (q, j) in q.iter().zip(&j1) {
        assert!((q + beta * j).abs() < 1e-12);
    }

    // f1 − f2 linear in t ⇒ [ũ] linear in t ⇒ the difference quotient is exact
    let g1 = field(|x, t| (1.0 + 2.0 * t) * (1.0 + x[1]));
    let g2 = field(|_, _| 0.0);
    let at = |t: f64| shift_jump(&p, &solve_source_shift(&p, &g1, &g2, t, 1e-14).unwrap());
    let base = at(0.0);
    let (a, b) = (at(0.4), at(0.4 + dt));
    let q = interface_charge_source(&a, &b, alpha, beta, dt);
    for k in 0..q.len() {
        // [ũ](t) = (1 + 2t)·[ũ](0)
        let exact = -alpha * 2.0 * base[k] - beta * (1.0 + 2.0 * (0.4 + dt)) * base[k];
        assert!(
            (q[k] - exact).abs() < 1e-12 * (1.0 + exact.abs()),
            "{} vs {exact}",
            q[k]
        );
    }
}

#[test]
fn shifted_scheme_is_bitwise_identical_without_net_source() {
    let p = problem(build_split_rectangle_mesh(6, 6, 0.5).unwrap());
    let f = field(|x, t| x[0] * (1.0 + t));
    let src = SourceSet {
        f1: f.clone(),
        f2: f,
        ..SourceSet::zero()
    };
    let cfg = StepperConfig::new(0.02, 0.1, 1.0, 1.0)
        .with_ionic(false)
        .with_tolerance(1e-12);
    let r = shifted_equivalence_check(&p, &cfg, &src, &|x| x[1], &|_| 0.2).unwrap();
    assert_eq!(r.max_discrepancy, 0.0);
}

#[test]
fn shifted_equivalence_on_an_inclusion_at_two_steps() {
    let p = problem(build_inclusion_mesh(8, &[CellBox::new(2, 5, 3, 6)]).unwrap());
    let data = RandomData::batch(21, 1).remove(0);
    for dt in [0.02, 0.01] {
        let cfg = StepperConfig::new(dt, 0.1, 0.5, 2.0)
            .with_ionic(false)
            .with_tolerance(1e-12);
        let r = shifted_equivalence_check(&p, &cfg, &data.sources(), &data.v0(), &data.s0()).unwrap();
        assert!(r.relative <= 1e-8, "dt {dt}: {}", r.relative);
    }
    let cfg = StepperConfig::new(0.02, 0.1, 1.0, 1.0);
    assert!(shifted_equivalence_check(&p, &cfg, &data.sources(), &data.v0(), &data.s0()).is_err());
}

#[test]
fn lifting_of_zero_is_zero_and_jump_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let p = problem(build_inclusion_mesh(8, &[CellBox::new(2, 6, 2, 5)]).unwrap());
    let d = p.dofs();
    let z = solve_lifting(&p, &vec![0.0; d.n_v()], &vec![0.0; d.n_jump()], 1e-12).unwrap();
    assert!(z.field.iter().all(|&x| x == 0.0));
    for _ in 0..5 {
        let (w, r) = (random(&mut rng, d.n_v()), random(&mut rng, d.n_jump()));
        let l = solve_lifting(&p, &w, &r, 1e-12).unwrap();
        let j = d.jump(&l.field);
        for (a, b) in j.iter().zip(&r) {
            assert!((a - b).abs() <= 1e-14 * (1.0 + b.abs()));
        }
    }
}

fn lifting_bound(p: &Problem, rng: &mut ChaCha8Rng) -> f64 {
    let d = p.dofs();
    (0..50)
        .map(|_| {
            let (w, r) = (random(rng, d.n_v()), random(rng, d.n_jump()));
            let l = solve_lifting(p, &w, &r, 1e-12).unwrap();
            l.norm_x_sq.sqrt() / (l.norm_w_sq.sqrt() + l.norm_r_sq.sqrt())
        })
        .fold(0.0, f64::max)
}

#[test]
fn lifting_stability_constant_survives_refinement() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let coarse = lifting_bound(
        &problem(build_inclusion_mesh(6, &[CellBox::new(2, 4, 2, 4)]).unwrap()),
        &mut rng,
    );
    let fine = lifting_bound(
        &problem(build_inclusion_mesh(12, &[CellBox::new(4, 8, 4, 8)]).unwrap()),
        &mut rng,
    );
    assert!(coarse.is_finite() && fine.is_finite());
    assert!(fine / coarse < 2.0 && fine / coarse > 0.5, "{coarse} {fine}");
}

#[test]
fn bilinear_form_is_nonnegative_and_vanishes_at_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = problem(build_split_rectangle_mesh(6, 4, 0.5).unwrap());
    let d = p.dofs();
    let zero = (vec![0.0; d.n_v()], vec![0.0; d.n_jump()]);
    let x = (random(&mut rng, d.n_v()), random(&mut rng, d.n_jump()));
    assert_eq!(
        bilinear_form(&p, (&zero.0, &zero.1), (&x.0, &x.1), 1.0, 1e-12).unwrap(),
        0.0
    );
    for _ in 0..20 {
        let x = (random(&mut rng, d.n_v()), random(&mut rng, d.n_jump()));
        assert!(bilinear_form(&p, (&x.0, &x.1), (&x.0, &x.1), 1.0, 1e-12).unwrap() >= 0.0);
    }
}

#[test]
fn doubling_conductivities_and_beta_doubles_c_min() {
    let mesh = build_inclusion_mesh(6, &[CellBox::new(2, 4, 2, 4)]).unwrap();
    let a = coercivity_estimate(&problem_with(mesh.clone(), [1.0, 0.5, 2.0]), 1.5, 1e-13).unwrap();
    let b = coercivity_estimate(&problem_with(mesh, [2.0, 1.0, 4.0]), 3.0, 1e-13).unwrap();
    assert!((b.c_min / a.c_min - 2.0).abs() < 1e-9, "{} {}", a.c_min, b.c_min);
}

#[test]
fn poincare_constants_are_positive() {
    for mesh in [
        build_interval_mesh(8, 8, 0.5).unwrap(),
        build_inclusion_mesh(8, &[CellBox::new(3, 5, 3, 5)]).unwrap(),
    ] {
        let p = problem(mesh);
        let c = poincare_constant(&p, true).unwrap();
        assert!(c > 0.0 && c.is_finite());
    }
}

#[test]
fn energy_report_of_zero_data_is_zero() {
    let p = problem(build_split_rectangle_mesh(4, 4, 0.5).unwrap());
    let cfg = StepperConfig::new(0.1, 0.5, 1.0, 1.0).with_ionic(false);
    let src = SourceSet::zero();
    let traj = run(&p, &cfg, &src, State::zero(p.dofs()), 0).unwrap();
    let r = energy_report(
        &p,
        &traj,
        &EnergyData {
            sources: &src,
            v0: &|_| 0.0,
            s0: &|_| 0.0,
        },
        cfg.dt,
    );
    assert_eq!(r.lhs, 0.0);
    assert_eq!(r.ratio, 0.0);
}

#[test]
fn constant_in_time_linear_in_space_pair_is_reproduced() {
    let sol = ManufacturedSolution::linear();
    let p = sol.problem(4, 4).unwrap();
    let init = sol.initial_state(&p, 1e-14).unwrap();
    let traj = run(&p, &sol.stepper_config(0.1, 0.5, 1e-14), &sol.sources(), init, 0).unwrap();
    let (ev, eu) = sol.errors(&p, &traj.final_state);
    assert!(ev < 1e-12 && eu < 1e-12, "{ev} {eu}");
}

#[test]
fn beta_study_needs_two_values() {
    let p = problem(build_interval_mesh(4, 4, 0.5).unwrap());
    let cfg = BetaStudyConfig {
        betas: vec![10.0],
        ..Default::default()
    };
    assert!(beta_limit_study(&p, &cfg, &SourceSet::zero(), &|_| 0.0, &|_| 1.0).is_err());
    assert!(loglog_slope(&[1.0, 10.0], &[1.0, 0.1]).unwrap() + 1.0 < 1e-14);
}

#[test]
fn zero_perturbation_has_zero_amplification() {
    let p = problem(build_interval_mesh(8, 8, 0.5).unwrap());
    let src = SourceSet::zero();
    let r = stability_study(&StabilityInput {
        problem: &p,
        config: StepperConfig::new(0.05, 0.2, 1.0, 1.0).with_ionic(false),
        sources: &src,
        v0: &|x| x[0],
        s0: &|_| 0.5,
        perturbation: &|x| (3.0 * x[0]).sin(),
        deltas: vec![0.0, 0.1],
        dts: vec![0.05],
    })
    .unwrap();
    assert_eq!(r.rows[0].amplification, 0.0);
    assert!(r.rows[1].amplification <= 1.0 + 1e-10);
}

#[test]
fn energy_study_is_reproducible_from_its_seed() {
    let cfg = EnergyStudyConfig {
        mesh_sizes: vec![4],
        datasets: 3,
        horizon: 0.2,
        ..Default::default()
    };
    let (a, b) = (energy_study(&cfg).unwrap(), energy_study(&cfg).unwrap());
    assert_eq!(a, b);
    let other = energy_study(&EnergyStudyConfig { seed: 8, ..cfg }).unwrap();
    assert_ne!(a.ratios, other.ratios);
    let r: Vec<f64> = a.ratios.concat();
    assert!(norm2(&r) > 0.0);
}
