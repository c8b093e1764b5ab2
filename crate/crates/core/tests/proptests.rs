use proptest::prelude::*;

use bidomain_lab::analysis::bilinear_form;
use bidomain_lab::cli_io::{format_float, parse_config, RunConfig};
use bidomain_lab::mesh::*;
use bidomain_lab::model::*;
use bidomain_lab::sparse_linalg::*;
use bidomain_lab::stepper::*;

fn dense_matrix(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(
        prop::collection::vec(prop_oneof![3 => Just(0.0), 1 => -10.0..10.0f64], n),
        n,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csr_product_matches_dense(a in dense_matrix(50), x in prop::collection::vec(-5.0..5.0f64, 50)) {
        let csr = CsrMatrix::from_dense(&a);
        let want = dense_matvec(&a, &x);
        let got = csr.spmv(&x).unwrap();
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() <= 1e-13 * (1.0 + w.abs()));
        }
        prop_assert_eq!(csr.transpose().transpose(), csr);
    }

    #[test]
    fn cg_solves_random_spd_systems(
        b in dense_matrix(20),
        shift in 0.1..5.0f64,
        rhs in prop::collection::vec(-1.0..1.0f64, 20),
    ) {
        // BᵀB + shift·I is SPD
        let n = b.len();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = (0..n).map(|k| b[k][i] * b[k][j]).sum::<f64>();
            }
            a[i][i] += shift;
        }
        let csr = CsrMatrix::from_dense(&a);
        let tol = 1e-10;
        let sol = cg_solve(&LinearSystem::new(&csr, &rhs, tol).unwrap(), Preconditioner::Jacobi).unwrap();
        let r: Vec<f64> = csr.spmv(&sol.x).unwrap().iter().zip(&rhs).map(|(ax, b)| b - ax).collect();
        prop_assert!(norm2(&r) <= tol * norm2(&rhs) * (1.0 + 1e-6));
        let exact = dense_solve(&a, &rhs).unwrap();
        let err: Vec<f64> = sol.x.iter().zip(&exact).map(|(a, b)| a - b).collect();
        prop_assert!(norm2(&err) <= 1e-6 * (1.0 + norm2(&exact)));
    }

    #[test]
    fn gating_step_stays_in_the_unit_interval(w in 0.0..=1.0f64, v in -5.0..5.0f64, dt in 1e-6..10.0f64) {
        let m = IonicModel::default_hh();
        let next = m.gating_exact_step(w, v, dt);
        prop_assert!((0.0..=1.0).contains(&next));
    }

    #[test]
    fn gating_steps_compose(w in 0.0..=1.0f64, v in -3.0..3.0f64, dt in 1e-4..1.0f64) {
        // with V frozen the exact step is a semigroup
        let m = IonicModel::default_hh();
        let two = m.gating_exact_step(m.gating_exact_step(w, v, dt), v, dt);
        let one = m.gating_exact_step(w, v, 2.0 * dt);
        prop_assert!((two - one).abs() <= 1e-14);
    }

    #[test]
    fn formatted_floats_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let back: f64 = format_float(x).parse().unwrap();
        prop_assert_eq!(back.to_bits(), x.to_bits());
    }

    #[test]
    fn config_round_trips_through_toml(
        alpha in 1e-3..1e3f64,
        beta in 1e-3..1e3f64,
        dt in 1e-5..1e-1f64,
        seed in any::<u64>(),
    ) {
        let mut cfg = RunConfig::default();
        cfg.interface.alpha = alpha;
        cfg.interface.beta = beta;
        cfg.time.dt = dt;
        cfg.time.horizon = 1.0;
        cfg.seed = seed;
        prop_assert_eq!(parse_config(&cfg.to_toml()).unwrap(), cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn inclusion_meshes_are_valid(n in 3usize..12, i0 in 1usize..6, j0 in 1usize..6, w in 1usize..5, h in 1usize..5) {
        prop_assume!(i0 + w < n && j0 + h < n);
        let m = build_inclusion_mesh(n, &[CellBox::new(i0, i0 + w, j0, j0 + h)]).unwrap();
        let r = validate_mesh(&m);
        prop_assert!(r.is_valid(), "{:?}", r.violations);
        prop_assert_eq!(m.n_cells(), 2 * n * n);
        let area = (w * h) as f64 / (n * n) as f64;
        prop_assert!((m.region_measure(Region::D) - area).abs() < 1e-13);
        prop_assert!((m.interface_measure() - 2.0 * (w + h) as f64 / n as f64).abs() < 1e-13);
    }

    #[test]
    fn interval_meshes_are_valid(n_b in 1usize..20, n_d in 1usize..20, split in 0.05..0.95f64) {
        let m = build_interval_mesh(n_b, n_d, split).unwrap();
        prop_assert!(validate_mesh(&m).is_valid());
        prop_assert!((m.region_measure(Region::B) - split).abs() < 1e-14);
    }

    #[test]
    fn initial_jump_equals_s0(c in -2.0..2.0f64, a in -2.0..2.0f64) {
        let mesh = build_inclusion_mesh(6, &[CellBox::new(2, 4, 1, 5)]).unwrap();
        let sigma = Conductivities::uniform(&mesh, 1.0, 0.7, 1.3).unwrap();
        let p = Problem::new(mesh, sigma, IonicModel::default_hh()).unwrap();
        let s0 = move |x: [f64; 2]| c + a * x[0];
        let st = initialize_state(&p, &|x| x[1], &s0, &|_| 0.0, &SourceSet::zero(), 1e-13).unwrap();
        let want = p.dofs().interpolate_jump(p.mesh(), s0);
        for (j, w) in p.dofs().jump(&st.u).iter().zip(&want) {
            prop_assert!((j - w).abs() < 1e-12);
        }
    }

    #[test]
    fn bilinear_form_is_symmetric(seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mesh = build_split_rectangle_mesh(4, 4, 0.5).unwrap();
        let sigma = Conductivities::uniform(&mesh, 1.0, 2.0, 0.5).unwrap();
        let p = Problem::new(mesh, sigma, IonicModel::zero()).unwrap();
        let d = p.dofs();
        let mut v = |n: usize| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
        let (w1, r1, w2, r2) = (v(d.n_v()), v(d.n_jump()), v(d.n_v()), v(d.n_jump()));
        let xy = bilinear_form(&p, (&w1, &r1), (&w2, &r2), 1.5, 1e-13).unwrap();
        let yx = bilinear_form(&p, (&w2, &r2), (&w1, &r1), 1.5, 1e-13).unwrap();
        let xx = bilinear_form(&p, (&w1, &r1), (&w1, &r1), 1.5, 1e-13).unwrap();
        let yy = bilinear_form(&p, (&w2, &r2), (&w2, &r2), 1.5, 1e-13).unwrap();
        prop_assert!((xy - yx).abs() <= 1e-10 * (xx * yy).sqrt());
    }
}
