//! The gating variable under a frozen potential: exact exponential steps
//! stay in `[0, 1]` and compose, whatever the step size.

use bidomain_lab::model::{default_probe_points, IonicModel};

fn main() {
    let m = IonicModel::default_hh();
    let violations = m.check_invariants(&default_probe_points());
    println!(
        "structural checks: {}",
        if violations.is_empty() {
            "ok".to_string()
        } else {
            violations.join("; ")
        }
    );
    for v in [-1.0, 0.0, 0.5, 1.0, 2.0] {
        let mut w = 0.0;
        for _ in 0..1000 {
            w = m.gating_exact_step(w, v, 0.01);
        }
        let once = m.gating_exact_step(0.0, v, 10.0);
        println!(
            "v = {v:>4}: I(v, w) = {:>9.4}, w after 1000 steps {w:.12}, one step of 10 {once:.12}",
            m.ionic_current(v, w)
        );
    }
    println!(
        "composed Lipschitz bound over T = 1, dt = 1e-2: {:.3}",
        m.composed_lipschitz_bound(1.0, 1e-2)
    );
}
