//! One-dimensional cable: `B = [0, 0.5]` with the membrane, `D = [0.5, 1]`
//! passive tissue. A stimulus in `B` drives the potential and the jump.

use std::f64::consts::PI;
use std::sync::Arc;

use bidomain_lab::mesh::build_interval_mesh;
use bidomain_lab::model::{Conductivities, IonicModel};
use bidomain_lab::stepper::{initialize_state, run, Problem, SourceSet, StepperConfig};

fn main() -> bidomain_lab::Result<()> {
    let mesh = build_interval_mesh(32, 32, 0.5)?;
    let sigma = Conductivities::uniform(&mesh, 1.0, 1.0, 1.0)?;
    let p = Problem::new(mesh, sigma, IonicModel::default_hh())?;
    let src = SourceSet::stimulus(
        Arc::new(|x: [f64; 2], t: f64| 10.0 * (PI * x[0] / 0.5).sin() * (-5.0 * t).exp()),
        Arc::new(|_, _| 0.0),
    );
    let cfg = StepperConfig::new(1e-3, 0.2, 1.0, 1.0);
    let init = initialize_state(&p, &|_| 0.0, &|_| 0.0, &|_| 0.0, &src, cfg.tolerance)?;
    let traj = run(&p, &cfg, &src, init, 0)?;
    println!("{:>6} {:>12} {:>12} {:>12}", "t", "|V|", "|[U]|", "energy");
    for d in traj.steps.iter().step_by(20) {
        println!(
            "{:>6.3} {:>12.4e} {:>12.4e} {:>12.4e}",
            d.t, d.v_l2, d.jump_l2, d.energy
        );
    }
    Ok(())
}
