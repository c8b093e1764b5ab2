//! Unit square split at `x = 0.5`, a random smooth stimulus, and the CG cost
//! per step.

use bidomain_lab::analysis::RandomData;
use bidomain_lab::mesh::build_split_rectangle_mesh;
use bidomain_lab::model::{Conductivities, IonicModel};
use bidomain_lab::stepper::{initialize_state, run, Problem, StepperConfig};

fn main() -> bidomain_lab::Result<()> {
    let mesh = build_split_rectangle_mesh(24, 24, 0.5)?;
    let sigma = Conductivities::uniform(&mesh, 1.0, 0.5, 2.0)?;
    let p = Problem::new(mesh, sigma, IonicModel::default_hh())?;
    let data = RandomData::batch(3, 1).remove(0);
    let src = data.sources();
    let cfg = StepperConfig::new(5e-3, 0.25, 1.0, 1.0);
    let init = initialize_state(&p, &data.v0(), &data.s0(), &|_| 0.0, &src, cfg.tolerance)?;
    let traj = run(&p, &cfg, &src, init, 0)?;
    let iters: Vec<usize> = traj.steps.iter().map(|d| d.cg_iterations).collect();
    let last = traj.steps.last().unwrap();
    println!("{} dofs, {} steps", p.dofs().n_total(), traj.steps.len());
    println!(
        "CG iterations per step: min {} max {}",
        iters.iter().min().unwrap(),
        iters.iter().max().unwrap()
    );
    println!("final |V| = {:.4e}, |[U]| = {:.4e}", last.v_l2, last.jump_l2);
    Ok(())
}
