//! Passive inclusion inside excitable tissue, written as VTK snapshots.
//! Usage: `cargo run --example inclusion_vtk [out_dir]`

use std::path::PathBuf;
use std::sync::Arc;

use bidomain_lab::cli_io::write_vtk_snapshot;
use bidomain_lab::mesh::{build_inclusion_mesh, CellBox};
use bidomain_lab::model::{Conductivities, IonicModel};
use bidomain_lab::stepper::{initialize_state, run, Problem, SourceSet, StepperConfig};

fn main() -> bidomain_lab::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/inclusion_vtk".into()));
    let mesh = build_inclusion_mesh(24, &[CellBox::new(9, 15, 9, 15)])?;
    let sigma = Conductivities::uniform(&mesh, 1.0, 1.0, 0.5)?;
    let p = Problem::new(mesh, sigma, IonicModel::default_hh())?;
    let src = SourceSet::stimulus(
        Arc::new(|x: [f64; 2], _| 20.0 * (-((x[0] - 0.2).powi(2) + (x[1] - 0.2).powi(2)) / 0.01).exp()),
        Arc::new(|_, _| 0.0),
    );
    let cfg = StepperConfig::new(1e-3, 0.1, 1.0, 1.0);
    let init = initialize_state(&p, &|_| 0.0, &|_| 0.0, &|_| 0.0, &src, cfg.tolerance)?;
    let traj = run(&p, &cfg, &src, init, 25)?;
    for (k, s) in traj.snapshots.iter().enumerate() {
        let path = out.join(format!("state_{k:04}.vtk"));
        write_vtk_snapshot(&p, s, &path)?;
        println!("wrote {} (t = {:.3})", path.display(), s.t);
    }
    Ok(())
}
