//! As `β` grows the jump is forced to zero and the solution approaches the
//! perfectly coupled one, with `|[U]|` falling like `1/β`.

use bidomain_lab::analysis::{beta_limit_study, BetaStudyConfig};
use bidomain_lab::mesh::build_interval_mesh;
use bidomain_lab::model::{Conductivities, IonicModel};
use bidomain_lab::stepper::{Problem, SourceSet};

fn main() -> bidomain_lab::Result<()> {
    let mesh = build_interval_mesh(16, 16, 0.5)?;
    let sigma = Conductivities::uniform(&mesh, 1.0, 1.0, 1.0)?;
    let p = Problem::new(mesh, sigma, IonicModel::default_hh())?;
    let r = beta_limit_study(
        &p,
        &BetaStudyConfig::default(),
        &SourceSet::zero(),
        &|x| x[0].sin(),
        &|_| 1.0,
    )?;
    for row in &r.rows {
        println!(
            "beta {:>7}: dt {:.1e}  |[U]| {:.3e}  distance to perfect coupling {:.3e}",
            row.beta, row.dt, row.jump_norm, row.distance_to_perfect
        );
    }
    println!("log-log slope of the distance: {:.3}", r.slope);
    Ok(())
}
