//! Moving the stimuli into a static field and an interface charge gives the
//! same trajectory as stepping the original problem.

use bidomain_lab::analysis::{shifted_equivalence_check, RandomData};
use bidomain_lab::mesh::{build_inclusion_mesh, CellBox};
use bidomain_lab::model::{Conductivities, IonicModel};
use bidomain_lab::stepper::{Problem, StepperConfig};

fn main() -> bidomain_lab::Result<()> {
    let mesh = build_inclusion_mesh(10, &[CellBox::new(3, 7, 3, 7)])?;
    let sigma = Conductivities::uniform(&mesh, 1.0, 0.5, 2.0)?;
    let p = Problem::new(mesh, sigma, IonicModel::zero())?;
    for (seed, data) in RandomData::batch(9, 3).into_iter().enumerate() {
        let cfg = StepperConfig::new(1e-2, 0.2, 1.0, 2.0)
            .with_ionic(false)
            .with_tolerance(1e-12);
        let r = shifted_equivalence_check(&p, &cfg, &data.sources(), &data.v0(), &data.s0())?;
        println!(
            "data set {seed}: max discrepancy {:.2e} (relative {:.2e})",
            r.max_discrepancy, r.relative
        );
    }
    Ok(())
}
