//! Perturb the initial potential by `δ·sin(πx)sin(πy)` and track how far
//! the perturbed run drifts, against the Gronwall bound.

use bidomain_lab::analysis::{stability_study, RandomData, StabilityInput};
use bidomain_lab::mesh::build_split_rectangle_mesh;
use bidomain_lab::model::{Conductivities, IonicModel};
use bidomain_lab::stepper::{Problem, StepperConfig};

fn main() -> bidomain_lab::Result<()> {
    let mesh = build_split_rectangle_mesh(12, 12, 0.5)?;
    let sigma = Conductivities::uniform(&mesh, 1.0, 1.0, 1.0)?;
    let data = RandomData::batch(5, 1).remove(0);
    for (name, ionic) in [
        ("default", IonicModel::default_hh()),
        ("growing", IonicModel::linear(-13.0)?),
    ] {
        let p = Problem::new(mesh.clone(), sigma.clone(), ionic)?;
        let src = data.sources();
        let bump = |x: [f64; 2]| (std::f64::consts::PI * x[0]).sin() * (std::f64::consts::PI * x[1]).sin();
        let r = stability_study(&StabilityInput {
            problem: &p,
            config: StepperConfig::new(2e-2, 0.5, 1.0, 1.0),
            sources: &src,
            v0: &data.v0(),
            s0: &data.s0(),
            perturbation: &bump,
            deltas: vec![1e-3, 1e-2],
            dts: vec![2e-2, 1e-2],
        })?;
        println!("{name}: Gronwall bound {:.3e}", r.gronwall_bound);
        for row in &r.rows {
            println!(
                "  delta {:.0e} dt {:.0e}: amplification {:.4}",
                row.delta, row.dt, row.amplification
            );
        }
    }
    Ok(())
}
