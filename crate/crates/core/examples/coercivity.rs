//! Smallest generalized eigenvalue of the bilinear form against the norm
//! Gram matrix, on a refinement ladder. A bounded-below sequence is the
//! discrete sign of coercivity.

use bidomain_lab::analysis::coercivity_estimate;
use bidomain_lab::mesh::{build_inclusion_mesh, CellBox};
use bidomain_lab::model::{Conductivities, IonicModel};
use bidomain_lab::stepper::Problem;

fn main() -> bidomain_lab::Result<()> {
    for n in [6, 12, 18] {
        let k = n / 3;
        let mesh = build_inclusion_mesh(n, &[CellBox::new(k, 2 * k, k, 2 * k)])?;
        let sigma = Conductivities::uniform(&mesh, 1.0, 1.0, 1.0)?;
        let p = Problem::new(mesh, sigma, IonicModel::zero())?;
        let e = coercivity_estimate(&p, 1.0, 1e-10)?;
        println!(
            "n = {n:>2}: dim {:>4}, c_min = {:.4}, {} iterations",
            e.dimension, e.c_min, e.eigen_iterations
        );
    }
    Ok(())
}
