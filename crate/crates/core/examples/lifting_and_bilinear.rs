//! Lifts `(w, r)` to a field `W` with `W = w` on the B-side Dirichlet part
//! and `[W] = r`, compares it with the two-stage construction, and evaluates
//! the bilinear form.

use bidomain_lab::analysis::{bilinear_from_liftings, solve_lifting, two_stage_lifting};
use bidomain_lab::mesh::{build_inclusion_mesh, CellBox};
use bidomain_lab::model::{Conductivities, IonicModel};
use bidomain_lab::sparse_linalg::norm2;
use bidomain_lab::stepper::Problem;

fn main() -> bidomain_lab::Result<()> {
    let mesh = build_inclusion_mesh(12, &[CellBox::new(4, 8, 3, 9)])?;
    let sigma = Conductivities::uniform(&mesh, 1.0, 2.0, 0.5)?;
    let p = Problem::new(mesh, sigma, IonicModel::zero())?;
    let d = p.dofs();
    let x = p.mesh().vertices();
    let w: Vec<f64> = d.v_vertices().iter().map(|&v| x[v][0] * (1.0 - x[v][1])).collect();
    let r = d.interpolate_jump(p.mesh(), |x| 0.5 + x[1]);

    let lift = solve_lifting(&p, &w, &r, 1e-12)?;
    let oracle = two_stage_lifting(&p, &w, &r)?;
    let diff: Vec<f64> = lift.field.iter().zip(&oracle).map(|(a, b)| a - b).collect();
    println!("|W - W_two_stage| / |W| = {:.2e}", norm2(&diff) / norm2(&oracle));
    println!(
        "|W|_X = {:.4}, |w|_H1 = {:.4}, |r|_1/2 = {:.4}",
        lift.norm_x_sq.sqrt(),
        lift.norm_w_sq.sqrt(),
        lift.norm_r_sq.sqrt()
    );
    for beta in [0.1, 1.0, 10.0] {
        println!(
            "a(x, x) at beta {beta:>4} = {:.6}",
            bilinear_from_liftings(&p, &lift, &lift, beta)?
        );
    }
    Ok(())
}
