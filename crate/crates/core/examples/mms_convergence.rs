//! Manufactured solution on the interval: second order in space, first
//! order in time.

use bidomain_lab::analysis::{mms_convergence, ConvergenceTable, ManufacturedSolution, MmsStudy};

fn print(name: &str, t: &ConvergenceTable) {
    println!("{name}");
    for (k, r) in t.rows.iter().enumerate() {
        let rate = if k == 0 {
            String::new()
        } else {
            format!("{:.3}", t.rates_v[k - 1])
        };
        println!("  h {:.4} dt {:.2e}  |V - v| {:.3e}  rate {rate}", r.h, r.dt, r.error_v);
    }
}

fn main() -> bidomain_lab::Result<()> {
    let spatial = MmsStudy::spatial(ManufacturedSolution::oscillating(), 8, 4, 1.0, 0.1);
    print("spatial", &mms_convergence(&spatial)?);
    let temporal = MmsStudy::temporal(ManufacturedSolution::oscillating(), 1024, 0.02, 3, 0.2);
    print("temporal", &mms_convergence(&temporal)?);
    Ok(())
}
