//! Ratio of the energy left side to the data functional over random data
//! sets and two meshes. A bounded ratio is the a priori estimate at work.

use bidomain_lab::analysis::{energy_study, EnergyStudyConfig};

fn main() -> bidomain_lab::Result<()> {
    let cfg = EnergyStudyConfig {
        datasets: 8,
        ..Default::default()
    };
    let r = energy_study(&cfg)?;
    for (n, row) in cfg.mesh_sizes.iter().zip(&r.ratios) {
        let max = row.iter().cloned().fold(0.0, f64::max);
        println!("n = {n:>2}: max ratio {max:.4}");
    }
    println!(
        "calibrated constant {:.4}; all within 2x: {}",
        r.calibrated,
        r.within(2.0)
    );
    Ok(())
}
