use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::stepper::StepDiagnostics;

pub const SERIES_HEADER: &str = "t,v_l2,jump_l2,energy_v,energy_jump,energy,cg_iterations";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header plus one row per step. The initial state has no row.
pub fn csv_series(steps: &[StepDiagnostics]) -> String {
    let mut out = String::with_capacity(64 * (steps.len() + 1));
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for d in steps {
        let cols = [d.t, d.v_l2, d.jump_l2, d.energy_v, d.energy_jump, d.energy];
        for c in cols {
            out.push_str(&format_float(c));
            out.push(',');
        }
        let _ = writeln!(out, "{}", d.cg_iterations);
    }
    out
}

pub fn write_csv_series(steps: &[StepDiagnostics], path: &Path) -> Result<()> {
    write_text(path, &csv_series(steps))
}

/// Generic table with float cells.
pub fn csv_table(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|&x| format_float(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv_table(header: &[&str], rows: &[Vec<f64>], path: &Path) -> Result<()> {
    if let Some(r) = rows.iter().find(|r| r.len() != header.len()) {
        return Err(Error::DimensionMismatch {
            context: "CSV row",
            expected: header.len(),
            actual: r.len(),
        });
    }
    write_text(path, &csv_table(header, rows))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(t: f64, x: f64) -> StepDiagnostics {
        StepDiagnostics {
            t,
            v_l2: x,
            jump_l2: x,
            energy_v: x,
            energy_jump: x,
            energy: x,
            cg_iterations: 3,
            grad_v_sq: x,
            grad_ub_sq: x,
            grad_ud_sq: x,
        }
    }

    #[test]
    fn floats_round_trip_through_text() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(format_float(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn one_row_per_step_and_lf_endings() {
        let s = csv_series(&[diag(0.1, 0.0), diag(0.2, 0.0)]);
        assert_eq!(s.lines().count(), 3);
        assert!(!s.contains('\r'));
        assert!(s.ends_with('\n'));
        let row: Vec<&str> = s.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row.len(), 7);
        assert!(row[1..6].iter().all(|c| c.parse::<f64>().unwrap() == 0.0));
    }

    #[test]
    fn table_rejects_ragged_rows() {
        let dir = tempfile::tempdir().unwrap();
        let err = write_csv_table(&["a", "b"], &[vec![1.0]], &dir.path().join("t.csv"));
        assert!(err.is_err());
    }
}
