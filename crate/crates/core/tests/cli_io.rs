use std::path::{Path, PathBuf};
use std::process::Command as Proc;

use bidomain_lab::cli_io::*;

const ZERO_RUN: &str = r#"
command = "run"

[mesh]
builder = "split-rectangle"
nx = 4
ny = 4

[ionic]
model = "zero"

[sources]
preset = "zero"

[time]
dt = 0.05
horizon = 0.5
"#;

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs")
}

#[test]
fn zero_run_writes_all_zero_series() {
    let cfg = parse_config(ZERO_RUN).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let outcome = execute(Command::Run, &cfg, dir.path()).unwrap();
    assert_eq!(outcome.verdict, None);
    let text = std::fs::read_to_string(dir.path().join("series.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(SERIES_HEADER));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    for (k, row) in rows.iter().enumerate() {
        let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 7);
        assert!((cols[0] - 0.05 * (k + 1) as f64).abs() < 1e-12);
        assert!(cols[1..6].iter().all(|&c| c == 0.0), "{row}");
    }
}

#[test]
fn reruns_write_identical_bytes() {
    let mut cfg = parse_config(ZERO_RUN).unwrap();
    cfg.sources.preset = SourcePreset::Random;
    cfg.initial.s0 = InitialPreset::Bump;
    cfg.output.cadence = 5;
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let fa = execute(Command::Run, &cfg, a.path()).unwrap().files;
    let fb = execute(Command::Run, &cfg, b.path()).unwrap().files;
    assert_eq!(fa.len(), fb.len());
    assert!(fa.len() > 1);
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(x.file_name(), y.file_name());
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap(), "{}", x.display());
    }
}

#[test]
fn vtk_snapshots_read_back_with_the_interface_jump() {
    let mut cfg = parse_config(ZERO_RUN).unwrap();
    cfg.mesh = MeshSpec::Inclusion {
        n: 8,
        boxes: vec![[2, 5, 3, 6]],
    };
    cfg.initial.s0 = InitialPreset::Bump;
    cfg.initial.s0_amplitude = 0.7;
    cfg.time.horizon = 0.1;
    cfg.output.cadence = 1;
    let dir = tempfile::tempdir().unwrap();
    let files = execute(Command::Run, &cfg, dir.path()).unwrap().files;
    let first = files.iter().find(|f| f.ends_with("state_0000.vtk")).unwrap();
    let data = read_vtk(&std::fs::read_to_string(first).unwrap()).unwrap();

    let p = cfg.problem().unwrap();
    assert_eq!(data.points.len(), p.mesh().n_vertices());
    assert_eq!(data.cells.len(), p.mesh().n_cells());
    assert!(data.cell_types.iter().all(|&t| t == 5));
    let (ub, ud) = (&data.point_data["U_B"], &data.point_data["U_D"]);
    for pair in p.dofs().jump_pairs() {
        let v = pair.vertex;
        assert!((ub[v] - ud[v] - 0.7).abs() < 1e-12, "vertex {v}");
    }
    let d_cells = data.cell_data["region"].iter().filter(|&&r| r == 1.0).count();
    assert_eq!(d_cells, 2 * 9);
}

#[test]
fn every_shipped_config_parses_and_round_trips() {
    let mut seen = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("toml") {
            continue;
        }
        let cfg = load_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let back = parse_config(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, back, "{}", path.display());
        seen += 1;
    }
    assert_eq!(seen, 6);
}

#[test]
fn output_directory_precedence() {
    let cfg = parse_config("[output]\ndir = \"from-config\"").unwrap();
    let cli = Path::new("from-cli");
    assert_eq!(resolve_out_dir(Some(cli), Some("from-env"), &cfg), cli);
    assert_eq!(resolve_out_dir(None, Some("from-env"), &cfg), Path::new("from-env"));
    assert_eq!(resolve_out_dir(None, Some(""), &cfg), Path::new("from-config"));
    assert_eq!(resolve_out_dir(None, None, &cfg), Path::new("from-config"));
}

#[test]
fn config_errors_name_the_key() {
    let cases = [
        ("[interface]\nalpha = -1.0", "interface.alpha"),
        ("[time]\ndt = 1.0\nhorizon = 0.5", "time.dt"),
        (
            "[mesh]\nbuilder = \"inclusion\"\nn = 4\nboxes = [[0, 5, 0, 1]]",
            "mesh.boxes[0]",
        ),
        ("[ionic]\nmodel = \"fitzhugh\"", "ionic.model"),
        ("[time]\nstep = 0.1", "time"),
        ("[sources]\npreset = \"pulse\"", "sources.preset"),
        ("[beta_sweep]\nbetas = [1.0]", "beta_sweep.betas"),
    ];
    for (text, key) in cases {
        let msg = parse_config(text).unwrap_err().to_string();
        assert!(msg.contains(key), "{text:?} gave {msg}");
    }
}

fn bin() -> Proc {
    Proc::new(env!("CARGO_BIN_EXE_bidomain-lab"))
}

#[test]
fn binary_rejects_unknown_subcommands_with_usage() {
    let out = bin().args(["simulate", "--config", "x.toml"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn binary_reports_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[interface]\nbeta = 0.0\n").unwrap();
    let out = bin().arg("run").arg("--config").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("interface.beta"));
}

#[test]
fn binary_runs_and_writes_into_the_out_directory() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, ZERO_RUN).unwrap();
    let target = dir.path().join("results");
    let out = bin()
        .arg("run")
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(&target)
        .env(OUT_DIR_ENV, dir.path().join("ignored"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(target.join("series.csv").exists());
    assert!(!dir.path().join("ignored").exists());
}

#[test]
fn binary_coercivity_passes_on_a_small_inclusion() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    std::fs::write(
        &path,
        "[mesh]\nbuilder = \"inclusion\"\nn = 6\nboxes = [[2, 4, 2, 4]]\n",
    )
    .unwrap();
    let out = bin()
        .arg("coercivity")
        .arg("--config")
        .arg(&path)
        .env(OUT_DIR_ENV, dir.path().join("out"))
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.contains("coercivity: PASS"), "{stdout}");
    assert!(dir.path().join("out/coercivity.csv").exists());
}

#[test]
fn stimulus_preset_drives_interval_runs() {
    let cfg = parse_config(
        "[mesh]\nbuilder = \"interval\"\nn_b = 16\nn_d = 16\n[sources]\npreset = \"stimulus\"\n[time]\ndt = 1e-3\nhorizon = 0.05\n",
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    execute(Command::Run, &cfg, dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("series.csv")).unwrap();
    let last: Vec<f64> = text
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|c| c.parse().unwrap())
        .collect();
    assert!(last[1] > 1e-3, "|V| = {}", last[1]);
}
