use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::csv::{format_float, write_text};
use crate::error::{Error, Result};
use crate::mesh::Region;
use crate::stepper::{Problem, State};

/// VTK cell type code of a linear triangle.
const VTK_TRIANGLE: u8 = 5;

/// Legacy ASCII unstructured grid with point data `V`, `U_B`, `U_D`, `w`
/// and cell data `region` (0 for B, 1 for D). Fields are zero where the
/// region carries no dof, so a vertex on `Γ` holds both sides of the jump
/// in `U_B` and `U_D`.
pub fn vtk_snapshot(problem: &Problem, state: &State) -> Result<String> {
    let mesh = problem.mesh();
    let d = problem.dofs();
    if mesh.dim() != 2 {
        return Err(Error::config("VTK snapshots need a 2D mesh"));
    }
    if state.v.len() != d.n_v() || state.u.len() != d.n_u() || state.w.len() != d.n_v() {
        return Err(Error::DimensionMismatch {
            context: "VTK state",
            expected: d.n_total(),
            actual: state.v.len() + state.u.len(),
        });
    }
    let (ub, ud) = d.split_u(&state.u);
    let fields = [
        ("V", d.b_to_vertices(&state.v)),
        ("U_B", d.b_to_vertices(ub)),
        ("U_D", d.d_to_vertices(ud)),
        ("w", d.b_to_vertices(&state.w)),
    ];

    let n = mesh.n_vertices();
    let nc = mesh.n_cells();
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(out, "bidomain state t={}", format_float(state.t));
    out.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(out, "POINTS {n} double");
    for p in mesh.vertices() {
        let _ = writeln!(out, "{} {} 0", format_float(p[0]), format_float(p[1]));
    }
    let _ = writeln!(out, "CELLS {nc} {}", 4 * nc);
    for c in mesh.cells() {
        let _ = writeln!(out, "3 {} {} {}", c.vertices[0], c.vertices[1], c.vertices[2]);
    }
    let _ = writeln!(out, "CELL_TYPES {nc}");
    for _ in 0..nc {
        let _ = writeln!(out, "{VTK_TRIANGLE}");
    }
    let _ = writeln!(out, "CELL_DATA {nc}");
    out.push_str("SCALARS region int 1\nLOOKUP_TABLE default\n");
    for c in mesh.cells() {
        out.push_str(if c.region == Region::B { "0\n" } else { "1\n" });
    }
    let _ = writeln!(out, "POINT_DATA {n}");
    for (name, values) in &fields {
        let _ = writeln!(out, "SCALARS {name} double 1");
        out.push_str("LOOKUP_TABLE default\n");
        for v in values {
            out.push_str(&format_float(*v));
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn write_vtk_snapshot(problem: &Problem, state: &State, path: &Path) -> Result<()> {
    write_text(path, &vtk_snapshot(problem, state)?)
}

/// What [`read_vtk`] understands of a legacy file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VtkData {
    pub title: String,
    pub points: Vec<[f64; 3]>,
    pub cells: Vec<Vec<usize>>,
    pub cell_types: Vec<u8>,
    pub point_data: BTreeMap<String, Vec<f64>>,
    pub cell_data: BTreeMap<String, Vec<f64>>,
}

/// Minimal reader for the legacy ASCII unstructured-grid subset written
/// above: `POINTS`, `CELLS`, `CELL_TYPES` and scalar `POINT_DATA`/`CELL_DATA`.
pub fn read_vtk(text: &str) -> Result<VtkData> {
    let bad = |msg: String| Error::config(format!("VTK: {msg}"));
    let mut lines = text.lines();
    let version = lines.next().unwrap_or_default();
    if !version.starts_with("# vtk DataFile Version") {
        return Err(bad(format!("missing version line, got '{version}'")));
    }
    let title = lines.next().unwrap_or_default().to_string();
    if lines.next().map(str::trim) != Some("ASCII") {
        return Err(bad("only ASCII files are supported".into()));
    }
    if lines.next().map(str::trim) != Some("DATASET UNSTRUCTURED_GRID") {
        return Err(bad("expected DATASET UNSTRUCTURED_GRID".into()));
    }

    let mut tokens = lines.flat_map(str::split_whitespace).peekable();
    let mut next = |what: &str| {
        tokens
            .next()
            .ok_or_else(|| bad(format!("unexpected end of file reading {what}")))
    };
    fn num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
        s.parse().map_err(|_| Error::config(format!("VTK: bad {what} '{s}'")))
    }

    let mut data = VtkData {
        title,
        ..Default::default()
    };
    // which attribute section we are in, and its expected length
    let mut section: Option<(bool, usize)> = None;
    while let Ok(kw) = next("keyword") {
        match kw {
            "POINTS" => {
                let n: usize = num(next("point count")?, "point count")?;
                next("point type")?;
                for _ in 0..n {
                    let mut p = [0.0; 3];
                    for x in p.iter_mut() {
                        *x = num(next("coordinate")?, "coordinate")?;
                    }
                    data.points.push(p);
                }
            }
            "CELLS" => {
                let n: usize = num(next("cell count")?, "cell count")?;
                let size: usize = num(next("cell list size")?, "cell list size")?;
                let mut used = 0;
                for _ in 0..n {
                    let k: usize = num(next("cell size")?, "cell size")?;
                    let mut c = Vec::with_capacity(k);
                    for _ in 0..k {
                        let v: usize = num(next("cell vertex")?, "cell vertex")?;
                        if v >= data.points.len() {
                            return Err(bad(format!("cell vertex {v} out of range")));
                        }
                        c.push(v);
                    }
                    used += k + 1;
                    data.cells.push(c);
                }
                if used != size {
                    return Err(bad(format!("CELLS size {size} does not match contents {used}")));
                }
            }
            "CELL_TYPES" => {
                let n: usize = num(next("cell type count")?, "cell type count")?;
                for _ in 0..n {
                    data.cell_types.push(num(next("cell type")?, "cell type")?);
                }
            }
            "POINT_DATA" => section = Some((true, num(next("point data count")?, "point data count")?)),
            "CELL_DATA" => section = Some((false, num(next("cell data count")?, "cell data count")?)),
            "SCALARS" => {
                let (is_point, n) = section.ok_or_else(|| bad("SCALARS outside a data section".into()))?;
                let name = next("scalar name")?.to_string();
                next("scalar type")?;
                let mut tok = next("LOOKUP_TABLE")?;
                if tok != "LOOKUP_TABLE" {
                    // optional component count
                    tok = next("LOOKUP_TABLE")?;
                }
                if tok != "LOOKUP_TABLE" {
                    return Err(bad(format!("expected LOOKUP_TABLE after SCALARS {name}")));
                }
                next("table name")?;
                let values = (0..n)
                    .map(|_| num::<f64>(next("scalar value")?, "scalar value"))
                    .collect::<Result<Vec<_>>>()?;
                if is_point {
                    data.point_data.insert(name, values);
                } else {
                    data.cell_data.insert(name, values);
                }
            }
            other => return Err(bad(format!("unsupported keyword '{other}'"))),
        }
    }
    if data.cells.len() != data.cell_types.len() {
        return Err(bad("CELLS and CELL_TYPES disagree in length".into()));
    }
    Ok(data)
}
