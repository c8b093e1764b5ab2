//! Desk-scale meshes of the unit interval and unit square, partitioned into a
//! healthy region `B`, a damaged region `D` and the interface `Γ` between them.
//!
//! Cells are segments (1D) or counter-clockwise triangles (2D). Facets are
//! detected from cell adjacency: a facet shared by a `B` and a `D` cell is an
//! interface facet, a facet with a single cell lies on `∂Ω` and is marked
//! Dirichlet for the region of that cell.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Region {
    /// Healthy tissue, bidomain equations.
    B,
    /// Damaged tissue, passive diffusion.
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeometryCase {
    /// Both regions touch `∂Ω`.
    ConnectedConnected,
    /// `D` is compactly contained in `Ω`; it may have several components.
    ConnectedDisconnected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMarker {
    /// `∂Ω ∩ ∂Ω^B`
    DirichletB,
    /// `∂Ω ∩ ∂Ω^D`
    DirichletD,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub vertices: Vec<usize>,
    pub region: Region,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceFacet {
    pub vertices: Vec<usize>,
    pub cell_b: usize,
    pub cell_d: usize,
    /// Unit normal pointing from `D` into `B`.
    pub normal: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFacet {
    pub vertices: Vec<usize>,
    pub cell: usize,
    pub marker: BoundaryMarker,
}

/// Half-open range of structured-grid cell indices `[i0, i1) × [j0, j1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellBox {
    pub i0: usize,
    pub i1: usize,
    pub j0: usize,
    pub j1: usize,
}

impl CellBox {
    pub fn new(i0: usize, i1: usize, j0: usize, j1: usize) -> Self {
        Self { i0, i1, j0, j1 }
    }

    fn contains(&self, i: usize, j: usize) -> bool {
        (self.i0..self.i1).contains(&i) && (self.j0..self.j1).contains(&j)
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    dim: usize,
    vertices: Vec<[f64; 2]>,
    cells: Vec<Cell>,
    interface_facets: Vec<InterfaceFacet>,
    boundary_facets: Vec<BoundaryFacet>,
    case: GeometryCase,
}

impl Mesh {
    /// Builds a mesh from vertices and labeled cells, deriving all facets.
    pub fn from_cells(dim: usize, vertices: Vec<[f64; 2]>, cells: Vec<Cell>, case: GeometryCase) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::config(format!("mesh dimension must be 1 or 2, got {dim}")));
        }
        let per_cell = dim + 1;
        for (c, cell) in cells.iter().enumerate() {
            if cell.vertices.len() != per_cell {
                return Err(Error::config(format!(
                    "cell {c} has {} vertices, expected {per_cell}",
                    cell.vertices.len()
                )));
            }
            if let Some(&v) = cell.vertices.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::config(format!("cell {c} references missing vertex {v}")));
            }
        }

        let mut facets: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (c, cell) in cells.iter().enumerate() {
            for f in cell_facets(&cell.vertices) {
                facets.entry(f).or_default().push(c);
            }
        }

        let mut mesh = Self {
            dim,
            vertices,
            cells,
            interface_facets: Vec::new(),
            boundary_facets: Vec::new(),
            case,
        };
        for (fv, adj) in facets {
            match adj.as_slice() {
                [c] => {
                    let marker = match mesh.cells[*c].region {
                        Region::B => BoundaryMarker::DirichletB,
                        Region::D => BoundaryMarker::DirichletD,
                    };
                    mesh.boundary_facets.push(BoundaryFacet {
                        vertices: fv,
                        cell: *c,
                        marker,
                    });
                }
                [c0, c1] => {
                    let (r0, r1) = (mesh.cells[*c0].region, mesh.cells[*c1].region);
                    if r0 != r1 {
                        let (cb, cd) = if r0 == Region::B { (*c0, *c1) } else { (*c1, *c0) };
                        let normal = mesh.facet_normal(&fv, cb, cd);
                        mesh.interface_facets.push(InterfaceFacet {
                            vertices: fv,
                            cell_b: cb,
                            cell_d: cd,
                            normal,
                        });
                    }
                }
                _ => {
                    return Err(Error::config(format!(
                        "facet {fv:?} is shared by {} cells; the cells do not form a conforming mesh",
                        adj.len()
                    )))
                }
            }
        }
        Ok(mesh)
    }

    /// Assembles a mesh from explicit parts without deriving or checking
    /// anything. Use [`validate_mesh`] to inspect the result.
    pub fn from_raw_parts(
        dim: usize,
        vertices: Vec<[f64; 2]>,
        cells: Vec<Cell>,
        interface_facets: Vec<InterfaceFacet>,
        boundary_facets: Vec<BoundaryFacet>,
        case: GeometryCase,
    ) -> Self {
        Self {
            dim,
            vertices,
            cells,
            interface_facets,
            boundary_facets,
            case,
        }
    }

    pub fn into_raw_parts(
        self,
    ) -> (
        usize,
        Vec<[f64; 2]>,
        Vec<Cell>,
        Vec<InterfaceFacet>,
        Vec<BoundaryFacet>,
        GeometryCase,
    ) {
        (
            self.dim,
            self.vertices,
            self.cells,
            self.interface_facets,
            self.boundary_facets,
            self.case,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn interface_facets(&self) -> &[InterfaceFacet] {
        &self.interface_facets
    }

    pub fn boundary_facets(&self) -> &[BoundaryFacet] {
        &self.boundary_facets
    }

    pub fn case(&self) -> GeometryCase {
        self.case
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// Signed length (1D) or signed area (2D, positive for counter-clockwise).
    pub fn signed_cell_measure(&self, c: usize) -> f64 {
        let v = &self.cells[c].vertices;
        let p = |i: usize| self.vertices[v[i]];
        match self.dim {
            1 => p(1)[0] - p(0)[0],
            _ => {
                let (a, b, c) = (p(0), p(1), p(2));
                0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
            }
        }
    }

    pub fn cell_measure(&self, c: usize) -> f64 {
        self.signed_cell_measure(c).abs()
    }

    pub fn cell_centroid(&self, c: usize) -> [f64; 2] {
        centroid(&self.vertices, &self.cells[c].vertices)
    }

    /// Length of an edge in 2D; a point facet has unit measure in 1D.
    pub fn facet_measure(&self, facet_vertices: &[usize]) -> f64 {
        match facet_vertices {
            [_] => 1.0,
            [a, b] => {
                let (p, q) = (self.vertices[*a], self.vertices[*b]);
                ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt()
            }
            _ => 0.0,
        }
    }

    pub fn region_measure(&self, region: Region) -> f64 {
        (0..self.cells.len())
            .filter(|&c| self.cells[c].region == region)
            .map(|c| self.cell_measure(c))
            .sum()
    }

    pub fn interface_measure(&self) -> f64 {
        self.interface_facets
            .iter()
            .map(|f| self.facet_measure(&f.vertices))
            .sum()
    }

    /// Sorted vertices touched by at least one cell of `region`.
    pub fn region_vertices(&self, region: Region) -> Vec<usize> {
        let mut mark = vec![false; self.vertices.len()];
        for cell in self.cells.iter().filter(|c| c.region == region) {
            for &v in &cell.vertices {
                mark[v] = true;
            }
        }
        indices_of(&mark)
    }

    /// Sorted vertices lying on an interface facet.
    pub fn interface_vertices(&self) -> Vec<usize> {
        let mut mark = vec![false; self.vertices.len()];
        for f in &self.interface_facets {
            for &v in &f.vertices {
                mark[v] = true;
            }
        }
        indices_of(&mark)
    }

    /// Per-vertex flag: vertex lies on a boundary facet with the given marker.
    pub fn dirichlet_mask(&self, marker: BoundaryMarker) -> Vec<bool> {
        let mut mark = vec![false; self.vertices.len()];
        for f in self.boundary_facets.iter().filter(|f| f.marker == marker) {
            for &v in &f.vertices {
                mark[v] = true;
            }
        }
        mark
    }

    pub fn has_dirichlet(&self, marker: BoundaryMarker) -> bool {
        self.boundary_facets.iter().any(|f| f.marker == marker)
    }

    pub fn min_max_cell_measure(&self) -> (f64, f64) {
        (0..self.cells.len())
            .map(|c| self.cell_measure(c))
            .fold((f64::INFINITY, 0.0), |(lo, hi), m| (lo.min(m), hi.max(m)))
    }

    /// Uniform refinement of the structured builders is not available for
    /// arbitrary meshes; this returns the characteristic cell size instead.
    pub fn max_cell_diameter(&self) -> f64 {
        self.cells
            .iter()
            .map(|cell| {
                let mut d: f64 = 0.0;
                for (i, &a) in cell.vertices.iter().enumerate() {
                    for &b in &cell.vertices[i + 1..] {
                        let (p, q) = (self.vertices[a], self.vertices[b]);
                        d = d.max(((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt());
                    }
                }
                d
            })
            .fold(0.0, f64::max)
    }

    fn facet_normal(&self, fv: &[usize], cb: usize, cd: usize) -> [f64; 2] {
        let gb = self.cell_centroid(cb);
        let gd = self.cell_centroid(cd);
        let dir = [gb[0] - gd[0], gb[1] - gd[1]];
        let n = match fv {
            [_] => [1.0, 0.0],
            [a, b] => {
                let (p, q) = (self.vertices[*a], self.vertices[*b]);
                let t = [q[0] - p[0], q[1] - p[1]];
                let len = (t[0] * t[0] + t[1] * t[1]).sqrt();
                [-t[1] / len, t[0] / len]
            }
            _ => [0.0, 0.0],
        };
        if n[0] * dir[0] + n[1] * dir[1] < 0.0 {
            [-n[0], -n[1]]
        } else {
            n
        }
    }
}

fn indices_of(mark: &[bool]) -> Vec<usize> {
    mark.iter().enumerate().filter_map(|(i, &m)| m.then_some(i)).collect()
}

fn centroid(vertices: &[[f64; 2]], ids: &[usize]) -> [f64; 2] {
    let k = ids.len() as f64;
    let (sx, sy) = ids
        .iter()
        .fold((0.0, 0.0), |(x, y), &v| (x + vertices[v][0], y + vertices[v][1]));
    [sx / k, sy / k]
}

fn cell_facets(cell: &[usize]) -> Vec<Vec<usize>> {
    match cell {
        [a, b] => vec![vec![*a], vec![*b]],
        [a, b, c] => [(a, b), (b, c), (c, a)]
            .iter()
            .map(|&(p, q)| {
                let mut e = vec![*p, *q];
                e.sort_unstable();
                e
            })
            .collect(),
        _ => Vec::new(),
    }
}

/// `Ω = (0,1)`, `B = (0, split)` with `n_b` uniform cells, `D = (split, 1)` with `n_d`.
pub fn build_interval_mesh(n_b: usize, n_d: usize, split: f64) -> Result<Mesh> {
    if n_b == 0 || n_d == 0 {
        return Err(Error::config(format!(
            "interval mesh needs at least one cell per region (n_b = {n_b}, n_d = {n_d})"
        )));
    }
    if !(split > 0.0 && split < 1.0) {
        return Err(Error::config(format!("interval split must lie in (0,1), got {split}")));
    }
    let hb = split / n_b as f64;
    let hd = (1.0 - split) / n_d as f64;
    let mut vertices: Vec<[f64; 2]> = (0..n_b).map(|i| [i as f64 * hb, 0.0]).collect();
    vertices.push([split, 0.0]);
    vertices.extend((1..n_d).map(|j| [split + j as f64 * hd, 0.0]));
    vertices.push([1.0, 0.0]);
    let cells = (0..n_b + n_d)
        .map(|c| Cell {
            vertices: vec![c, c + 1],
            region: if c < n_b { Region::B } else { Region::D },
        })
        .collect();
    Mesh::from_cells(1, vertices, cells, GeometryCase::ConnectedConnected)
}

fn structured_square(nx: usize, ny: usize, label: impl Fn(usize, usize) -> Region) -> (Vec<[f64; 2]>, Vec<Cell>) {
    let vid = |i: usize, j: usize| j * (nx + 1) + i;
    let vertices = (0..=ny)
        .flat_map(|j| (0..=nx).map(move |i| [i as f64 / nx as f64, j as f64 / ny as f64]))
        .collect();
    let mut cells = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let region = label(i, j);
            let (a, b, c, d) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            cells.push(Cell {
                vertices: vec![a, b, c],
                region,
            });
            cells.push(Cell {
                vertices: vec![a, c, d],
                region,
            });
        }
    }
    (vertices, cells)
}

/// Unit square on an `nx × ny` grid, each square cut along its rising
/// diagonal. Cells left of `x = split` form `B`.
pub fn build_split_rectangle_mesh(nx: usize, ny: usize, split: f64) -> Result<Mesh> {
    if nx < 2 || ny == 0 {
        return Err(Error::config(format!(
            "split rectangle needs nx >= 2 and ny >= 1 (got nx = {nx}, ny = {ny})"
        )));
    }
    let k = split * nx as f64;
    let k_round = k.round();
    if (k - k_round).abs() > 1e-9 || k_round < 1.0 || k_round > (nx - 1) as f64 {
        return Err(Error::config(format!(
            "split {split} is not aligned to an interior grid line of nx = {nx}"
        )));
    }
    let split_col = k_round as usize;
    let (vertices, cells) = structured_square(nx, ny, |i, _| if i < split_col { Region::B } else { Region::D });
    Mesh::from_cells(2, vertices, cells, GeometryCase::ConnectedConnected)
}

/// Unit square on an `n × n` grid with `D` made of the given cell boxes, each
/// strictly inside the grid.
pub fn build_inclusion_mesh(n: usize, boxes: &[CellBox]) -> Result<Mesh> {
    if n < 3 {
        return Err(Error::config(format!("inclusion mesh needs n >= 3, got {n}")));
    }
    if boxes.is_empty() {
        return Err(Error::config("inclusion mesh needs at least one box"));
    }
    for (k, b) in boxes.iter().enumerate() {
        if b.i0 >= b.i1 || b.j0 >= b.j1 {
            return Err(Error::config(format!("box {k} {b:?} is empty")));
        }
        if b.i0 == 0 || b.j0 == 0 || b.i1 >= n || b.j1 >= n {
            return Err(Error::config(format!(
                "box {k} {b:?} touches the outer boundary of the {n}x{n} grid; the damaged region must be compactly contained"
            )));
        }
        for (m, other) in boxes.iter().enumerate().take(k) {
            let overlap = b.i0 < other.i1 && other.i0 < b.i1 && b.j0 < other.j1 && other.j0 < b.j1;
            if overlap {
                return Err(Error::config(format!("boxes {m} and {k} overlap")));
            }
        }
    }
    let (vertices, cells) = structured_square(n, n, |i, j| {
        if boxes.iter().any(|b| b.contains(i, j)) {
            Region::D
        } else {
            Region::B
        }
    });
    Mesh::from_cells(2, vertices, cells, GeometryCase::ConnectedDisconnected)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshReport {
    pub violations: Vec<String>,
    pub min_cell_measure: f64,
    pub max_cell_measure: f64,
    pub interface_facet_count: usize,
    pub boundary_facet_count: usize,
    /// `V − F` in 1D, `V − E + F` in 2D; 1 for a tiling of an interval or a disk.
    pub euler_characteristic: i64,
    pub dirichlet_d_empty: bool,
    pub case: GeometryCase,
}

impl MeshReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every mesh invariant; never fails, violations are listed in the report.
pub fn validate_mesh(mesh: &Mesh) -> MeshReport {
    let mut violations = Vec::new();
    let n_cells = mesh.cells.len();

    for c in 0..n_cells {
        if mesh.cells[c].vertices.iter().any(|&v| v >= mesh.vertices.len()) {
            violations.push(format!("cell {c} references a missing vertex"));
            continue;
        }
        let m = mesh.signed_cell_measure(c);
        if !(m > 0.0) {
            violations.push(format!("cell {c} has non-positive measure {m:e}"));
        }
    }

    for (k, f) in mesh.interface_facets.iter().enumerate() {
        if f.cell_b >= n_cells || f.cell_d >= n_cells {
            violations.push(format!("interface facet {k} references a missing cell"));
            continue;
        }
        let (rb, rd) = (mesh.cells[f.cell_b].region, mesh.cells[f.cell_d].region);
        if rb != Region::B || rd != Region::D {
            violations.push(format!("interface facet {k} not B|D (adjacent regions {rb:?}, {rd:?})"));
        }
        for &cell in &[f.cell_b, f.cell_d] {
            if !f.vertices.iter().all(|v| mesh.cells[cell].vertices.contains(v)) {
                violations.push(format!("interface facet {k} is not a facet of cell {cell}"));
            }
        }
        let len = (f.normal[0].powi(2) + f.normal[1].powi(2)).sqrt();
        if (len - 1.0).abs() > 1e-12 {
            violations.push(format!("interface facet {k} normal is not unit (length {len})"));
        }
        let gb = mesh.cell_centroid(f.cell_b);
        let gd = mesh.cell_centroid(f.cell_d);
        let s = f.normal[0] * (gb[0] - gd[0]) + f.normal[1] * (gb[1] - gd[1]);
        if !(s > 0.0) {
            violations.push(format!("interface facet {k} normal does not point from D into B"));
        }
    }

    for (k, f) in mesh.boundary_facets.iter().enumerate() {
        if f.cell >= n_cells {
            violations.push(format!("boundary facet {k} references a missing cell"));
            continue;
        }
        let expected = match mesh.cells[f.cell].region {
            Region::B => BoundaryMarker::DirichletB,
            Region::D => BoundaryMarker::DirichletD,
        };
        if f.marker != expected {
            violations.push(format!(
                "boundary facet {k} marker {:?} disagrees with adjacent region",
                f.marker
            ));
        }
    }

    let has_b = mesh.has_dirichlet(BoundaryMarker::DirichletB);
    let has_d = mesh.has_dirichlet(BoundaryMarker::DirichletD);
    match mesh.case {
        GeometryCase::ConnectedDisconnected => {
            if has_d {
                violations
                    .push("connected/disconnected mesh has a DirichletD facet: D touches the outer boundary".into());
            }
            if !has_b {
                violations.push("DirichletB is empty".into());
            }
        }
        GeometryCase::ConnectedConnected => {
            if !has_b || !has_d {
                violations.push("connected/connected mesh needs both DirichletB and DirichletD facets".into());
            }
        }
    }

    // tiling: measures must add up to the bounding box and facets be conforming
    let (lo, hi) = mesh
        .vertices
        .iter()
        .fold(([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]), |(lo, hi), p| {
            ([lo[0].min(p[0]), lo[1].min(p[1])], [hi[0].max(p[0]), hi[1].max(p[1])])
        });
    let bbox = match mesh.dim {
        1 => hi[0] - lo[0],
        _ => (hi[0] - lo[0]) * (hi[1] - lo[1]),
    };
    let total: f64 = (0..n_cells)
        .filter(|&c| mesh.cells[c].vertices.iter().all(|&v| v < mesh.vertices.len()))
        .map(|c| mesh.cell_measure(c))
        .sum();
    if n_cells > 0 && (total - bbox).abs() > 1e-12 * bbox.max(1.0) {
        violations.push(format!(
            "cells cover {total} but the domain measures {bbox}: overlap or gap"
        ));
    }

    let mut facet_count: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for cell in &mesh.cells {
        for f in cell_facets(&cell.vertices) {
            *facet_count.entry(f).or_default() += 1;
        }
    }
    if let Some((f, k)) = facet_count.iter().find(|(_, &k)| k > 2) {
        violations.push(format!("facet {f:?} shared by {k} cells"));
    }
    let used_vertices = {
        let n = mesh.vertices.len();
        let mut m = vec![false; n];
        mesh.cells
            .iter()
            .flat_map(|c| c.vertices.iter())
            .filter(|&&v| v < n)
            .for_each(|&v| m[v] = true);
        m.iter().filter(|&&b| b).count() as i64
    };
    let euler = match mesh.dim {
        1 => used_vertices - n_cells as i64,
        _ => used_vertices - facet_count.len() as i64 + n_cells as i64,
    };
    if euler != 1 {
        violations.push(format!("Euler characteristic {euler}, expected 1"));
    }

    let (min_m, max_m) = if n_cells == 0 {
        (0.0, 0.0)
    } else {
        mesh.min_max_cell_measure()
    };
    MeshReport {
        violations,
        min_cell_measure: min_m,
        max_cell_measure: max_m,
        interface_facet_count: mesh.interface_facets.len(),
        boundary_facet_count: mesh.boundary_facets.len(),
        euler_characteristic: euler,
        dirichlet_d_empty: !has_d,
        case: mesh.case,
    }
}
