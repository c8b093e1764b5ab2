use crate::mesh::{BoundaryMarker, Mesh, Region};

/// The two U dofs carried by one interface vertex, as indices into the U block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JumpPair {
    pub vertex: usize,
    pub u_b: usize,
    pub u_d: usize,
}

/// Dof layout for `V` on the healthy region and the broken potential `U`.
///
/// Global vector: `[V | U_B | U_D]`. Inside the U block, B-side dofs come
/// first and D-side dofs follow, so a [`JumpPair`] indexes `U` directly.
/// Interface vertices are duplicated; vertices on a Dirichlet facet of a
/// region carry no dof for that region.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    n_vertices: usize,
    v_vertices: Vec<usize>,
    d_vertices: Vec<usize>,
    b_index: Vec<Option<usize>>,
    d_index: Vec<Option<usize>>,
    gamma_vertices: Vec<usize>,
    jump_pairs: Vec<JumpPair>,
}

pub fn build_dof_map(mesh: &Mesh) -> DofMap {
    let n = mesh.n_vertices();
    let dir_b = mesh.dirichlet_mask(BoundaryMarker::DirichletB);
    let dir_d = mesh.dirichlet_mask(BoundaryMarker::DirichletD);
    let on_boundary: Vec<bool> = dir_b.iter().zip(&dir_d).map(|(a, b)| *a || *b).collect();

    let v_vertices: Vec<usize> = mesh
        .region_vertices(Region::B)
        .into_iter()
        .filter(|&v| !on_boundary[v])
        .collect();
    let d_vertices: Vec<usize> = mesh
        .region_vertices(Region::D)
        .into_iter()
        .filter(|&v| !on_boundary[v])
        .collect();

    let mut b_index = vec![None; n];
    for (k, &v) in v_vertices.iter().enumerate() {
        b_index[v] = Some(k);
    }
    let mut d_index = vec![None; n];
    for (k, &v) in d_vertices.iter().enumerate() {
        d_index[v] = Some(k);
    }

    let gamma_vertices = mesh.interface_vertices();
    let nb = v_vertices.len();
    let jump_pairs = gamma_vertices
        .iter()
        .filter_map(|&v| {
            Some(JumpPair {
                vertex: v,
                u_b: b_index[v]?,
                u_d: nb + d_index[v]?,
            })
        })
        .collect();

    DofMap {
        n_vertices: n,
        v_vertices,
        d_vertices,
        b_index,
        d_index,
        gamma_vertices,
        jump_pairs,
    }
}

impl DofMap {
    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_v(&self) -> usize {
        self.v_vertices.len()
    }

    pub fn n_ub(&self) -> usize {
        self.v_vertices.len()
    }

    pub fn n_ud(&self) -> usize {
        self.d_vertices.len()
    }

    pub fn n_u(&self) -> usize {
        self.n_ub() + self.n_ud()
    }

    pub fn n_total(&self) -> usize {
        self.n_v() + self.n_u()
    }

    pub fn n_jump(&self) -> usize {
        self.jump_pairs.len()
    }

    /// Vertices carrying a V dof; the same list, in the same order, carries the U_B dofs.
    pub fn v_vertices(&self) -> &[usize] {
        &self.v_vertices
    }

    pub fn ub_vertices(&self) -> &[usize] {
        &self.v_vertices
    }

    pub fn ud_vertices(&self) -> &[usize] {
        &self.d_vertices
    }

    /// Vertex → index in the V block (equal to the index among U_B dofs).
    pub fn b_index(&self) -> &[Option<usize>] {
        &self.b_index
    }

    /// Vertex → index among U_D dofs (add [`Self::n_ub`] for the U-block index).
    pub fn d_index(&self) -> &[Option<usize>] {
        &self.d_index
    }

    /// All interface vertices, including those on `∂Ω` that carry no dofs.
    pub fn gamma_vertices(&self) -> &[usize] {
        &self.gamma_vertices
    }

    pub fn jump_pairs(&self) -> &[JumpPair] {
        &self.jump_pairs
    }

    /// Position of each interface vertex in [`Self::jump_pairs`], if it has one.
    pub fn gamma_to_jump(&self) -> Vec<Option<usize>> {
        let mut by_vertex = vec![None; self.n_vertices];
        for (k, p) in self.jump_pairs.iter().enumerate() {
            by_vertex[p.vertex] = Some(k);
        }
        self.gamma_vertices.iter().map(|&v| by_vertex[v]).collect()
    }

    /// `[U]` at each jump pair: B-side minus D-side.
    pub fn jump(&self, u: &[f64]) -> Vec<f64> {
        self.jump_pairs.iter().map(|p| u[p.u_b] - u[p.u_d]).collect()
    }

    pub fn split_u<'a>(&self, u: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        u.split_at(self.n_ub())
    }

    /// Values of a B-side dof vector at every vertex; zero where there is no dof.
    pub fn b_to_vertices(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_vertices];
        for (k, &v) in self.v_vertices.iter().enumerate() {
            out[v] = x[k];
        }
        out
    }

    pub fn d_to_vertices(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_vertices];
        for (k, &v) in self.d_vertices.iter().enumerate() {
            out[v] = x[k];
        }
        out
    }

    /// Samples `f` at the B-side dof vertices.
    pub fn interpolate_b(&self, mesh: &Mesh, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        self.v_vertices.iter().map(|&v| f(mesh.vertices()[v])).collect()
    }

    pub fn interpolate_d(&self, mesh: &Mesh, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        self.d_vertices.iter().map(|&v| f(mesh.vertices()[v])).collect()
    }

    /// Samples `f` at the jump-pair vertices.
    pub fn interpolate_jump(&self, mesh: &Mesh, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        self.jump_pairs.iter().map(|p| f(mesh.vertices()[p.vertex])).collect()
    }

    /// Samples `f` at every interface vertex.
    pub fn interpolate_gamma(&self, mesh: &Mesh, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        self.gamma_vertices.iter().map(|&v| f(mesh.vertices()[v])).collect()
    }

    /// `(U_B, U_D)` sampled from one function per side.
    pub fn interpolate_u(&self, mesh: &Mesh, fb: impl Fn([f64; 2]) -> f64, fd: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        let mut u = self.interpolate_b(mesh, fb);
        u.extend(self.interpolate_d(mesh, fd));
        u
    }
}
