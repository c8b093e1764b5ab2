use super::dofmap::DofMap;
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Region};
use crate::model::{ConductivityField, ConductivityKind};
use crate::sparse_linalg::CsrMatrix;

/// Which dof family a stiffness matrix couples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    /// V rows, V columns.
    VV,
    /// V rows, U_B columns.
    VUb,
    UbUb,
    UdUd,
}

/// Test functions an interface load is paired with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterfaceTarget {
    /// `∫_Γ g [φ]`, a vector on the U block.
    Jump,
    /// `∫_Γ g φ|_B`, a vector on the B-side dofs.
    BTrace,
}

/// Space-time scalar field `f(x, t)`.
pub type SpaceTimeFn<'a> = &'a dyn Fn([f64; 2], f64) -> f64;

/// Element stiffness `∫ ∇λ_i·∇λ_j` of a P1 cell.
pub fn element_stiffness(mesh: &Mesh, c: usize) -> Vec<Vec<f64>> {
    let ids = &mesh.cells()[c].vertices;
    let p = |i: usize| mesh.vertices()[ids[i]];
    if mesh.dim() == 1 {
        let h = (p(1)[0] - p(0)[0]).abs();
        return vec![vec![1.0 / h, -1.0 / h], vec![-1.0 / h, 1.0 / h]];
    }
    let area = mesh.cell_measure(c);
    let b = [p(1)[1] - p(2)[1], p(2)[1] - p(0)[1], p(0)[1] - p(1)[1]];
    let cc = [p(2)[0] - p(1)[0], p(0)[0] - p(2)[0], p(1)[0] - p(0)[0]];
    (0..3)
        .map(|i| (0..3).map(|j| (b[i] * b[j] + cc[i] * cc[j]) / (4.0 * area)).collect())
        .collect()
}

/// Element mass `∫ λ_i λ_j` of a P1 cell, consistent or row-lumped.
pub fn element_mass(mesh: &Mesh, c: usize, lumped: bool) -> Vec<Vec<f64>> {
    let m = mesh.cell_measure(c);
    let k = mesh.dim() + 1;
    let (diag, off) = if lumped {
        (m / k as f64, 0.0)
    } else if k == 2 {
        (m / 3.0, m / 6.0)
    } else {
        (m / 6.0, m / 12.0)
    };
    (0..k)
        .map(|i| (0..k).map(|j| if i == j { diag } else { off }).collect())
        .collect()
}

fn assemble_vertex_matrix(mesh: &Mesh, region: Region, element: impl Fn(usize) -> Vec<Vec<f64>>) -> CsrMatrix {
    let n = mesh.n_vertices();
    let mut trip = Vec::new();
    for (c, cell) in mesh.cells().iter().enumerate() {
        if cell.region != region {
            continue;
        }
        let ke = element(c);
        for (i, &vi) in cell.vertices.iter().enumerate() {
            for (j, &vj) in cell.vertices.iter().enumerate() {
                if i != j && ke[i][j] == 0.0 {
                    continue;
                }
                trip.push((vi, vj, ke[i][j]));
            }
        }
    }
    CsrMatrix::from_triplets(n, n, &trip)
}

/// `∫_region κ ∇φ_i·∇φ_j` over every mesh vertex, with `κ` per cell.
pub fn assemble_vertex_stiffness(mesh: &Mesh, region: Region, coefficient: impl Fn(usize) -> f64) -> CsrMatrix {
    assemble_vertex_matrix(mesh, region, |c| {
        let k = coefficient(c);
        element_stiffness(mesh, c)
            .into_iter()
            .map(|row| row.into_iter().map(|v| k * v).collect())
            .collect()
    })
}

/// Region mass over every mesh vertex, including Dirichlet ones. Used for
/// norms of sampled fields.
pub fn assemble_vertex_mass(mesh: &Mesh, region: Region, lumped: bool) -> CsrMatrix {
    assemble_vertex_matrix(mesh, region, |c| element_mass(mesh, c, lumped))
}

/// Restricts a vertex matrix to dof rows/columns given by index maps.
pub fn restrict(
    full: &CsrMatrix,
    rows: &[Option<usize>],
    n_rows: usize,
    cols: &[Option<usize>],
    n_cols: usize,
) -> CsrMatrix {
    let trip: Vec<_> = full
        .triplets()
        .filter_map(|(r, c, v)| Some((rows[r]?, cols[c]?, v)))
        .collect();
    CsrMatrix::from_triplets(n_rows, n_cols, &trip)
}

fn block_region(block: Block) -> Region {
    match block {
        Block::UdUd => Region::D,
        _ => Region::B,
    }
}

/// P1 stiffness `∫ σ ∇φ_i·∇φ_j` over the region of `sigma`, in the requested block.
pub fn assemble_stiffness(mesh: &Mesh, dofs: &DofMap, sigma: &ConductivityField, block: Block) -> Result<CsrMatrix> {
    let kind = sigma.kind();
    let allowed = match block {
        Block::VV | Block::VUb => kind == ConductivityKind::BIntra,
        Block::UbUb => kind.region() == Region::B,
        Block::UdUd => kind == ConductivityKind::D,
    };
    if !allowed {
        return Err(Error::config(format!(
            "{kind:?} conductivity cannot be assembled into the {block:?} block"
        )));
    }
    let full = assemble_vertex_stiffness(mesh, block_region(block), |c| sigma.value(c));
    Ok(match block {
        Block::UdUd => restrict(&full, dofs.d_index(), dofs.n_ud(), dofs.d_index(), dofs.n_ud()),
        _ => restrict(&full, dofs.b_index(), dofs.n_v(), dofs.b_index(), dofs.n_v()),
    })
}

/// Unit-coefficient stiffness on the B-side or D-side dofs.
pub fn assemble_unit_stiffness(mesh: &Mesh, dofs: &DofMap, region: Region) -> CsrMatrix {
    let full = assemble_vertex_stiffness(mesh, region, |_| 1.0);
    match region {
        Region::B => restrict(&full, dofs.b_index(), dofs.n_v(), dofs.b_index(), dofs.n_v()),
        Region::D => restrict(&full, dofs.d_index(), dofs.n_ud(), dofs.d_index(), dofs.n_ud()),
    }
}

/// P1 mass on the region's dofs: V/U_B dofs for `B`, U_D dofs for `D`.
pub fn assemble_mass(mesh: &Mesh, dofs: &DofMap, region: Region, lumped: bool) -> CsrMatrix {
    let full = assemble_vertex_mass(mesh, region, lumped);
    match region {
        Region::B => restrict(&full, dofs.b_index(), dofs.n_v(), dofs.b_index(), dofs.n_v()),
        Region::D => restrict(&full, dofs.d_index(), dofs.n_ud(), dofs.d_index(), dofs.n_ud()),
    }
}

/// Consistent P1 mass of `Γ` over all interface vertices (in
/// [`DofMap::gamma_vertices`] order). A point facet has unit mass.
pub fn assemble_gamma_vertex_mass(mesh: &Mesh, dofs: &DofMap) -> CsrMatrix {
    let mut local = vec![None; mesh.n_vertices()];
    for (k, &v) in dofs.gamma_vertices().iter().enumerate() {
        local[v] = Some(k);
    }
    let n = dofs.gamma_vertices().len();
    let mut trip = Vec::new();
    for f in mesh.interface_facets() {
        let ids: Vec<usize> = f
            .vertices
            .iter()
            .map(|&v| local[v].expect("facet vertex on Γ"))
            .collect();
        match ids.as_slice() {
            [i] => trip.push((*i, *i, 1.0)),
            [i, j] => {
                let l = mesh.facet_measure(&f.vertices);
                trip.push((*i, *i, l / 3.0));
                trip.push((*i, *j, l / 6.0));
                trip.push((*j, *i, l / 6.0));
                trip.push((*j, *j, l / 3.0));
            }
            _ => {}
        }
    }
    CsrMatrix::from_triplets(n, n, &trip)
}

/// `M_Γ` restricted to the jump pairs.
pub fn assemble_interface_mass(mesh: &Mesh, dofs: &DofMap) -> CsrMatrix {
    let full = assemble_gamma_vertex_mass(mesh, dofs);
    let map = dofs.gamma_to_jump();
    full.congruence_by_map(&map, dofs.n_jump())
}

/// `J`: U block → jump values, `+1` on the B-side dof and `−1` on the D-side dof.
pub fn jump_operator(dofs: &DofMap) -> CsrMatrix {
    let trip: Vec<_> = dofs
        .jump_pairs()
        .iter()
        .enumerate()
        .flat_map(|(k, p)| [(k, p.u_b, 1.0), (k, p.u_d, -1.0)])
        .collect();
    CsrMatrix::from_triplets(dofs.n_jump(), dofs.n_u(), &trip)
}

/// `G = Jᵀ M_Γ J`, so that `Φᵀ G U = ∫_Γ [U][Φ]`.
pub fn assemble_interface_jump_mass(mesh: &Mesh, dofs: &DofMap) -> CsrMatrix {
    let m = assemble_interface_mass(mesh, dofs);
    let pairs = dofs.jump_pairs();
    let mut trip = Vec::with_capacity(4 * m.nnz());
    for (k, l, v) in m.triplets() {
        let (a, b) = (pairs[k], pairs[l]);
        trip.push((a.u_b, b.u_b, v));
        trip.push((a.u_b, b.u_d, -v));
        trip.push((a.u_d, b.u_b, -v));
        trip.push((a.u_d, b.u_d, v));
    }
    CsrMatrix::from_triplets(dofs.n_u(), dofs.n_u(), &trip)
}

/// Vertex-rule load `f(x_i, t)·∫_region φ_i` at every mesh vertex.
pub fn assemble_vertex_load(mesh: &Mesh, f: SpaceTimeFn<'_>, region: Region, t: f64) -> Vec<f64> {
    let lumped = assemble_vertex_mass(mesh, region, true).diagonal();
    mesh.vertices()
        .iter()
        .zip(&lumped)
        .map(|(&x, &m)| if m != 0.0 { f(x, t) * m } else { 0.0 })
        .collect()
}

/// `∫_region f(·,t) φ_i` by the vertex rule, on the dofs of `block`
/// (`VV`/`VUb`/`UbUb` all give the B-side layout).
pub fn assemble_volume_load(
    mesh: &Mesh,
    dofs: &DofMap,
    f: SpaceTimeFn<'_>,
    region: Region,
    block: Block,
    t: f64,
) -> Result<Vec<f64>> {
    if block_region(block) != region {
        return Err(Error::config(format!(
            "{region:?} load cannot target the {block:?} block"
        )));
    }
    let full = assemble_vertex_load(mesh, f, region, t);
    let ids = match region {
        Region::B => dofs.v_vertices(),
        Region::D => dofs.ud_vertices(),
    };
    Ok(ids.iter().map(|&v| full[v]).collect())
}

/// `M_Γ g` on the jump pairs, with `g` sampled at every interface vertex.
pub fn interface_moments(mesh: &Mesh, dofs: &DofMap, g_gamma: &[f64]) -> Result<Vec<f64>> {
    if g_gamma.len() != dofs.gamma_vertices().len() {
        return Err(Error::DimensionMismatch {
            context: "interface data on Γ vertices",
            expected: dofs.gamma_vertices().len(),
            actual: g_gamma.len(),
        });
    }
    let full = assemble_gamma_vertex_mass(mesh, dofs).spmv(g_gamma)?;
    let map = dofs.gamma_to_jump();
    let mut out = vec![0.0; dofs.n_jump()];
    for (i, m) in map.iter().enumerate() {
        if let Some(k) = m {
            out[*k] = full[i];
        }
    }
    Ok(out)
}

/// Places jump-pair moments onto the U block (`Jᵀ m`) or the B-side dofs.
pub fn spread_interface_moments(dofs: &DofMap, moments: &[f64], target: InterfaceTarget) -> Vec<f64> {
    match target {
        InterfaceTarget::Jump => {
            let mut out = vec![0.0; dofs.n_u()];
            for (p, m) in dofs.jump_pairs().iter().zip(moments) {
                out[p.u_b] += m;
                out[p.u_d] -= m;
            }
            out
        }
        InterfaceTarget::BTrace => {
            let mut out = vec![0.0; dofs.n_ub()];
            for (p, m) in dofs.jump_pairs().iter().zip(moments) {
                out[p.u_b] += m;
            }
            out
        }
    }
}

/// `∫_Γ g(·,t) [φ]` (U block) or `∫_Γ g(·,t) φ|_B` (B-side dofs) with `g`
/// interpolated in P1 on `Γ`.
pub fn assemble_interface_load(
    mesh: &Mesh,
    dofs: &DofMap,
    g: SpaceTimeFn<'_>,
    target: InterfaceTarget,
    t: f64,
) -> Result<Vec<f64>> {
    let samples = dofs.interpolate_gamma(mesh, |x| g(x, t));
    let m = interface_moments(mesh, dofs, &samples)?;
    Ok(spread_interface_moments(dofs, &m, target))
}
