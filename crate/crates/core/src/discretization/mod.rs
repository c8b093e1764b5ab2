//! P1 finite elements on the broken space: the dof layout with duplicated
//! interface nodes and assembly of every mass, stiffness, interface and load
//! operator the schemes need.
//!
//! Assembly is single-threaded and visits cells in index order, so every
//! matrix and vector is bit-reproducible.

mod assembly;
mod dofmap;

pub use assembly::{
    assemble_gamma_vertex_mass, assemble_interface_jump_mass, assemble_interface_load, assemble_interface_mass,
    assemble_mass, assemble_stiffness, assemble_unit_stiffness, assemble_vertex_load, assemble_vertex_mass,
    assemble_vertex_stiffness, assemble_volume_load, element_mass, element_stiffness, interface_moments, jump_operator,
    restrict, spread_interface_moments, Block, InterfaceTarget, SpaceTimeFn,
};
pub use dofmap::{build_dof_map, DofMap, JumpPair};
