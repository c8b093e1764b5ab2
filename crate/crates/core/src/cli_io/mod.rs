//! Configuration parsing, the command driver and text output: CSV time
//! series and tables, legacy ASCII VTK snapshots. Numbers are written with
//! 17 significant digits so identical runs give byte-identical files.

mod commands;
mod config;
mod csv;
mod vtk;

pub use commands::{execute, refine_mesh_spec, resolve_out_dir, CommandOutcome, OUT_DIR_ENV};
pub use config::{
    load_config, parse_config, BetaSweepSpec, Command, ConductivitySpec, EnergySpec, InitialPreset, InitialSpec,
    InterfaceSpec, IonicSpec, MeshSpec, MmsSpec, OutputSpec, RunConfig, SourcePreset, SourceSpec, StabilitySpec,
    TimeSpec,
};
pub use csv::{csv_series, csv_table, format_float, write_csv_series, write_csv_table, SERIES_HEADER};
pub use vtk::{read_vtk, vtk_snapshot, write_vtk_snapshot, VtkData};
