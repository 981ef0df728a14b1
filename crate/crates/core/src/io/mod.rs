//! Run configuration, energy-series CSV and VTK snapshot output.

mod config;
mod csv;
mod vtk;

pub use config::{parse_assignments, parse_config, Assignment, ConfigError, RunConfig, KEYS};
pub use csv::{parse_energy_csv, read_energy_csv, write_energy_csv, CsvSink, CSV_HEADER};
pub use vtk::{write_vtk, write_vtk_snapshot, VtkSink};
