//! Configuration parsing, tabular output and the drivers behind the
//! command-line tool.

mod config;
mod run;
mod table;

pub use config::{config_keys, parse_config, Format, Mode, RunConfig, Units, DEFAULT_POINTS, DEFAULT_T_END};
pub use run::{preset_tables, reproduce, run, sweep_tables, table1_table};
pub use table::{emit, format_real, render, sidecar_path, Cell, Meta, Table};
