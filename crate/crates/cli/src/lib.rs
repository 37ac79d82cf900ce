//! Configuration, orchestration and file output for the `qdyn` binary.

// `!(x > 0.0)` guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod plot;

pub use commands::{compile, run, spectrum};
pub use config::{parse_config, parse_config_with_overrides, RunConfig};
pub use error::{CliError, Result};

use std::fs;
use std::path::Path;

/// Reads `csv_path` and writes the heatmap to `svg_path`.
pub fn plot(csv_path: &Path, svg_path: &Path) -> Result<()> {
    let text = fs::read_to_string(csv_path).map_err(|e| CliError::io(csv_path, e))?;
    let grid = plot::parse_probabilities_csv(&text)?;
    if let Some(parent) = svg_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(svg_path, plot::render_svg(&grid)).map_err(|e| CliError::io(svg_path, e))
}
