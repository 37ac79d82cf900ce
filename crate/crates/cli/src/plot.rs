//! Heatmap of a `probabilities.csv` table as a standalone SVG document.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{CliError, Result};

const CELL: usize = 24;
const LEFT: usize = 70;
const TOP: usize = 20;
const BOTTOM: usize = 60;
const RIGHT: usize = 20;

/// Probability table keyed by `(step, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityGrid {
    pub steps: usize,
    pub sites: usize,
    /// `values[m][j]`.
    pub values: Vec<Vec<f64>>,
}

/// Reads the `step,j,x,probability` format written by `run`.
pub fn parse_probabilities_csv(text: &str) -> Result<ProbabilityGrid> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "step,j,x,probability" => {}
        _ => return Err(CliError::Input("expected header 'step,j,x,probability'".into())),
    }
    let mut cells = BTreeMap::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |what: &str| CliError::Input(format!("line {}: {what}", i + 1));
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(bad("expected 4 fields"));
        }
        let m: usize = fields[0].trim().parse().map_err(|_| bad("bad step"))?;
        let j: usize = fields[1].trim().parse().map_err(|_| bad("bad site index"))?;
        let p: f64 = fields[3].trim().parse().map_err(|_| bad("bad probability"))?;
        if !p.is_finite() {
            return Err(bad("probability must be finite"));
        }
        if cells.insert((m, j), p).is_some() {
            return Err(bad("duplicate (step, j) entry"));
        }
    }
    if cells.is_empty() {
        return Err(CliError::Input("probability table is empty".into()));
    }
    let steps = cells.keys().map(|k| k.0).max().unwrap_or(0) + 1;
    let sites = cells.keys().map(|k| k.1).max().unwrap_or(0) + 1;
    if cells.len() != steps * sites {
        return Err(CliError::Input(format!(
            "table is not rectangular: {} entries for {steps} steps x {sites} sites",
            cells.len()
        )));
    }
    let mut values = vec![vec![0.0; sites]; steps];
    for ((m, j), p) in cells {
        values[m][j] = p;
    }
    Ok(ProbabilityGrid { steps, sites, values })
}

/// Grey level of a probability; 0 is black, 1 is white.
fn shade(p: f64) -> u8 {
    (p.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Time runs along x in units of `dt`, site `j` along y (in units of
/// `dx`, `j = 0` at the bottom).
pub fn render_svg(grid: &ProbabilityGrid) -> String {
    let width = LEFT + grid.steps * CELL + RIGHT;
    let height = TOP + grid.sites * CELL + BOTTOM;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    for (m, column) in grid.values.iter().enumerate() {
        for (j, &p) in column.iter().enumerate() {
            let x = LEFT + m * CELL;
            let y = TOP + (grid.sites - 1 - j) * CELL;
            let v = shade(p);
            let _ = writeln!(
                svg,
                r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="rgb({v},{v},{v})"><title>m={m} j={j} p={p:.6}</title></rect>"#
            );
        }
    }
    let plot_bottom = TOP + grid.sites * CELL;
    for m in 0..grid.steps {
        let x = LEFT + m * CELL + CELL / 2;
        let _ = writeln!(
            svg,
            r#"<text x="{x}" y="{}" font-family="sans-serif" font-size="10" text-anchor="middle">{m}</text>"#,
            plot_bottom + 14
        );
    }
    for j in 0..grid.sites {
        let y = TOP + (grid.sites - 1 - j) * CELL + CELL / 2 + 4;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{y}" font-family="sans-serif" font-size="10" text-anchor="end">{j}</text>"#,
            LEFT - 6
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">time (units of &#948;t)</text>"#,
        LEFT + grid.steps * CELL / 2,
        plot_bottom + 40
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{y}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {y})">position (units of &#916;x)</text>"#,
        y = TOP + grid.sites * CELL / 2
    );
    svg.push_str("</svg>\n");
    svg
}
