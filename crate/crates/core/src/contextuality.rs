//! The noncontextual inequality `P(f) <= P(D1) + P(D2)` and reflectivity scans.
//!
//! Splitting the margin `P(D1) + P(D2) - P(f)` by outcome and applying the
//! beam-splitter continuity relations gives
//!
//! ```text
//! margin = W(P2|1) P(1) + W(P1|2) P(2) + (W(f|3) + W(P1|3) + W(P2|3)) P(3)
//! ```
//!
//! so a violation requires a negative conditional current in `P1`, `P2` or `f`.

use crate::error::{Error, Result};
use crate::hilbert::{DensityMatrix, C64};
use crate::interferometer::{build_network, derive_reflectivities, PathId, PathVectorTable};
use crate::states::{make_nf, nf_closed_forms, path_probability};
use crate::weak::weak_value;

/// Margins below `-VIOLATION_TOL` count as a violation.
pub const VIOLATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContextualityReport {
    /// `P(D1) + P(D2) - P(f)`.
    pub margin: f64,
    /// Real parts of `W(P2|1)P(1)`, `W(P1|2)P(2)`,
    /// `(W(f|3)+W(P1|3)+W(P2|3))P(3)`; `None` if an outcome has zero
    /// probability.
    pub decomposition_terms: Option<[f64; 3]>,
    /// `|margin - sum of the complex terms|`.
    pub identity_residual: Option<f64>,
    pub violated: bool,
}

pub fn noncontextual_margin(
    rho: &DensityMatrix,
    table: &PathVectorTable,
) -> Result<ContextualityReport> {
    use PathId::*;
    let p = |i| path_probability(rho, table, i);
    let margin = p(D1)? + p(D2)? - p(F)?;

    let terms = decomposition(rho, table).ok();
    Ok(ContextualityReport {
        margin,
        decomposition_terms: terms.map(|t| t.map(|z| z.re)),
        identity_residual: terms.map(|t| (C64::new(margin, 0.0) - t.iter().sum::<C64>()).norm()),
        violated: margin < -VIOLATION_TOL,
    })
}

fn decomposition(rho: &DensityMatrix, table: &PathVectorTable) -> Result<[C64; 3]> {
    use PathId::*;
    let wp = |i, o| weak_value(rho, table, i, o).map(|w| w.value * w.postselection_probability);
    Ok([
        wp(P2, One)?,
        wp(P1, Two)?,
        wp(F, Three)? + wp(P1, Three)? + wp(P2, Three)?,
    ])
}

/// One cell of a reflectivity scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanCell {
    pub r1: f64,
    pub r2: f64,
    pub pf_closed: f64,
    pub pf_propagated: f64,
}

impl ScanCell {
    pub fn delta(&self) -> f64 {
        (self.pf_closed - self.pf_propagated).abs()
    }
}

/// `P(f|N_f)` over a grid of `(R1, R2)`, row-major in `r1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub r1_grid: Vec<f64>,
    pub r2_grid: Vec<f64>,
    pub cells: Vec<ScanCell>,
    pub argmax: usize,
}

impl ScanResult {
    pub fn max_cell(&self) -> &ScanCell {
        &self.cells[self.argmax]
    }

    pub fn max_delta(&self) -> f64 {
        self.cells.iter().map(ScanCell::delta).fold(0.0, f64::max)
    }
}

/// `n` evenly spaced points from `min` to `max` inclusive.
pub fn uniform_grid(min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("grid needs at least 2 points, got {n}")));
    }
    Ok((0..n)
        .map(|k| min + (max - min) * k as f64 / (n - 1) as f64)
        .collect())
}

/// Evaluates the paradox probability at every grid cell, both from the
/// closed form and by building the network and propagating `N_f`.
pub fn scan_violation(r1_grid: &[f64], r2_grid: &[f64]) -> Result<ScanResult> {
    if r1_grid.len() < 2 || r2_grid.len() < 2 {
        return Err(Error::InvalidArgument("scan grids need at least 2 points each".into()));
    }
    let mut cells = Vec::with_capacity(r1_grid.len() * r2_grid.len());
    for &r1 in r1_grid {
        for &r2 in r2_grid {
            let config = derive_reflectivities(r1, r2)?;
            let table = build_network(config)?;
            let rho = DensityMatrix::pure(&make_nf(&table)?)?;
            cells.push(ScanCell {
                r1,
                r2,
                pf_closed: nf_closed_forms(&config).pf,
                pf_propagated: path_probability(&rho, &table, PathId::F)?,
            });
        }
    }
    let mut argmax = 0;
    for (k, c) in cells.iter().enumerate() {
        if c.pf_closed > cells[argmax].pf_closed {
            argmax = k;
        }
    }
    Ok(ScanResult {
        r1_grid: r1_grid.to_vec(),
        r2_grid: r2_grid.to_vec(),
        cells,
        argmax,
    })
}

pub use crate::interferometer::symmetric_reflectivity;
