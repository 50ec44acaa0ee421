//! Energy scans built on the resolvent: S-matrix scans, resonance peaks,
//! bound states and the density of states.

mod bound;
mod dos;
mod resonance;
mod scan;

pub use bound::{bound_states, green_scan, GreenRecord};
pub use dos::{
    density_of_states, DosMethod, DosRecord, DosResult, RationalApproximant, DEFAULT_CONTOUR,
    DEFAULT_FIT_ORDER, DEFAULT_MAX_FIT_RESIDUAL, DEFAULT_SMOOTHING_FACTOR,
};
pub use resonance::{
    find_peaks, find_resonances, phase_derivative, Peak, ResonanceCriterion, ResonanceOptions,
    ResonanceReport,
};
pub use scan::{pole_guided_grid, scan_smatrix, scan_with_solver, RefineOptions, SMatrixRecord};

use serde::Serialize;

use crate::basis::SystemSpec;
use crate::error::{Error, Result};

/// Strictly increasing, finite, non-empty list of energies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyGrid {
    energies: Vec<f64>,
}

impl EnergyGrid {
    /// `points` equally spaced energies from `min` to `max` inclusive; a
    /// single point sits at `min`.
    pub fn linear(min: f64, max: f64, points: usize) -> Result<Self> {
        if points == 0 {
            return Err(Error::InvalidArgument("energy grid needs at least one point".into()));
        }
        if !min.is_finite() || !max.is_finite() {
            return Err(Error::InvalidArgument("energy grid bounds must be finite".into()));
        }
        if points == 1 {
            return Ok(Self { energies: vec![min] });
        }
        if !(min < max) {
            return Err(Error::InvalidArgument(format!(
                "energy grid needs E_min < E_max, got {min} and {max}"
            )));
        }
        let step = (max - min) / (points - 1) as f64;
        let mut energies: Vec<f64> = (0..points).map(|i| min + step * i as f64).collect();
        energies[points - 1] = max;
        Ok(Self { energies })
    }

    pub fn from_values(energies: Vec<f64>) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::InvalidArgument("energy grid is empty".into()));
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidArgument("energy grid has non-finite values".into()));
        }
        if energies.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("energy grid must be strictly increasing".into()));
        }
        Ok(Self { energies })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.energies[0]
    }

    pub fn max(&self) -> f64 {
        self.energies[self.energies.len() - 1]
    }

    /// Union with extra energies inside `[min, max]`.
    pub fn merged(&self, extra: &[f64]) -> Self {
        let (lo, hi) = (self.min(), self.max());
        let mut all: Vec<f64> = self.energies.clone();
        all.extend(extra.iter().copied().filter(|e| *e >= lo && *e <= hi));
        all.sort_by(f64::total_cmp);
        all.dedup();
        Self { energies: all }
    }

    /// Smallest distance from grid point `i` to a neighbour.
    pub fn local_step(&self, i: usize) -> f64 {
        let e = &self.energies;
        let left = if i > 0 { e[i] - e[i - 1] } else { f64::INFINITY };
        let right = if i + 1 < e.len() { e[i + 1] - e[i] } else { f64::INFINITY };
        left.min(right)
    }
}

/// One record per grid energy, plus the system that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanTable<R> {
    grid: EnergyGrid,
    records: Vec<R>,
    system: Option<SystemSpec>,
}

impl<R> ScanTable<R> {
    pub fn new(grid: EnergyGrid, records: Vec<R>, system: Option<SystemSpec>) -> Result<Self> {
        if records.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: records.len(),
            });
        }
        Ok(Self {
            grid,
            records,
            system,
        })
    }

    pub fn grid(&self) -> &EnergyGrid {
        &self.grid
    }

    pub fn energies(&self) -> &[f64] {
        self.grid.energies()
    }

    pub fn records(&self) -> &[R] {
        &self.records
    }

    pub fn system(&self) -> Option<&SystemSpec> {
        self.system.as_ref()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &R)> {
        self.grid.energies().iter().copied().zip(&self.records)
    }
}
