use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{EnergyGrid, ScanTable};
use crate::basis::SystemSpec;
use crate::error::{Error, Result};
use crate::scattering::{ScatteringPoint, ScatteringSolver};

/// One row of an S-matrix scan. Rows that fall on a pole of the finite
/// Green's function are kept but flagged, with `NaN` values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SMatrixRecord {
    pub s: Complex64,
    pub phase_shift: f64,
    pub one_minus_s: f64,
    /// Distance to the nearest pole of `G[N-1,N-1]`.
    pub pole_distance: f64,
    pub at_pole: bool,
}

impl SMatrixRecord {
    fn from_point(p: ScatteringPoint, pole_distance: f64) -> Self {
        Self {
            s: p.s,
            phase_shift: p.phase_shift,
            one_minus_s: p.one_minus_s,
            pole_distance,
            at_pole: false,
        }
    }

    fn flagged(pole_distance: f64) -> Self {
        Self {
            s: Complex64::new(f64::NAN, f64::NAN),
            phase_shift: f64::NAN,
            one_minus_s: f64::NAN,
            pole_distance,
            at_pole: true,
        }
    }
}

/// `S(E)` on every grid energy. Points are evaluated in parallel on the
/// current rayon pool and returned in grid order.
pub fn scan_smatrix(system: &SystemSpec, grid: &EnergyGrid) -> Result<ScanTable<SMatrixRecord>> {
    let solver = ScatteringSolver::new(system)?;
    scan_with_solver(&solver, grid, Some(system.clone()))
}

pub fn scan_with_solver(
    solver: &ScatteringSolver,
    grid: &EnergyGrid,
    system: Option<SystemSpec>,
) -> Result<ScanTable<SMatrixRecord>> {
    let records: Vec<SMatrixRecord> = grid
        .energies()
        .par_iter()
        .map(|&e| {
            let d = solver.pole_distance(e);
            match solver.s_matrix(e) {
                Ok(p) => Ok(SMatrixRecord::from_point(p, d)),
                Err(Error::AtSpectrum { .. }) => Ok(SMatrixRecord::flagged(d)),
                Err(other) => Err(other),
            }
        })
        .collect::<Result<_>>()?;
    ScanTable::new(grid.clone(), records, system)
}

/// Extra sampling around S-matrix poles too narrow for the base grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefineOptions {
    /// Window half-width in units of `|Im E*|`.
    pub half_width: f64,
    pub points: usize,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self {
            half_width: 40.0,
            points: 401,
        }
    }
}

/// The base grid plus a fine window `Re E* +- half_width |Im E*|` for every
/// estimated S-matrix pole `E*` whose window is narrower than the local
/// grid step (see [`ScatteringSolver::pole_estimate`]).
pub fn pole_guided_grid(
    solver: &ScatteringSolver,
    grid: &EnergyGrid,
    opts: RefineOptions,
) -> Result<EnergyGrid> {
    let (lo, hi) = (grid.min(), grid.max());
    let energies = grid.energies();
    let mut extra = Vec::new();
    for (j, &eps) in solver.poles().iter().enumerate() {
        if eps <= lo || eps >= hi || eps <= 0.0 {
            continue;
        }
        let Some(estimate) = solver.pole_estimate(j)? else {
            continue;
        };
        let centre = estimate.re;
        if !(centre > lo && centre < hi) {
            continue;
        }
        let idx = energies.partition_point(|&e| e < centre).min(energies.len() - 1);
        let step = grid.local_step(idx);
        let floor = 1e-10 * centre.abs().max(1.0);
        let half = (opts.half_width * estimate.im.abs()).max(floor);
        if 2.0 * half >= step || opts.points < 2 {
            continue;
        }
        let n = opts.points;
        extra.extend((0..n).map(|i| centre - half + 2.0 * half * i as f64 / (n - 1) as f64));
    }
    Ok(grid.merged(&extra))
}
