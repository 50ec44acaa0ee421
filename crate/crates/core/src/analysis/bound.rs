use rayon::prelude::*;
use serde::Serialize;

use super::{EnergyGrid, ScanTable};
use crate::basis::{system_matrices, SystemSpec};
use crate::error::{Error, Result};
use crate::matrix::gen_sym_eig;
use crate::resolvent::SpectralResolvent;

/// Negative generalized eigenvalues of `(H, Omega)`, ascending. These are
/// the poles of the finite Green's function below threshold.
pub fn bound_states(system: &SystemSpec) -> Result<Vec<f64>> {
    let mats = system_matrices(system)?;
    let pair = gen_sym_eig(&mats.hamiltonian(), &mats.omega)?;
    Ok(pair
        .eigenvalues()
        .iter()
        .copied()
        .take_while(|&e| e < 0.0)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreenRecord {
    /// `G[N-1,N-1](E)`; real on the real axis.
    pub green: f64,
    pub abs_green: f64,
    pub at_pole: bool,
}

/// `G[N-1,N-1](E)` along the grid, the quantity whose divergences mark the
/// bound states.
pub fn green_scan(system: &SystemSpec, grid: &EnergyGrid) -> Result<ScanTable<GreenRecord>> {
    let mats = system_matrices(system)?;
    let resolvent = SpectralResolvent::new(&mats.hamiltonian(), Some(&mats.omega))?;
    let last = mats.size() - 1;
    let records = grid
        .energies()
        .par_iter()
        .map(|&e| match resolvent.element(last, last, e.into()) {
            Ok(g) => Ok(GreenRecord {
                green: g.re,
                abs_green: g.re.abs(),
                at_pole: false,
            }),
            Err(Error::AtSpectrum { .. }) => Ok(GreenRecord {
                green: f64::NAN,
                abs_green: f64::NAN,
                at_pole: true,
            }),
            Err(other) => Err(other),
        })
        .collect::<Result<Vec<_>>>()?;
    ScanTable::new(grid.clone(), records, Some(system.clone()))
}
