use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{EnergyGrid, ScanTable};
use crate::basis::{oscillator_matrices, BasisFamily, SystemSpec};
use crate::error::{Error, Result};
use crate::matrix::sym_eig;

/// Default distance of the fitting contour above the real axis.
pub const DEFAULT_CONTOUR: f64 = 0.5;
/// Default denominator degree of the rational fit.
pub const DEFAULT_FIT_ORDER: usize = 8;
/// Smoothing width in units of the local pole spacing.
pub const DEFAULT_SMOOTHING_FACTOR: f64 = 5.0;
/// Largest accepted relative RMS residual of the rational fit.
pub const DEFAULT_MAX_FIT_RESIDUAL: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum DosMethod {
    /// `rho(E) = Im G[0,0](E + i delta) / pi`. A fixed `width` overrides the
    /// default `delta` of five local pole spacings.
    Smoothing { width: Option<f64> },
    /// Fit `G[0,0]` on `Im z = contour` by `P(z)/Q(z)` with `deg Q = order`,
    /// `deg P = order - 1`, and evaluate `Im P/Q / pi` on the real axis.
    Continuation {
        contour: f64,
        order: usize,
        max_residual: f64,
    },
}

impl DosMethod {
    pub fn smoothing() -> Self {
        DosMethod::Smoothing { width: None }
    }

    pub fn continuation() -> Self {
        DosMethod::Continuation {
            contour: DEFAULT_CONTOUR,
            order: DEFAULT_FIT_ORDER,
            max_residual: DEFAULT_MAX_FIT_RESIDUAL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DosRecord {
    pub rho: f64,
    /// Smoothing width used at this energy, or the contour height.
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DosResult {
    pub table: ScanTable<DosRecord>,
    /// Eigenvalues of `H`.
    pub poles: Vec<f64>,
    /// `Gamma[0,j]^2`, the residues of `G[0,0]`.
    pub weights: Vec<f64>,
    /// Sum of the weights; one for an orthonormal basis.
    pub total_weight: f64,
    /// The fitted approximant (continuation only).
    pub fit: Option<RationalApproximant>,
}

impl DosResult {
    /// Relative RMS residual of the rational fit on the contour.
    pub fn fit_residual(&self) -> Option<f64> {
        self.fit.as_ref().map(|f| f.residual)
    }
}

/// Mean spacing of the poles next to the one nearest to `energy`.
fn local_spacing(poles: &[f64], energy: f64) -> f64 {
    let n = poles.len();
    let i = poles.partition_point(|&p| p < energy);
    let nearest = if i == 0 {
        0
    } else if i == n || (energy - poles[i - 1]) < (poles[i] - energy) {
        i - 1
    } else {
        i
    };
    let lo = nearest.saturating_sub(1);
    let hi = (nearest + 1).min(n - 1);
    (poles[hi] - poles[lo]) / (hi - lo) as f64
}

/// Density of states from `G[0,0]` in the orthonormal oscillator basis.
pub fn density_of_states(
    system: &SystemSpec,
    grid: &EnergyGrid,
    method: DosMethod,
) -> Result<DosResult> {
    if system.basis.family != BasisFamily::Oscillator {
        return Err(Error::InvalidArgument(
            "density of states needs the orthonormal oscillator basis".into(),
        ));
    }
    let mats = oscillator_matrices(system)?;
    let pair = sym_eig(&mats.hamiltonian())?;
    let poles = pair.eigenvalues().to_vec();
    let gamma = pair.eigenvectors();
    let weights: Vec<f64> = (0..poles.len()).map(|j| gamma[(0, j)] * gamma[(0, j)]).collect();
    let total_weight = weights.iter().sum();
    let green = |z: Complex64| -> Complex64 {
        poles
            .iter()
            .zip(&weights)
            .map(|(&e, &w)| w / (Complex64::new(e, 0.0) - z))
            .sum()
    };

    let (records, fit) = match method {
        DosMethod::Smoothing { width } => {
            if let Some(w) = width {
                if !(w > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "smoothing width must be positive, got {w}"
                    )));
                }
            }
            let records = grid
                .energies()
                .iter()
                .map(|&e| {
                    let delta =
                        width.unwrap_or_else(|| DEFAULT_SMOOTHING_FACTOR * local_spacing(&poles, e));
                    // imaginary part summed term by term, each non-negative
                    let rho = poles
                        .iter()
                        .zip(&weights)
                        .map(|(&p, &w)| w * delta / ((p - e).powi(2) + delta * delta))
                        .sum::<f64>()
                        / PI;
                    DosRecord { rho, width: delta }
                })
                .collect();
            (records, None)
        }
        DosMethod::Continuation {
            contour,
            order,
            max_residual,
        } => {
            let fit = RationalApproximant::new(grid.energies(), contour, order, &green)?;
            if !(fit.residual <= max_residual) {
                return Err(Error::FitResidual {
                    residual: fit.residual,
                    threshold: max_residual,
                });
            }
            let records = grid
                .energies()
                .iter()
                .map(|&e| DosRecord {
                    rho: fit.eval(Complex64::new(e, 0.0)).im / PI,
                    width: contour,
                })
                .collect();
            (records, Some(fit))
        }
    };
    Ok(DosResult {
        table: ScanTable::new(grid.clone(), records, Some(system.clone()))?,
        poles,
        weights,
        total_weight,
        fit,
    })
}

/// Linearized least-squares rational fit `P(u)/Q(u)` in the scaled
/// variable `u = (z - centre)/scale`, `Q` monic. Coefficients are complex:
/// the continuation of `G(E + i0)` has its poles below the real axis only.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalApproximant {
    centre: f64,
    scale: f64,
    p: Vec<Complex64>,
    q: Vec<Complex64>,
    residual: f64,
}

fn horner(coeffs: &[Complex64], u: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * u + c)
}

impl RationalApproximant {
    fn new(
        energies: &[f64],
        contour: f64,
        order: usize,
        f: &dyn Fn(Complex64) -> Complex64,
    ) -> Result<Self> {
        if order == 0 || !(contour > 0.0) {
            return Err(Error::InvalidArgument(
                "continuation needs a positive contour height and fit order".into(),
            ));
        }
        let m = energies.len();
        if m < 4 * order {
            return Err(Error::InvalidArgument(format!(
                "continuation with fit order {order} needs at least {} grid points, got {m}",
                4 * order
            )));
        }
        let lo = energies[0];
        let hi = energies[m - 1];
        let centre = 0.5 * (lo + hi);
        let scale = (0.5 * (hi - lo)).max(f64::MIN_POSITIVE);
        let z: Vec<Complex64> = energies.iter().map(|&e| Complex64::new(e, contour)).collect();
        let g: Vec<Complex64> = z.iter().map(|&zk| f(zk)).collect();
        let u: Vec<Complex64> = z.iter().map(|&zk| (zk - centre) / scale).collect();

        // P(u_k) - g_k (Q(u_k) - u_k^order) = g_k u_k^order
        let mut a = DMatrix::<Complex64>::zeros(m, 2 * order);
        let mut b = DVector::<Complex64>::zeros(m);
        for k in 0..m {
            let mut pow = Complex64::new(1.0, 0.0);
            for i in 0..order {
                a[(k, i)] = pow;
                a[(k, order + i)] = -g[k] * pow;
                pow *= u[k];
            }
            b[k] = g[k] * pow;
        }
        let svd = a.svd(true, true);
        let x = svd
            .solve(&b, 1e-14)
            .map_err(|_| Error::Singular { operation: "rational fit" })?;
        let p: Vec<Complex64> = x.iter().take(order).copied().collect();
        let mut q: Vec<Complex64> = x.iter().skip(order).copied().collect();
        q.push(Complex64::new(1.0, 0.0));

        let mut num = 0.0;
        let mut den = 0.0;
        for k in 0..m {
            let fit = horner(&p, u[k]) / horner(&q, u[k]);
            num += (fit - g[k]).norm_sqr();
            den += g[k].norm_sqr();
        }
        let residual = (num / den.max(f64::MIN_POSITIVE)).sqrt();
        Ok(Self {
            centre,
            scale,
            p,
            q,
            residual,
        })
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let u = (z - self.centre) / self.scale;
        horner(&self.p, u) / horner(&self.q, u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_spacing_uses_neighbours() {
        let poles = [0.0, 1.0, 3.0, 6.0];
        assert_eq!(local_spacing(&poles, -5.0), 1.0);
        assert_eq!(local_spacing(&poles, 1.2), 1.5);
        assert_eq!(local_spacing(&poles, 10.0), 3.0);
    }

    #[test]
    fn rational_fit_recovers_a_rational_function() {
        // two poles below the axis: exactly representable at order 2
        let f = |z: Complex64| {
            Complex64::new(0.3, 0.0) / (Complex64::new(1.0, -0.2) - z)
                + Complex64::new(0.7, 0.0) / (Complex64::new(2.5, -0.4) - z)
        };
        let e: Vec<f64> = (0..40).map(|i| 0.1 * i as f64).collect();
        let fit = RationalApproximant::new(&e, 0.5, 2, &f).unwrap();
        assert!(fit.residual < 1e-12);
        let z = Complex64::new(1.7, 0.0);
        assert!((fit.eval(z) - f(z)).norm() < 1e-10);
    }
}
