//! Matrix elements of the resolvent `G(z) = (H - z Omega)^-1`.
//!
//! Three independent routes are provided and cross-checked in the tests:
//!
//! * the spectral sum over generalized eigenpairs ([`green_spectral`]),
//! * the cofactor ratio `(-1)^(n+m) det(C^(n,m)) / det(C)` with
//!   `C = H - z Omega` ([`green_cofactor`]),
//! * eigenvalue-only products, which need eigenvalues of `H` (or of the
//!   pair `H, Omega`) and of one deleted submatrix, and nothing else
//!   ([`green_eigprod_general`], [`green_diag_orthonormal`],
//!   [`green_partial_fractions`]).
//!
//! The eigenvalue-only forms also recover products of eigenvector
//! components from eigenvalues alone ([`eigvec_sq_from_eigs`] and
//! friends).
//!
//! Indices `n`, `m` are zero-based row/column indices of the basis.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{
    delete_row_col_raw, eig_general, gen_sym_eig, is_positive_definite, principal_minor,
    scaled_det, sym_eig, sym_eigenvalues, to_complex, GeneralMatrix, ScaledDet, SpectralPair,
    SymMatrix,
};

/// Relative gap below which two eigenvalues count as degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;

/// `z` closer than this (relative to the spectral scale) to an eigenvalue
/// is treated as evaluation on the spectrum.
const POLE_TOLERANCE: f64 = 1e-14;

/// Relative size below which an off-diagonal overlap cofactor is singular.
const MINOR_TOLERANCE: f64 = 1e-12;

/// The data needed to evaluate one resolvent: the Hamiltonian, an
/// optional overlap matrix (absent means an orthonormal basis) and the
/// complex evaluation point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventInput {
    h: SymMatrix,
    omega: Option<SymMatrix>,
    z: Complex64,
}

impl ResolventInput {
    pub fn new(h: SymMatrix, omega: Option<SymMatrix>, z: Complex64) -> Result<Self> {
        if let Some(o) = &omega {
            if o.dim() != h.dim() {
                return Err(Error::DimensionMismatch {
                    expected: h.dim(),
                    found: o.dim(),
                });
            }
            if !is_positive_definite(o) {
                return Err(Error::NotPositiveDefinite);
            }
        }
        Ok(Self { h, omega, z })
    }

    pub fn orthonormal(h: SymMatrix, z: Complex64) -> Self {
        Self { h, omega: None, z }
    }

    pub fn h(&self) -> &SymMatrix {
        &self.h
    }

    pub fn omega(&self) -> Option<&SymMatrix> {
        self.omega.as_ref()
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    /// Same matrices, different evaluation point.
    pub fn at(&self, z: Complex64) -> Self {
        Self {
            h: self.h.clone(),
            omega: self.omega.clone(),
            z,
        }
    }
}

fn check_index(dim: usize, n: usize, m: usize) -> Result<()> {
    if n >= dim || m >= dim {
        return Err(Error::IndexOutOfRange { row: n, col: m, dim });
    }
    Ok(())
}

fn pole_scale(eps: &[f64]) -> f64 {
    eps.iter().fold(1.0_f64, |acc, e| acc.max(e.abs()))
}

fn check_off_spectrum(eps: &[f64], z: Complex64) -> Result<()> {
    let tol = POLE_TOLERANCE * pole_scale(eps);
    match eps.iter().find(|&&e| (Complex64::new(e, 0.0) - z).norm() <= tol) {
        Some(&e) => Err(Error::AtSpectrum { eigenvalue: e }),
        None => Ok(()),
    }
}

fn check_distinct(eps: &[f64]) -> Result<()> {
    if eps.len() < 2 {
        return Ok(());
    }
    let range = eps[eps.len() - 1] - eps[0];
    let threshold = DEGENERACY_THRESHOLD * range;
    let gap = eps
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if range == 0.0 || gap < threshold {
        return Err(Error::DegenerateSpectrum { gap, threshold });
    }
    Ok(())
}

/// Product `prod(num) / prod(den)` evaluated as a running product of
/// ratios, pairing factors of similar magnitude so that long products
/// stay within floating-point range.
pub(crate) fn paired_ratio_product(num: &[Complex64], den: &[Complex64]) -> Complex64 {
    let mut num: Vec<Complex64> = num.to_vec();
    let mut den: Vec<Complex64> = den.to_vec();
    num.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    den.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let mut acc = Complex64::new(1.0, 0.0);
    for i in 0..num.len().max(den.len()) {
        match (num.get(i), den.get(i)) {
            (Some(a), Some(b)) => acc *= a / b,
            (Some(a), None) => acc *= a,
            (None, Some(b)) => acc /= b,
            (None, None) => unreachable!(),
        }
    }
    acc
}

fn real_factors(values: &[f64], shift: Complex64) -> Vec<Complex64> {
    values.iter().map(|&e| Complex64::new(e, 0.0) - shift).collect()
}

/// Pre-diagonalized resolvent: evaluates the spectral sum
/// `sum_i gamma[n,i] gamma[m,i] / (sigma_i (eps_i - z))` for any number of
/// points `z`.
#[derive(Debug, Clone)]
pub struct SpectralResolvent {
    pair: SpectralPair,
}

impl SpectralResolvent {
    pub fn new(h: &SymMatrix, omega: Option<&SymMatrix>) -> Result<Self> {
        let pair = match omega {
            Some(o) => gen_sym_eig(h, o)?,
            None => sym_eig(h)?,
        };
        Ok(Self { pair })
    }

    pub fn from_pair(pair: SpectralPair) -> Self {
        Self { pair }
    }

    pub fn pair(&self) -> &SpectralPair {
        &self.pair
    }

    pub fn dim(&self) -> usize {
        self.pair.len()
    }

    pub fn element(&self, n: usize, m: usize, z: Complex64) -> Result<Complex64> {
        check_index(self.dim(), n, m)?;
        let eps = self.pair.eigenvalues();
        check_off_spectrum(eps, z)?;
        let gamma = self.pair.eigenvectors();
        let sigma = self.pair.sigma();
        Ok(eps
            .iter()
            .enumerate()
            .map(|(i, &e)| {
                gamma[(n, i)] * gamma[(m, i)] / (sigma[i] * (Complex64::new(e, 0.0) - z))
            })
            .sum())
    }

    /// The full `N x N` resolvent matrix at `z`.
    pub fn matrix(&self, z: Complex64) -> Result<DMatrix<Complex64>> {
        let n = self.dim();
        check_off_spectrum(self.pair.eigenvalues(), z)?;
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let g = self.element(i, j, z)?;
                out[(i, j)] = g;
                out[(j, i)] = g;
            }
        }
        Ok(out)
    }
}

/// Spectral-sum evaluation of `G[n,m](z)`. Without an overlap matrix this
/// is the orthonormal-basis sum `sum_i gamma[n,i] gamma[m,i] / (eps_i - z)`.
pub fn green_spectral(input: &ResolventInput, n: usize, m: usize) -> Result<Complex64> {
    check_index(input.dim(), n, m)?;
    SpectralResolvent::new(&input.h, input.omega.as_ref())?.element(n, m, input.z)
}

/// Cofactor evaluation `(-1)^(n+m) det(C^(n,m)) / det(C)` with
/// `C = H - z Omega`. Valid for every `n, m` and any non-singular `C`.
pub fn green_cofactor(input: &ResolventInput, n: usize, m: usize) -> Result<Complex64> {
    check_index(input.dim(), n, m)?;
    let c = input.h.shifted(input.z, input.omega.as_ref());
    let full = scaled_det(&c).ok_or(Error::AtSpectrum {
        eigenvalue: input.z.re,
    })?;
    if input.dim() == 1 {
        return Ok(full.phase.inv() * (-full.log_abs).exp());
    }
    let minor = delete_row_col_raw(&c, n, m)?;
    let sign = if (n + m) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(match scaled_det(&minor) {
        Some(d) => d.ratio(full) * sign,
        None => Complex64::new(0.0, 0.0),
    })
}

/// `(-1)^(n+m) det(Omega^(n,m)) / det(Omega)`, refusing when the minor is
/// negligible next to the Cauchy-Schwarz bound
/// `|inv(Omega)[m,n]| <= sqrt(inv(Omega)[n,n] inv(Omega)[m,m])`.
fn overlap_cofactor(omega: &SymMatrix, n: usize, m: usize) -> Result<f64> {
    if omega.dim() == 1 {
        return Ok(1.0 / omega.get(0, 0));
    }
    let full_c = to_complex(omega.as_matrix());
    let full = scaled_det(&full_c).ok_or(Error::NotPositiveDefinite)?;
    let minor_ratio = |a: usize, b: usize| -> Option<Complex64> {
        let minor = delete_row_col_raw(&full_c, a, b).ok()?;
        scaled_det(&minor).map(|d: ScaledDet| d.ratio(full))
    };
    let sign = if (n + m) % 2 == 0 { 1.0 } else { -1.0 };
    let value = minor_ratio(n, m).map_or(0.0, |r| r.re) * sign;
    if n != m {
        let bound = match (minor_ratio(n, n), minor_ratio(m, m)) {
            (Some(a), Some(b)) => (a.re * b.re).sqrt(),
            _ => return Err(Error::NotPositiveDefinite),
        };
        if value.abs() <= MINOR_TOLERANCE * bound {
            return Err(Error::SingularOverlapMinor { n, m });
        }
    }
    Ok(value)
}

/// Eigenvalues of the pencil `(H^(n,m), Omega^(n,m))`. Real for `n == m`;
/// possibly complex otherwise because the deleted matrices are not
/// symmetric.
fn deleted_pencil_eigenvalues(
    h: &SymMatrix,
    omega: Option<&SymMatrix>,
    n: usize,
    m: usize,
) -> Result<Vec<Complex64>> {
    if h.dim() == 1 {
        return Ok(Vec::new());
    }
    if n == m {
        let hm = principal_minor(h, n)?;
        let values = match omega {
            Some(o) => gen_sym_eig(&hm, &principal_minor(o, n)?)?.eigenvalues().to_vec(),
            None => sym_eigenvalues(&hm)?,
        };
        return Ok(values.into_iter().map(|e| Complex64::new(e, 0.0)).collect());
    }
    let hm = delete_row_col_raw(h.as_matrix(), n, m)?;
    let reduced = match omega {
        Some(o) => {
            let om = delete_row_col_raw(o.as_matrix(), n, m)?;
            om.lu().solve(&hm).ok_or(Error::SingularOverlapMinor { n, m })?
        }
        // I^(n,m) is singular for n != m
        None => return Err(Error::SingularOverlapMinor { n, m }),
    };
    eig_general(&GeneralMatrix::new(reduced)?)
}

/// Eigenvalue-only form of one resolvent element,
/// `prefactor * prod_i (eps_i^(n,m) - z) / prod_j (eps_j - z)`.
///
/// Construction does all the eigenvalue work; [`EigenProductForm::eval`]
/// is then a pair of short products per `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenProductForm {
    n: usize,
    m: usize,
    prefactor: f64,
    deleted: Vec<Complex64>,
    eigenvalues: Vec<f64>,
}

impl EigenProductForm {
    /// Non-orthogonal basis form. The prefactor is
    /// `(-1)^(n+m) det(Omega^(n,m)) / det(Omega)`; `n != m` requires a
    /// non-singular `Omega^(n,m)`.
    pub fn general(h: &SymMatrix, omega: &SymMatrix, n: usize, m: usize) -> Result<Self> {
        if omega.dim() != h.dim() {
            return Err(Error::DimensionMismatch {
                expected: h.dim(),
                found: omega.dim(),
            });
        }
        check_index(h.dim(), n, m)?;
        if !is_positive_definite(omega) {
            return Err(Error::NotPositiveDefinite);
        }
        let prefactor = overlap_cofactor(omega, n, m)?;
        let deleted = deleted_pencil_eigenvalues(h, Some(omega), n, m)?;
        let eigenvalues = gen_sym_eig(h, omega)?.eigenvalues().to_vec();
        Ok(Self {
            n,
            m,
            prefactor,
            deleted,
            eigenvalues,
        })
    }

    /// Diagonal element in an orthonormal basis:
    /// `prod_i (eps_i^(n,n) - z) / prod_j (eps_j - z)`.
    pub fn diagonal_orthonormal(h: &SymMatrix, n: usize) -> Result<Self> {
        check_index(h.dim(), n, n)?;
        Ok(Self {
            n,
            m: n,
            prefactor: 1.0,
            deleted: deleted_pencil_eigenvalues(h, None, n, n)?,
            eigenvalues: sym_eigenvalues(h)?,
        })
    }

    pub fn indices(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    /// Eigenvalues of the deleted pencil, ordered by real part.
    pub fn deleted_eigenvalues(&self) -> &[Complex64] {
        &self.deleted
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        check_off_spectrum(&self.eigenvalues, z)?;
        let num: Vec<Complex64> = self.deleted.iter().map(|&e| e - z).collect();
        let den = real_factors(&self.eigenvalues, z);
        Ok(paired_ratio_product(&num, &den) * self.prefactor)
    }

    /// `gamma[n,k] gamma[m,k] / sigma_k`, i.e. minus the residue of the
    /// element at the pole `eps_k`.
    pub fn residue(&self, k: usize) -> Result<f64> {
        if k >= self.eigenvalues.len() {
            return Err(Error::IndexOutOfRange {
                row: k,
                col: k,
                dim: self.eigenvalues.len(),
            });
        }
        check_distinct(&self.eigenvalues)?;
        let ek = Complex64::new(self.eigenvalues[k], 0.0);
        let num: Vec<Complex64> = self.deleted.iter().map(|&e| e - ek).collect();
        let den: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, &e)| Complex64::new(e, 0.0) - ek)
            .collect();
        Ok((paired_ratio_product(&num, &den) * self.prefactor).re)
    }
}

/// Eigenvalue-product evaluation of `G[n,m](z)` in a non-orthogonal basis.
///
/// Fails with [`Error::SingularOverlapMinor`] when `Omega^(n,m)` is
/// singular, which can happen for `n != m`; [`green_cofactor`] covers
/// those cases.
pub fn green_eigprod_general(input: &ResolventInput, n: usize, m: usize) -> Result<Complex64> {
    let omega = input.omega.as_ref().ok_or_else(|| {
        Error::InvalidArgument("the non-orthogonal product form needs an overlap matrix".into())
    })?;
    EigenProductForm::general(&input.h, omega, n, m)?.eval(input.z)
}

/// `G[n,n](z) = prod_i (eps_i^(n,n) - z) / prod_j (eps_j - z)` in an
/// orthonormal basis.
pub fn green_diag_orthonormal(h: &SymMatrix, z: Complex64, n: usize) -> Result<Complex64> {
    EigenProductForm::diagonal_orthonormal(h, n)?.eval(z)
}

/// `G[n,m](z) = sum_j A_j / (eps_j - z)` in an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialFractions {
    pub poles: Vec<f64>,
    pub coeffs: Vec<f64>,
    pub n: usize,
    pub m: usize,
}

impl PartialFractions {
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        check_off_spectrum(&self.poles, z)?;
        Ok(self
            .poles
            .iter()
            .zip(&self.coeffs)
            .map(|(&e, &a)| a / (Complex64::new(e, 0.0) - z))
            .sum())
    }

    /// Large-`z` limit of `-z G(z)`; equals `delta(n,m)` for an
    /// orthonormal basis.
    pub fn coeff_sum(&self) -> f64 {
        self.coeffs.iter().sum()
    }
}

/// `(-1)^(n+m) det((H - e I)^(n,m)) / prod_{j != k} (eps_j - eps_k)`
/// with `e = eps_k`, computed from an LU determinant in scaled form.
fn determinant_residue(h: &SymMatrix, eps: &[f64], n: usize, m: usize, k: usize) -> f64 {
    let dim = h.dim();
    if dim == 1 {
        return 1.0;
    }
    let ek = eps[k];
    let shifted = h.shifted(Complex64::new(ek, 0.0), None);
    let minor = delete_row_col_raw(&shifted, n, m).expect("indices checked by caller");
    let Some(d) = scaled_det(&minor) else {
        return 0.0;
    };
    let mut sign = if (n + m) % 2 == 0 { 1.0 } else { -1.0 };
    let mut log_den = 0.0;
    for (j, &e) in eps.iter().enumerate() {
        if j != k {
            let diff = e - ek;
            sign *= diff.signum();
            log_den += diff.abs().ln();
        }
    }
    (d.phase.re.signum()) * sign * (d.log_abs - log_den).exp()
}

/// Partial-fraction coefficients of `G[n,m]` in an orthonormal basis,
/// `A_j = (-1)^(n+m) det(H^(n,m) - eps_j I^(n,m)) / prod_{k != j} (eps_k - eps_j)`.
///
/// `A_j` equals `gamma[n,j] gamma[m,j]`. Requires a non-degenerate spectrum.
pub fn green_partial_fractions(h: &SymMatrix, n: usize, m: usize) -> Result<PartialFractions> {
    check_index(h.dim(), n, m)?;
    let eps = sym_eigenvalues(h)?;
    check_distinct(&eps)?;
    let coeffs = (0..eps.len())
        .map(|j| determinant_residue(h, &eps, n, m, j))
        .collect();
    Ok(PartialFractions {
        poles: eps,
        coeffs,
        n,
        m,
    })
}

/// Squared component `gamma[n,k]^2` of the `k`-th normalized eigenvector
/// from eigenvalues alone:
/// `prod_i (eps_i^(n,n) - eps_k) / prod_{j != k} (eps_j - eps_k)`.
///
/// The value lies in `[0, 1]` by eigenvalue interlacing; round-off
/// excursions outside that interval are clamped.
pub fn eigvec_sq_from_eigs(h: &SymMatrix, n: usize, k: usize) -> Result<f64> {
    check_index(h.dim(), n, k)?;
    let form = EigenProductForm::diagonal_orthonormal(h, n)?;
    Ok(form.residue(k)?.clamp(0.0, 1.0))
}

/// Product `gamma[n,k] gamma[m,k]` of eigenvector components from
/// eigenvalues of `H` and a determinant of `H^(n,m) - eps_k I^(n,m)`.
pub fn eigvec_prod_from_eigs(h: &SymMatrix, n: usize, m: usize, k: usize) -> Result<f64> {
    check_index(h.dim(), n, m)?;
    check_index(h.dim(), k, k)?;
    if n == m {
        return eigvec_sq_from_eigs(h, n, k);
    }
    let eps = sym_eigenvalues(h)?;
    check_distinct(&eps)?;
    Ok(determinant_residue(h, &eps, n, m, k))
}

/// Non-orthogonal version: `gamma[n,k] gamma[m,k]` for the generalized
/// problem `H v = eps Omega v` under the `sigma_k = 1` normalization,
/// from generalized eigenvalues of `(H, Omega)` and of the deleted pencil
/// `(H^(n,m), Omega^(n,m))`.
pub fn eigvec_from_eigs_general(
    h: &SymMatrix,
    omega: &SymMatrix,
    n: usize,
    m: usize,
    k: usize,
) -> Result<f64> {
    check_index(h.dim(), k, k)?;
    let form = EigenProductForm::general(h, omega, n, m)?;
    // sigma_k = 1 under this crate's normalization
    form.residue(k)
}

/// Brute-force `(H - z Omega)^-1` by LU factorization. Test oracle.
pub fn inverse_oracle(input: &ResolventInput) -> Result<DMatrix<Complex64>> {
    let c = input.h.shifted(input.z, input.omega.as_ref());
    if scaled_det(&c).is_none() {
        return Err(Error::Singular {
            operation: "inverse_oracle",
        });
    }
    c.try_inverse().ok_or(Error::Singular {
        operation: "inverse_oracle",
    })
}
