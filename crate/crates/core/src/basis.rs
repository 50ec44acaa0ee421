//! Laguerre and oscillator bases for the radial Coulomb problem
//! `H0 = -1/2 d^2/dr^2 + l(l+1)/(2r^2) + Z/r`, and the matrices of
//! `H0`, the overlap and a short-range potential in them.
//!
//! Laguerre basis, `x = lambda r`:
//! `psi_n = sqrt(lambda n!/Gamma(n+2l+2)) x^(l+1) e^(-x/2) L_n^(2l+1)(x)`.
//! Its overlap and `H0` are tridiagonal and known in closed form.
//!
//! Oscillator basis, `y = (lambda r)^2`:
//! `phi_n = sqrt(2 lambda n!/Gamma(n+l+3/2)) (lambda r)^(l+1) e^(-y/2) L_n^(l+1/2)(y)`,
//! orthonormal; the kinetic part is tridiagonal but the Coulomb term is not.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;
use crate::potential::PotentialExpr;
use crate::quadrature::{gauss_laguerre, laguerre_projection, ProjectedRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisFamily {
    Laguerre,
    Oscillator,
}

impl std::fmt::Display for BasisFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BasisFamily::Laguerre => "laguerre",
            BasisFamily::Oscillator => "oscillator",
        })
    }
}

impl std::str::FromStr for BasisFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "laguerre" => Ok(BasisFamily::Laguerre),
            "oscillator" => Ok(BasisFamily::Oscillator),
            other => Err(Error::InvalidArgument(format!(
                "unknown basis family `{other}` (laguerre | oscillator)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub family: BasisFamily,
    pub lambda: f64,
    pub ell: u32,
    pub size: usize,
}

impl BasisSpec {
    pub fn new(family: BasisFamily, lambda: f64, ell: u32, size: usize) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "basis scale lambda must be positive, got {lambda}"
            )));
        }
        if size < 2 {
            return Err(Error::InvalidArgument(format!(
                "basis size must be at least 2, got {size}"
            )));
        }
        Ok(Self {
            family,
            lambda,
            ell,
            size,
        })
    }

    pub fn laguerre(lambda: f64, ell: u32, size: usize) -> Result<Self> {
        Self::new(BasisFamily::Laguerre, lambda, ell, size)
    }

    pub fn oscillator(lambda: f64, ell: u32, size: usize) -> Result<Self> {
        Self::new(BasisFamily::Oscillator, lambda, ell, size)
    }
}

/// How the potential is sampled when a [`SystemSpec`] is built: finite on
/// `(0, range]` and below `tolerance * max(1, max |V|)` on
/// `[range, 4 range]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayCheck {
    pub range: f64,
    pub tolerance: f64,
}

impl Default for DecayCheck {
    fn default() -> Self {
        Self {
            range: 40.0,
            tolerance: 1e-8,
        }
    }
}

const DECAY_SAMPLES: usize = 400;

/// Basis, Coulomb charge and short-range potential.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub basis: BasisSpec,
    pub charge: f64,
    pub potential: PotentialExpr,
}

impl SystemSpec {
    pub fn new(basis: BasisSpec, charge: f64, potential: PotentialExpr) -> Result<Self> {
        Self::with_decay_check(basis, charge, potential, DecayCheck::default())
    }

    pub fn with_decay_check(
        basis: BasisSpec,
        charge: f64,
        potential: PotentialExpr,
        check: DecayCheck,
    ) -> Result<Self> {
        if !charge.is_finite() {
            return Err(Error::InvalidArgument(format!("charge must be finite, got {charge}")));
        }
        check_decay(&potential, check)?;
        Ok(Self {
            basis,
            charge,
            potential,
        })
    }

    /// Same physics in a different basis.
    pub fn with_basis(&self, basis: BasisSpec) -> Self {
        Self {
            basis,
            ..self.clone()
        }
    }
}

fn check_decay(v: &PotentialExpr, check: DecayCheck) -> Result<()> {
    if !(check.range > 0.0) {
        return Err(Error::InvalidArgument("decay range must be positive".into()));
    }
    let mut vmax = 0.0_f64;
    for i in 1..=DECAY_SAMPLES {
        let r = check.range * i as f64 / DECAY_SAMPLES as f64;
        let value = v.eval(r);
        if !value.is_finite() {
            return Err(Error::InvalidPotential(format!("V({r}) = {value} is not finite")));
        }
        vmax = vmax.max(value.abs());
    }
    let bound = check.tolerance * vmax.max(1.0);
    for i in 0..=DECAY_SAMPLES {
        let r = check.range * (1.0 + 3.0 * i as f64 / DECAY_SAMPLES as f64);
        let value = v.eval(r);
        if !(value.abs() <= bound) {
            return Err(Error::InvalidPotential(format!(
                "potential does not decay: |V({r})| = {:e} exceeds {bound:e}",
                value.abs()
            )));
        }
    }
    Ok(())
}

/// Quadrature settings for the potential matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions {
    /// Quadrature points per basis function; the convergence check uses
    /// twice as many.
    pub points_per_function: usize,
    /// Lower bound on the number of quadrature points, for small bases.
    pub min_points: usize,
    /// Largest accepted change of any potential matrix element under
    /// doubling, relative to `max(1, max |V|)`.
    pub tolerance: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            points_per_function: 4,
            min_points: 64,
            tolerance: 1e-5,
        }
    }
}

/// Largest accepted disagreement between closed-form and quadrature
/// overlap elements, relative to the largest element.
const ANALYTIC_CHECK: f64 = 1e-10;

/// Matrices of one system in one basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSet {
    pub h0: SymMatrix,
    pub v: SymMatrix,
    pub omega: SymMatrix,
    pub basis: BasisSpec,
    pub charge: f64,
    /// Change of the potential matrix under doubling of the quadrature.
    pub quadrature_residual: f64,
}

impl MatrixSet {
    pub fn hamiltonian(&self) -> SymMatrix {
        self.h0.add(&self.v).expect("matrices share the basis size")
    }

    pub fn size(&self) -> usize {
        self.basis.size
    }

    /// `(H0 - E Omega)[n, m]` for any indices, including ones beyond the
    /// truncated basis. Needs a tridiagonal reference problem: Laguerre
    /// basis for any charge, oscillator basis only without Coulomb term.
    pub fn j_element(&self, n: usize, m: usize, energy: f64) -> Result<f64> {
        let b = &self.basis;
        match b.family {
            BasisFamily::Laguerre => Ok(laguerre_j(b.lambda, b.ell, self.charge, n, m, energy)),
            BasisFamily::Oscillator => {
                if self.charge != 0.0 {
                    return Err(Error::Unsupported(
                        "the oscillator-basis reference Hamiltonian is not tridiagonal with a Coulomb term"
                            .into(),
                    ));
                }
                let alpha = b.ell as f64 + 0.5;
                let l2 = b.lambda * b.lambda;
                let kinetic = oscillator_kinetic(l2, alpha, n, m);
                Ok(kinetic - if n == m { energy } else { 0.0 })
            }
        }
    }

    /// `J[N-1, N](E)`, the coupling of the last basis function to the
    /// first one left out.
    pub fn j_boundary(&self, energy: f64) -> Result<f64> {
        let n = self.size();
        self.j_element(n - 1, n, energy)
    }
}

/// `(H0 - E Omega)[n, m]` in the Laguerre basis.
pub fn laguerre_j(lambda: f64, ell: u32, charge: f64, n: usize, m: usize, energy: f64) -> f64 {
    let l = ell as f64;
    let l2 = lambda * lambda;
    if n == m {
        (n as f64 + l + 1.0) * (l2 / 4.0 - 2.0 * energy) + charge * lambda
    } else if n.abs_diff(m) == 1 {
        let k = n.min(m) as f64;
        (l2 / 8.0 + energy) * ((k + 1.0) * (k + 2.0 * l + 2.0)).sqrt()
    } else {
        0.0
    }
}

fn laguerre_overlap_element(ell: f64, n: usize, m: usize) -> f64 {
    if n == m {
        2.0 * (n as f64 + ell + 1.0)
    } else if n.abs_diff(m) == 1 {
        let k = n.min(m) as f64;
        -((k + 1.0) * (k + 2.0 * ell + 2.0)).sqrt()
    } else {
        0.0
    }
}

/// Jacobi matrix element of the orthonormal Laguerre polynomials, i.e.
/// the matrix of `y` in the oscillator basis.
fn jacobi_element(alpha: f64, n: usize, m: usize) -> f64 {
    if n == m {
        2.0 * n as f64 + alpha + 1.0
    } else if n.abs_diff(m) == 1 {
        let k = n.min(m) as f64;
        -((k + 1.0) * (k + alpha + 1.0)).sqrt()
    } else {
        0.0
    }
}

/// Kinetic matrix in the oscillator basis. The basis functions are
/// eigenfunctions of `T + lambda^4 r^2 / 2` with eigenvalues
/// `lambda^2 (2n + l + 3/2)`, and `lambda^2 r^2` is the Jacobi matrix.
fn oscillator_kinetic(l2: f64, alpha: f64, n: usize, m: usize) -> f64 {
    let diag = if n == m {
        l2 * (2.0 * n as f64 + alpha + 1.0)
    } else {
        0.0
    };
    diag - 0.5 * l2 * jacobi_element(alpha, n, m)
}

fn sym_from_dense(m: DMatrix<f64>) -> SymMatrix {
    let n = m.nrows();
    SymMatrix::from_fn(n, |i, j| m[(i, j)]).expect("square matrix")
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()))
}

/// Potential matrix at `points` and `2 points` quadrature nodes; returns
/// the finer one together with the change.
fn converged_potential(
    size: usize,
    alpha: f64,
    points: usize,
    tolerance: f64,
    weight: impl Fn(f64) -> f64 + Copy,
    analytic_check: Option<&dyn Fn(&ProjectedRule) -> Result<()>>,
) -> Result<(DMatrix<f64>, f64)> {
    let coarse = laguerre_projection(alpha, points, size)?;
    if let Some(check) = analytic_check {
        check(&coarse)?;
    }
    let fine = laguerre_projection(alpha, 2 * points, size)?;
    let a = coarse.project(weight);
    let b = fine.project(weight);
    let residual = max_abs_diff(&a, &b);
    let scale = b.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    if !(residual <= tolerance * scale) {
        return Err(Error::Quadrature {
            residual,
            tolerance: tolerance * scale,
        });
    }
    Ok((b, residual))
}

/// Overlap, `H0` and potential matrices in the Laguerre basis.
pub fn laguerre_matrices(spec: &SystemSpec) -> Result<MatrixSet> {
    laguerre_matrices_with(spec, QuadratureOptions::default())
}

pub fn laguerre_matrices_with(spec: &SystemSpec, opts: QuadratureOptions) -> Result<MatrixSet> {
    let b = spec.basis;
    if b.family != BasisFamily::Laguerre {
        return Err(Error::InvalidArgument("laguerre_matrices needs a Laguerre basis".into()));
    }
    let n = b.size;
    let l = b.ell as f64;
    let lambda = b.lambda;
    let omega = SymMatrix::from_fn(n, |i, j| laguerre_overlap_element(l, i, j))?;
    let h0 = SymMatrix::from_fn(n, |i, j| laguerre_j(lambda, b.ell, spec.charge, i, j, 0.0))?;

    let alpha = 2.0 * l + 1.0;
    let points = (opts.points_per_function.max(1) * n).max(opts.min_points);
    let check_overlap = |rule: &ProjectedRule| -> Result<()> {
        let quad = rule.project(|x| x);
        let dev = max_abs_diff(&quad, omega.as_matrix());
        let tol = ANALYTIC_CHECK * omega.max_abs();
        if dev > tol {
            return Err(Error::Quadrature {
                residual: dev,
                tolerance: tol,
            });
        }
        Ok(())
    };
    let (v, residual) = if spec.potential.is_zero() {
        check_overlap(&laguerre_projection(alpha, points, n)?)?;
        (DMatrix::zeros(n, n), 0.0)
    } else {
        let pot = &spec.potential;
        converged_potential(
            n,
            alpha,
            points,
            opts.tolerance,
            |x| x * pot.eval(x / lambda),
            Some(&check_overlap),
        )?
    };
    Ok(MatrixSet {
        h0,
        v: sym_from_dense(v),
        omega,
        basis: b,
        charge: spec.charge,
        quadrature_residual: residual,
    })
}

/// `H0` and potential matrices in the orthonormal oscillator basis; the
/// overlap is the identity.
pub fn oscillator_matrices(spec: &SystemSpec) -> Result<MatrixSet> {
    oscillator_matrices_with(spec, QuadratureOptions::default())
}

pub fn oscillator_matrices_with(spec: &SystemSpec, opts: QuadratureOptions) -> Result<MatrixSet> {
    let b = spec.basis;
    if b.family != BasisFamily::Oscillator {
        return Err(Error::InvalidArgument(
            "oscillator_matrices needs an oscillator basis".into(),
        ));
    }
    let n = b.size;
    let lambda = b.lambda;
    let l2 = lambda * lambda;
    let alpha = b.ell as f64 + 0.5;
    let mut h0 = DMatrix::from_fn(n, n, |i, j| oscillator_kinetic(l2, alpha, i, j));
    if spec.charge != 0.0 {
        h0 += coulomb_oscillator(b.ell, n)? * (spec.charge * lambda);
    }
    let points = (opts.points_per_function.max(1) * n).max(opts.min_points);
    let (v, residual) = if spec.potential.is_zero() {
        (DMatrix::zeros(n, n), 0.0)
    } else {
        let pot = &spec.potential;
        converged_potential(n, alpha, points, opts.tolerance, |y| pot.eval(y.sqrt() / lambda), None)?
    };
    Ok(MatrixSet {
        h0: sym_from_dense(h0),
        v: sym_from_dense(v),
        omega: SymMatrix::identity(n)?,
        basis: b,
        charge: spec.charge,
        quadrature_residual: residual,
    })
}

/// `<phi_n | 1/(lambda r) | phi_m>`, i.e. `integral y^l e^-y q_n q_m dy`
/// with `q_n` orthonormal for the weight `y^(l+1/2) e^-y`. The integrand is
/// a polynomial of degree `2n - 2` against `y^l e^-y`, so an `n + 1` point
/// rule for that weight is exact.
fn coulomb_oscillator(ell: u32, size: usize) -> Result<DMatrix<f64>> {
    let beta = ell as f64 + 0.5;
    let rule = gauss_laguerre(ell as f64, size + 1)?;
    let q0 = (-0.5 * libm::lgamma(beta + 1.0)).exp();
    let mut out = DMatrix::zeros(size, size);
    let mut q = vec![0.0; size];
    for (&y, &w) in rule.nodes.iter().zip(&rule.weights) {
        // carry sqrt(w) through the recurrence to stay in range
        q[0] = w.sqrt() * q0;
        if size > 1 {
            q[1] = (beta + 1.0 - y) * q[0] / (beta + 1.0).sqrt();
        }
        for k in 1..size.saturating_sub(1) {
            let kf = k as f64;
            q[k + 1] = ((2.0 * kf + beta + 1.0 - y) * q[k] - (kf * (kf + beta)).sqrt() * q[k - 1])
                / ((kf + 1.0) * (kf + beta + 1.0)).sqrt();
        }
        for i in 0..size {
            for j in i..size {
                out[(i, j)] += q[i] * q[j];
            }
        }
    }
    for i in 0..size {
        for j in 0..i {
            out[(i, j)] = out[(j, i)];
        }
    }
    Ok(out)
}

/// Dispatch on the basis family.
pub fn system_matrices(spec: &SystemSpec) -> Result<MatrixSet> {
    match spec.basis.family {
        BasisFamily::Laguerre => laguerre_matrices(spec),
        BasisFamily::Oscillator => oscillator_matrices(spec),
    }
}
