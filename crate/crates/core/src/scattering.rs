//! J-matrix scattering in the Laguerre basis.
//!
//! The reference problem `H0` is tridiagonal, so its regular and
//! irregular solutions obey the three-term recursion
//! `J[n,n-1] f[n-1] + J[n,n] f[n] + J[n,n+1] f[n+1] = 0` with
//! `J = H0 - E Omega`. Only the ratios `R_n = f_n / f_(n-1)` of the
//! outgoing (`+`) and incoming (`-`) combinations `c_n +- i s_n` and the
//! phases `T_n = (c_n - i s_n)/(c_n + i s_n)` are needed; the first two
//! come from closed forms in `2F1`, the rest from the recursion. The
//! short-range potential enters through one element of the finite
//! Green's function, `G[N-1,N-1](E)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{laguerre_j, laguerre_matrices, BasisFamily, MatrixSet, SystemSpec};
use crate::error::{Error, Result};
use crate::matrix::gen_sym_eig;
use crate::special::hyp2f1;

/// Ratio magnitude below which the recursion is declared broken.
const BREAKDOWN: f64 = 1e-300;

/// Energy-dependent angle and Sommerfeld parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicParams {
    pub energy: f64,
    pub lambda: f64,
    pub charge: f64,
    /// `cos(theta) = (8E - lambda^2) / (8E + lambda^2)`, `0 < theta <= pi`.
    pub theta: f64,
    /// `t = Z / sqrt(2E)`.
    pub t: f64,
}

impl KinematicParams {
    pub fn new(energy: f64, lambda: f64, charge: f64) -> Result<Self> {
        if !(energy > 0.0 && energy.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "scattering energy must be positive, got {energy}"
            )));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "basis scale lambda must be positive, got {lambda}"
            )));
        }
        let l2 = lambda * lambda;
        let cos = (8.0 * energy - l2) / (8.0 * energy + l2);
        Ok(Self {
            energy,
            lambda,
            charge,
            theta: cos.clamp(-1.0, 1.0).acos(),
            t: charge / (2.0 * energy).sqrt(),
        })
    }
}

/// `T_0` and `R_1^+` for angular momentum `ell`.
pub fn seed_coefficients(kin: &KinematicParams, ell: u32) -> Result<(Complex64, Complex64)> {
    let l = ell as f64;
    let it = Complex64::new(0.0, kin.t);
    let one = Complex64::new(1.0, 0.0);
    let two = Complex64::new(2.0, 0.0);
    let e2 = Complex64::from_polar(1.0, 2.0 * kin.theta);
    let e2c = e2.conj();

    let f_in = hyp2f1(-l + it, one, l + 2.0 + it, e2c)?;
    let f_out = hyp2f1(-l - it, one, l + 2.0 - it, e2)?;
    let t0 = e2 * (l + 1.0 + it) * f_out / ((l + 1.0 - it) * f_in);

    let f2 = hyp2f1(-l + it, two, l + 3.0 + it, e2c)?;
    let r1 = Complex64::from_polar(1.0, -kin.theta) * (2.0 * l + 2.0).sqrt() * f2
        / ((l + 2.0 + it) * f_in);
    Ok((t0, r1))
}

/// `T_0..=T_K` and `R_1^+-..=R_(K+1)^+-` for one energy.
#[derive(Debug, Clone, PartialEq)]
pub struct CsCoefficients {
    t: Vec<Complex64>,
    r_plus: Vec<Complex64>,
    r_minus: Vec<Complex64>,
}

impl CsCoefficients {
    /// Largest `n` with a stored `T_n`.
    pub fn up_to(&self) -> usize {
        self.t.len() - 1
    }

    pub fn t(&self, n: usize) -> Complex64 {
        self.t[n]
    }

    /// `R_n^+` for `1 <= n <= up_to + 1`.
    pub fn r_plus(&self, n: usize) -> Complex64 {
        self.r_plus[n - 1]
    }

    pub fn r_minus(&self, n: usize) -> Complex64 {
        self.r_minus[n - 1]
    }

    pub fn t_values(&self) -> &[Complex64] {
        &self.t
    }
}

/// Run the ratio recursion
/// `R_(n+1) = -(J[n,n] + J[n,n-1] / R_n) / J[n,n+1]` from the seeds and
/// accumulate `T_n = T_(n-1) R_n^- / R_n^+`.
pub fn cs_recursion(
    mats: &MatrixSet,
    kin: &KinematicParams,
    up_to: usize,
) -> Result<CsCoefficients> {
    if mats.basis.family != BasisFamily::Laguerre {
        return Err(Error::Unsupported(
            "closed-form seeds exist for the Laguerre basis only".into(),
        ));
    }
    if kin.lambda != mats.basis.lambda || kin.charge != mats.charge {
        return Err(Error::InvalidArgument(
            "kinematic parameters belong to a different basis or charge".into(),
        ));
    }
    recursion(mats.basis.lambda, mats.basis.ell, mats.charge, kin, up_to)
}

fn recursion(
    lambda: f64,
    ell: u32,
    charge: f64,
    kin: &KinematicParams,
    up_to: usize,
) -> Result<CsCoefficients> {
    let e = kin.energy;
    let j = |n: usize, m: usize| laguerre_j(lambda, ell, charge, n, m, e);
    let (t0, r1) = seed_coefficients(kin, ell)?;
    let mut t = Vec::with_capacity(up_to + 1);
    let mut r_plus = Vec::with_capacity(up_to + 1);
    t.push(t0);
    r_plus.push(r1);
    for n in 1..=up_to {
        let r = r_plus[n - 1];
        if r.norm() <= BREAKDOWN || !r.is_finite() {
            return Err(Error::RecursionBreakdown { n });
        }
        t.push(t[n - 1] * r.conj() / r);
        let upper = j(n, n + 1);
        if upper.abs() <= BREAKDOWN {
            return Err(Error::RecursionBreakdown { n });
        }
        r_plus.push(-(j(n, n) + j(n, n - 1) / r) / upper);
    }
    let r_minus = r_plus.iter().map(|r| r.conj()).collect();
    Ok(CsCoefficients { t, r_plus, r_minus })
}

/// One energy of an S-matrix scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringPoint {
    pub energy: f64,
    pub s: Complex64,
    /// `arg(S) / 2`, in `(-pi/2, pi/2]`.
    pub phase_shift: f64,
    /// `|1 - S|`.
    pub one_minus_s: f64,
}

impl ScatteringPoint {
    fn new(energy: f64, s: Complex64) -> Self {
        let mut phase = s.arg() / 2.0;
        if phase <= -PI / 2.0 {
            phase += PI;
        }
        Self {
            energy,
            s,
            phase_shift: phase,
            one_minus_s: (Complex64::new(1.0, 0.0) - s).norm(),
        }
    }
}

/// A system prepared for many S-matrix evaluations: the matrices and the
/// generalized eigenpairs of `(H0 + V, Omega)` are computed once.
#[derive(Debug, Clone)]
pub struct ScatteringSolver {
    mats: MatrixSet,
    /// Poles of `G[N-1,N-1]`.
    eps: Vec<f64>,
    /// Residues `Gamma[N-1,j]^2` (with `sigma_j = 1`).
    residues: Vec<f64>,
}

impl ScatteringSolver {
    pub fn new(system: &SystemSpec) -> Result<Self> {
        if system.basis.family != BasisFamily::Laguerre {
            return Err(Error::Unsupported(
                "S-matrix scans need the Laguerre basis".into(),
            ));
        }
        Self::from_matrices(laguerre_matrices(system)?)
    }

    pub fn from_matrices(mats: MatrixSet) -> Result<Self> {
        let pair = gen_sym_eig(&mats.hamiltonian(), &mats.omega)?;
        let last = mats.size() - 1;
        let gamma = pair.eigenvectors();
        let residues = (0..pair.len())
            .map(|j| gamma[(last, j)] * gamma[(last, j)] / pair.sigma()[j])
            .collect();
        Ok(Self {
            eps: pair.eigenvalues().to_vec(),
            residues,
            mats,
        })
    }

    pub fn matrices(&self) -> &MatrixSet {
        &self.mats
    }

    /// Generalized eigenvalues of `(H, Omega)`, ascending.
    pub fn poles(&self) -> &[f64] {
        &self.eps
    }

    pub fn residues(&self) -> &[f64] {
        &self.residues
    }

    /// Distance from `energy` to the nearest pole.
    pub fn pole_distance(&self, energy: f64) -> f64 {
        self.eps
            .iter()
            .fold(f64::INFINITY, |acc, &e| acc.min((e - energy).abs()))
    }

    /// `G[N-1,N-1](E)` from the spectral sum.
    pub fn green_last(&self, energy: f64) -> Result<f64> {
        let tol = 1e-14 * self.eps.iter().fold(1.0_f64, |a, e| a.max(e.abs()));
        let mut g = 0.0;
        for (&e, &r) in self.eps.iter().zip(&self.residues) {
            let d = e - energy;
            if d.abs() <= tol {
                return Err(Error::AtSpectrum { eigenvalue: e });
            }
            g += r / d;
        }
        Ok(g)
    }

    pub fn kinematics(&self, energy: f64) -> Result<KinematicParams> {
        KinematicParams::new(energy, self.mats.basis.lambda, self.mats.charge)
    }

    /// `R_N^+(E)`, the outgoing ratio one step past the basis.
    pub fn r_boundary(&self, energy: f64) -> Result<Complex64> {
        let n = self.mats.size();
        let cs = cs_recursion(&self.mats, &self.kinematics(energy)?, n - 1)?;
        Ok(cs.r_plus(n))
    }

    pub fn s_matrix(&self, energy: f64) -> Result<ScatteringPoint> {
        let n = self.mats.size();
        let kin = self.kinematics(energy)?;
        let cs = cs_recursion(&self.mats, &kin, n - 1)?;
        let g = self.green_last(energy)?;
        let j = self.mats.j_boundary(energy)?;
        let one = Complex64::new(1.0, 0.0);
        let s = cs.t(n - 1) * (one + g * j * cs.r_minus(n)) / (one + g * j * cs.r_plus(n));
        Ok(ScatteringPoint::new(energy, s))
    }

    /// First-order estimate of the complex energy of the S-matrix pole
    /// attached to the real pole `eps[j]` of `G`:
    /// `eps_j + r_j J R^+ / (1 + G_bg J R^+)`, all at `E = eps_j`, where
    /// `G_bg` leaves out the `j`-th term. Returns `None` for poles at
    /// non-positive energy.
    pub fn pole_estimate(&self, j: usize) -> Result<Option<Complex64>> {
        let e = self.eps[j];
        if e <= 0.0 {
            return Ok(None);
        }
        let r = self.r_boundary(e)?;
        let jb = self.mats.j_boundary(e)?;
        let g_bg: f64 = self
            .eps
            .iter()
            .zip(&self.residues)
            .enumerate()
            .filter(|&(k, _)| k != j)
            .map(|(_, (&ek, &rk))| rk / (ek - e))
            .sum();
        let one = Complex64::new(1.0, 0.0);
        Ok(Some(e + self.residues[j] * jb * r / (one + g_bg * jb * r)))
    }
}

/// One-shot S-matrix evaluation.
pub fn s_matrix(system: &SystemSpec, energy: f64) -> Result<ScatteringPoint> {
    ScatteringSolver::new(system)?.s_matrix(energy)
}
