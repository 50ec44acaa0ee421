//! Gauss hypergeometric function for complex parameters and `|x| <= 1`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Stopping rule for [`hyp2f1_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    /// Relative change of the partial sum that counts as converged.
    pub tolerance: f64,
    /// Hard cap on the number of series terms.
    pub max_terms: usize,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-15,
            max_terms: 1_000_000,
        }
    }
}

/// Number of Euler differencing passes applied on the unit circle.
const EULER_PASSES: usize = 3;
const DIRECT_RADIUS: f64 = 0.9;
const PFAFF_RADIUS: f64 = 0.8;

fn non_positive_integer(a: Complex64) -> Option<usize> {
    if a.im == 0.0 && a.re <= 0.0 && a.re.fract() == 0.0 {
        Some((-a.re) as usize)
    } else {
        None
    }
}

fn term_ratio(a: Complex64, b: Complex64, c: Complex64, k: usize) -> Complex64 {
    let k = k as f64;
    (a + k) * (b + k) / ((c + k) * (k + 1.0))
}

/// `2F1(a, b; c; x)`.
///
/// Terminating series (`a` or `b` a non-positive integer) are summed
/// exactly for any `x`. Otherwise `|x| <= 1`, `x != 1` is required: inside
/// the disk the power series is used directly or after a Pfaff
/// transformation, and close to the unit circle the partial sums are
/// accelerated by repeated Euler differencing, which needs
/// `Re(c - a - b) > -1` to converge.
pub fn hyp2f1(a: Complex64, b: Complex64, c: Complex64, x: Complex64) -> Result<Complex64> {
    hyp2f1_with(a, b, c, x, SeriesOptions::default())
}

/// `2F1(a, 1; c; x)`, the form needed by the scattering seeds.
pub fn hyp2f1_b1(a: Complex64, c: Complex64, x: Complex64) -> Result<Complex64> {
    hyp2f1(a, Complex64::new(1.0, 0.0), c, x)
}

pub fn hyp2f1_with(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    x: Complex64,
    opts: SeriesOptions,
) -> Result<Complex64> {
    if non_positive_integer(c).is_some() {
        return Err(Error::InvalidArgument(format!(
            "2F1 lower parameter c = {c} is a non-positive integer"
        )));
    }
    if x == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let terminating = match (non_positive_integer(a), non_positive_integer(b)) {
        (Some(p), Some(q)) => Some(p.min(q)),
        (p, q) => p.or(q),
    };
    if let Some(degree) = terminating {
        return Ok(finite_sum(a, b, c, x, degree));
    }
    let r = x.norm();
    if r > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "2F1 series requires |x| <= 1, got |x| = {r}"
        )));
    }
    if x == Complex64::new(1.0, 0.0) {
        return Err(Error::InvalidArgument("2F1 series at x = 1".into()));
    }
    if r <= DIRECT_RADIUS {
        return direct_series(a, b, c, x, opts);
    }
    let w = x / (x - 1.0);
    if w.norm() <= PFAFF_RADIUS {
        let f = direct_series(c - a, b, c, w, opts)?;
        return Ok((Complex64::new(1.0, 0.0) - x).powc(-b) * f);
    }
    euler_series(a, b, c, x, opts)
}

fn finite_sum(a: Complex64, b: Complex64, c: Complex64, x: Complex64, degree: usize) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 0..degree {
        term *= term_ratio(a, b, c, k) * x;
        sum += term;
    }
    sum
}

fn not_converged(terms: usize, sum: Complex64, change: f64) -> Error {
    Error::SeriesNotConverged {
        terms,
        partial_re: sum.re,
        partial_im: sum.im,
        last_change: change,
    }
}

fn direct_series(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    x: Complex64,
    opts: SeriesOptions,
) -> Result<Complex64> {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    // two consecutive small terms guard against accidental near-zero ratios
    let mut quiet = 0;
    for k in 0..opts.max_terms {
        term *= term_ratio(a, b, c, k) * x;
        sum += term;
        if term.norm() <= opts.tolerance * sum.norm() {
            quiet += 1;
            if quiet == 2 {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
    }
    Err(not_converged(opts.max_terms, sum, term.norm()))
}

/// Partial sums of `sum_k t_k` rewritten through
/// `u_k = t_k - x t_{k-1}` (so that `sum_k u_k = (1 - x) sum_k t_k`),
/// applied [`EULER_PASSES`] times. Each pass gains one power of `k` in
/// the decay of the terms when `t_k / x^k` varies smoothly.
fn euler_series(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    x: Complex64,
    opts: SeriesOptions,
) -> Result<Complex64> {
    let scale = (Complex64::new(1.0, 0.0) - x).powi(EULER_PASSES as i32);
    let mut prev = [Complex64::new(0.0, 0.0); EULER_PASSES];
    let mut acc = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut checkpoint = 256usize;
    let mut last: Option<Complex64> = None;
    let mut change = f64::INFINITY;
    for k in 0..opts.max_terms {
        if k > 0 {
            term *= term_ratio(a, b, c, k - 1) * x;
        }
        let mut u = term;
        for p in prev.iter_mut() {
            let next = u - x * *p;
            *p = u;
            u = next;
        }
        acc += u;
        if k + 1 == checkpoint {
            let sum = acc / scale;
            if let Some(old) = last {
                change = (sum - old).norm();
                if change <= opts.tolerance * sum.norm().max(f64::MIN_POSITIVE) {
                    return Ok(sum);
                }
            }
            last = Some(sum);
            checkpoint *= 2;
        }
    }
    Err(not_converged(opts.max_terms, acc / scale, change))
}
