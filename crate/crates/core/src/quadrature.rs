//! Generalized Gauss-Laguerre quadrature by the Golub-Welsch method.
//!
//! The Jacobi matrix of the orthonormal Laguerre polynomials is
//! diagonalized with an implicit QL iteration that only tracks the first
//! few rows of the eigenvector matrix. Those rows are the values
//! `sqrt(w_k) p_n(x_k)` of the orthonormal polynomials at the nodes, which
//! is exactly what a projection onto a Laguerre basis needs.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const QL_MAX_SWEEPS: usize = 60;

/// Nodes and weights for `integral_0^inf x^alpha e^-x f(x) dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub alpha: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// A Gauss rule together with the first `rows` orthonormal Laguerre
/// polynomials at its nodes, scaled by the square roots of the weights:
/// `values[(n, k)] = sqrt(w_k) p_n(x_k)`.
///
/// The polynomials carry the usual sign convention (`L_n(0) > 0`), so
/// `sum_k values[(n,k)] values[(m,k)] f(x_k)` approximates
/// `integral x^alpha e^-x p_n p_m f dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedRule {
    pub rule: GaussRule,
    pub values: DMatrix<f64>,
}

impl ProjectedRule {
    /// `sum_k values[(n,k)] values[(m,k)] f(x_k)` for all `n, m < rows`.
    pub fn project(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let rows = self.values.nrows();
        let fx: Vec<f64> = self.rule.nodes.iter().map(|&x| f(x)).collect();
        let mut out = DMatrix::zeros(rows, rows);
        for n in 0..rows {
            for m in n..rows {
                let s: f64 = (0..fx.len())
                    .map(|k| self.values[(n, k)] * self.values[(m, k)] * fx[k])
                    .sum();
                out[(n, m)] = s;
                out[(m, n)] = s;
            }
        }
        out
    }
}

fn validate(alpha: f64, npts: usize) -> Result<()> {
    if !(alpha > -1.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "Laguerre weight exponent must exceed -1, got {alpha}"
        )));
    }
    if npts == 0 {
        return Err(Error::InvalidArgument("quadrature needs at least one point".into()));
    }
    Ok(())
}

/// Generalized Gauss-Laguerre rule with `npts` points for the weight
/// `x^alpha e^-x`, exact for polynomials of degree `2 npts - 1`.
pub fn gauss_laguerre(alpha: f64, npts: usize) -> Result<GaussRule> {
    Ok(laguerre_projection(alpha, npts, 1)?.rule)
}

/// Gauss rule plus orthonormal polynomial values for `rows <= npts`.
pub fn laguerre_projection(alpha: f64, npts: usize, rows: usize) -> Result<ProjectedRule> {
    validate(alpha, npts)?;
    if rows == 0 || rows > npts {
        return Err(Error::InvalidArgument(format!(
            "cannot project {rows} polynomials with {npts} quadrature points"
        )));
    }
    let mut diag: Vec<f64> = (0..npts).map(|k| 2.0 * k as f64 + alpha + 1.0).collect();
    // negative couplings keep the polynomial sign convention
    let mut off: Vec<f64> = (1..npts)
        .map(|k| -((k as f64) * (k as f64 + alpha)).sqrt())
        .collect();
    off.push(0.0);
    let mut z = vec![0.0; rows * npts];
    for r in 0..rows {
        z[r * npts + r] = 1.0;
    }
    tridiagonal_ql(&mut diag, &mut off, &mut z, rows)?;

    let mut order: Vec<usize> = (0..npts).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
    let mu0 = libm::lgamma(alpha + 1.0).exp();
    let mut values = DMatrix::zeros(rows, npts);
    let mut nodes = Vec::with_capacity(npts);
    let mut weights = Vec::with_capacity(npts);
    for (k, &j) in order.iter().enumerate() {
        let sign = if z[j] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..rows {
            values[(r, k)] = sign * z[r * npts + j];
        }
        nodes.push(diag[j]);
        weights.push(mu0 * z[j] * z[j]);
    }
    Ok(ProjectedRule {
        rule: GaussRule {
            alpha,
            nodes,
            weights,
        },
        values,
    })
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.
///
/// `d` holds the diagonal and becomes the eigenvalues; `e[i]` couples
/// `i` and `i + 1` (last entry ignored) and is destroyed. `z` is a
/// row-major `rows x n` block whose rows are rotated along with the
/// matrix, so starting from the first rows of the identity it ends as the
/// first rows of the eigenvector matrix.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], z: &mut [f64], rows: usize) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() + dd == dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > QL_MAX_SWEEPS {
                return Err(Error::NotConverged {
                    operation: "tridiagonal QL",
                    iterations: QL_MAX_SWEEPS,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..rows {
                    let row = &mut z[k * n..(k + 1) * n];
                    let f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn one_point_rule() {
        let rule = gauss_laguerre(0.0, 1).unwrap();
        assert_relative_eq!(rule.nodes[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(rule.weights[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(rule.integrate(|x| x), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn factorial_moments() {
        let rule = gauss_laguerre(0.0, 3).unwrap();
        assert_relative_eq!(rule.integrate(|x| x.powi(5)), 120.0, max_relative = 1e-12);
        // Gamma(alpha + k + 1) for a fractional weight
        let rule = gauss_laguerre(0.5, 6).unwrap();
        let exact = libm::tgamma(0.5 + 7.0 + 1.0);
        assert_relative_eq!(rule.integrate(|x| x.powi(7)), exact, max_relative = 1e-12);
    }

    #[test]
    fn matches_nalgebra_eigenvalues() {
        let npts = 40;
        let alpha = 1.0;
        let rule = gauss_laguerre(alpha, npts).unwrap();
        let mut jac = DMatrix::<f64>::zeros(npts, npts);
        for k in 0..npts {
            jac[(k, k)] = 2.0 * k as f64 + alpha + 1.0;
            if k + 1 < npts {
                let b = ((k as f64 + 1.0) * (k as f64 + 1.0 + alpha)).sqrt();
                jac[(k, k + 1)] = b;
                jac[(k + 1, k)] = b;
            }
        }
        let mut ev: Vec<f64> = jac.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (a, b) in rule.nodes.iter().zip(&ev) {
            assert_relative_eq!(*a, *b, max_relative = 1e-12);
        }
    }

    /// Orthonormal Laguerre values by the three-term recurrence.
    fn recurrence_values(alpha: f64, nmax: usize, x: f64) -> Vec<f64> {
        let mut p = vec![0.0; nmax];
        p[0] = 1.0 / libm::tgamma(alpha + 1.0).sqrt();
        if nmax > 1 {
            p[1] = (alpha + 1.0 - x) * p[0] / (alpha + 1.0).sqrt();
        }
        for n in 1..nmax.saturating_sub(1) {
            let nf = n as f64;
            p[n + 1] = ((2.0 * nf + alpha + 1.0 - x) * p[n]
                - (nf * (nf + alpha)).sqrt() * p[n - 1])
                / ((nf + 1.0) * (nf + alpha + 1.0)).sqrt();
        }
        p
    }

    #[test]
    fn projected_rows_are_weighted_polynomials() {
        let alpha = 2.5;
        let proj = laguerre_projection(alpha, 30, 6).unwrap();
        for (k, (&x, &w)) in proj.rule.nodes.iter().zip(&proj.rule.weights).enumerate() {
            let p = recurrence_values(alpha, 6, x);
            for n in 0..6 {
                let expected = w.sqrt() * p[n];
                assert!((proj.values[(n, k)] - expected).abs() <= 1e-12, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn projection_is_orthonormal_and_resolves_x() {
        let proj = laguerre_projection(1.0, 24, 8).unwrap();
        let gram = proj.project(|_| 1.0);
        let xmat = proj.project(|x| x);
        for n in 0..8 {
            for m in 0..8 {
                let id = if n == m { 1.0 } else { 0.0 };
                assert!((gram[(n, m)] - id).abs() <= 1e-13);
                let jac = match (n as i64 - m as i64).abs() {
                    0 => 2.0 * n as f64 + 2.0,
                    1 => {
                        let k = n.min(m) as f64;
                        -((k + 1.0) * (k + 2.0)).sqrt()
                    }
                    _ => 0.0,
                };
                assert!((xmat[(n, m)] - jac).abs() <= 1e-12, "({n},{m})");
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(gauss_laguerre(-1.0, 4).is_err());
        assert!(gauss_laguerre(0.0, 0).is_err());
        assert!(laguerre_projection(0.0, 4, 5).is_err());
    }
}
