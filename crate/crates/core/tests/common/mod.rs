#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use resolvent_kit::SymMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix {
    let mut upper = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            upper[i * n + j] = rng.random_range(-1.0..1.0);
        }
    }
    SymMatrix::from_fn(n, |i, j| upper[i.min(j) * n + i.max(j)]).unwrap()
}

/// `A A^T + n/2 I` with uniform entries in `A`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix {
    let a: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    SymMatrix::from_fn(n, |i, j| {
        let dot: f64 = (0..n).map(|k| a[i * n + k] * a[j * n + k]).sum();
        dot + if i == j { 0.5 * n as f64 } else { 0.0 }
    })
    .unwrap()
}

/// Diagonally dominant tridiagonal SPD matrix with nonzero couplings.
pub fn random_tridiagonal_spd(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix {
    let off: Vec<f64> = (0..n)
        .map(|_| {
            let v: f64 = rng.random_range(0.2..0.9);
            if rng.random_bool(0.5) { v } else { -v }
        })
        .collect();
    let diag: Vec<f64> = (0..n).map(|_| rng.random_range(2.0..3.0)).collect();
    SymMatrix::from_fn(n, |i, j| {
        if i == j {
            diag[i]
        } else if i.abs_diff(j) == 1 {
            off[i.min(j)]
        } else {
            0.0
        }
    })
    .unwrap()
}

/// Complex point at least 0.05 away from the real axis.
pub fn random_z(rng: &mut ChaCha8Rng) -> Complex64 {
    let im: f64 = rng.random_range(0.05..1.0);
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    Complex64::new(rng.random_range(-3.0..3.0), sign * im)
}

pub fn rel_close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

/// Laplace expansion along the first row.
pub fn det_cofactor(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<f64>> = m[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &v)| v).collect())
                .collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * m[0][j] * det_cofactor(&minor)
        })
        .sum()
}

pub fn rows_of(a: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect())
        .collect()
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on
/// the three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Composite 20-point Gauss-Legendre rule on `[a, b]` with `panels` panels.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = gauss_legendre(20);
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let mid = a + h * (p as f64 + 0.5);
        for (xi, wi) in x.iter().zip(&w) {
            sum += wi * f(mid + 0.5 * h * xi);
        }
    }
    0.5 * h * sum
}

/// Generalized Laguerre polynomial from its explicit sum
/// `sum_j (-1)^j C(n + alpha, n - j) x^j / j!`.
pub fn laguerre_poly(n: usize, alpha: f64, x: f64) -> f64 {
    let mut sum = 0.0;
    for j in 0..=n {
        // C(n + alpha, n - j) = prod_{i=1}^{n-j} (alpha + j + i) / i
        let mut binom = 1.0;
        for i in 1..=(n - j) {
            binom *= (alpha + (j + i) as f64) / i as f64;
        }
        let mut term = binom;
        for i in 1..=j {
            term *= x / i as f64;
        }
        sum += if j % 2 == 0 { term } else { -term };
    }
    sum
}

pub fn ln_gamma(x: f64) -> f64 {
    // Lanczos, g = 7
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}
