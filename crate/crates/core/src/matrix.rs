//! Dense symmetric and generalized symmetric-definite eigenproblems,
//! determinants and row/column deletion.
//!
//! Every formula for the resolvent reduces to one of three primitives on
//! small dense matrices: an eigen-decomposition, a determinant, or a
//! submatrix with one row and one column removed. They live here.

use nalgebra::linalg::{Cholesky, Schur, SymmetricEigen};
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance used by invariant checks unless configured otherwise.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

/// A real symmetric `n x n` matrix, `n >= 1`.
///
/// Symmetry is exact: construction fails if any entry differs from its
/// transpose partner, and [`SymMatrix::from_fn`] mirrors the upper
/// triangle so it cannot fail.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    inner: DMatrix<f64>,
}

impl SymMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidArgument(format!(
                "symmetric matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidArgument(
                "matrix dimension must be at least 1".into(),
            ));
        }
        let n = matrix.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                if matrix[(i, j)] != matrix[(j, i)] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self { inner: matrix })
    }

    /// Builds a symmetric matrix from `f(i, j)` evaluated on the upper
    /// triangle (`i <= j`).
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "matrix dimension must be at least 1".into(),
            ));
        }
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Ok(Self { inner: m })
    }

    /// Row-major constructor, convenient for small literals in tests and docs.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("rows must form a square matrix".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.inner
    }

    /// Entry-wise sum; the result is symmetric because both operands are.
    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(Self {
            inner: &self.inner + &other.inner,
        })
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.inner.amax()
    }

    /// `self - z * other` as a complex matrix.
    pub(crate) fn shifted(&self, z: Complex64, other: Option<&SymMatrix>) -> DMatrix<Complex64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| {
            let o = match other {
                Some(m) => m.inner[(i, j)],
                None if i == j => 1.0,
                None => 0.0,
            };
            Complex64::new(self.inner[(i, j)], 0.0) - z * o
        })
    }
}

/// A real rectangular matrix with no structural constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralMatrix {
    inner: DMatrix<f64>,
}

impl GeneralMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(Error::InvalidArgument(
                "matrix must have at least one row and one column".into(),
            ));
        }
        Ok(Self { inner: matrix })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidArgument("ragged rows".into()));
        }
        Self::new(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.inner
    }
}

impl From<SymMatrix> for GeneralMatrix {
    fn from(m: SymMatrix) -> Self {
        Self { inner: m.inner }
    }
}

impl From<&SymMatrix> for GeneralMatrix {
    fn from(m: &SymMatrix) -> Self {
        Self {
            inner: m.inner.clone(),
        }
    }
}

/// Eigenvalues and simultaneously-diagonalizing eigenvectors of a
/// (generalized) symmetric eigenproblem `A v = eps B v`.
///
/// Columns of `gamma` are the eigenvectors, ordered by ascending
/// eigenvalue. `sigma[i]` and `eta[i]` are the diagonal entries of
/// `gamma^T B gamma` and `gamma^T A gamma`, so `eps[i] = eta[i] / sigma[i]`.
/// The solvers here normalize so that every `sigma[i] == 1`; use
/// [`SpectralPair::rescale_columns`] to move to another convention.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPair {
    eps: Vec<f64>,
    gamma: DMatrix<f64>,
    sigma: Vec<f64>,
    eta: Vec<f64>,
}

impl SpectralPair {
    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eps
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    /// Multiplies column `i` of the eigenvector matrix by `factors[i]`.
    /// `sigma` and `eta` pick up the square of the factor; eigenvalues are
    /// unchanged.
    pub fn rescale_columns(&self, factors: &[f64]) -> Result<SpectralPair> {
        check_same_dim(self.len(), factors.len())?;
        let mut out = self.clone();
        for (i, &c) in factors.iter().enumerate() {
            if c == 0.0 || !c.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "column scale factor {c} must be finite and nonzero"
                )));
            }
            out.gamma.column_mut(i).scale_mut(c);
            out.sigma[i] *= c * c;
            out.eta[i] *= c * c;
        }
        Ok(out)
    }

    /// Largest off-diagonal magnitude of `gamma^T A gamma` and
    /// `gamma^T B gamma` (identity when `b` is `None`).
    pub fn diagonalization_residual(&self, a: &SymMatrix, b: Option<&SymMatrix>) -> (f64, f64) {
        let ga = self.gamma.transpose() * a.as_matrix() * &self.gamma;
        let gb = match b {
            Some(b) => self.gamma.transpose() * b.as_matrix() * &self.gamma,
            None => self.gamma.transpose() * &self.gamma,
        };
        (max_off_diagonal(&ga), max_off_diagonal(&gb))
    }
}

fn max_off_diagonal(m: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                worst = worst.max(m[(i, j)].abs());
            }
        }
    }
    worst
}

fn check_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// First component of each column that is not negligible is made positive.
fn fix_column_signs(v: &mut DMatrix<f64>) {
    for mut col in v.column_iter_mut() {
        let scale = col.amax();
        if scale == 0.0 {
            continue;
        }
        if let Some(first) = col.iter().copied().find(|x| x.abs() > 1e-12 * scale) {
            if first < 0.0 {
                col.neg_mut();
            }
        }
    }
}

/// Sorts eigenpairs ascending and applies the column sign convention.
fn sorted_pairs(values: &[f64], vectors: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let eps = order.iter().map(|&i| values[i]).collect();
    let mut gamma = DMatrix::from_fn(vectors.nrows(), n, |r, c| vectors[(r, order[c])]);
    fix_column_signs(&mut gamma);
    (eps, gamma)
}

/// Eigen-decomposition of a real symmetric matrix.
///
/// Eigenvalues ascend; eigenvectors are orthonormal columns with their
/// first non-negligible component positive.
pub fn sym_eig(a: &SymMatrix) -> Result<SpectralPair> {
    let decomposition = SymmetricEigen::try_new(a.as_matrix().clone(), EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or(Error::NotConverged {
            operation: "sym_eig",
            iterations: EIGEN_MAX_ITER,
        })?;
    let (eps, gamma) = sorted_pairs(decomposition.eigenvalues.as_slice(), &decomposition.eigenvectors);
    let n = eps.len();
    Ok(SpectralPair {
        eta: eps.clone(),
        eps,
        gamma,
        sigma: vec![1.0; n],
    })
}

/// Eigenvalues only, ascending. Cheaper than [`sym_eig`] when vectors are
/// not needed.
pub fn sym_eigenvalues(a: &SymMatrix) -> Result<Vec<f64>> {
    let decomposition = SymmetricEigen::try_new(a.as_matrix().clone(), EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or(Error::NotConverged {
            operation: "sym_eigenvalues",
            iterations: EIGEN_MAX_ITER,
        })?;
    let mut values: Vec<f64> = decomposition.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Solves `A v = eps B v` for symmetric `A` and symmetric positive
/// definite `B`.
///
/// `B` is factored as `L L^T`; the symmetric problem for
/// `L^-1 A L^-T` is solved and its eigenvectors mapped back through
/// `L^-T`. Columns come out `B`-orthonormal, so `sigma = 1` and
/// `eta = eps`.
pub fn gen_sym_eig(a: &SymMatrix, b: &SymMatrix) -> Result<SpectralPair> {
    check_same_dim(a.dim(), b.dim())?;
    let chol = Cholesky::new(b.as_matrix().clone()).ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    let left = l
        .solve_lower_triangular(a.as_matrix())
        .ok_or(Error::NotPositiveDefinite)?;
    let reduced = l
        .solve_lower_triangular(&left.transpose())
        .ok_or(Error::NotPositiveDefinite)?;
    let reduced = (&reduced + reduced.transpose()) * 0.5;
    let decomposition = SymmetricEigen::try_new(reduced, EIGEN_EPS, EIGEN_MAX_ITER).ok_or(
        Error::NotConverged {
            operation: "gen_sym_eig",
            iterations: EIGEN_MAX_ITER,
        },
    )?;
    let vectors = l
        .transpose()
        .solve_upper_triangular(&decomposition.eigenvectors)
        .ok_or(Error::NotPositiveDefinite)?;
    let (eps, gamma) = sorted_pairs(decomposition.eigenvalues.as_slice(), &vectors);
    let n = eps.len();
    Ok(SpectralPair {
        eta: eps.clone(),
        eps,
        gamma,
        sigma: vec![1.0; n],
    })
}

/// Generalized eigenvalues only, ascending.
pub fn gen_sym_eigenvalues(a: &SymMatrix, b: &SymMatrix) -> Result<Vec<f64>> {
    Ok(gen_sym_eig(a, b)?.eps)
}

/// `true` when a Cholesky factorization of `m` succeeds.
pub fn is_positive_definite(m: &SymMatrix) -> bool {
    Cholesky::new(m.as_matrix().clone()).is_some()
}

/// Removes row `n` and column `m`. Entry `(i, j)` of the result is entry
/// `(i + [i >= n], j + [j >= m])` of the input.
pub fn delete_row_col(a: &GeneralMatrix, n: usize, m: usize) -> Result<GeneralMatrix> {
    Ok(GeneralMatrix {
        inner: delete_row_col_raw(a.as_matrix(), n, m)?,
    })
}

pub(crate) fn delete_row_col_raw<T: nalgebra::Scalar + Copy>(
    a: &DMatrix<T>,
    n: usize,
    m: usize,
) -> Result<DMatrix<T>> {
    let (rows, cols) = a.shape();
    if n >= rows || m >= cols {
        return Err(Error::IndexOutOfRange {
            row: n,
            col: m,
            dim: rows.min(cols),
        });
    }
    if rows < 2 || cols < 2 {
        return Err(Error::EmptySubmatrix);
    }
    Ok(DMatrix::from_fn(rows - 1, cols - 1, |i, j| {
        a[(i + usize::from(i >= n), j + usize::from(j >= m))]
    }))
}

/// Principal submatrix with row and column `n` removed.
pub fn principal_minor(a: &SymMatrix, n: usize) -> Result<SymMatrix> {
    Ok(SymMatrix {
        inner: delete_row_col_raw(a.as_matrix(), n, n)?,
    })
}

/// Signed determinant by LU factorization with partial pivoting.
pub fn det(a: &GeneralMatrix) -> Result<f64> {
    if a.rows() != a.cols() {
        return Err(Error::InvalidArgument(format!(
            "determinant of a non-square {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    Ok(a.as_matrix().clone().lu().determinant())
}

/// Complex eigenvalues of a real square matrix, ordered by real part and
/// then imaginary part.
pub fn eig_general(a: &GeneralMatrix) -> Result<Vec<Complex64>> {
    if a.rows() != a.cols() {
        return Err(Error::InvalidArgument(format!(
            "eigenvalues of a non-square {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let schur = Schur::try_new(a.as_matrix().clone(), EIGEN_EPS, EIGEN_MAX_ITER).ok_or(
        Error::NotConverged {
            operation: "eig_general",
            iterations: EIGEN_MAX_ITER,
        },
    )?;
    let mut values: Vec<Complex64> = schur
        .complex_eigenvalues()
        .iter()
        .map(|c| Complex64::new(c.re, c.im))
        .collect();
    values.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(values)
}

/// A determinant held as `phase * exp(log_abs)` so that products of many
/// factors neither overflow nor underflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ScaledDet {
    pub phase: Complex64,
    pub log_abs: f64,
}

impl ScaledDet {
    #[cfg(test)]
    pub fn value(self) -> Complex64 {
        self.phase * self.log_abs.exp()
    }

    /// `self / other` as an ordinary complex number.
    pub fn ratio(self, other: ScaledDet) -> Complex64 {
        self.phase / other.phase * (self.log_abs - other.log_abs).exp()
    }
}

/// LU determinant of a complex matrix in scaled form. Returns `None` when
/// a pivot is exactly zero or negligible relative to the matrix scale.
pub(crate) fn scaled_det(a: &DMatrix<Complex64>) -> Option<ScaledDet> {
    let n = a.nrows();
    if n == 0 {
        return Some(ScaledDet {
            phase: Complex64::new(1.0, 0.0),
            log_abs: 0.0,
        });
    }
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let lu = a.clone().lu();
    let u = lu.u();
    let mut phase = lu.p().determinant::<Complex64>();
    let mut log_abs = 0.0;
    for i in 0..n {
        let p = u[(i, i)];
        let mag = p.norm();
        if mag <= 1e-15 * scale {
            return None;
        }
        phase *= p / mag;
        log_abs += mag.ln();
    }
    Some(ScaledDet { phase, log_abs })
}

pub(crate) fn to_complex(a: &DMatrix<f64>) -> DMatrix<Complex64> {
    a.map(|x| Complex64::new(x, 0.0))
}
