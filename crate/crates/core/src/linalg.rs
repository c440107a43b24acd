//! Dense linear-algebra primitives.
//!
//! Factorizations and decompositions are backed by `nalgebra`; the positive
//! definiteness test, the symmetric square roots and the matrix exponential
//! are implemented here because their thresholds are part of the contract.

use std::ops::{Add, Deref, Mul, Sub};

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense real matrix used for every non-symmetric quantity.
pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative symmetry tolerance (against the largest entry).
pub const TOL_SYM: f64 = 1e-12;
/// Relative pivot threshold of the positive-definiteness test.
pub const TOL_PD: f64 = 1e-12;
/// Relative tolerance below zero tolerated by [`sym_sqrt`] before clamping.
pub const TOL_PSD: f64 = 1e-12;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

/// A real symmetric matrix.
///
/// Construction checks symmetry to [`TOL_SYM`] and then stores the exact
/// symmetric part `(A + Aᵀ)/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        Self::named(m, "matrix")
    }

    /// Like [`SymMatrix::new`] but names the matrix in the error.
    pub fn named(m: Matrix, name: &str) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "{name} must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let scale = m.amax();
        let asym = (&m - m.transpose()).amax();
        if asym > TOL_SYM * scale {
            return Err(Error::NotSymmetric(name.to_string()));
        }
        Ok(Self::symmetrize(m))
    }

    /// Symmetric part of `m`, without any check.
    pub(crate) fn symmetrize(m: Matrix) -> Self {
        let t = m.transpose();
        SymMatrix((m + t) * 0.5)
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(Matrix::identity(n, n))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        SymMatrix(Matrix::from_diagonal(&Vector::from_column_slice(d)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    /// `xᵀ A x`.
    pub fn quad_form(&self, x: &Vector) -> f64 {
        x.dot(&(&self.0 * x))
    }
}

impl Deref for SymMatrix {
    type Target = Matrix;

    fn deref(&self) -> &Matrix {
        &self.0
    }
}

impl Add for &SymMatrix {
    type Output = SymMatrix;

    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;

    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 - &rhs.0)
    }
}

impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;

    fn mul(self, s: f64) -> SymMatrix {
        SymMatrix(&self.0 * s)
    }
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct EigenDecompSym {
    pub values: Vector,
    /// Orthonormal eigenvectors, one per column, in the order of `values`.
    pub vectors: Matrix,
}

impl EigenDecompSym {
    /// `V f(Λ) Vᵀ`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let scaled = Matrix::from_fn(self.vectors.nrows(), self.vectors.ncols(), |i, j| {
            self.vectors[(i, j)] * f(self.values[j])
        });
        &scaled * self.vectors.transpose()
    }
}

pub fn sym_eigen(a: &SymMatrix) -> Result<EigenDecompSym> {
    let eig = SymmetricEigen::try_new(a.0.clone(), EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or(Error::NonConvergence)?;
    let n = a.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = Vector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(EigenDecompSym { values, vectors })
}

/// Smallest pivot of an unpivoted Cholesky factorization, relative to the
/// largest entry of `a`.
///
/// The factorization stops at the first non-positive pivot and reports it,
/// so a non-positive return value means the matrix is not definite.
pub fn min_relative_pivot(a: &SymMatrix) -> f64 {
    let scale = a.amax();
    if scale == 0.0 {
        return 0.0;
    }
    let n = a.dim();
    let mut l = Matrix::zeros(n, n);
    let mut min_pivot = f64::INFINITY;
    for j in 0..n {
        let mut pivot = a[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        let rel = pivot / scale;
        min_pivot = min_pivot.min(rel);
        if !(pivot > 0.0) {
            return rel.min(0.0);
        }
        let d = pivot.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    min_pivot
}

/// True iff every Cholesky pivot exceeds `TOL_PD · max|a_ij|`.
pub fn is_positive_definite(a: &SymMatrix) -> bool {
    min_relative_pivot(a) > TOL_PD
}

/// Lower Cholesky factor, subject to the same pivot threshold as
/// [`is_positive_definite`].
pub fn cholesky(a: &SymMatrix, name: &str) -> Result<Matrix> {
    if !is_positive_definite(a) {
        return Err(Error::NotPd(name.to_string()));
    }
    let chol =
        a.0.clone()
            .cholesky()
            .ok_or_else(|| Error::NotPd(name.to_string()))?;
    Ok(chol.unpack())
}

/// Principal square root of a positive semidefinite matrix.
///
/// Eigenvalues in `[-TOL_PSD·‖a‖, 0)` are clamped to zero.
pub fn sym_sqrt(a: &SymMatrix) -> Result<SymMatrix> {
    let eig = sym_eigen(a)?;
    let norm = eig.values.amax();
    let min = eig.values[0];
    if min < -TOL_PSD * norm {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    Ok(SymMatrix::symmetrize(eig.map_values(|v| v.max(0.0).sqrt())))
}

/// `a^{-1/2}`: the square root followed by a Cholesky solve against the
/// identity.
pub fn sym_inv_sqrt(a: &SymMatrix, name: &str) -> Result<SymMatrix> {
    let root = sym_sqrt(a)?;
    let l = cholesky(&root, name)?;
    let n = a.dim();
    let mut x = Matrix::identity(n, n);
    if !l.solve_lower_triangular_mut(&mut x) {
        return Err(Error::NotPd(name.to_string()));
    }
    let lt = l.transpose();
    if !lt.solve_upper_triangular_mut(&mut x) {
        return Err(Error::NotPd(name.to_string()));
    }
    Ok(SymMatrix::symmetrize(x))
}

/// Largest singular value.
pub fn spectral_norm(a: &Matrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().max()
}

/// Inverse by LU with partial pivoting.
pub fn inverse(a: &Matrix) -> Result<Matrix> {
    a.clone().try_inverse().ok_or(Error::Singular)
}

// Padé(13,13) numerator coefficients of exp.
const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

// ‖t·a‖₁ / 2^s is brought below this before the Padé step.
const EXPM_SCALED_NORM: f64 = 0.5;

/// `exp(t·a)` by scaling and squaring with a degree-13 Padé approximant.
pub fn expm(a: &Matrix, t: f64) -> Result<Matrix> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expm needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    if t == 0.0 || n == 0 {
        return Ok(Matrix::identity(n, n));
    }
    let ta = a * t;
    let norm1 = one_norm(&ta);
    if !norm1.is_finite() {
        return Err(Error::Overflow);
    }
    let squarings = if norm1 > EXPM_SCALED_NORM {
        (norm1 / EXPM_SCALED_NORM).log2().ceil() as i32
    } else {
        0
    };
    let x = ta * 2f64.powi(-squarings);

    let id = Matrix::identity(n, n);
    let x2 = &x * &x;
    let x4 = &x2 * &x2;
    let x6 = &x4 * &x2;
    let b = &PADE13;
    let u_inner = &x6 * (&x6 * b[13] + &x4 * b[11] + &x2 * b[9])
        + &x6 * b[7]
        + &x4 * b[5]
        + &x2 * b[3]
        + &id * b[1];
    let u = &x * u_inner;
    let v = &x6 * (&x6 * b[12] + &x4 * b[10] + &x2 * b[8])
        + &x6 * b[6]
        + &x4 * b[4]
        + &x2 * b[2]
        + &id * b[0];
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).ok_or(Error::Overflow)?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow);
    }
    Ok(r)
}

/// Maximum absolute column sum.
pub fn one_norm(a: &Matrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Eigenvalues of a general real matrix, sorted by descending real part.
pub fn general_eigenvalues(a: &Matrix) -> Result<Vec<Complex64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(
            "eigenvalues need a square matrix".into(),
        ));
    }
    let schur =
        Schur::try_new(a.clone(), EIGEN_EPS, EIGEN_MAX_ITER).ok_or(Error::NonConvergence)?;
    let mut values: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    values.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));
    Ok(values)
}

/// Largest real part of the spectrum.
pub fn spectral_abscissa(a: &Matrix) -> Result<f64> {
    Ok(general_eigenvalues(a)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// All eigenvalues of the symmetric-definite pencil `a x = λ b x`, ascending.
///
/// `b` is reduced by its Cholesky factor `L` to the standard problem
/// `L⁻¹ a L⁻ᵀ`.
pub fn gen_sym_eigen(a: &SymMatrix, b: &SymMatrix) -> Result<Vector> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "pencil dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let l = cholesky(b, "pencil weight")?;
    let mut y = a.0.clone();
    if !l.solve_lower_triangular_mut(&mut y) {
        return Err(Error::NotPd("pencil weight".into()));
    }
    let mut z = y.transpose();
    if !l.solve_lower_triangular_mut(&mut z) {
        return Err(Error::NotPd("pencil weight".into()));
    }
    Ok(sym_eigen(&SymMatrix::symmetrize(z))?.values)
}

pub fn gen_sym_eigen_lowest(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    Ok(gen_sym_eigen(a, b)?[0])
}

pub fn gen_sym_eigen_highest(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    let v = gen_sym_eigen(a, b)?;
    Ok(v[v.len() - 1])
}

/// Spectral norm of a 2×2 matrix in closed form.
pub fn norm_2x2(a: [[f64; 2]; 2]) -> f64 {
    let fro2 = a[0][0].powi(2) + a[0][1].powi(2) + a[1][0].powi(2) + a[1][1].powi(2);
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0);
    (0.5 * (fro2 + disc.sqrt())).sqrt()
}

/// Assemble a 2×2 block matrix from equally sized square blocks.
pub fn block2(a11: &Matrix, a12: &Matrix, a21: &Matrix, a22: &Matrix) -> Matrix {
    let n = a11.nrows();
    let mut out = Matrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(a11);
    out.view_mut((0, n), (n, n)).copy_from(a12);
    out.view_mut((n, 0), (n, n)).copy_from(a21);
    out.view_mut((n, n), (n, n)).copy_from(a22);
    out
}
