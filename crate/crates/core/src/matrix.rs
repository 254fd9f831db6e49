//! Dense complex matrices and the few factorizations the analysis needs.
//!
//! Storage is row-major. Singular values and the general eigenproblem go
//! through `faer`; LU, Cholesky and the norms are implemented here so the
//! pivot tolerance and error reporting follow this crate's conventions.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::fmath;

/// Largest dimension for which the 2-norm comes from a full SVD.
pub const SVD_LIMIT: usize = 2048;
/// Relative tolerance of the power-iteration 2-norm used above [`SVD_LIMIT`].
pub const POWER_ITERATION_TOL: f64 = 1e-10;
/// Iteration cap of the power-iteration 2-norm.
pub const POWER_ITERATION_CAP: usize = 5000;
/// Relative pivot tolerance of [`CMatrix::solve`], scaled by `norm_inf`.
pub const PIVOT_TOL: f64 = 1e-13;
/// Relative reconstruction tolerance below which [`CMatrix::eig`] reports a
/// diagonalizable matrix.
pub const EIG_TOL: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MatrixError {
    #[error("dimension mismatch: {op} of {lhs:?} and {rhs:?}")]
    DimensionMismatch {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },
    #[error("{op} requires a square matrix, got {rows}x{cols}")]
    NotSquare { op: &'static str, rows: usize, cols: usize },
    #[error("{op} requires a nonempty matrix")]
    Empty { op: &'static str },
    #[error("matrix is singular: pivot magnitude {pivot:e} at column {column} (tolerance {tolerance:e})")]
    Singular { pivot: f64, column: usize, tolerance: f64 },
    #[error("matrix is not Hermitian positive definite (pivot {pivot:e} at column {column})")]
    NotPositiveDefinite { pivot: f64, column: usize },
    #[error("{op} did not converge within {iterations} iterations")]
    NoConvergence { op: &'static str, iterations: usize },
    #[error("non-finite value encountered in {op}")]
    NonFinite { op: &'static str },
}

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

/// Result of [`CMatrix::eig`].
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<Complex64>,
    /// Eigenvectors as unit 2-norm columns.
    pub vectors: CMatrix,
    /// `‖MV − VΛ‖₂ / ‖M‖₂`.
    pub residual: f64,
    /// `‖M − VΛV⁻¹‖₂ / ‖M‖₂`, infinite when `V` is numerically singular.
    pub reconstruction: f64,
    /// False for defective or nearly defective input.
    pub diagonalizable: bool,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self, MatrixError> {
        if data.len() != rows * cols {
            return Err(MatrixError::DimensionMismatch {
                op: "from_row_major",
                lhs: (rows, cols),
                rhs: (data.len(), 1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self, MatrixError> {
        Self::from_row_major(rows, cols, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn scalar(z: Complex64) -> Self {
        Self {
            rows: 1,
            cols: 1,
            data: vec![z],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Copy of the `h`×`w` block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, h: usize, w: usize) -> Self {
        assert!(r0 + h <= self.rows && c0 + w <= self.cols, "block out of range");
        Self::from_fn(h, w, |i, j| self[(r0 + i, c0 + j)])
    }

    /// Overwrites the block at `(r0, c0)` with `b`.
    pub fn set_block(&mut self, r0: usize, c0: usize, b: &CMatrix) {
        assert!(
            r0 + b.rows <= self.rows && c0 + b.cols <= self.cols,
            "block out of range"
        );
        for i in 0..b.rows {
            let dst = (r0 + i) * self.cols + c0;
            self.data[dst..dst + b.cols].copy_from_slice(b.row(i));
        }
    }

    /// Adds `s·b` to the block at `(r0, c0)`.
    pub fn add_block(&mut self, r0: usize, c0: usize, b: &CMatrix, s: Complex64) {
        assert!(
            r0 + b.rows <= self.rows && c0 + b.cols <= self.cols,
            "block out of range"
        );
        for i in 0..b.rows {
            let dst = (r0 + i) * self.cols + c0;
            for (d, &x) in self.data[dst..dst + b.cols].iter_mut().zip(b.row(i)) {
                *d += s * x;
            }
        }
    }

    pub fn kron(&self, other: &CMatrix) -> Self {
        let (p, q) = other.shape();
        Self::from_fn(self.rows * p, self.cols * q, |i, j| {
            self[(i / p, j / q)] * other[(i % p, j % q)]
        })
    }

    pub fn try_add(&self, other: &CMatrix) -> Result<Self, MatrixError> {
        self.check_same("add", other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &CMatrix) -> Result<Self, MatrixError> {
        self.check_same("sub", other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn try_mul(&self, other: &CMatrix) -> Result<Self, MatrixError> {
        if self.cols != other.rows {
            return Err(MatrixError::DimensionMismatch {
                op: "mul",
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        Ok(matmul(self, other))
    }

    fn check_same(&self, op: &'static str, other: &CMatrix) -> Result<(), MatrixError> {
        if self.shape() != other.shape() {
            return Err(MatrixError::DimensionMismatch {
                op,
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &CMatrix, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// `self^k` by repeated multiplication.
    pub fn pow(&self, k: usize) -> Result<Self, MatrixError> {
        self.require_square("pow")?;
        let mut out = Self::identity(self.rows);
        for _ in 0..k {
            out = matmul(&out, self);
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, z) in sums.iter_mut().zip(self.row(i)) {
                *s += z.norm();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_frobenius(&self) -> f64 {
        fmath::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    /// Largest singular value.
    pub fn norm_two(&self) -> Result<f64, MatrixError> {
        if self.is_empty() {
            return Err(MatrixError::Empty { op: "norm_two" });
        }
        if !self.is_finite() {
            return Err(MatrixError::NonFinite { op: "norm_two" });
        }
        if self.rows.max(self.cols) <= SVD_LIMIT {
            Ok(self.singular_values()?.first().copied().unwrap_or(0.0))
        } else {
            self.norm_two_power()
        }
    }

    /// Singular values in non-increasing order.
    pub fn singular_values(&self) -> Result<Vec<f64>, MatrixError> {
        if self.is_empty() {
            return Err(MatrixError::Empty { op: "singular_values" });
        }
        let mut s = self
            .to_faer()
            .singular_values()
            .map_err(|_| MatrixError::NoConvergence {
                op: "singular value decomposition",
                iterations: 0,
            })?;
        s.sort_by(|a, b| b.total_cmp(a));
        Ok(s)
    }

    /// 2-norm by power iteration on `MᴴM`.
    pub fn norm_two_power(&self) -> Result<f64, MatrixError> {
        if self.is_empty() {
            return Err(MatrixError::Empty { op: "norm_two" });
        }
        let adj = self.adjoint();
        // Deterministic start vector with all modes present.
        let mut x: Vec<Complex64> = (0..self.cols)
            .map(|j| Complex64::new(1.0 + (j as f64 * 0.618_033_988_749_895) % 1.0, 0.0))
            .collect();
        normalize(&mut x);
        let mut prev = 0.0;
        let mut prev_delta = f64::INFINITY;
        for _ in 0..POWER_ITERATION_CAP {
            // Rayleigh quotient of MᴴM: error squares the eigenvalue ratio.
            let mx = self.mul_vec(&x);
            let sigma = fmath::sqrt(mx.iter().map(|z| z.norm_sqr()).sum::<f64>());
            if sigma == 0.0 {
                return Ok(0.0);
            }
            // Remaining error of a linearly converging sequence with observed
            // rate r is about delta·r/(1−r).
            let delta = fmath::abs(sigma - prev);
            let r = delta / prev_delta;
            let remaining = if r < 1.0 { delta * r / (1.0 - r) } else { f64::INFINITY };
            if delta <= POWER_ITERATION_TOL * sigma && remaining <= POWER_ITERATION_TOL * sigma {
                return Ok(sigma);
            }
            prev = sigma;
            prev_delta = delta;
            x = adj.mul_vec(&mx);
            normalize(&mut x);
        }
        Err(MatrixError::NoConvergence {
            op: "power iteration 2-norm",
            iterations: POWER_ITERATION_CAP,
        })
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Solves `self · X = b` by LU with partial pivoting.
    pub fn solve(&self, b: &CMatrix) -> Result<CMatrix, MatrixError> {
        self.require_square("solve")?;
        if b.rows != self.rows {
            return Err(MatrixError::DimensionMismatch {
                op: "solve",
                lhs: self.shape(),
                rhs: b.shape(),
            });
        }
        let lu = Lu::factor(self)?;
        Ok(lu.solve(b))
    }

    pub fn inverse(&self) -> Result<CMatrix, MatrixError> {
        self.solve(&CMatrix::identity(self.rows))
    }

    /// Upper-triangular `U` with `self = UᴴU`, for Hermitian positive
    /// definite input. Only the upper triangle of `self` is read.
    pub fn cholesky_upper(&self) -> Result<CMatrix, MatrixError> {
        self.require_square("cholesky")?;
        let n = self.rows;
        let mut u = CMatrix::zeros(n, n);
        for i in 0..n {
            let mut d = self[(i, i)].re;
            for k in 0..i {
                d -= u[(k, i)].norm_sqr();
            }
            if !(d > 0.0) {
                return Err(MatrixError::NotPositiveDefinite { pivot: d, column: i });
            }
            let d = fmath::sqrt(d);
            u[(i, i)] = Complex64::new(d, 0.0);
            for j in i + 1..n {
                let mut s = self[(i, j)];
                for k in 0..i {
                    s -= u[(k, i)].conj() * u[(k, j)];
                }
                u[(i, j)] = s / d;
            }
        }
        Ok(u)
    }

    /// Eigendecomposition with a diagonalizability check.
    pub fn eig(&self) -> Result<Eigen, MatrixError> {
        self.require_square("eig")?;
        if self.is_empty() {
            return Err(MatrixError::Empty { op: "eig" });
        }
        if !self.is_finite() {
            return Err(MatrixError::NonFinite { op: "eig" });
        }
        let n = self.rows;
        let evd = self.to_faer().eigen().map_err(|_| MatrixError::NoConvergence {
            op: "eigendecomposition",
            iterations: 0,
        })?;
        let u = evd.U();
        let s = evd.S();
        let values: Vec<Complex64> = (0..n).map(|i| s[i]).collect();
        let mut vectors = CMatrix::from_fn(n, n, |i, j| u[(i, j)]);
        for j in 0..n {
            let nrm = fmath::sqrt((0..n).map(|i| vectors[(i, j)].norm_sqr()).sum::<f64>());
            if nrm > 0.0 {
                for i in 0..n {
                    vectors[(i, j)] /= nrm;
                }
            }
        }
        let scale = self.norm_two()?.max(f64::MIN_POSITIVE);
        let lambda = CMatrix::diagonal(&values);
        let residual = (&(self * &vectors) - &(&vectors * &lambda)).norm_two()? / scale;
        let reconstruction = match Lu::factor(&vectors) {
            Ok(lu) => {
                let vl = &vectors * &lambda;
                let vinv = lu.solve(&CMatrix::identity(n));
                (&(&vl * &vinv) - self).norm_two()? / scale
            }
            Err(_) => f64::INFINITY,
        };
        let diagonalizable = residual <= EIG_TOL && reconstruction <= EIG_TOL;
        Ok(Eigen {
            values,
            vectors,
            residual,
            reconstruction,
            diagonalizable,
        })
    }

    /// `σ_max / σ_min`.
    pub fn cond_two(&self) -> Result<f64, MatrixError> {
        self.require_square("cond_two")?;
        let s = self.singular_values()?;
        let smax = s[0];
        let smin = *s.last().unwrap();
        let tol = f64::EPSILON * self.rows as f64 * smax;
        if smin <= tol {
            return Err(MatrixError::Singular {
                pivot: smin,
                column: self.rows - 1,
                tolerance: tol,
            });
        }
        Ok(smax / smin)
    }

    fn require_square(&self, op: &'static str) -> Result<(), MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::NotSquare {
                op,
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(())
    }

    fn to_faer(&self) -> faer::Mat<Complex64> {
        faer::Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }
}

fn normalize(x: &mut [Complex64]) {
    let n = fmath::sqrt(x.iter().map(|z| z.norm_sqr()).sum::<f64>());
    if n > 0.0 {
        for z in x {
            *z /= n;
        }
    }
}

/// Dense product without dimension checks.
fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (n, k, m) = (a.rows, a.cols, b.cols);
    if n * k * m >= 64 * 64 * 64 {
        let fa = a.to_faer();
        let fb = b.to_faer();
        let fc = &fa * &fb;
        return CMatrix::from_fn(n, m, |i, j| fc[(i, j)]);
    }
    let mut out = CMatrix::zeros(n, m);
    for i in 0..n {
        let arow = a.row(i);
        let orow = &mut out.data[i * m..(i + 1) * m];
        for (l, &x) in arow.iter().enumerate() {
            if x == ZERO {
                continue;
            }
            for (o, &y) in orow.iter_mut().zip(b.row(l)) {
                *o += x * y;
            }
        }
    }
    out
}

/// LU factorization with partial pivoting.
pub(crate) struct Lu {
    n: usize,
    lu: CMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub(crate) fn factor(m: &CMatrix) -> Result<Self, MatrixError> {
        let n = m.rows;
        let tolerance = PIVOT_TOL * m.norm_inf();
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let (p, pmag) = (col..n)
                .map(|r| (r, lu[(r, col)].norm()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pmag > tolerance) || pmag == 0.0 {
                return Err(MatrixError::Singular {
                    pivot: pmag.max(0.0),
                    column: col,
                    tolerance,
                });
            }
            if p != col {
                perm.swap(p, col);
                for j in 0..n {
                    lu.data.swap(p * n + j, col * n + j);
                }
            }
            let pivot = lu[(col, col)];
            for r in col + 1..n {
                let f = lu[(r, col)] / pivot;
                if f == ZERO {
                    continue;
                }
                lu[(r, col)] = f;
                for j in col + 1..n {
                    let u = lu[(col, j)];
                    lu[(r, j)] -= f * u;
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub(crate) fn solve(&self, b: &CMatrix) -> CMatrix {
        let n = self.n;
        let w = b.cols;
        let mut x = CMatrix::from_fn(n, w, |i, j| b[(self.perm[i], j)]);
        for i in 0..n {
            for k in 0..i {
                let l = self.lu[(i, k)];
                if l != ZERO {
                    for j in 0..w {
                        let v = x[(k, j)];
                        x[(i, j)] -= l * v;
                    }
                }
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = self.lu[(i, k)];
                if u != ZERO {
                    for j in 0..w {
                        let v = x[(k, j)];
                        x[(i, j)] -= u * v;
                    }
                }
            }
            let d = self.lu[(i, i)];
            for j in 0..w {
                x[(i, j)] /= d;
            }
        }
        x
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

// Operator impls panic on shape mismatch; use the `try_*` methods where the
// shapes are not known to agree.
impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.try_mul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        self.try_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        self.try_sub(rhs).expect("matrix difference shape mismatch")
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale_real(-1.0)
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.6e}{:+.6e}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn jordan() -> CMatrix {
        CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn trivial_norms() {
        let i3 = CMatrix::identity(3);
        assert_eq!(i3.norm_one(), 1.0);
        assert_eq!(i3.norm_inf(), 1.0);
        assert_eq!(jordan().norm_one(), 1.0);
        assert_eq!(jordan().norm_inf(), 1.0);
        assert!((jordan().norm_two().unwrap() - 1.0).abs() < 1e-14);
        let d = CMatrix::diagonal(&[c(2.0, 0.0), c(1.0, 0.0)]);
        assert!((d.norm_two().unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn solve_diagonal() {
        let d = CMatrix::diagonal(&[c(2.0, 0.0), c(4.0, 0.0)]);
        let x = d.solve(&CMatrix::identity(2)).unwrap();
        let want = CMatrix::diagonal(&[c(0.5, 0.0), c(0.25, 0.0)]);
        assert!(x.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn singular_solve_reports_pivot() {
        let m = CMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 4.0]).unwrap();
        match m.solve(&CMatrix::identity(2)) {
            Err(MatrixError::Singular { pivot, column, .. }) => {
                assert_eq!(column, 1);
                assert!(pivot < 1e-12);
            }
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn jordan_block_is_flagged() {
        let e = jordan().eig().unwrap();
        assert!(!e.diagonalizable);
    }

    #[test]
    fn diagonal_eig() {
        let d = CMatrix::diagonal(&[c(3.0, 0.0), c(5.0, 0.0)]);
        let e = d.eig().unwrap();
        assert!(e.diagonalizable);
        let mut vals: Vec<f64> = e.values.iter().map(|z| z.re).collect();
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] - 3.0).abs() < 1e-14 && (vals[1] - 5.0).abs() < 1e-14);
        for j in 0..2 {
            let col: Vec<f64> = (0..2).map(|i| e.vectors[(i, j)].norm()).collect();
            assert!(col.iter().any(|&x| (x - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn cond_of_diagonal() {
        let d = CMatrix::diagonal(&[c(10.0, 0.0), c(1.0, 0.0)]);
        assert!((d.cond_two().unwrap() - 10.0).abs() < 1e-12);
        assert!(matches!(jordan().cond_two(), Err(MatrixError::Singular { .. })));
    }

    #[test]
    fn cholesky_roundtrip() {
        let a = CMatrix::from_fn(3, 3, |i, j| c((i + j) as f64 * 0.1, i as f64 - j as f64));
        let g = &(&a.adjoint() * &a) + &CMatrix::identity(3);
        let u = g.cholesky_upper().unwrap();
        assert!((&u.adjoint() * &u).max_abs_diff(&g) < 1e-13);
    }

    #[test]
    fn power_iteration_agrees_with_svd() {
        let a = CMatrix::from_fn(12, 9, |i, j| {
            c(((i * 7 + j * 3) % 5) as f64 - 2.0, ((i + 2 * j) % 3) as f64)
        });
        let svd = a.norm_two().unwrap();
        let pow = a.norm_two_power().unwrap();
        assert!((svd - pow).abs() <= 1e-9 * svd);
    }

    #[test]
    fn large_product_matches_naive() {
        let a = CMatrix::from_fn(70, 65, |i, j| c((i as f64).sin(), (j as f64).cos()));
        let b = CMatrix::from_fn(65, 66, |i, j| c((i * j) as f64 * 1e-3, 1.0));
        let fast = &a * &b;
        let slow = CMatrix::from_fn(70, 66, |i, j| (0..65).map(|l| a[(i, l)] * b[(l, j)]).sum());
        assert!(fast.max_abs_diff(&slow) < 1e-10);
    }
}
