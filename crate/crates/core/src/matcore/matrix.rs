use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{invalid, Result};
use crate::scalar::{is_finite, Real};

use super::svd::{power_iteration_norm, Svd};

/// Largest dimension for which the operator norm goes through a full SVD.
pub const SVD_NORM_LIMIT: usize = 64;

/// Dense row-major matrix of complex scalars.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    /// Builds a matrix from row-major entries, rejecting bad shapes and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return invalid(format!("matrix dimensions must be positive, got {rows}x{cols}"));
        }
        if data.len() != rows * cols {
            return invalid(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            ));
        }
        if let Some(pos) = data.iter().position(|z| !is_finite(z)) {
            return invalid(format!("non-finite entry at index {pos}"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self { rows, cols, data: vec![Complex::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Real-valued matrix from row-major `f64` entries. Panics on a length mismatch.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        Self::from_fn(rows, cols, |i, j| Complex::new(T::lit(entries[i * cols + j]), T::zero()))
    }

    pub fn diag(values: &[Complex<T>]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// 1×1 matrix holding `z`.
    pub fn scalar(z: Complex<T>) -> Self {
        Self { rows: 1, cols: 1, data: vec![z] }
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

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex<T>> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(is_finite)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| f(z)).collect() }
    }

    /// Matrix product. Panics if the inner dimensions disagree.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .fold(Complex::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// Elementwise sum. Panics on a shape mismatch.
    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.shape(), rhs.shape(), "add shape mismatch");
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.shape(), rhs.shape(), "sub shape mismatch");
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn add_assign(&mut self, rhs: &Self) {
        assert_eq!(self.shape(), rhs.shape(), "add shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        self.map(|z| z * c)
    }

    pub fn scale_real(&self, t: T) -> Self {
        self.map(|z| z * t)
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// Kronecker product; entry `((i,k),(j,l))` is `self[i,j] * rhs[k,l]`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let (r2, c2) = rhs.shape();
        Self::from_fn(self.rows * r2, self.cols * c2, |r, c| {
            self[(r / r2, c / c2)] * rhs[(r % r2, c % c2)]
        })
    }

    /// Block-diagonal matrix `self ⊕ rhs`.
    pub fn direct_sum(&self, rhs: &Self) -> Self {
        let mut out = Self::zeros(self.rows + rhs.rows, self.cols + rhs.cols);
        out.set_block(0, 0, self);
        out.set_block(self.rows, self.cols, rhs);
        out
    }

    /// Entrywise (Schur/Hadamard) product.
    pub fn schur_product(&self, rhs: &Self) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return invalid(format!(
                "schur product needs equal shapes, got {}x{} and {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            ));
        }
        Ok(self.zip_with(rhs, |a, b| a * b))
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols, "block out of range");
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Self) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols, "block out of range");
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).fold(Complex::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    /// Largest entrywise modulus of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> T {
        assert_eq!(self.shape(), rhs.shape());
        self.data.iter().zip(&rhs.data).map(|(a, b)| (a - b).norm()).fold(T::zero(), T::max)
    }

    /// Largest singular value. Full SVD up to [`SVD_NORM_LIMIT`], power
    /// iteration on `A*A` above it.
    pub fn operator_norm(&self) -> Result<T> {
        if !self.is_finite() {
            return invalid("operator norm of a matrix with non-finite entries");
        }
        Ok(self.operator_norm_unchecked())
    }

    pub(crate) fn operator_norm_unchecked(&self) -> T {
        if self.rows.max(self.cols) <= SVD_NORM_LIMIT {
            Svd::compute(self).singular_values.first().copied().unwrap_or_else(T::zero)
        } else {
            power_iteration_norm(self)
        }
    }

    pub fn svd(&self) -> Result<Svd<T>> {
        if !self.is_finite() {
            return invalid("svd of a matrix with non-finite entries");
        }
        Ok(Svd::compute(self))
    }

    pub fn singular_values(&self) -> Vec<T> {
        Svd::compute(self).singular_values
    }

    /// Nearest point (in every unitarily invariant norm) of the operator-norm
    /// ball of radius `r`: singular values are clipped at `r`. Points already
    /// inside the ball are returned unchanged.
    pub fn project_ball(&self, r: T) -> Self {
        let svd = Svd::compute(self);
        if svd.singular_values.first().is_none_or(|&s| s <= r) {
            return self.clone();
        }
        let clipped: Vec<T> = svd.singular_values.iter().map(|&s| s.min(r)).collect();
        svd.reconstruct_with(&clipped)
    }

    /// Applies `f` to the spectrum of a Hermitian positive semidefinite matrix.
    pub(crate) fn psd_function(&self, f: impl Fn(T) -> T) -> Self {
        assert!(self.is_square());
        // For A = U S V* positive semidefinite, A = V S V*.
        let svd = Svd::compute(self);
        let n = self.rows;
        Self::from_fn(n, n, |i, j| {
            let mut acc = Complex::zero();
            for (k, &s) in svd.singular_values.iter().enumerate() {
                acc += svd.v[(i, k)] * svd.v[(j, k)].conj() * f(s);
            }
            acc
        })
    }

    /// Hermitian inner product `tr(self* rhs)`.
    pub fn frobenius_inner(&self, rhs: &Self) -> Complex<T> {
        assert_eq!(self.shape(), rhs.shape());
        self.data.iter().zip(&rhs.data).fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * b)
    }

    /// Total lexicographic order on `(re, im)` pairs; used for
    /// deterministic tie-breaking between equal-valued candidates.
    pub fn lex_cmp(&self, rhs: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match self.shape().cmp(&rhs.shape()) {
            Ordering::Equal => {}
            o => return o,
        }
        for (a, b) in self.data.iter().zip(&rhs.data) {
            let o = a.re.partial_cmp(&b.re).unwrap_or(Ordering::Equal);
            if o != Ordering::Equal {
                return o;
            }
            let o = a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal);
            if o != Ordering::Equal {
                return o;
            }
        }
        Ordering::Equal
    }

    pub fn cast<U: Real>(&self) -> ComplexMatrix<U> {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|z| Complex::new(U::lit(z.re.to_f64_lossy()), U::lit(z.im.to_f64_lossy())))
                .collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;

    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for ComplexMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = &self.data[i * self.cols + j];
                write!(f, "({:.6?}, {:.6?}) ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}
