//! One-sided (Hestenes) Jacobi SVD for dense complex matrices.

use num_complex::Complex;
use num_traits::Zero;

use crate::scalar::Real;

use super::ComplexMatrix;

const MAX_SWEEPS: usize = 80;

/// Thin singular value decomposition `A = U diag(s) V*`.
///
/// For an `m×n` input with `r = min(m, n)`, `u` is `m×r`, `v` is `n×r` and
/// `singular_values` is sorted in decreasing order. Columns of `u` paired
/// with a zero singular value may be zero.
#[derive(Clone, Debug)]
pub struct Svd<T> {
    pub u: ComplexMatrix<T>,
    pub singular_values: Vec<T>,
    pub v: ComplexMatrix<T>,
}

impl<T: Real> Svd<T> {
    pub fn compute(a: &ComplexMatrix<T>) -> Self {
        if a.rows() >= a.cols() {
            tall_svd(a)
        } else {
            let Svd { u, singular_values, v } = tall_svd(&a.adjoint());
            Svd { u: v, singular_values, v: u }
        }
    }

    /// `U diag(values) V*` with the stored singular vectors.
    pub fn reconstruct_with(&self, values: &[T]) -> ComplexMatrix<T> {
        let (m, n) = (self.u.rows(), self.v.rows());
        ComplexMatrix::from_fn(m, n, |i, j| {
            values
                .iter()
                .enumerate()
                .fold(Complex::zero(), |acc, (k, &s)| acc + self.u[(i, k)] * self.v[(j, k)].conj() * s)
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        self.reconstruct_with(&self.singular_values)
    }
}

fn tall_svd<T: Real>(a: &ComplexMatrix<T>) -> Svd<T> {
    let (m, n) = a.shape();
    // column-major working copies
    let mut cols: Vec<Vec<Complex<T>>> = (0..n).map(|j| (0..m).map(|i| a[(i, j)]).collect()).collect();
    let mut vcols: Vec<Vec<Complex<T>>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { Complex::new(T::one(), T::zero()) } else { Complex::zero() }).collect())
        .collect();
    let eps = T::epsilon();
    let two = T::lit(2.0);
    // columns at roundoff level relative to ‖A‖_F are treated as zero;
    // rotating them only stirs noise and stalls convergence
    let negligible = {
        let f = eps * a.frobenius_norm();
        f * f
    };

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (&cols[p], &cols[q]);
                    let mut alpha = T::zero();
                    let mut beta = T::zero();
                    let mut gamma: Complex<T> = Complex::zero();
                    for (x, y) in cp.iter().zip(cq) {
                        alpha += x.norm_sqr();
                        beta += y.norm_sqr();
                        gamma += x.conj() * y;
                    }
                    (alpha, beta, gamma)
                };
                let g = gamma.norm();
                if g.is_zero() || alpha.min(beta) <= negligible || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase_conj = (gamma / g).conj();
                let zeta = (beta - alpha) / (two * g);
                let sign = if zeta >= T::zero() { T::one() } else { -T::one() };
                let t = sign / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let cs = T::one() / (T::one() + t * t).sqrt();
                let sn = cs * t;
                rotate(&mut cols, p, q, phase_conj, cs, sn);
                rotate(&mut vcols, p, q, phase_conj, cs, sn);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<T> = cols.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(std::cmp::Ordering::Equal));

    let mut u = ComplexMatrix::zeros(m, n);
    let mut v = ComplexMatrix::zeros(n, n);
    let mut singular_values = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        let s = norms[j];
        singular_values.push(s);
        if s > T::zero() {
            for i in 0..m {
                u[(i, k)] = cols[j][i] / s;
            }
        }
        for i in 0..n {
            v[(i, k)] = vcols[j][i];
        }
    }
    Svd { u, singular_values, v }
}

/// Applies the column operation that orthogonalises columns `p` and `q`:
/// column `q` is first rotated by `phase_conj` so the pair has a real inner
/// product, then a real Jacobi rotation is applied.
fn rotate<T: Real>(cols: &mut [Vec<Complex<T>>], p: usize, q: usize, phase_conj: Complex<T>, cs: T, sn: T) {
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let a = *x;
        let b = *y * phase_conj;
        *x = a * cs - b * sn;
        *y = a * sn + b * cs;
    }
}

/// Largest singular value via power iteration on `A*A`.
pub(crate) fn power_iteration_norm<T: Real>(a: &ComplexMatrix<T>) -> T {
    let n = a.cols();
    let ah = a.adjoint();
    let mut v: Vec<Complex<T>> = (0..n)
        .map(|i| Complex::new(T::one() + T::lit(i as f64) / T::lit(n as f64), T::lit(0.5 / (1.0 + i as f64))))
        .collect();
    let norm = |v: &[Complex<T>]| v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    let mut lambda = T::zero();
    let tol = T::epsilon() * T::lit(16.0);
    for _ in 0..20_000 {
        let nv = norm(&v);
        if nv.is_zero() {
            return T::zero();
        }
        for z in v.iter_mut() {
            *z /= nv;
        }
        let w = ah.matvec(&a.matvec(&v));
        let next = norm(&w);
        let done = (next - lambda).abs() <= tol * next;
        lambda = next;
        v = w;
        if done {
            break;
        }
    }
    lambda.sqrt()
}
