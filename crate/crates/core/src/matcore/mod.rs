//! Dense complex linear algebra: operator norms, direct sums, Schur
//! products, seeded sampling of and projection onto operator-norm balls.

mod matrix;
mod random;
mod svd;

pub use matrix::{ComplexMatrix, SVD_NORM_LIMIT};
pub use random::{complex_gaussian, gaussian_matrix, sample_ball, sample_ball_with, RngSeed};
pub use svd::Svd;

use crate::error::Result;
use crate::scalar::Real;

/// Largest singular value of `a`.
pub fn operator_norm<T: Real>(a: &ComplexMatrix<T>) -> Result<T> {
    a.operator_norm()
}

pub fn direct_sum<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    a.direct_sum(b)
}

pub fn schur_product<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    a.schur_product(b)
}

pub fn project_ball<T: Real>(a: &ComplexMatrix<T>, r: T) -> ComplexMatrix<T> {
    a.project_ball(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;
    use num_complex::Complex64;
    use rand::Rng;

    type M = ComplexMatrix<f64>;

    /// Independent oracle: plain power iteration on A*A with explicit loops.
    fn power_oracle(a: &M) -> f64 {
        let (m, n) = a.shape();
        let mut v = vec![Complex64::new(1.0, 0.3); n];
        let mut lambda = 0.0;
        for _ in 0..5000 {
            let nv: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.iter_mut().for_each(|z| *z /= nv);
            let mut av = vec![Complex64::new(0.0, 0.0); m];
            for i in 0..m {
                for j in 0..n {
                    av[i] += a[(i, j)] * v[j];
                }
            }
            let mut w = vec![Complex64::new(0.0, 0.0); n];
            for j in 0..n {
                for i in 0..m {
                    w[j] += a[(i, j)].conj() * av[i];
                }
            }
            lambda = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v = w;
        }
        lambda.sqrt()
    }

    #[test]
    fn rank_deficient_svd_converges() {
        // three nonzero rows of a 9x9 matrix, as produced by row spaces
        let mut rng = RngSeed(8).rng();
        let top = gaussian_matrix::<f64, _>(&mut rng, 3, 9);
        let mut a = ComplexMatrix::zeros(9, 9);
        a.set_block(0, 0, &top);
        let svd = a.svd().unwrap();
        assert!(svd.reconstruct().max_abs_diff(&a) < 1e-12);
        assert!(svd.singular_values[3..].iter().all(|&s| s < 1e-12));
        let gram = top.matmul(&top.adjoint());
        let top_sv = gram.singular_values()[0].sqrt();
        assert!((svd.singular_values[0] - top_sv).abs() < 1e-12);
    }

    #[test]
    fn identity_norm_is_one() {
        assert!((M::identity(2).operator_norm().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nilpotent_norm() {
        let a = M::from_real(2, 2, &[0.0, 2.0, 0.0, 0.0]);
        assert!((a.operator_norm().unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn random_norm_matches_power_iteration() {
        let mut rng = RngSeed(11).rng();
        for _ in 0..5 {
            let a: M = gaussian_matrix(&mut rng, 5, 5);
            let ours = a.operator_norm().unwrap();
            assert!((ours - power_oracle(&a)).abs() < 1e-8, "{ours}");
        }
    }

    #[test]
    fn rectangular_svd_reconstructs() {
        let mut rng = RngSeed(3).rng();
        for (m, n) in [(3, 5), (5, 3), (1, 4), (4, 1), (6, 6)] {
            let a: M = gaussian_matrix(&mut rng, m, n);
            let svd = a.svd().unwrap();
            assert!(svd.reconstruct().max_abs_diff(&a) < 1e-12);
            assert!(svd.singular_values.windows(2).all(|w| w[0] >= w[1]));
            // V has orthonormal columns
            let vv = svd.v.adjoint().matmul(&svd.v);
            assert!(vv.max_abs_diff(&M::identity(vv.rows())) < 1e-12);
        }
    }

    #[test]
    fn large_matrix_uses_power_iteration() {
        let mut rng = RngSeed(5).rng();
        let a: M = gaussian_matrix(&mut rng, 70, 70);
        let svd_norm = svd::Svd::compute(&a).singular_values[0];
        let norm = a.operator_norm().unwrap();
        assert!((norm - svd_norm).abs() / svd_norm < 1e-10);
    }

    #[test]
    fn non_finite_rejected() {
        let bad = M::new(1, 2, vec![c(1.0, 0.0), Complex64::new(f64::NAN, 0.0)]);
        assert!(bad.is_err());
        let mut m = M::identity(2);
        m[(0, 1)] = Complex64::new(f64::INFINITY, 0.0);
        assert!(m.operator_norm().is_err());
    }

    #[test]
    fn direct_sum_examples() {
        let a = M::scalar(c(1.0, 0.0));
        let b = M::scalar(c(2.0, 0.0));
        let s = direct_sum(&a, &b);
        assert_eq!(s, M::diag(&[c(1.0, 0.0), c(2.0, 0.0)]));
        assert!((s.operator_norm().unwrap() - 2.0).abs() < 1e-15);

        let mut rng = RngSeed(8).rng();
        let a: M = gaussian_matrix(&mut rng, 3, 3);
        let padded = direct_sum(&a, &M::zeros(2, 2));
        assert!((padded.operator_norm().unwrap() - a.operator_norm().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn schur_examples() {
        let ones = M::from_real(2, 2, &[1.0; 4]);
        let p = schur_product(&ones, &ones).unwrap();
        assert_eq!(p, ones);
        assert!((p.operator_norm().unwrap() - 2.0).abs() < 1e-14);

        let mut rng = RngSeed(9).rng();
        let a: M = gaussian_matrix(&mut rng, 3, 4);
        let all_ones = M::from_real(3, 4, &[1.0; 12]);
        assert_eq!(schur_product(&a, &all_ones).unwrap(), a);
        assert!(schur_product(&a, &M::identity(3)).is_err());
    }

    #[test]
    fn sample_ball_examples() {
        let a: M = sample_ball(4, 0.5, RngSeed(1)).unwrap();
        assert!((a.operator_norm().unwrap() - 0.5).abs() < 1e-12);
        let b: M = sample_ball(4, 0.5, RngSeed(1)).unwrap();
        assert_eq!(a, b);
        let z: M = sample_ball(1, 0.3, RngSeed(2)).unwrap();
        assert_eq!(z.shape(), (1, 1));
        assert!((z[(0, 0)].norm() - 0.3).abs() < 1e-15);
        assert!(sample_ball::<f64>(2, 1.0, RngSeed(0)).is_err());
        assert!(sample_ball::<f64>(2, 0.0, RngSeed(0)).is_err());
    }

    #[test]
    fn project_ball_examples() {
        let mut rng = RngSeed(4).rng();
        let g: M = gaussian_matrix(&mut rng, 3, 3);
        let inside = g.scale_real(0.3 / g.operator_norm().unwrap());
        assert_eq!(project_ball(&inside, 1.0), inside);

        let d = M::diag(&[c(2.0, 0.0), c(0.5, 0.0)]);
        let p = project_ball(&d, 1.0);
        assert!(p.max_abs_diff(&M::diag(&[c(1.0, 0.0), c(0.5, 0.0)])) < 1e-14);

        for _ in 0..50 {
            let rows = rng.random_range(1..6);
            let cols = rng.random_range(1..6);
            let a: M = gaussian_matrix(&mut rng, rows, cols).scale_real(3.0);
            assert!(project_ball(&a, 1.0).operator_norm().unwrap() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn psd_inverse_sqrt() {
        let mut rng = RngSeed(12).rng();
        let g: M = gaussian_matrix(&mut rng, 4, 6);
        let h = g.matmul(&g.adjoint());
        let isq = h.psd_function(|s| 1.0 / s.sqrt());
        let should_be_identity = isq.matmul(&h).matmul(&isq);
        assert!(should_be_identity.max_abs_diff(&M::identity(4)) < 1e-10);
    }

    #[test]
    fn f32_norm() {
        let a = ComplexMatrix::<f32>::from_real(2, 2, &[3.0, 0.0, 0.0, -4.0]);
        assert!((a.operator_norm().unwrap() - 4.0).abs() < 1e-5);
    }
}
