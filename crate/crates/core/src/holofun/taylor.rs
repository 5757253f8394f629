//! Taylor coefficients at the origin by discrete Fourier inversion, with
//! rigorous Cauchy-type error control when the function extends past the
//! closed disk.

use num_complex::Complex;
use num_traits::Zero;

use super::{HoloFunction, Node};
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Number of sample points on the inversion circle.
pub const FOURIER_POINTS: usize = 4096;
/// Inversion radius used when no analytic continuation past the disk is known.
const FALLBACK_RADIUS: f64 = 0.9;

/// Coefficients `a_1..a_K` of `f(z) = Σ a_n z^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorCoeffs<T> {
    pub coeffs: Vec<Complex<T>>,
    /// Bound on `Σ_{n>K} |a_n|`, `None` when unknown.
    pub tail_bound: Option<T>,
    /// Bound on `|computed a_n - a_n|` for every `n ≤ K`, `None` when unknown.
    pub coeff_error: Option<T>,
}

impl<T: Real> TaylorCoeffs<T> {
    pub fn truncation(&self) -> usize {
        self.coeffs.len()
    }

    /// Certified bound on `Σ_n |a_n|`, when both error terms are known.
    pub fn wiener_bound(&self, dilation: T) -> Option<T> {
        let (tail, err) = (self.tail_bound?, self.coeff_error?);
        let mut sum = T::zero();
        let mut r = T::one();
        for a in &self.coeffs {
            r *= dilation;
            sum += (a.norm() + err) * r;
        }
        Some(sum + tail)
    }
}

impl<T: Real> HoloFunction<T> {
    /// Radius of the largest disk on which `f` is known to be analytic
    /// (`+∞` for polynomials without a claimed radius). Only defined for
    /// functions on the disk.
    pub fn analytic_radius(&self) -> Option<T> {
        Some(match self.node() {
            Node::PowerSeries { analytic_radius, .. } => analytic_radius.unwrap_or_else(T::infinity),
            Node::Blaschke { zeros, .. } => zeros
                .iter()
                .filter(|a| !a.is_zero())
                .map(|a| T::one() / a.norm())
                .fold(T::infinity(), T::min),
            Node::MoebiusQuotient { inner, a } => {
                let pole = if a.is_zero() { T::infinity() } else { T::one() / a.norm() };
                inner.analytic_radius()?.min(pole)
            }
            Node::Product(l, r) | Node::Sum(l, r) => l.analytic_radius()?.min(r.analytic_radius()?),
            Node::Scale(_, f) => f.analytic_radius()?,
            Node::GeometricPhi(_) | Node::Composite { .. } => return None,
        })
    }

    /// First `k` Taylor coefficients at 0.
    ///
    /// Power series are copied exactly. Other functions on the disk are
    /// sampled on a circle of radius 1 when they extend analytically past
    /// the closed disk, and on radius 0.9 otherwise; in the latter case the
    /// error terms are reported as unknown.
    pub fn taylor_coefficients(&self, k: usize) -> Result<TaylorCoeffs<T>> {
        if k == 0 {
            return invalid("truncation order must be at least 1");
        }
        if !self.is_scalar_domain() {
            return Err(Error::Unsupported("Taylor coefficients are only available for functions on the disk".into()));
        }
        if let Node::PowerSeries { coeffs, .. } = self.node() {
            let mut out = coeffs.clone();
            out.resize(k, Complex::zero());
            let tail = coeffs.iter().skip(k).map(|a| a.norm()).sum();
            return Ok(TaylorCoeffs { coeffs: out, tail_bound: Some(tail), coeff_error: Some(T::zero()) });
        }
        let n = FOURIER_POINTS;
        if k >= n / 2 {
            return invalid(format!("truncation order must be below {}", n / 2));
        }
        let radius = self.analytic_radius().expect("scalar-domain function");
        let extends = radius > T::one();
        let rho = if extends { T::one() } else { T::lit(FALLBACK_RADIUS) };
        let coeffs = fourier_coefficients(self, rho, k, n);
        if !extends {
            return Ok(TaylorCoeffs { coeffs, tail_bound: None, coeff_error: None });
        }

        // |a_n| ≤ M(ρ') ρ'^{-n} on a circle strictly inside the region of analyticity.
        let outer = ((T::one() + radius) / T::lit(2.0)).min(T::lit(2.0));
        let bounds = modulus_bound(self, outer).zip(modulus_bound(self, T::one()));
        let Some((m_outer, m_unit)) = bounds else {
            return Ok(TaylorCoeffs { coeffs, tail_bound: None, coeff_error: None });
        };
        let nf = T::lit(n as f64);
        let aliasing = m_outer * outer.powf(-(T::one() + nf)) / (T::one() - outer.powf(-nf));
        let roundoff = T::lit(4.0) * nf * T::epsilon() * m_unit;
        let tail = m_outer * outer.powi(-(k as i32)) / (outer - T::one());
        Ok(TaylorCoeffs { coeffs, tail_bound: Some(tail), coeff_error: Some(aliasing + roundoff) })
    }
}

fn fourier_coefficients<T: Real>(f: &HoloFunction<T>, rho: T, k: usize, n: usize) -> Vec<Complex<T>> {
    let tau = T::lit(std::f64::consts::TAU);
    let nf = T::lit(n as f64);
    let twiddle: Vec<Complex<T>> =
        (0..n).map(|j| Complex::from_polar(T::one(), -tau * T::lit(j as f64) / nf)).collect();
    let samples: Vec<Complex<T>> = (0..n).map(|j| f.eval_disk(twiddle[j].conj() * rho)).collect();
    (1..=k)
        .map(|m| {
            let mut acc = Complex::zero();
            for (j, s) in samples.iter().enumerate() {
                acc += s * twiddle[(j * m) % n];
            }
            acc / (nf * rho.powi(m as i32))
        })
        .collect()
}

/// Upper bound on `max_{|z| = ρ} |f(z)|`; `None` when `ρ` reaches a pole
/// or `f` is not a function on the disk.
pub fn modulus_bound<T: Real>(f: &HoloFunction<T>, rho: T) -> Option<T> {
    match f.node() {
        Node::PowerSeries { coeffs, .. } => {
            let mut r = T::one();
            let mut s = T::zero();
            for a in coeffs {
                r *= rho;
                s += a.norm() * r;
            }
            Some(s)
        }
        Node::Blaschke { m, zeros, .. } => {
            let mut v = rho.powi(*m as i32);
            for a in zeros {
                let den = T::one() - a.norm() * rho;
                if den <= T::zero() {
                    return None;
                }
                v *= (rho + a.norm()) / den;
            }
            Some(v)
        }
        Node::MoebiusQuotient { inner, a } => {
            let den = T::one() - a.norm() * rho;
            if den <= T::zero() {
                return None;
            }
            Some(modulus_bound(inner, rho)? / den)
        }
        Node::Product(l, r) => Some(modulus_bound(l, rho)? * modulus_bound(r, rho)?),
        Node::Sum(l, r) => Some(modulus_bound(l, rho)? + modulus_bound(r, rho)?),
        Node::Scale(c, g) => Some(c.norm() * modulus_bound(g, rho)?),
        Node::GeometricPhi(_) | Node::Composite { .. } => None,
    }
}
