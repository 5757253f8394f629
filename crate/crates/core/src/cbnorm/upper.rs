//! Certified upper bounds on cb-norms, assembled from per-node rules.

use num_complex::Complex;
use num_traits::Zero;
use serde::Serialize;

use crate::holofun::{HoloFunction, Node, FOURIER_POINTS};
use crate::scalar::Real;

/// Upper bound together with the rules that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpperBound<T> {
    pub value: Option<T>,
    pub rules: Vec<String>,
}

/// Best certified upper bound on `‖f‖_cb`, or `None` if no rule applies.
///
/// Rules: absolute coefficient sums (the Wiener norm dominates the cb-norm
/// because Schur products are contractive), the factorization of finite
/// Blaschke products, `‖g‖/(1-|a|)` for Moebius quotients, `r/(1-r)` for
/// geometric functions of a functional, products, sums and scalings.
/// Composites are bounded through the dilation `z ↦ scalar(r z)` with `r`
/// the certified norm.
pub fn cb_upper_bound<T: Real>(f: &HoloFunction<T>) -> UpperBound<T> {
    let (value, rules) = upper_with_dilation(f, T::one());
    UpperBound { value, rules }
}

/// Upper bound on the cb-norm of `z ↦ f(r z)` for `0 < r ≤ 1`.
pub(crate) fn upper_with_dilation<T: Real>(f: &HoloFunction<T>, r: T) -> (Option<T>, Vec<String>) {
    let structural = structural_bound(f, r);
    let wiener = match f.node() {
        Node::PowerSeries { .. } | Node::GeometricPhi(_) | Node::Composite { .. } => None,
        _ if f.is_scalar_domain() => taylor_wiener(f, r),
        _ => None,
    };
    let wiener_rule = || vec![format!("wiener-taylor[{}]", f.label())];
    match (structural, wiener) {
        (Some((s, _)), Some(w)) if w < s => (Some(w), wiener_rule()),
        (Some((s, rules)), _) => (Some(s), rules),
        (None, Some(w)) => (Some(w), wiener_rule()),
        (None, None) => (None, vec![format!("no certified rule for {}", f.label())]),
    }
}

fn structural_bound<T: Real>(f: &HoloFunction<T>, r: T) -> Option<(T, Vec<String>)> {
    match f.node() {
        Node::PowerSeries { coeffs, .. } => {
            let mut rn = T::one();
            let mut s = T::zero();
            for a in coeffs {
                rn *= r;
                s += a.norm() * rn;
            }
            Some((s, vec!["wiener".into()]))
        }
        Node::Blaschke { c, m, zeros } => {
            // c z^m Π(z - a_j) has a finite coefficient sum; each 1/(1 - conj(a_j) z)
            // has Wiener norm 1/(1 - |a_j| r) after dilation.
            let mut poly = vec![Complex::<T>::zero(); *m as usize];
            poly.push(*c);
            for a in zeros {
                let mut next = vec![Complex::zero(); poly.len() + 1];
                for (i, p) in poly.iter().enumerate() {
                    next[i + 1] += p;
                    next[i] -= p * a;
                }
                poly = next;
            }
            let mut rn = T::one();
            let mut s = T::zero();
            for p in &poly {
                s += p.norm() * rn;
                rn *= r;
            }
            for a in zeros {
                s /= T::one() - a.norm() * r;
            }
            Some((s, vec!["blaschke-factorization".into()]))
        }
        Node::MoebiusQuotient { inner, a } => {
            let (v, mut rules) = upper_with_dilation(inner, r);
            rules.push("moebius-quotient".into());
            Some((v? / (T::one() - a.norm() * r), rules))
        }
        Node::GeometricPhi(g) => {
            let c = g.certified_norm();
            Some((c / (T::one() - c), vec!["geometric-phi".into()]))
        }
        Node::Composite { scalar, functional } => {
            let (v, mut rules) = upper_with_dilation(scalar, r * functional.certified_norm());
            rules.push("composite-dilation".into());
            Some((v?, rules))
        }
        Node::Product(a, b) => {
            let (va, mut ra) = upper_with_dilation(a, r);
            let (vb, rb) = upper_with_dilation(b, r);
            ra.extend(rb);
            ra.push("product".into());
            Some((va? * vb?, ra))
        }
        Node::Sum(a, b) => {
            let (va, mut ra) = upper_with_dilation(a, r);
            let (vb, rb) = upper_with_dilation(b, r);
            ra.extend(rb);
            ra.push("sum".into());
            Some((va? + vb?, ra))
        }
        Node::Scale(c, g) => {
            let (v, mut rules) = upper_with_dilation(g, r);
            rules.push("scale".into());
            Some((c.norm() * v?, rules))
        }
    }
}

fn taylor_wiener<T: Real>(f: &HoloFunction<T>, r: T) -> Option<T> {
    let t = f.taylor_coefficients(FOURIER_POINTS / 2 - 1).ok()?;
    t.wiener_bound(r)
}
