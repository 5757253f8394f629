//! Holomorphic functions vanishing at the origin and their entrywise matrix
//! amplifications.
//!
//! A [`HoloFunction`] is a symbolic tree. Leaves are power series, finite
//! Blaschke products and geometric functions of a linear functional; inner
//! nodes form products, sums, scalings, Moebius quotients and compositions
//! with a certified functional. Every constructor keeps `f(0) = 0`.

mod taylor;

pub use taylor::{modulus_bound, TaylorCoeffs, FOURIER_POINTS};

use std::fmt;

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{invalid, Error, Result};
use crate::matcore::{ComplexMatrix, RngSeed};
use crate::opspace::{dual_functional_norm, dual_norm_closed_form, same_space, OpSpaceMatrix, SpaceRef};
use crate::scalar::{is_finite, Real};

/// Margin below 1 that the scalar image of a composite argument must respect.
pub const COMPOSITE_GUARD: f64 = 1e-9;
const UNIMODULAR_TOL: f64 = 1e-12;
const SPARSE_SERIES_LEN: usize = 64;
const CERTIFY_BUDGET: usize = 600;

/// A linear functional `φ` on a concrete space together with a certified
/// bound `‖φ‖ ≤ certified_norm < 1`.
#[derive(Clone, Debug)]
pub struct CertifiedFunctional<T: Real> {
    space: SpaceRef<T>,
    phi: Vec<Complex<T>>,
    certified_norm: T,
}

impl<T: Real> CertifiedFunctional<T> {
    /// Validates the certificate. Where the dual norm has a closed form it
    /// must not exceed `certified_norm`; otherwise a seeded search for a
    /// norming point must not contradict it.
    pub fn new(space: SpaceRef<T>, phi: Vec<Complex<T>>, certified_norm: T) -> Result<Self> {
        if phi.len() != space.dim() {
            return invalid(format!("functional has {} coordinates, space has dimension {}", phi.len(), space.dim()));
        }
        if !phi.iter().all(is_finite) {
            return invalid("functional has non-finite coordinates");
        }
        if !(certified_norm > T::zero() && certified_norm < T::one()) {
            return Err(Error::Config(format!("certified_norm must lie in (0,1), got {certified_norm}")));
        }
        let slack = T::lit(1e-12);
        match dual_norm_closed_form(&space, &phi) {
            Some(exact) if exact > certified_norm + slack => {
                return Err(Error::Config(format!(
                    "functional norm {exact} exceeds certified_norm {certified_norm}"
                )));
            }
            Some(_) => {}
            None => {
                let found = dual_functional_norm(&space, &phi, CERTIFY_BUDGET, RngSeed(0))?;
                if found > certified_norm + slack {
                    return Err(Error::Config(format!(
                        "a point of norm 1 gives |phi(x)| = {found} > certified_norm {certified_norm}"
                    )));
                }
            }
        }
        Ok(Self { space, phi, certified_norm })
    }

    pub fn space(&self) -> &SpaceRef<T> {
        &self.space
    }

    pub fn phi(&self) -> &[Complex<T>] {
        &self.phi
    }

    pub fn certified_norm(&self) -> T {
        self.certified_norm
    }

    /// `Σ_k φ_k x_k`.
    pub fn apply(&self, x: &[Complex<T>]) -> Complex<T> {
        self.phi.iter().zip(x).fold(Complex::zero(), |acc, (a, b)| acc + a * b)
    }

    /// The scalar matrix `(φ(x_ij))`.
    pub fn image(&self, x: &OpSpaceMatrix<T>) -> ComplexMatrix<T> {
        let m = x.level();
        let mut out = ComplexMatrix::zeros(m, m);
        for (c, p) in x.coeffs().iter().zip(&self.phi) {
            out.add_assign(&c.scale(*p));
        }
        out
    }
}

/// Node of a [`HoloFunction`] tree. Build through the checked constructors
/// on [`HoloFunction`]; match on [`HoloFunction::node`] to inspect.
#[derive(Clone, Debug)]
pub enum Node<T: Real> {
    /// `Σ_{n=1}^K a_n z^n`; `analytic_radius = None` means entire.
    PowerSeries { coeffs: Vec<Complex<T>>, analytic_radius: Option<T> },
    /// `c z^m Π_j (z - a_j)/(1 - conj(a_j) z)`.
    Blaschke { c: Complex<T>, m: u32, zeros: Vec<Complex<T>> },
    /// `inner(z) / (1 - a z)`.
    MoebiusQuotient { inner: Box<HoloFunction<T>>, a: Complex<T> },
    /// `φ(x) / (1 - φ(x))`.
    GeometricPhi(CertifiedFunctional<T>),
    Product(Box<HoloFunction<T>>, Box<HoloFunction<T>>),
    Sum(Box<HoloFunction<T>>, Box<HoloFunction<T>>),
    Scale(Complex<T>, Box<HoloFunction<T>>),
    /// `scalar(φ(x))`.
    Composite { scalar: Box<HoloFunction<T>>, functional: CertifiedFunctional<T> },
}

#[derive(Clone, Debug)]
pub struct HoloFunction<T: Real> {
    node: Node<T>,
}

impl<T: Real> HoloFunction<T> {
    pub fn power_series(coeffs: Vec<Complex<T>>, analytic_radius: Option<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return invalid("power series needs at least one coefficient");
        }
        if !coeffs.iter().all(is_finite) {
            return invalid("power series has non-finite coefficients");
        }
        if let Some(r) = analytic_radius {
            if !(r >= T::one()) {
                return invalid(format!("analytic_radius must be at least 1, got {r}"));
            }
        }
        Ok(Self { node: Node::PowerSeries { coeffs, analytic_radius } })
    }

    /// `f(z) = z`.
    pub fn identity() -> Self {
        Self { node: Node::PowerSeries { coeffs: vec![Complex::one()], analytic_radius: None } }
    }

    /// `f(z) = z^n`.
    pub fn monomial(n: usize, coefficient: Complex<T>) -> Self {
        assert!(n >= 1, "monomials vanishing at 0 need n >= 1");
        let mut coeffs = vec![Complex::zero(); n];
        coeffs[n - 1] = coefficient;
        Self { node: Node::PowerSeries { coeffs, analytic_radius: None } }
    }

    pub fn blaschke(c: Complex<T>, m: u32, zeros: Vec<Complex<T>>) -> Result<Self> {
        if ((c.norm() - T::one()).abs()) > T::lit(UNIMODULAR_TOL) {
            return invalid(format!("Blaschke constant must be unimodular, |c| = {}", c.norm()));
        }
        if m == 0 {
            return invalid("Blaschke factor z^m needs m >= 1 so that f(0) = 0");
        }
        if let Some(a) = zeros.iter().find(|a| !is_finite(a) || a.norm() >= T::one()) {
            return invalid(format!("Blaschke zero {a} is not inside the unit disk"));
        }
        Ok(Self { node: Node::Blaschke { c, m, zeros } })
    }

    pub fn moebius_quotient(inner: Self, a: Complex<T>) -> Result<Self> {
        if !is_finite(&a) || a.norm() >= T::one() {
            return invalid(format!("Moebius parameter must satisfy |a| < 1, got {a}"));
        }
        if inner.domain().is_some() {
            return invalid("Moebius quotient needs a scalar-domain inner function");
        }
        Ok(Self { node: Node::MoebiusQuotient { inner: Box::new(inner), a } })
    }

    pub fn geometric_phi(functional: CertifiedFunctional<T>) -> Self {
        Self { node: Node::GeometricPhi(functional) }
    }

    pub fn composite(scalar: Self, functional: CertifiedFunctional<T>) -> Result<Self> {
        if scalar.domain().is_some() {
            return invalid("the scalar part of a composite must be scalar-domain");
        }
        Ok(Self { node: Node::Composite { scalar: Box::new(scalar), functional } })
    }

    pub fn product(left: Self, right: Self) -> Result<Self> {
        check_compatible(&left, &right)?;
        Ok(Self { node: Node::Product(Box::new(left), Box::new(right)) })
    }

    pub fn sum(left: Self, right: Self) -> Result<Self> {
        check_compatible(&left, &right)?;
        Ok(Self { node: Node::Sum(Box::new(left), Box::new(right)) })
    }

    /// `c·f`, with nested scalings collapsed and `1·f` reduced to `f`.
    pub fn scale(c: Complex<T>, inner: Self) -> Result<Self> {
        if !is_finite(&c) {
            return invalid("non-finite scale factor");
        }
        let (c, inner) = match inner.node {
            Node::Scale(d, f) => (c * d, *f),
            node => (c, Self { node }),
        };
        if c == Complex::one() {
            return Ok(inner);
        }
        Ok(Self { node: Node::Scale(c, Box::new(inner)) })
    }

    pub fn node(&self) -> &Node<T> {
        &self.node
    }

    /// Space on which `f` is defined; `None` for functions on the disk.
    pub fn domain(&self) -> Option<&SpaceRef<T>> {
        match &self.node {
            Node::PowerSeries { .. } | Node::Blaschke { .. } | Node::MoebiusQuotient { .. } => None,
            Node::GeometricPhi(g) => Some(g.space()),
            Node::Composite { functional, .. } => Some(functional.space()),
            Node::Product(l, r) | Node::Sum(l, r) => l.domain().or_else(|| r.domain()),
            Node::Scale(_, f) => f.domain(),
        }
    }

    pub fn is_scalar_domain(&self) -> bool {
        self.domain().is_none()
    }

    /// `f(z)` for `|z| < 1`.
    pub fn evaluate(&self, z: Complex<T>) -> Result<Complex<T>> {
        if !self.is_scalar_domain() {
            return Err(Error::Unsupported("evaluate at a scalar needs a function on the disk".into()));
        }
        if !is_finite(&z) || z.norm() >= T::one() {
            return Err(Error::Domain(format!("|z| = {} is not below 1", z.norm())));
        }
        Ok(self.eval_disk(z))
    }

    /// Evaluation without the domain check; valid wherever the function is
    /// analytic, including just past the unit circle.
    pub(crate) fn eval_disk(&self, z: Complex<T>) -> Complex<T> {
        match &self.node {
            Node::PowerSeries { coeffs, .. } if coeffs.len() <= SPARSE_SERIES_LEN => {
                coeffs.iter().rev().fold(Complex::zero(), |acc, a| (acc + a) * z)
            }
            Node::PowerSeries { coeffs, .. } => {
                // long lacunary series: jump between nonzero terms
                let mut acc = Complex::zero();
                let mut power = Complex::<T>::one();
                let mut last = 0u32;
                for (i, a) in coeffs.iter().enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    let n = i as u32 + 1;
                    power *= z.powu(n - last);
                    last = n;
                    acc += a * power;
                }
                acc
            }
            Node::Blaschke { c, m, zeros } => {
                let mut v = c * z.powu(*m);
                for a in zeros {
                    v = v * (z - a) / (Complex::<T>::one() - a.conj() * z);
                }
                v
            }
            Node::MoebiusQuotient { inner, a } => inner.eval_disk(z) / (Complex::<T>::one() - a * z),
            Node::Product(l, r) => l.eval_disk(z) * r.eval_disk(z),
            Node::Sum(l, r) => l.eval_disk(z) + r.eval_disk(z),
            Node::Scale(c, f) => c * f.eval_disk(z),
            Node::GeometricPhi(_) | Node::Composite { .. } => {
                unreachable!("space-domain node evaluated on the disk")
            }
        }
    }

    /// `f(x)` for a level-1 point `x = Σ x_k B_k` of norm below 1.
    pub fn evaluate_point(&self, space: &SpaceRef<T>, x: &[Complex<T>]) -> Result<Complex<T>> {
        let xm = OpSpaceMatrix::new(space.clone(), x.iter().map(|&z| ComplexMatrix::scalar(z)).collect())?;
        Ok(self.amplify(&xm)?[(0, 0)])
    }

    /// Entrywise amplification `(f(x_ij))` of a scalar matrix with `‖X‖ < 1`.
    pub fn amplify_matrix(&self, x: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        if !self.is_scalar_domain() {
            return Err(Error::Unsupported("scalar matrices can only be amplified by functions on the disk".into()));
        }
        let n = x.operator_norm()?;
        if n >= T::one() {
            return Err(Error::Domain(format!("matrix norm {n} is not below 1")));
        }
        Ok(x.map(|z| self.eval_disk(z)))
    }

    /// Entrywise amplification `(f(x_ij))` of `X ∈ M_m(V)` with `‖X‖ < 1`.
    pub fn amplify(&self, x: &OpSpaceMatrix<T>) -> Result<ComplexMatrix<T>> {
        self.check_domain(x.space())?;
        let n = x.matrix_norm();
        if !(n < T::one()) {
            return Err(Error::Domain(format!("matrix norm {n} is not below 1")));
        }
        self.amplify_unchecked(x)
    }

    /// Errors unless `f` can act on `M_m(space)`.
    pub fn check_domain(&self, space: &SpaceRef<T>) -> Result<()> {
        match self.domain() {
            None if space.is_scalar_like() => Ok(()),
            None => invalid("function on the disk applied to a non-scalar space"),
            Some(d) if same_space(d, space) => Ok(()),
            Some(_) => invalid("function applied to a matrix over a different space"),
        }
    }

    /// Amplification with the domain and norm checks already done by the
    /// caller. Composite guards still apply.
    pub(crate) fn amplify_unchecked(&self, x: &OpSpaceMatrix<T>) -> Result<ComplexMatrix<T>> {
        match &self.node {
            Node::GeometricPhi(g) => {
                let s = guarded_image(g, x)?;
                Ok(s.map(|z| z / (Complex::<T>::one() - z)))
            }
            Node::Composite { scalar, functional } => {
                let s = guarded_image(functional, x)?;
                Ok(s.map(|z| scalar.eval_disk(z)))
            }
            Node::Product(l, r) if !self.is_scalar_domain() => {
                l.amplify_unchecked(x)?.schur_product(&r.amplify_unchecked(x)?)
            }
            Node::Sum(l, r) if !self.is_scalar_domain() => Ok(l.amplify_unchecked(x)?.add(&r.amplify_unchecked(x)?)),
            Node::Scale(c, f) if !self.is_scalar_domain() => Ok(f.amplify_unchecked(x)?.scale(*c)),
            _ => {
                let b = x.space().basis()[0][(0, 0)];
                Ok(x.coeff(0).map(|z| self.eval_disk(z * b)))
            }
        }
    }

    /// Short human-readable identifier used in reports.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

fn guarded_image<T: Real>(g: &CertifiedFunctional<T>, x: &OpSpaceMatrix<T>) -> Result<ComplexMatrix<T>> {
    let s = g.image(x);
    let n = s.operator_norm()?;
    if n >= T::one() - T::lit(COMPOSITE_GUARD) {
        return Err(Error::Domain(format!(
            "scalar image of the argument has norm {n}; the certified functional should keep it below 1"
        )));
    }
    Ok(s)
}

fn check_compatible<T: Real>(l: &HoloFunction<T>, r: &HoloFunction<T>) -> Result<()> {
    match (l.domain(), r.domain()) {
        (None, None) => Ok(()),
        (Some(a), Some(b)) if same_space(a, b) => Ok(()),
        (Some(s), None) | (None, Some(s)) if s.is_scalar_like() => Ok(()),
        _ => invalid("operands are defined on different spaces"),
    }
}

fn fmt_c<T: Real>(z: &Complex<T>) -> String {
    if z.im.is_zero() {
        format!("{}", z.re)
    } else {
        format!("({}{:+}i)", z.re, z.im)
    }
}

impl<T: Real> fmt::Display for HoloFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            Node::PowerSeries { coeffs, .. } => {
                let terms: Vec<String> = coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| !a.is_zero())
                    .map(|(n, a)| format!("{}z^{}", fmt_c(a), n + 1))
                    .collect();
                if terms.is_empty() {
                    write!(f, "0")
                } else {
                    write!(f, "{}", terms.join("+"))
                }
            }
            Node::Blaschke { c, m, zeros } => {
                let zs: Vec<String> = zeros.iter().map(fmt_c).collect();
                write!(f, "blaschke(c={},m={},zeros=[{}])", fmt_c(c), m, zs.join(","))
            }
            Node::MoebiusQuotient { inner, a } => write!(f, "({inner})/(1-{}z)", fmt_c(a)),
            Node::GeometricPhi(g) => write!(f, "geometric_phi(r={})", g.certified_norm()),
            Node::Product(l, r) => write!(f, "({l})*({r})"),
            Node::Sum(l, r) => write!(f, "({l})+({r})"),
            Node::Scale(c, inner) => write!(f, "{}*({inner})", fmt_c(c)),
            Node::Composite { scalar, functional } => {
                write!(f, "composite({scalar}; r={})", functional.certified_norm())
            }
        }
    }
}
