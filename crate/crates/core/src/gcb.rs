//! Finite model of the predual of cb-holomorphic functions.
//!
//! An element `u = Σ c_i α_i δ(x_i) β_i` of `M_n(G)` is stored through its
//! terms. Any representation yields an upper bound on `‖u‖` through the
//! grouped cost formula; pairing `u` against certified unit-ball elements
//! of the dual yields lower bounds.

use num_complex::Complex;
use rand::seq::SliceRandom;
use serde::Serialize;

use crate::cbnorm::cb_upper_bound;
use crate::error::{invalid, Error, Result};
use crate::holofun::{CertifiedFunctional, HoloFunction};
use crate::matcore::{ComplexMatrix, RngSeed};
use crate::opspace::{dual_norm_closed_form, same_space, FunctionalGrid, OpSpaceMatrix, SpaceRef};
use crate::scalar::{is_finite, Real};

/// Points must satisfy `‖x‖ ≤ 1 - POINT_MARGIN`.
pub const POINT_MARGIN: f64 = 1e-9;
/// Largest number of groups tried by the representation search.
pub const MAX_GROUPS: usize = 3;
/// Exponents of the geometric rescaling grid `2^k`.
pub const SCALE_EXPONENTS: std::ops::RangeInclusive<i32> = -8..=8;
const SCALE_STEPS: usize = 33;

#[derive(Clone, Debug)]
pub struct GcbTerm<T: Real> {
    pub c: Complex<T>,
    /// `n×k`.
    pub alpha: ComplexMatrix<T>,
    /// Level-`k` point of the open unit ball.
    pub point: OpSpaceMatrix<T>,
    /// `k×n`.
    pub beta: ComplexMatrix<T>,
}

#[derive(Clone, Debug)]
pub struct GcbElement<T: Real> {
    space: SpaceRef<T>,
    target_level: usize,
    terms: Vec<GcbTerm<T>>,
}

impl<T: Real> GcbElement<T> {
    pub fn new(space: SpaceRef<T>, target_level: usize, terms: Vec<GcbTerm<T>>) -> Result<Self> {
        if target_level == 0 {
            return invalid("target level must be positive");
        }
        let limit = T::one() - T::lit(POINT_MARGIN);
        for (i, t) in terms.iter().enumerate() {
            if !same_space(t.point.space(), &space) {
                return invalid(format!("term {i}: point lives over a different space"));
            }
            let k = t.point.level();
            if t.alpha.shape() != (target_level, k) || t.beta.shape() != (k, target_level) {
                return invalid(format!(
                    "term {i}: alpha {:?} and beta {:?} do not fit level {target_level} and point level {k}",
                    t.alpha.shape(),
                    t.beta.shape()
                ));
            }
            if !is_finite(&t.c) || !t.alpha.is_finite() || !t.beta.is_finite() {
                return invalid(format!("term {i} has non-finite scalars"));
            }
            let norm = t.point.matrix_norm();
            if norm > limit {
                return Err(Error::Domain(format!("term {i}: point norm {norm} is not below 1 - {POINT_MARGIN}")));
            }
        }
        Ok(Self { space, target_level, terms })
    }

    /// `(δ_V)_n(x)` with its trivial representation `c = 1`, `α = β = I`.
    pub fn delta(x: &OpSpaceMatrix<T>) -> Result<Self> {
        let n = x.level();
        let term = GcbTerm { c: Complex::new(T::one(), T::zero()), alpha: ComplexMatrix::identity(n), point: x.clone(), beta: ComplexMatrix::identity(n) };
        Self::new(x.space().clone(), n, vec![term])
    }

    pub fn zero(space: SpaceRef<T>, target_level: usize) -> Self {
        Self { space, target_level, terms: Vec::new() }
    }

    pub fn space(&self) -> &SpaceRef<T> {
        &self.space
    }

    pub fn target_level(&self) -> usize {
        self.target_level
    }

    pub fn terms(&self) -> &[GcbTerm<T>] {
        &self.terms
    }

    /// Concatenation of the representations of `self` and `other`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if !same_space(&self.space, &other.space) || self.target_level != other.target_level {
            return invalid("sum of elements over different spaces or levels");
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self { space: self.space.clone(), target_level: self.target_level, terms })
    }

    pub fn scale(&self, k: Complex<T>) -> Self {
        let terms = self.terms.iter().map(|t| GcbTerm { c: t.c * k, ..t.clone() }).collect();
        Self { space: self.space.clone(), target_level: self.target_level, terms }
    }
}

/// Term-wise rescaling that leaves `u` unchanged: `c ↦ c·t`,
/// `α ↦ s α / √t`, `β ↦ β / (s √t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TermScale<T> {
    pub s: T,
    pub t: T,
}

fn group_cost<T: Real>(terms: &[GcbTerm<T>], norms: &[T], members: &[usize], scales: &[TermScale<T>], n: usize) -> T {
    if members.is_empty() {
        return T::zero();
    }
    let mut aa = ComplexMatrix::zeros(n, n);
    let mut bb = ComplexMatrix::zeros(n, n);
    let mut cmax = T::zero();
    for &i in members {
        let TermScale { s, t } = scales[i];
        let a = terms[i].alpha.scale_real(s / t.sqrt());
        let b = terms[i].beta.scale_real(T::one() / (s * t.sqrt()));
        aa.add_assign(&a.matmul(&a.adjoint()));
        bb.add_assign(&b.adjoint().matmul(&b));
        cmax = cmax.max(terms[i].c.norm() * t * norms[i]);
    }
    aa.operator_norm_unchecked().sqrt() * bb.operator_norm_unchecked().sqrt() * cmax
}

fn labels_to_groups(labels: &[usize]) -> Vec<Vec<usize>> {
    let count = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut groups = vec![Vec::new(); count];
    for (i, &l) in labels.iter().enumerate() {
        groups[l].push(i);
    }
    groups
}

fn validate_grouping(grouping: &[Vec<usize>], terms: usize) -> Result<()> {
    let mut seen = vec![false; terms];
    for g in grouping {
        for &i in g {
            if i >= terms || seen[i] {
                return invalid(format!("grouping is not a partition of the {terms} terms"));
            }
            seen[i] = true;
        }
    }
    if seen.iter().any(|s| !s) {
        return invalid(format!("grouping is not a partition of the {terms} terms"));
    }
    Ok(())
}

/// `Σ_j ‖Σ_{i∈j} α_i α_i*‖^{1/2} ‖Σ_{i∈j} β_i* β_i‖^{1/2} max_{i∈j} |c_i| ‖x_i‖`.
pub fn representation_cost<T: Real>(u: &GcbElement<T>, grouping: &[Vec<usize>]) -> Result<T> {
    validate_grouping(grouping, u.terms.len())?;
    let norms: Vec<T> = u.terms.iter().map(|t| t.point.matrix_norm()).collect();
    let unit = vec![TermScale { s: T::one(), t: T::one() }; u.terms.len()];
    Ok(grouping.iter().map(|g| group_cost(&u.terms, &norms, g, &unit, u.target_level)).sum())
}

/// All labelings of `r` terms into at most `groups` unlabeled groups.
fn partitions(r: usize, groups: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, r: usize, groups: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == r {
            out.push(prefix.clone());
            return;
        }
        let used = prefix.iter().copied().max().map_or(0, |m| m + 1);
        for l in 0..(used + 1).min(groups) {
            prefix.push(l);
            rec(prefix, r, groups, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if r == 0 {
        out.push(Vec::new());
    } else {
        rec(&mut Vec::with_capacity(r), r, groups, &mut out);
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct GcbUpper<T> {
    pub value: T,
    pub grouping: Vec<Vec<usize>>,
    pub scales: Vec<TermScale<T>>,
    pub evaluations: usize,
}

/// Smallest representation cost over groupings into at most three groups
/// and term rescalings on a geometric grid; a valid upper bound on `‖u‖`.
pub fn gcb_upper_bound<T: Real>(u: &GcbElement<T>, budget: usize, seed: RngSeed) -> Result<GcbUpper<T>> {
    if budget == 0 {
        return invalid("budget must be at least 1");
    }
    let r = u.terms.len();
    let n = u.target_level;
    let unit = vec![TermScale { s: T::one(), t: T::one() }; r];
    if r == 0 {
        return Ok(GcbUpper { value: T::zero(), grouping: Vec::new(), scales: unit, evaluations: 0 });
    }
    let norms: Vec<T> = u.terms.iter().map(|t| t.point.matrix_norm()).collect();
    let grid: Vec<T> = (0..SCALE_STEPS)
        .map(|k| T::lit(2f64.powf(*SCALE_EXPONENTS.start() as f64 + k as f64 * 16.0 / (SCALE_STEPS - 1) as f64)))
        .collect();
    let cost_of = |groups: &[Vec<usize>], scales: &[TermScale<T>]| -> T {
        groups.iter().map(|g| group_cost(&u.terms, &norms, g, scales, n)).sum()
    };

    let mut rng = seed.rng();
    let mut evaluations = 0usize;
    // singletons first: that grouping is scale invariant and always feasible
    let singletons: Vec<Vec<usize>> = (0..r).map(|i| vec![i]).collect();
    let mut best = GcbUpper { value: cost_of(&singletons, &unit), grouping: singletons, scales: unit.clone(), evaluations: 0 };
    evaluations += 1;

    'labels: for labels in partitions(r, MAX_GROUPS) {
        let groups = labels_to_groups(&labels);
        // equalize |c_i| ‖x_i‖ inside groups as a second starting point
        let equalized: Vec<TermScale<T>> = (0..r)
            .map(|i| {
                let w = u.terms[i].c.norm() * norms[i];
                TermScale { s: T::one(), t: if w > T::zero() { T::one() / w } else { T::one() } }
            })
            .collect();
        for start in [unit.clone(), equalized] {
            if evaluations >= budget {
                break 'labels;
            }
            let mut scales = start;
            let mut cost = cost_of(&groups, &scales);
            evaluations += 1;
            let mut movable: Vec<usize> = groups.iter().filter(|g| g.len() > 1).flatten().copied().collect();
            'sweeps: for _ in 0..3 {
                movable.shuffle(&mut rng);
                let mut improved = false;
                for &i in &movable {
                    for which in 0..2 {
                        for &g in &grid {
                            if evaluations >= budget {
                                break 'sweeps;
                            }
                            let mut trial = scales.clone();
                            if which == 0 {
                                trial[i].s = g;
                            } else {
                                trial[i].t = g;
                            }
                            let c = cost_of(&groups, &trial);
                            evaluations += 1;
                            if c < cost {
                                cost = c;
                                scales = trial;
                                improved = true;
                            }
                        }
                    }
                }
                if !improved {
                    break;
                }
            }
            if cost < best.value {
                best = GcbUpper { value: cost, grouping: groups.clone(), scales, evaluations: 0 };
            }
        }
    }
    best.evaluations = evaluations;
    Ok(best)
}

/// Element of the dual unit ball (after division by `bound`).
#[derive(Clone, Debug)]
pub enum DictEntry<T: Real> {
    /// Scalar-valued cb-holomorphic function with certified cb bound.
    Holo { f: HoloFunction<T>, bound: T },
    /// Matrix of linear functionals with certified cb bound.
    Linear { grid: FunctionalGrid<T>, bound: T },
}

impl<T: Real> DictEntry<T> {
    pub fn holo(f: HoloFunction<T>) -> Result<Self> {
        match cb_upper_bound(&f).value {
            Some(b) if b > T::zero() => Ok(DictEntry::Holo { f, bound: b }),
            _ => Err(Error::Config(format!("{} has no certified positive cb bound", f.label()))),
        }
    }

    /// `y ↦ A* realize(y) B`, with cb-norm at most `‖A‖‖B‖`.
    pub fn compression(space: SpaceRef<T>, a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<Self> {
        let bound = a.operator_norm()? * b.operator_norm()?;
        if !(bound > T::zero()) {
            return invalid("compression factors must be nonzero");
        }
        Ok(DictEntry::Linear { grid: FunctionalGrid::compression(space, a, b)?, bound })
    }

    /// Scalar functional whose dual norm has a closed form.
    pub fn functional(space: SpaceRef<T>, phi: &[Complex<T>]) -> Result<Self> {
        let bound = dual_norm_closed_form(&space, phi)
            .ok_or_else(|| Error::Config("functional norm has no closed form on this space".into()))?;
        if !(bound > T::zero()) {
            return invalid("zero functional");
        }
        Ok(DictEntry::Linear { grid: FunctionalGrid::scalar(space, phi)?, bound })
    }

    pub fn bound(&self) -> T {
        match self {
            DictEntry::Holo { bound, .. } | DictEntry::Linear { bound, .. } => *bound,
        }
    }

    pub fn label(&self) -> String {
        match self {
            DictEntry::Holo { f, .. } => f.label(),
            DictEntry::Linear { grid, .. } => format!("linear[{}x{}]", grid.size(), grid.size()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FunctionDictionary<T: Real> {
    pub entries: Vec<DictEntry<T>>,
}

impl<T: Real> FunctionDictionary<T> {
    /// Realization map, coordinate functionals with closed-form norms, and
    /// a few nonlinear families built from them.
    pub fn standard(space: &SpaceRef<T>) -> Result<Self> {
        let n = space.ambient();
        let d = space.dim();
        let id = ComplexMatrix::identity(n);
        let mut entries = vec![DictEntry::compression(space.clone(), &id, &id)?];
        let one = Complex::new(T::one(), T::zero());
        for k in 0..d {
            let mut phi = vec![Complex::new(T::zero(), T::zero()); d];
            phi[k] = one;
            if let Ok(e) = DictEntry::functional(space.clone(), &phi) {
                entries.push(e);
            }
        }
        if space.is_scalar_like() {
            for f in [
                HoloFunction::monomial(2, one),
                HoloFunction::moebius_quotient(HoloFunction::identity(), Complex::new(T::lit(0.5), T::zero()))?,
            ] {
                entries.push(DictEntry::holo(f)?);
            }
        } else {
            for k in 0..d {
                let mut phi = vec![Complex::new(T::zero(), T::zero()); d];
                phi[k] = Complex::new(T::lit(0.5), T::zero());
                if dual_norm_closed_form(space, &phi).is_some_and(|v| v <= T::lit(0.5)) {
                    let g = CertifiedFunctional::new(space.clone(), phi, T::lit(0.5))?;
                    entries.push(DictEntry::holo(HoloFunction::geometric_phi(g.clone()))?);
                    entries.push(DictEntry::holo(HoloFunction::composite(HoloFunction::monomial(2, one), g)?)?);
                }
            }
        }
        Ok(Self { entries })
    }
}

/// `Σ c_i (α_i ⊗ I_p) f_{k_i}(x_i) (β_i ⊗ I_p)`.
pub fn gcb_pairing<T: Real>(u: &GcbElement<T>, entry: &DictEntry<T>) -> Result<ComplexMatrix<T>> {
    let p = match entry {
        DictEntry::Holo { f, .. } => {
            f.check_domain(&u.space)?;
            1
        }
        DictEntry::Linear { grid, .. } => {
            if !same_space(grid.space(), &u.space) {
                return invalid("dictionary entry lives over a different space");
            }
            grid.size()
        }
    };
    let n = u.target_level;
    let mut out = ComplexMatrix::zeros(n * p, n * p);
    let ip = ComplexMatrix::identity(p);
    for t in &u.terms {
        let amp = match entry {
            DictEntry::Holo { f, .. } => f.amplify(&t.point)?,
            DictEntry::Linear { grid, .. } => grid.amplify(&t.point)?,
        };
        let a = t.alpha.kron(&ip);
        let b = t.beta.kron(&ip);
        out.add_assign(&a.matmul(&amp).matmul(&b).scale(t.c));
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct GcbLower<T> {
    pub value: T,
    pub best_entry: Option<usize>,
}

/// `max_f ‖⟨u, f⟩‖ / bound_f` over the dictionary.
pub fn gcb_lower_bound<T: Real>(u: &GcbElement<T>, dict: &FunctionDictionary<T>) -> Result<GcbLower<T>> {
    if dict.entries.is_empty() {
        return invalid("dictionary must not be empty");
    }
    let mut best = GcbLower { value: T::zero(), best_entry: None };
    for (i, e) in dict.entries.iter().enumerate() {
        let v = gcb_pairing(u, e)?.operator_norm()? / e.bound();
        if v > best.value {
            best = GcbLower { value: v, best_entry: Some(i) };
        }
    }
    Ok(best)
}

pub const DELTA_UPPER_TOL: f64 = 1e-9;
pub const DELTA_LOWER_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct DeltaReport<T> {
    pub norm: T,
    pub upper: T,
    pub lower: T,
    pub upper_gap: T,
    pub lower_gap: T,
}

impl<T: Real> DeltaReport<T> {
    pub fn passed(&self) -> bool {
        self.upper_gap <= T::lit(DELTA_UPPER_TOL) && self.lower_gap <= T::lit(DELTA_LOWER_TOL)
    }
}

/// Pins `‖δ_n(x)‖` between the trivial representation and the standard
/// dictionary; both should agree with `‖x‖`.
pub fn delta_isometry_check<T: Real>(x: &OpSpaceMatrix<T>, budget: usize, seed: RngSeed) -> Result<DeltaReport<T>> {
    let norm = x.matrix_norm();
    if !(norm < T::one()) {
        return Err(Error::Domain(format!("point norm {norm} is not below 1")));
    }
    let u = GcbElement::delta(x)?;
    let upper = gcb_upper_bound(&u, budget, seed)?.value;
    let lower = gcb_lower_bound(&u, &FunctionDictionary::standard(x.space())?)?.value;
    Ok(DeltaReport { norm, upper, lower, upper_gap: upper - norm, lower_gap: norm - lower })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::gaussian_matrix;
    use crate::opspace::{space_matrix, space_row, space_scalar};
    use crate::scalar::c;

    type M = ComplexMatrix<f64>;

    fn random_point(space: &SpaceRef<f64>, level: usize, radius: f64, seed: u64) -> OpSpaceMatrix<f64> {
        let mut rng = RngSeed(seed).rng();
        let x = OpSpaceMatrix::new(space.clone(), (0..space.dim()).map(|_| gaussian_matrix(&mut rng, level, level)).collect()).unwrap();
        x.scale_real(radius / x.matrix_norm())
    }

    #[test]
    fn trivial_representation_cost_is_the_norm() {
        let x = random_point(&space_row(2), 2, 0.7, 1);
        let u = GcbElement::delta(&x).unwrap();
        assert_eq!(representation_cost(&u, &[vec![0]]).unwrap(), x.matrix_norm());
        let doubled = u.scale(c(2.0, 0.0));
        assert_eq!(representation_cost(&doubled, &[vec![0]]).unwrap(), 2.0 * x.matrix_norm());
    }

    #[test]
    fn grouped_cost_matches_hand_formula() {
        let s = space_scalar::<f64>();
        let p = |v: f64| OpSpaceMatrix::from_scalar_matrix(M::scalar(c(v, 0.0))).unwrap();
        let half = 0.5f64.sqrt();
        let terms = vec![
            GcbTerm { c: c(1.0, 0.0), alpha: M::from_real(2, 1, &[1.0, 0.0]), point: p(0.5), beta: M::from_real(1, 2, &[half, half]) },
            GcbTerm { c: c(2.0, 0.0), alpha: M::from_real(2, 1, &[0.0, 1.0]), point: p(0.25), beta: M::from_real(1, 2, &[half, -half]) },
        ];
        let u = GcbElement::new(s, 2, terms).unwrap();
        // singletons: 1·1·0.5 + 1·1·0.5
        assert!((representation_cost(&u, &[vec![0], vec![1]]).unwrap() - 1.0).abs() < 1e-15);
        // merged: ‖diag(1,1)‖^{1/2} ‖I‖^{1/2} max(0.5, 0.5)
        assert!((representation_cost(&u, &[vec![0, 1]]).unwrap() - 0.5).abs() < 1e-15);
        assert!(representation_cost(&u, &[vec![0]]).is_err());
        assert!(representation_cost(&u, &[vec![0, 0], vec![1]]).is_err());
        let best = gcb_upper_bound(&u, 10_000, RngSeed(1)).unwrap();
        assert!(best.value <= 0.5 + 1e-15);
    }

    #[test]
    fn zero_element() {
        let u = GcbElement::zero(space_scalar::<f64>(), 2);
        assert_eq!(gcb_upper_bound(&u, 10, RngSeed(0)).unwrap().value, 0.0);
        let dict = FunctionDictionary::standard(&space_scalar()).unwrap();
        assert_eq!(gcb_lower_bound(&u, &dict).unwrap().value, 0.0);
        assert_eq!(gcb_pairing(&u, &dict.entries[0]).unwrap(), M::zeros(2, 2));
    }

    #[test]
    fn delta_pairing_with_linear_functional() {
        let s = space_row::<f64>(2);
        let x = random_point(&s, 2, 0.8, 2);
        let u = GcbElement::delta(&x).unwrap();
        let phi = [c(0.3, 0.1), c(-0.2, 0.0)];
        let e = DictEntry::functional(s.clone(), &phi).unwrap();
        let p = gcb_pairing(&u, &e).unwrap();
        let expected = M::from_fn(2, 2, |i, j| x.entry(i, j).iter().zip(&phi).map(|(a, b)| a * b).sum());
        assert!(p.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn two_term_pairing_expanded_by_hand() {
        let s = space_scalar::<f64>();
        let x1 = OpSpaceMatrix::from_scalar_matrix(M::from_real(2, 2, &[0.3, 0.1, 0.0, -0.2])).unwrap();
        let x2 = OpSpaceMatrix::from_scalar_matrix(M::scalar(c(0.0, 0.6))).unwrap();
        let a1 = M::identity(2);
        let b1 = M::identity(2);
        let a2 = M::from_real(2, 1, &[0.5, 0.5]);
        let b2 = M::from_real(1, 2, &[1.0, 0.0]);
        let terms = vec![
            GcbTerm { c: c(1.0, 0.0), alpha: a1, point: x1.clone(), beta: b1 },
            GcbTerm { c: c(0.0, 2.0), alpha: a2, point: x2, beta: b2 },
        ];
        let u = GcbElement::new(s, 2, terms).unwrap();
        let sq = DictEntry::holo(HoloFunction::monomial(2, c(1.0, 0.0))).unwrap();
        let p = gcb_pairing(&u, &sq).unwrap();
        // entrywise squares of x1, plus 2i·(0.6i)^2·[0.5;0.5][1 0]
        let t2 = c::<f64>(0.0, 2.0) * c(-0.36, 0.0) * 0.5;
        let expected = M::new(2, 2, vec![c::<f64>(0.09, 0.0) + t2, c(0.01, 0.0), t2, c(0.04, 0.0)]).unwrap();
        assert!(p.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn pairing_is_linear_in_u_and_respects_scale() {
        let s = space_scalar::<f64>();
        let x = random_point(&s, 2, 0.9, 3);
        let y = random_point(&s, 2, 0.4, 4);
        let u = GcbElement::delta(&x).unwrap();
        let v = GcbElement::delta(&y).unwrap();
        let f = HoloFunction::moebius_quotient(HoloFunction::identity(), c(0.3, 0.0)).unwrap();
        let e = DictEntry::holo(f.clone()).unwrap();
        let lhs = gcb_pairing(&u.scale(c(2.0, -1.0)).add(&v).unwrap(), &e).unwrap();
        let rhs = gcb_pairing(&u, &e).unwrap().scale(c(2.0, -1.0)).add(&gcb_pairing(&v, &e).unwrap());
        assert!(lhs.max_abs_diff(&rhs) < 1e-14);
        let scaled = DictEntry::holo(HoloFunction::scale(c(0.0, 3.0), f).unwrap()).unwrap();
        let p3 = gcb_pairing(&u, &scaled).unwrap();
        assert!(p3.max_abs_diff(&gcb_pairing(&u, &e).unwrap().scale(c(0.0, 3.0))) < 1e-14);
    }

    #[test]
    fn duplicate_delta_is_pinned() {
        let s = space_matrix::<f64>(2);
        let x = random_point(&s, 1, 0.6, 5);
        let u = GcbElement::delta(&x).unwrap();
        let uu = u.add(&u).unwrap();
        let up = gcb_upper_bound(&uu, 5_000, RngSeed(2)).unwrap().value;
        let lo = gcb_lower_bound(&uu, &FunctionDictionary::standard(&s).unwrap()).unwrap().value;
        assert!(up <= 2.0 * 0.6 + 1e-12);
        assert!((lo - 1.2).abs() < 1e-12);
        assert!(up >= lo - 1e-9);
    }

    #[test]
    fn delta_isometry_examples() {
        let half = OpSpaceMatrix::from_scalar_matrix(M::scalar(c(0.5, 0.0))).unwrap();
        let r = delta_isometry_check(&half, 100, RngSeed(0)).unwrap();
        assert!(r.passed() && (r.lower - 0.5).abs() < 1e-6);

        let s = space_matrix::<f64>(2);
        let id = OpSpaceMatrix::from_entries(
            s.clone(),
            &[
                vec![vec![c(0.9, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.9, 0.0)], vec![c(0.0, 0.0); 4]],
                vec![vec![c(0.0, 0.0); 4], vec![c(0.9, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.9, 0.0)]],
            ],
        )
        .unwrap();
        let r = delta_isometry_check(&id, 100, RngSeed(1)).unwrap();
        assert!(r.passed() && (r.norm - 0.9).abs() < 1e-12);

        let x = random_point(&space_row(2), 3, 0.75, 6);
        let r = delta_isometry_check(&x, 100, RngSeed(2)).unwrap();
        assert!(r.upper_gap <= 1e-9 && r.lower_gap <= 1e-4);
    }

    #[test]
    fn invalid_elements_rejected() {
        let s = space_scalar::<f64>();
        let x = OpSpaceMatrix::from_scalar_matrix(M::scalar(c(1.0, 0.0))).unwrap();
        assert!(GcbElement::delta(&x).is_err());
        let y = OpSpaceMatrix::from_scalar_matrix(M::scalar(c(0.5, 0.0))).unwrap();
        let bad = GcbTerm { c: c(1.0, 0.0), alpha: M::identity(2), point: y, beta: M::identity(1) };
        assert!(GcbElement::new(s, 1, vec![bad]).is_err());
    }

    #[test]
    fn partition_counts() {
        // Σ_{k≤3} S(r,k): 1, 2, 5, 14, 41
        let counts: Vec<usize> = (1..=5).map(|r| partitions(r, 3).len()).collect();
        assert_eq!(counts, vec![1, 2, 5, 14, 41]);
    }
}
