//! Matrix sets over a concrete space, absolutely matrix convex
//! combinations `Σ α_i x_i β_i`, and separation certificates.

use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::matcore::{gaussian_matrix, ComplexMatrix, RngSeed};
use crate::opspace::{same_space, FunctionalGrid, OpSpaceMatrix, SpaceRef};
use crate::optim::{ascend, AscentConfig, Budget};
use crate::scalar::Real;

/// Tolerance on the row and column constraints of a representation.
pub const CONSTRAINT_TOL: f64 = 1e-10;
pub const HULL_TOL: f64 = 1e-8;
/// Margin by which a certificate must separate.
pub const CERTIFICATE_TOL: f64 = 1e-9;
const RIDGE: f64 = 1e-12;

/// Finite generating family `x_1, ..., x_r` with `x_i ∈ M_{k_i}(V)`.
#[derive(Clone, Debug)]
pub struct MatrixSet<T: Real> {
    space: SpaceRef<T>,
    generators: Vec<OpSpaceMatrix<T>>,
}

impl<T: Real> MatrixSet<T> {
    pub fn new(space: SpaceRef<T>, generators: Vec<OpSpaceMatrix<T>>) -> Result<Self> {
        if generators.is_empty() {
            return invalid("a matrix set needs at least one generator");
        }
        if let Some(i) = generators.iter().position(|g| !same_space(g.space(), &space)) {
            return invalid(format!("generator {i} lives over a different space"));
        }
        Ok(Self { space, generators })
    }

    pub fn space(&self) -> &SpaceRef<T> {
        &self.space
    }

    pub fn generators(&self) -> &[OpSpaceMatrix<T>] {
        &self.generators
    }

    /// `max_i ‖x_i‖`.
    pub fn norm(&self) -> T {
        self.generators.iter().map(|g| g.matrix_norm()).fold(T::zero(), T::max)
    }
}

#[derive(Clone, Debug)]
pub struct HullTerm<T> {
    /// `n×k_i`.
    pub alpha: ComplexMatrix<T>,
    pub generator: usize,
    /// `k_i×n`.
    pub beta: ComplexMatrix<T>,
}

#[derive(Clone, Debug)]
pub struct HullRepresentation<T> {
    pub target_level: usize,
    pub terms: Vec<HullTerm<T>>,
}

impl<T: Real> HullRepresentation<T> {
    /// `α = β = I` on generator `index`.
    pub fn identity(set: &MatrixSet<T>, index: usize) -> Self {
        let k = set.generators[index].level();
        Self {
            target_level: k,
            terms: vec![HullTerm { alpha: ComplexMatrix::identity(k), generator: index, beta: ComplexMatrix::identity(k) }],
        }
    }

    /// `(‖Σ α_i α_i*‖, ‖Σ β_i* β_i‖)`.
    pub fn constraint_norms(&self) -> (T, T) {
        let n = self.target_level;
        let mut aa = ComplexMatrix::zeros(n, n);
        let mut bb = ComplexMatrix::zeros(n, n);
        for t in &self.terms {
            aa.add_assign(&t.alpha.matmul(&t.alpha.adjoint()));
            bb.add_assign(&t.beta.adjoint().matmul(&t.beta));
        }
        (aa.operator_norm_unchecked(), bb.operator_norm_unchecked())
    }

    pub fn validate(&self, set: &MatrixSet<T>) -> Result<()> {
        let n = self.target_level;
        if n == 0 {
            return Err(Error::InvalidRepresentation("target level must be positive".into()));
        }
        for (i, t) in self.terms.iter().enumerate() {
            let g = set.generators.get(t.generator).ok_or_else(|| {
                Error::InvalidRepresentation(format!("term {i} refers to missing generator {}", t.generator))
            })?;
            let k = g.level();
            if t.alpha.shape() != (n, k) || t.beta.shape() != (k, n) {
                return Err(Error::InvalidRepresentation(format!(
                    "term {i}: alpha {:?} and beta {:?} do not fit level {n} and generator level {k}",
                    t.alpha.shape(),
                    t.beta.shape()
                )));
            }
            if !t.alpha.is_finite() || !t.beta.is_finite() {
                return Err(Error::InvalidRepresentation(format!("term {i} has non-finite scalars")));
            }
        }
        let (a, b) = self.constraint_norms();
        let limit = T::one() + T::lit(CONSTRAINT_TOL);
        if a > limit || b > limit {
            return Err(Error::InvalidRepresentation(format!(
                "constraints violated: ||sum aa*|| = {a}, ||sum b*b|| = {b}"
            )));
        }
        Ok(())
    }
}

/// `Σ α_i x_i β_i` at level `n`.
pub fn hull_element<T: Real>(set: &MatrixSet<T>, rep: &HullRepresentation<T>) -> Result<OpSpaceMatrix<T>> {
    rep.validate(set)?;
    let mut out = OpSpaceMatrix::zeros(set.space.clone(), rep.target_level);
    for t in &rep.terms {
        out = out.add(&set.generators[t.generator].compress(&t.alpha, &t.beta)?)?;
    }
    Ok(out)
}

/// Random representation at level `n` with `terms` terms: Gaussian scalars
/// normalized by `(Σ αα* + ε)^{-1/2}` on the left and `(Σ β*β + ε)^{-1/2}`
/// on the right.
pub fn sample_representation<T: Real, R: Rng + ?Sized>(
    set: &MatrixSet<T>,
    n: usize,
    terms: usize,
    rng: &mut R,
) -> HullRepresentation<T> {
    let mut raw: Vec<HullTerm<T>> = (0..terms)
        .map(|_| {
            let g = rng.random_range(0..set.generators.len());
            let k = set.generators[g].level();
            HullTerm { alpha: gaussian_matrix(rng, n, k), generator: g, beta: gaussian_matrix(rng, k, n) }
        })
        .collect();
    let ridge = ComplexMatrix::identity(n).scale_real(T::lit(RIDGE));
    let mut aa = ridge.clone();
    let mut bb = ridge;
    for t in &raw {
        aa.add_assign(&t.alpha.matmul(&t.alpha.adjoint()));
        bb.add_assign(&t.beta.adjoint().matmul(&t.beta));
    }
    let left = aa.psd_function(|s| T::one() / s.sqrt());
    let right = bb.psd_function(|s| T::one() / s.sqrt());
    for t in raw.iter_mut() {
        t.alpha = left.matmul(&t.alpha);
        t.beta = t.beta.matmul(&right);
    }
    // rank-deficient sums leave rounding error of order eps/ridge; absorb it
    let mut rep = HullRepresentation { target_level: n, terms: raw };
    let (a, b) = rep.constraint_norms();
    let (sa, sb) = (T::one() / a.max(T::one()).sqrt(), T::one() / b.max(T::one()).sqrt());
    for t in rep.terms.iter_mut() {
        t.alpha = t.alpha.scale_real(sa);
        t.beta = t.beta.scale_real(sb);
    }
    rep
}

#[derive(Clone, Debug, Serialize)]
pub struct HullNormReport<T> {
    pub set_norm: T,
    pub trials: usize,
    pub violations: usize,
    pub max_hull_norm: T,
    /// Whether the identity representation of the largest generator
    /// reproduces `‖K‖` exactly.
    pub identity_attains: bool,
}

impl<T> HullNormReport<T> {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.identity_attains
    }
}

/// Samples hull elements at levels 1..=3 with 1..=3 terms and checks
/// `‖Σ α_i x_i β_i‖ ≤ ‖K‖`.
pub fn hull_norm_check<T: Real>(set: &MatrixSet<T>, trials: usize, seed: RngSeed) -> Result<HullNormReport<T>> {
    if trials == 0 {
        return invalid("trials must be at least 1");
    }
    let set_norm = set.norm();
    let mut report = HullNormReport { set_norm, trials, violations: 0, max_hull_norm: T::zero(), identity_attains: false };
    for t in 0..trials {
        let mut rng = seed.derive(t as u64).rng();
        let n = rng.random_range(1..=3);
        let terms = rng.random_range(1..=3);
        let rep = sample_representation(set, n, terms, &mut rng);
        let v = hull_element(set, &rep)?.matrix_norm();
        report.max_hull_norm = report.max_hull_norm.max(v);
        if v > set_norm + T::lit(HULL_TOL) {
            report.violations += 1;
        }
    }
    let best = (0..set.generators.len())
        .max_by(|&i, &j| {
            let (a, b) = (set.generators[i].matrix_norm(), set.generators[j].matrix_norm());
            a.partial_cmp(&b).unwrap_or(std::cmp::Ordering::Equal)
        })
        .expect("nonempty set");
    let x = hull_element(set, &HullRepresentation::identity(set, best))?;
    report.identity_attains = x == set.generators[best] && x.matrix_norm() == set_norm;
    Ok(report)
}

/// An element `f = (f_ij) ∈ M_p(V')`.
pub type SeparationCertificate<T> = FunctionalGrid<T>;

/// `(f_ij(x_kl))` with rows `(i,k)` and columns `(j,l)`.
pub fn pairing<T: Real>(f: &SeparationCertificate<T>, x: &OpSpaceMatrix<T>) -> Result<ComplexMatrix<T>> {
    f.pair(x)
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateVerdict<T> {
    pub valid: bool,
    pub generator_max: T,
    pub target: T,
}

/// Valid iff every generator pairs to norm at most `1 + 1e-9` and `x0`
/// pairs to norm above `1 + 1e-9`.
pub fn check_certificate<T: Real>(
    f: &SeparationCertificate<T>,
    set: &MatrixSet<T>,
    x0: &OpSpaceMatrix<T>,
) -> Result<CertificateVerdict<T>> {
    let mut generator_max = T::zero();
    for g in &set.generators {
        generator_max = generator_max.max(pairing(f, g)?.operator_norm()?);
    }
    let target = pairing(f, x0)?.operator_norm()?;
    let limit = T::one() + T::lit(CERTIFICATE_TOL);
    Ok(CertificateVerdict { valid: generator_max <= limit && target > limit, generator_max, target })
}

fn pair_norms<T: Real>(f: &FunctionalGrid<T>, set: &MatrixSet<T>, x0: &OpSpaceMatrix<T>) -> (T, T) {
    let gmax = set
        .generators
        .iter()
        .map(|g| f.pair(g).map(|m| m.operator_norm_unchecked()).unwrap_or_else(|_| T::infinity()))
        .fold(T::zero(), T::max);
    let t = f.pair(x0).map(|m| m.operator_norm_unchecked()).unwrap_or_else(|_| T::zero());
    (gmax, t)
}

fn ratio<T: Real>(f: &FunctionalGrid<T>, set: &MatrixSet<T>, x0: &OpSpaceMatrix<T>) -> Option<T> {
    let (g, t) = pair_norms(f, set, x0);
    if g > T::zero() {
        Some(t / g)
    } else if t > T::zero() {
        Some(T::infinity())
    } else {
        None
    }
}

/// Scales `f` so the generators pair below 1 and `x0` above 1, splitting
/// the gap geometrically.
fn normalize<T: Real>(f: &FunctionalGrid<T>, set: &MatrixSet<T>, x0: &OpSpaceMatrix<T>) -> Option<FunctionalGrid<T>> {
    let (g, t) = pair_norms(f, set, x0);
    if !(t > T::zero()) {
        return None;
    }
    let s = if g > T::zero() { T::one() / (g * t).sqrt() } else { T::lit(2.0) / t };
    Some(f.scale_real(s))
}

fn candidate_grids<T: Real>(set: &MatrixSet<T>, x0: &OpSpaceMatrix<T>) -> Vec<FunctionalGrid<T>> {
    let space = set.space.clone();
    let d = space.dim();
    let n = space.ambient();
    let mut out = Vec::new();
    // the realization map itself: pairs every x to (a permutation of) realize(x)
    if let Ok(f) = FunctionalGrid::compression(space.clone(), &ComplexMatrix::identity(n), &ComplexMatrix::identity(n)) {
        out.push(f);
    }
    // conjugate coordinates of each entry of x0, and coordinate functionals
    for i in 0..x0.level() {
        for j in 0..x0.level() {
            let phi: Vec<_> = x0.entry(i, j).iter().map(|z| z.conj()).collect();
            if phi.iter().any(|z| z.norm() > T::zero()) {
                if let Ok(f) = FunctionalGrid::scalar(space.clone(), &phi) {
                    out.push(f);
                }
            }
        }
    }
    for k in 0..d {
        let mut phi = vec![num_complex::Complex::new(T::zero(), T::zero()); d];
        phi[k] = num_complex::Complex::new(T::one(), T::zero());
        out.push(FunctionalGrid::scalar(space.clone(), &phi).expect("coordinate functional"));
    }
    out
}

/// Heuristic search for a certificate separating `x0` from the absolutely
/// matrix convex hull of `set`. `Ok(None)` means the search failed, not
/// that `x0` lies in the hull.
pub fn find_certificate<T: Real>(
    set: &MatrixSet<T>,
    x0: &OpSpaceMatrix<T>,
    budget: usize,
    seed: RngSeed,
) -> Result<Option<SeparationCertificate<T>>> {
    if !same_space(x0.space(), &set.space) {
        return invalid("target and matrix set live over different spaces");
    }
    let space = set.space.clone();
    let mut spent = Budget::new(budget);
    let mut pool: Vec<(T, FunctionalGrid<T>)> = Vec::new();
    let accept = |f: &FunctionalGrid<T>| -> Result<Option<FunctionalGrid<T>>> {
        let Some(g) = normalize(f, set, x0) else { return Ok(None) };
        Ok(check_certificate(&g, set, x0)?.valid.then_some(g))
    };

    for f in candidate_grids(set, x0) {
        if !spent.try_spend() {
            return Ok(None);
        }
        if let Some(r) = ratio(&f, set, x0) {
            if let Some(c) = accept(&f)? {
                return Ok(Some(c));
            }
            pool.push((r, f));
        }
    }

    let mut rng = seed.rng();
    let sizes = [1, x0.level()];
    let draws = (spent.remaining() / 10).max(1);
    for t in 0..draws {
        if !spent.try_spend() {
            break;
        }
        let p = sizes[t % sizes.len()];
        let coeffs = (0..space.dim()).map(|_| gaussian_matrix(&mut rng, p, p)).collect();
        let f = FunctionalGrid::new(space.clone(), coeffs)?;
        if let Some(r) = ratio(&f, set, x0) {
            pool.push((r, f));
        }
    }
    pool.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));

    let cfg = AscentConfig::default();
    for (r, f) in pool.into_iter().take(4) {
        if let Some(c) = accept(&f)? {
            return Ok(Some(c));
        }
        if !r.is_finite() || spent.remaining() == 0 {
            break;
        }
        let size = f.size();
        let mut objective = |p: &[T]| ratio(&FunctionalGrid::from_params(&space, size, p), set, x0);
        // the ratio is scale invariant; keep parameters on the unit sphere
        let project = |p: &mut [T]| {
            let n = p.iter().map(|v| *v * *v).sum::<T>().sqrt();
            if n > T::zero() {
                p.iter_mut().for_each(|v| *v /= n);
            }
        };
        if let Some((p, _)) = ascend(f.to_params(), &mut objective, &project, &mut spent, &cfg) {
            if let Some(c) = accept(&FunctionalGrid::from_params(&space, size, &p))? {
                return Ok(Some(c));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opspace::{space_matrix, space_min_linf, space_scalar};
    use crate::scalar::c;

    type M = ComplexMatrix<f64>;

    fn scalar_point(v: f64) -> OpSpaceMatrix<f64> {
        OpSpaceMatrix::from_scalar_matrix(M::scalar(c(v, 0.0))).unwrap()
    }

    fn scalar_set(values: &[f64]) -> MatrixSet<f64> {
        MatrixSet::new(space_scalar(), values.iter().map(|&v| scalar_point(v)).collect()).unwrap()
    }

    #[test]
    fn identity_representation_returns_generator() {
        let s = space_matrix::<f64>(2);
        let mut rng = RngSeed(1).rng();
        let g = OpSpaceMatrix::new(s.clone(), (0..4).map(|_| gaussian_matrix(&mut rng, 2, 2)).collect()).unwrap();
        let set = MatrixSet::new(s, vec![g.clone()]).unwrap();
        assert_eq!(hull_element(&set, &HullRepresentation::identity(&set, 0)).unwrap(), g);
    }

    #[test]
    fn column_times_row_embeds_corner() {
        let set = scalar_set(&[1.0]);
        let rep = HullRepresentation {
            target_level: 2,
            terms: vec![HullTerm { alpha: M::from_real(2, 1, &[1.0, 0.0]), generator: 0, beta: M::from_real(1, 2, &[1.0, 0.0]) }],
        };
        let x = hull_element(&set, &rep).unwrap();
        assert_eq!(x.coeff(0), &M::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn two_terms_match_block_arithmetic() {
        let set = scalar_set(&[0.5, -0.25]);
        let s = 0.5f64.sqrt();
        let rep = HullRepresentation {
            target_level: 2,
            terms: vec![
                HullTerm { alpha: M::from_real(2, 1, &[s, 0.0]), generator: 0, beta: M::from_real(1, 2, &[s, s]) },
                HullTerm { alpha: M::from_real(2, 1, &[0.0, s]), generator: 1, beta: M::from_real(1, 2, &[s, -s]) },
            ],
        };
        let x = hull_element(&set, &rep).unwrap();
        // hand expansion: 0.5·[s;0][s s] + (-0.25)·[0;s][s -s]
        let expected = M::from_real(2, 2, &[0.25, 0.25, -0.125, 0.125]);
        assert!(x.coeff(0).max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn constraint_violation_rejected() {
        let set = scalar_set(&[0.5]);
        let rep = HullRepresentation {
            target_level: 1,
            terms: vec![HullTerm { alpha: M::scalar(c(1.5, 0.0)), generator: 0, beta: M::scalar(c(0.5, 0.0)) }],
        };
        assert!(matches!(hull_element(&set, &rep), Err(Error::InvalidRepresentation(_))));
        let rep = HullRepresentation {
            target_level: 1,
            terms: vec![HullTerm { alpha: M::scalar(c(1.0, 0.0)), generator: 3, beta: M::scalar(c(1.0, 0.0)) }],
        };
        assert!(matches!(hull_element(&set, &rep), Err(Error::InvalidRepresentation(_))));
    }

    #[test]
    fn sampled_representations_satisfy_constraints() {
        let set = scalar_set(&[0.3, 0.9]);
        let mut rng = RngSeed(2).rng();
        for _ in 0..100 {
            let rep = sample_representation(&set, 3, 4, &mut rng);
            let (a, b) = rep.constraint_norms();
            assert!(a <= 1.0 + 1e-10 && b <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn hull_norm_examples() {
        let r = hull_norm_check(&scalar_set(&[0.7]), 200, RngSeed(3)).unwrap();
        assert!(r.passed() && r.max_hull_norm <= 0.7 + 1e-8, "{r:?}");
        let r = hull_norm_check(&scalar_set(&[0.3, 0.9]), 200, RngSeed(4)).unwrap();
        assert!(r.passed());
        assert_eq!(r.set_norm, 0.9);
    }

    #[test]
    fn pairing_examples() {
        let s = space_scalar::<f64>();
        let f = FunctionalGrid::scalar(s.clone(), &[c(2.0, 1.0)]).unwrap();
        let p = pairing(&f, &scalar_point(0.5)).unwrap();
        assert_eq!(p, M::scalar(c(1.0, 0.5)));
        let x = OpSpaceMatrix::from_scalar_matrix(M::from_real(2, 2, &[0.1, 0.2, 0.3, 0.4])).unwrap();
        let id = FunctionalGrid::scalar(s, &[c(1.0, 0.0)]).unwrap();
        assert_eq!(&pairing(&id, &x).unwrap(), x.coeff(0));
    }

    #[test]
    fn pairing_matches_quadruple_loop() {
        let s = space_min_linf::<f64>(2);
        let mut rng = RngSeed(5).rng();
        let f = FunctionalGrid::new(s.clone(), (0..2).map(|_| gaussian_matrix(&mut rng, 2, 2)).collect()).unwrap();
        let x = OpSpaceMatrix::new(s, (0..2).map(|_| gaussian_matrix(&mut rng, 2, 2)).collect()).unwrap();
        let p = pairing(&f, &x).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let fij: Vec<_> = f.coeffs().iter().map(|c| c[(i, j)]).collect();
                        let v: num_complex::Complex<f64> = fij.iter().zip(x.entry(k, l)).map(|(a, b)| a * b).sum();
                        assert!((p[(2 * i + k, 2 * j + l)] - v).norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn scalar_certificate() {
        let set = scalar_set(&[0.5]);
        let x0 = scalar_point(2.0);
        let id = FunctionalGrid::scalar(space_scalar(), &[c(1.0, 0.0)]).unwrap();
        assert!(check_certificate(&id, &set, &x0).unwrap().valid);
        let found = find_certificate(&set, &x0, 1_000, RngSeed(6)).unwrap().expect("certificate");
        assert!(check_certificate(&found, &set, &x0).unwrap().valid);
    }

    #[test]
    fn no_certificate_for_hull_members() {
        let set = scalar_set(&[0.5]);
        let x0 = scalar_point(0.5);
        assert!(find_certificate(&set, &x0, 2_000, RngSeed(7)).unwrap().is_none());
        let inside = scalar_point(-0.2);
        let id = FunctionalGrid::scalar(space_scalar(), &[c(3.0, 0.0)]).unwrap();
        assert!(!check_certificate(&id, &set, &inside).unwrap().valid);
    }

    #[test]
    fn min_space_coordinate_point_separated() {
        let s = space_min_linf::<f64>(2);
        let e = |a: f64, b: f64| OpSpaceMatrix::new(s.clone(), vec![M::scalar(c(a, 0.0)), M::scalar(c(b, 0.0))]).unwrap();
        let set = MatrixSet::new(s.clone(), vec![e(1.0, 0.0), e(0.0, 1.0)]).unwrap();
        let x0 = e(1.0, 1.0);
        let cert = find_certificate(&set, &x0, 10_000, RngSeed(8)).unwrap().expect("certificate");
        assert!(check_certificate(&cert, &set, &x0).unwrap().valid);
    }
}
