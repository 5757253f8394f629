//! Two-sided estimates of `‖f‖_cb`.
//!
//! Lower bounds come from optimizing `‖(f(x_ij))‖` over the matrix unit
//! balls of a few levels; every reported value is attained by a stored
//! witness. Upper bounds come from the certified rules in [`upper`].

mod checks;
mod upper;

pub use checks::{
    algebra_check, question_probe, schwarz_check, AlgebraReport, ProbeReport, SchwarzReport, Verdict, PROBE_LABEL, SCHWARZ_TOL,
};
pub use upper::{cb_upper_bound, UpperBound};

use std::cmp::Ordering;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::holofun::{CertifiedFunctional, HoloFunction, Node};
use crate::matcore::{ComplexMatrix, RngSeed};
use crate::opspace::{norming_candidates, sample_space_ball, space_scalar, OpSpaceMatrix, SpaceRef};
use crate::optim::{ascend, AscentConfig, Budget};
use crate::scalar::Real;

/// Search radius: points stay in the open unit ball.
pub const RADIUS_CAP: f64 = 1.0 - 1e-6;
/// Allowed excess of the lower bound over the upper bound before a
/// sandwich is declared inconsistent.
pub const SANDWICH_TOL: f64 = 1e-6;
const PHASES: usize = 8;
const RESTARTS: usize = 4;

/// A point of the level-`m` unit ball and the amplified norm it attains.
#[derive(Clone, Debug)]
pub struct Witness<T: Real> {
    pub level: usize,
    pub matrix: OpSpaceMatrix<T>,
    pub value: T,
}

impl<T: Real> Witness<T> {
    /// `‖(f(x_ij))‖` recomputed from the stored matrix.
    pub fn recompute(&self, f: &HoloFunction<T>) -> Result<T> {
        f.amplify(&self.matrix)?.operator_norm()
    }
}

/// `x ⊕ 0` at level `m + 1`. Since `f(0) = 0` the amplification of the
/// lifted point is `f_m(x) ⊕ 0`, so the value carries over unchanged.
pub fn lift_witness<T: Real>(w: &Witness<T>) -> Witness<T> {
    Witness { level: w.level + 1, matrix: w.matrix.lift(), value: w.value }
}

#[derive(Clone, Debug)]
pub struct LevelEntry<T: Real> {
    pub level: usize,
    pub witness: Witness<T>,
    /// Objective evaluations spent at this level (0 if filled by lifting).
    pub samples: usize,
    pub lifted: bool,
}

#[derive(Clone, Debug)]
pub struct CbEstimate<T: Real> {
    pub lower: T,
    pub upper: Option<T>,
    pub level_table: Vec<LevelEntry<T>>,
    pub seed: RngSeed,
    pub budget: usize,
    pub provenance: Vec<String>,
}

impl<T: Real> CbEstimate<T> {
    pub fn gap(&self) -> Option<T> {
        self.upper.map(|u| u - self.lower)
    }
}

/// Space whose matrix balls `f` is optimized over.
pub fn domain_space<T: Real>(f: &HoloFunction<T>) -> SpaceRef<T> {
    f.domain().cloned().unwrap_or_else(space_scalar)
}

/// Default level schedule: powers of two up to `max_level`, plus `max_level`.
pub fn level_schedule(max_level: usize) -> Vec<usize> {
    let mut out: Vec<usize> = std::iter::successors(Some(1usize), |l| Some(l * 2)).take_while(|&l| l <= max_level).collect();
    if out.last() != Some(&max_level) && max_level >= 1 {
        out.push(max_level);
    }
    out
}

fn better<T: Real>(a: &(T, OpSpaceMatrix<T>), b: &(T, OpSpaceMatrix<T>)) -> Ordering {
    // larger value first; ties resolved by the lexicographically smaller point
    b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal).then_with(|| a.1.lex_cmp(&b.1))
}

fn functionals<T: Real>(f: &HoloFunction<T>, out: &mut Vec<CertifiedFunctional<T>>) {
    match f.node() {
        Node::GeometricPhi(g) => out.push(g.clone()),
        Node::Composite { functional, .. } => out.push(functional.clone()),
        Node::Product(a, b) | Node::Sum(a, b) => {
            functionals(a, out);
            functionals(b, out);
        }
        Node::Scale(_, g) | Node::MoebiusQuotient { inner: g, .. } => functionals(g, out),
        Node::PowerSeries { .. } | Node::Blaschke { .. } => {}
    }
}

/// Unit-norm level-1 directions likely to push `f` towards its supremum.
fn directions<T: Real>(f: &HoloFunction<T>, space: &SpaceRef<T>) -> Vec<Vec<Complex<T>>> {
    let mut raw = Vec::new();
    let mut fs = Vec::new();
    functionals(f, &mut fs);
    for g in &fs {
        raw.extend(norming_candidates(space, g.phi()));
    }
    if raw.is_empty() {
        for k in 0..space.dim() {
            let mut e = vec![Complex::new(T::zero(), T::zero()); space.dim()];
            e[k] = Complex::new(T::one(), T::zero());
            raw.push(e);
        }
    }
    raw.into_iter()
        .filter_map(|y| {
            let n = space.realize_element(&y).operator_norm_unchecked();
            (n > T::zero()).then(|| y.into_iter().map(|z| z / n).collect())
        })
        .collect()
}

struct Objective<'a, T: Real> {
    f: &'a HoloFunction<T>,
    space: SpaceRef<T>,
    level: usize,
    cap: T,
}

impl<T: Real> Objective<'_, T> {
    fn value(&self, x: &OpSpaceMatrix<T>) -> Option<T> {
        let v = self.f.amplify_unchecked(x).ok()?.operator_norm_unchecked();
        v.is_finite().then_some(v)
    }

    fn at(&self, p: &[T]) -> Option<T> {
        self.value(&OpSpaceMatrix::from_params(&self.space, self.level, p))
    }

    fn project(&self, p: &mut [T]) {
        let x = OpSpaceMatrix::from_params(&self.space, self.level, p).project_ball(self.cap);
        p.copy_from_slice(&x.to_params());
    }
}

/// Best amplified norm found at level `m` over points of norm at most
/// `1 - 1e-6`. Always a valid lower bound for the level-`m` supremum.
pub fn level_sup<T: Real>(f: &HoloFunction<T>, m: usize, budget: usize, seed: RngSeed) -> Result<Witness<T>> {
    level_sup_counted(f, m, budget, seed).map(|(w, _)| w)
}

fn level_sup_counted<T: Real>(
    f: &HoloFunction<T>,
    m: usize,
    budget: usize,
    seed: RngSeed,
) -> Result<(Witness<T>, usize)> {
    if m == 0 {
        return invalid("level must be at least 1");
    }
    if budget == 0 {
        return invalid("budget must be at least 1");
    }
    let space = domain_space(f);
    f.check_domain(&space)?;
    let obj = Objective { f, space: space.clone(), level: m, cap: T::lit(RADIUS_CAP) };
    let mut spent = Budget::new(budget);
    let mut pool: Vec<(T, OpSpaceMatrix<T>)> = Vec::new();
    let consider = |x: OpSpaceMatrix<T>, spent: &mut Budget, pool: &mut Vec<(T, OpSpaceMatrix<T>)>| -> bool {
        if !spent.try_spend() {
            return false;
        }
        if let Some(v) = obj.value(&x) {
            pool.push((v, x));
        }
        true
    };

    // structured starts: e^{iθ} cap (I_m ⊗ y) and e^{iθ} cap (J_m/m ⊗ y)
    let tau = T::lit(std::f64::consts::TAU);
    let ones = ComplexMatrix::from_fn(m, m, |_, _| Complex::new(T::one() / T::lit(m as f64), T::zero()));
    let shapes: Vec<ComplexMatrix<T>> = if m == 1 { vec![ComplexMatrix::identity(1)] } else { vec![ComplexMatrix::identity(m), ones] };
    'structured: for y in directions(f, &space) {
        for j in 0..PHASES {
            let phase = Complex::from_polar(obj.cap, tau * T::lit(j as f64) / T::lit(PHASES as f64));
            for shape in &shapes {
                let coeffs = y.iter().map(|&yk| shape.scale(yk * phase)).collect();
                let x = OpSpaceMatrix::new(space.clone(), coeffs)?;
                if !consider(x, &mut spent, &mut pool) {
                    break 'structured;
                }
            }
        }
    }

    let mut rng = seed.rng();
    let random_draws = (spent.remaining() / 10).max(1);
    for _ in 0..random_draws {
        let x = sample_space_ball(&mut rng, &space, m, obj.cap)?;
        if !consider(x, &mut spent, &mut pool) {
            break;
        }
    }

    pool.sort_by(better);
    let starts: Vec<&(T, OpSpaceMatrix<T>)> = pool.iter().take(RESTARTS).collect();
    let share = if starts.is_empty() { 0 } else { spent.remaining() / starts.len() };
    let cfg = AscentConfig::default();
    // (refined point, evaluations used) per start
    type Refined<T> = (Option<(T, OpSpaceMatrix<T>)>, usize);
    let refined: Vec<Refined<T>> = starts
        .par_iter()
        .map(|(_, x)| {
            let mut b = Budget::new(share);
            let mut objective = |p: &[T]| obj.at(p);
            let project = |p: &mut [T]| obj.project(p);
            let out = ascend(x.to_params(), &mut objective, &project, &mut b, &cfg)
                .map(|(p, v)| (v, OpSpaceMatrix::from_params(&space, m, &p)));
            (out, b.used())
        })
        .collect();
    let mut used = spent.used();
    for (cand, u) in refined {
        used += u;
        if let Some(c) = cand {
            pool.push(c);
        }
    }
    pool.sort_by(better);
    let (value, matrix) = pool
        .into_iter()
        .next()
        .unwrap_or_else(|| (T::zero(), OpSpaceMatrix::zeros(space.clone(), m)));
    Ok((Witness { level: m, matrix, value }, used))
}

/// Lower bound on `‖f‖_cb` over levels `1..=max_level`. Levels of the
/// schedule are searched; every level also inherits the lifted witness of
/// the previous one, so the table is nondecreasing.
pub fn cb_lower_bound<T: Real>(f: &HoloFunction<T>, max_level: usize, budget: usize, seed: RngSeed) -> Result<CbEstimate<T>> {
    if max_level == 0 {
        return invalid("max_level must be at least 1");
    }
    let schedule = level_schedule(max_level);
    let per_level = (budget / schedule.len()).max(1);
    let searched: Vec<(usize, Witness<T>, usize)> = schedule
        .iter()
        .map(|&l| level_sup_counted(f, l, per_level, seed.derive(l as u64)).map(|(w, u)| (l, w, u)))
        .collect::<Result<_>>()?;

    let mut table: Vec<LevelEntry<T>> = Vec::with_capacity(max_level);
    for level in 1..=max_level {
        let own = searched.iter().find(|(l, _, _)| *l == level);
        let lifted = table.last().map(|prev| lift_witness(&prev.witness));
        let entry = match (own, lifted) {
            (Some((_, w, used)), Some(lw)) if lw.value > w.value => {
                LevelEntry { level, witness: lw, samples: *used, lifted: true }
            }
            (Some((_, w, used)), _) => LevelEntry { level, witness: w.clone(), samples: *used, lifted: false },
            (None, Some(lw)) => LevelEntry { level, witness: lw, samples: 0, lifted: true },
            (None, None) => unreachable!("level 1 is always searched"),
        };
        table.push(entry);
    }
    let lower = table.last().map(|e| e.witness.value).unwrap_or_else(T::zero);
    Ok(CbEstimate {
        lower,
        upper: None,
        level_table: table,
        seed,
        budget,
        provenance: vec![format!("lower: level search over {schedule:?} with direct-sum lifting")],
    })
}

/// Both bounds; errors if the lower bound exceeds a finite upper bound.
pub fn sandwich<T: Real>(f: &HoloFunction<T>, max_level: usize, budget: usize, seed: RngSeed) -> Result<CbEstimate<T>> {
    let mut est = cb_lower_bound(f, max_level, budget, seed)?;
    let up = cb_upper_bound(f);
    est.upper = up.value;
    est.provenance.push(format!("upper: {}", up.rules.join(", ")));
    if let Some(u) = up.value {
        if est.lower > u + T::lit(SANDWICH_TOL) {
            return Err(Error::Internal(format!("lower bound {} exceeds upper bound {u} for {}", est.lower, f.label())));
        }
    }
    Ok(est)
}
