//! Inequality checks built on the two bounds, and the growth probe.

use rand::Rng;
use serde::Serialize;

use super::{cb_lower_bound, cb_upper_bound, domain_space, level_sup, SANDWICH_TOL};
use crate::error::{invalid, Error, Result};
use crate::holofun::HoloFunction;
use crate::matcore::RngSeed;
use crate::opspace::sample_space_ball;
use crate::scalar::Real;

pub const SCHWARZ_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct SchwarzReport<T> {
    pub upper: T,
    pub trials: usize,
    pub violations: usize,
    /// Smallest `upper·‖X‖ - ‖f_m(X)‖` seen.
    pub min_slack: T,
    /// Largest `‖f_m(X)‖ / ‖X‖` seen.
    pub max_ratio: T,
}

impl<T> SchwarzReport<T> {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Checks `‖f_m(X)‖ ≤ upper·‖X‖` on `trials` random points with levels in
/// `1..=max_level`. Half of the radii are drawn close to 1.
pub fn schwarz_check<T: Real>(
    f: &HoloFunction<T>,
    upper: T,
    max_level: usize,
    trials: usize,
    seed: RngSeed,
) -> Result<SchwarzReport<T>> {
    if !upper.is_finite() {
        return invalid("schwarz check needs a finite upper bound");
    }
    if max_level == 0 {
        return invalid("max_level must be at least 1");
    }
    let space = domain_space(f);
    f.check_domain(&space)?;
    let tol = T::lit(SCHWARZ_TOL);
    let mut report = SchwarzReport { upper, trials, violations: 0, min_slack: T::infinity(), max_ratio: T::zero() };
    for t in 0..trials {
        let mut rng = seed.derive(t as u64).rng();
        let level = rng.random_range(1..=max_level);
        let radius = if t % 2 == 0 {
            rng.random_range(0.01..0.99)
        } else {
            1.0 - 10f64.powf(-rng.random_range(2.0..6.0))
        };
        let x = sample_space_ball(&mut rng, &space, level, T::lit(radius))?;
        let norm = x.matrix_norm();
        let actual = f.amplify(&x)?.operator_norm()?;
        let slack = upper * norm - actual;
        report.min_slack = report.min_slack.min(slack);
        report.max_ratio = report.max_ratio.max(actual / norm);
        if actual > upper * norm + tol {
            report.violations += 1;
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct AlgebraReport<T> {
    pub lower_product: T,
    pub upper_f: Option<T>,
    pub upper_g: Option<T>,
    pub bound: Option<T>,
}

impl<T: Real> AlgebraReport<T> {
    /// Vacuously true when either factor has no certified bound.
    pub fn passed(&self) -> bool {
        self.bound.is_none_or(|b| self.lower_product <= b + T::lit(SANDWICH_TOL))
    }
}

/// Compares the optimized lower bound of `‖fg‖_cb` with the product of the
/// certified upper bounds of the factors.
pub fn algebra_check<T: Real>(
    f: &HoloFunction<T>,
    g: &HoloFunction<T>,
    max_level: usize,
    budget: usize,
    seed: RngSeed,
) -> Result<AlgebraReport<T>> {
    let fg = HoloFunction::product(f.clone(), g.clone())?;
    let lower = cb_lower_bound(&fg, max_level, budget, seed)?.lower;
    let upper_f = cb_upper_bound(f).value;
    let upper_g = cb_upper_bound(g).value;
    let bound = upper_f.zip(upper_g).map(|(a, b)| a * b);
    Ok(AlgebraReport { lower_product: lower, upper_f, upper_g, bound })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Bounded,
    Growing,
    Inconclusive,
}

/// Level-by-level growth table; heuristic evidence, never a proof.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport<T> {
    pub label: &'static str,
    pub levels: Vec<usize>,
    pub values: Vec<T>,
    /// Least-squares slope of value against `ln m`.
    pub slope: T,
    /// Fitted increase across the schedule relative to the mean value.
    pub relative_growth: T,
    pub verdict: Verdict,
    pub upper: Option<T>,
}

pub const PROBE_LABEL: &str = "HEURISTIC EVIDENCE";
const BOUNDED_BELOW: f64 = 0.01;
const GROWING_ABOVE: f64 = 0.05;

/// Tabulates level suprema along `schedule` and fits their trend in `ln m`.
pub fn question_probe<T: Real>(
    f: &HoloFunction<T>,
    schedule: &[usize],
    budget: usize,
    seed: RngSeed,
) -> Result<ProbeReport<T>> {
    if !f.is_scalar_domain() {
        return Err(Error::Unsupported("the growth probe is defined for functions on the disk".into()));
    }
    let mut levels: Vec<usize> = schedule.to_vec();
    levels.sort_unstable();
    levels.dedup();
    if levels.first().is_none_or(|&l| l == 0) {
        return invalid("schedule must be a nonempty list of positive levels");
    }
    let per_level = (budget / levels.len()).max(1);
    let mut values: Vec<T> = Vec::with_capacity(levels.len());
    for &l in &levels {
        let v = level_sup(f, l, per_level, seed.derive(l as u64))?.value;
        // lifting carries every lower level's value upward
        let prev = values.last().copied().unwrap_or_else(T::zero);
        values.push(v.max(prev));
    }
    let (slope, relative_growth, verdict) = fit_trend(&levels, &values);
    Ok(ProbeReport {
        label: PROBE_LABEL,
        levels,
        values,
        slope,
        relative_growth,
        verdict,
        upper: cb_upper_bound(f).value,
    })
}

fn fit_trend<T: Real>(levels: &[usize], values: &[T]) -> (T, T, Verdict) {
    let n = T::lit(levels.len() as f64);
    let xs: Vec<T> = levels.iter().map(|&l| T::lit((l as f64).ln())).collect();
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = values.iter().copied().sum::<T>() / n;
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    if levels.len() < 2 || !(sxx > T::zero()) {
        return (T::zero(), T::zero(), Verdict::Inconclusive);
    }
    let sxy: T = xs.iter().zip(values).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let span = xs[xs.len() - 1] - xs[0];
    let growth = if my > T::zero() { slope * span / my } else { T::zero() };
    let verdict = if growth <= T::lit(BOUNDED_BELOW) {
        Verdict::Bounded
    } else if growth >= T::lit(GROWING_ABOVE) {
        Verdict::Growing
    } else {
        Verdict::Inconclusive
    };
    (slope, growth, verdict)
}
