//! Projected finite-difference ascent shared by the lower-bound searches.

use crate::scalar::Real;

/// Objective-evaluation budget shared across the phases of a search.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Budget {
    limit: usize,
    used: usize,
}

impl Budget {
    pub fn new(limit: usize) -> Self {
        Self { limit, used: 0 }
    }

    pub fn try_spend(&mut self) -> bool {
        if self.used < self.limit {
            self.used += 1;
            true
        } else {
            false
        }
    }

    pub fn remaining(&self) -> usize {
        self.limit - self.used
    }

    pub fn used(&self) -> usize {
        self.used
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct AscentConfig<T> {
    pub fd_step: T,
    pub max_steps: usize,
    pub initial_step: T,
    pub max_step: T,
    pub min_step: T,
}

impl<T: Real> Default for AscentConfig<T> {
    fn default() -> Self {
        Self {
            fd_step: T::lit(1e-5),
            max_steps: 200,
            initial_step: T::lit(0.05),
            max_step: T::lit(0.5),
            min_step: T::lit(1e-9),
        }
    }
}

/// Maximizes `objective ∘ project` from `start` by forward-difference
/// gradient steps with backtracking. `objective` returns `None` at points it
/// rejects. Returns the best point found and its value (`None` if no
/// feasible evaluation fit in the budget).
pub(crate) fn ascend<T: Real>(
    start: Vec<T>,
    objective: &mut impl FnMut(&[T]) -> Option<T>,
    project: &impl Fn(&mut [T]),
    budget: &mut Budget,
    cfg: &AscentConfig<T>,
) -> Option<(Vec<T>, T)> {
    let mut p = start;
    project(&mut p);
    if !budget.try_spend() {
        return None;
    }
    let mut f = objective(&p)?;
    let mut step = cfg.initial_step;
    let n = p.len();
    let mut grad = vec![T::zero(); n];
    let mut q = vec![T::zero(); n];

    'outer: for _ in 0..cfg.max_steps {
        for i in 0..n {
            if !budget.try_spend() {
                break 'outer;
            }
            q.copy_from_slice(&p);
            q[i] += cfg.fd_step;
            project(&mut q);
            grad[i] = match objective(&q) {
                Some(fq) => (fq - f) / cfg.fd_step,
                None => T::zero(),
            };
        }
        let gnorm = grad.iter().map(|g| *g * *g).sum::<T>().sqrt();
        if !(gnorm > T::zero()) || !gnorm.is_finite() {
            break;
        }
        step = (step * T::lit(2.0)).min(cfg.max_step);
        loop {
            if !budget.try_spend() {
                break 'outer;
            }
            for i in 0..n {
                q[i] = p[i] + step * grad[i] / gnorm;
            }
            project(&mut q);
            if let Some(fq) = objective(&q) {
                if fq > f {
                    p.copy_from_slice(&q);
                    f = fq;
                    break;
                }
            }
            step /= T::lit(2.0);
            if step < cfg.min_step {
                break 'outer;
            }
        }
    }
    Some((p, f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascent_finds_constrained_maximum() {
        // maximize x + y on the unit disk: optimum sqrt(2) at (1,1)/sqrt(2)
        let mut obj = |p: &[f64]| Some(p[0] + p[1]);
        let proj = |p: &mut [f64]| {
            let n = (p[0] * p[0] + p[1] * p[1]).sqrt();
            if n > 1.0 {
                p[0] /= n;
                p[1] /= n;
            }
        };
        let mut budget = Budget::new(10_000);
        let (_, f) = ascend(vec![0.1, -0.3], &mut obj, &proj, &mut budget, &AscentConfig::default()).unwrap();
        assert!((f - 2f64.sqrt()).abs() < 1e-4, "{f}");
        assert!(budget.used() <= 10_000);
    }

    #[test]
    fn budget_is_respected() {
        let mut calls = 0usize;
        let mut obj = |p: &[f64]| {
            calls += 1;
            Some(-(p[0] - 3.0).powi(2))
        };
        let mut budget = Budget::new(7);
        ascend(vec![0.0], &mut obj, &|_: &mut [f64]| {}, &mut budget, &AscentConfig::default());
        assert_eq!(calls, 7);
        assert_eq!(budget.remaining(), 0);
    }
}
