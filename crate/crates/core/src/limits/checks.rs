//! Empirical convergence checks over a lattice of (pseudonorm index,
//! precision) pairs. Each check probes a handful of positions at or beyond
//! the modulus value and compares the gap with 2^-precision.

use super::{LimitError, Modulus, PseudonormModulus};
use crate::frechet::{metric, pseudonorm, GridFunction, MetricConfig, PseudonormFamily};

/// Pseudonorm indices `first..=n_max` and precisions `0..=precision_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub n_max: u32,
    pub precision_max: u32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckOutcome {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

fn index_probes(i: u64) -> [u64; 5] {
    [i, i + 1, i + 2, 2 * i + 1, 4 * i + 3]
}

fn time_probes(t: f64) -> [f64; 5] {
    [t, t + 0.5, t + 1.0, 2.0 * t + 1.0, 4.0 * t + 3.0]
}

/// ‖g_i − g_j‖ₙ < 2^-ν for i = Ñ(n, ν) and probes j ≥ i.
pub fn check_fc_sequence(
    seq: &dyn Fn(u64) -> GridFunction,
    pm: &PseudonormModulus,
    family: &PseudonormFamily,
    lattice: Lattice,
) -> Result<CheckOutcome, LimitError> {
    let mut out = CheckOutcome::default();
    for n in pm.first_index().max(family.first_index())..=lattice.n_max {
        for nu in 0..=lattice.precision_max {
            let i = pm.eval(n, nu as f64)? as u64;
            let gi = seq(i);
            for j in index_probes(i) {
                let gap = pseudonorm(&gi.sub(&seq(j))?, n, family)?;
                out.record(gap < (-(nu as f64)).exp2(), || format!("n={n} nu={nu} i={i} j={j}: gap {gap:e}"));
            }
        }
    }
    Ok(out)
}

/// d(g_i, g_j) < 2^-ν for i = N(ν) and probes j ≥ i.
pub fn check_metric_sequence(
    seq: &dyn Fn(u64) -> GridFunction,
    m: &Modulus,
    family: &PseudonormFamily,
    cfg: &MetricConfig,
    precision_max: u32,
) -> Result<CheckOutcome, LimitError> {
    let mut out = CheckOutcome::default();
    for nu in 0..=precision_max {
        let i = m.index(nu as u64)?;
        let gi = seq(i);
        for j in index_probes(i) {
            let gap = metric(&gi, &seq(j), family, cfg)?;
            out.record(gap < (-(nu as f64)).exp2(), || format!("nu={nu} i={i} j={j}: gap {gap:e}"));
        }
    }
    Ok(out)
}

/// ‖u(s) − u(t)‖ₙ < 2^-τ for s = T̃(n, τ) and probes t ≥ s, at integer τ.
pub fn check_fc_stream(
    u: &dyn Fn(f64) -> GridFunction,
    pm: &PseudonormModulus,
    family: &PseudonormFamily,
    lattice: Lattice,
) -> Result<CheckOutcome, LimitError> {
    let mut out = CheckOutcome::default();
    for n in pm.first_index().max(family.first_index())..=lattice.n_max {
        for tau in 0..=lattice.precision_max {
            let s = pm.eval(n, tau as f64)?;
            let us = u(s);
            for t in time_probes(s) {
                let gap = pseudonorm(&us.sub(&u(t))?, n, family)?;
                out.record(gap < (-(tau as f64)).exp2(), || format!("n={n} tau={tau} s={s} t={t}: gap {gap:e}"));
            }
        }
    }
    Ok(out)
}

/// d(u(s), u(t)) < 2^-τ for s = T(τ) and probes t ≥ s, at integer τ.
pub fn check_metric_stream(
    u: &dyn Fn(f64) -> GridFunction,
    m: &Modulus,
    family: &PseudonormFamily,
    cfg: &MetricConfig,
    precision_max: u32,
) -> Result<CheckOutcome, LimitError> {
    let mut out = CheckOutcome::default();
    for tau in 0..=precision_max {
        let s = m.eval(tau as f64)?;
        let us = u(s);
        for t in time_probes(s) {
            let gap = metric(&us, &u(t), family, cfg)?;
            out.record(gap < (-(tau as f64)).exp2(), || format!("tau={tau} s={s} t={t}: gap {gap:e}"));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::frechet::SpatialGrid;
    use crate::limits::{metric_to_pseudonorm_modulus, Flavor};

    #[test]
    fn slow_sequence_fails_a_fast_modulus() {
        let grid = Arc::new(SpatialGrid::uniform(1.0, Some(3.0), 3.0, 0.5).unwrap());
        let fam = PseudonormFamily::unit_intervals(grid.clone(), 1).unwrap();
        let g = grid.clone();
        let seq = move |k: u64| GridFunction::from_fn(g.clone(), |x| x / (k as f64 + 1.0)).unwrap();
        let pm = metric_to_pseudonorm_modulus(&Modulus::identity(Flavor::Discrete));
        let out = check_fc_sequence(&seq, &pm, &fam, Lattice { n_max: 3, precision_max: 6 }).unwrap();
        assert!(!out.passed());
        assert_eq!(out.checked, 3 * 7 * 5);
    }
}
