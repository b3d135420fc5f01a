use serde::Serialize;

use super::{get, ConstructionError};
use crate::frechet::METRIC_TERMS;

/// Tail bound of one part of a construction for one pseudonorm index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailBound {
    pub part: &'static str,
    pub index: u32,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBudget {
    pub construction: String,
    pub tau: f64,
    /// T(τ): every probe time lies at or beyond it.
    pub horizon: f64,
    /// Bounds for the pseudonorm indices of the recommended grid.
    pub tails: Vec<TailBound>,
    /// Σₙ 2⁻ⁿ min(Σ parts, 1) over `METRIC_TERMS` indices.
    pub analytic_metric_bound: f64,
    /// 2^-τ.
    pub metric_bound: f64,
}

/// |γ₁(t₁) − γ₁(t₂)| ≤ 1/T for t₁, t₂ ≥ T.
pub fn gamma1_tail(horizon: f64) -> f64 {
    1.0 / horizon
}

/// |γ₂(t₁) − γ₂(t₂)| ≤ (k+1)!·(T+1)^k·e^{−(T+1)} on x ∈ [1, k+1].
pub fn gamma2_tail(k: u32, horizon: f64) -> f64 {
    let ln_fact: f64 = (2..=k + 1).map(|i| (i as f64).ln()).sum();
    (ln_fact + k as f64 * (horizon + 1.0).ln() - (horizon + 1.0)).exp()
}

/// ‖ζ₁(t₁) − ζ₁(t₂)‖ₖ ≤ 2^k/π·e^{−πT}, from 1/(e^{πt} + 1) < e^{−πt}.
pub fn zeta_tail(k: u32, horizon: f64) -> f64 {
    (k as f64 * std::f64::consts::LN_2 - std::f64::consts::PI.ln() - std::f64::consts::PI * horizon).exp()
}

/// Analytic tail bounds for `gamma` or `zeta` at precision τ.
pub fn certified_error_budget(construction: &str, tau: f64) -> Result<ErrorBudget, ConstructionError> {
    if construction != "gamma" && construction != "zeta" {
        return Err(ConstructionError::Unknown(construction.to_string()));
    }
    let c = get(construction)?;
    let modulus = c.modulus()?.expect("limit constructions carry a modulus");
    let horizon = modulus.eval(tau)?;
    let family = c.family()?.expect("limit constructions carry a grid");
    let first = family.first_index();
    let per_index = |n: u32| -> Vec<TailBound> {
        if construction == "gamma" {
            vec![
                TailBound { part: "gamma1", index: n, bound: gamma1_tail(horizon) },
                TailBound { part: "gamma2", index: n, bound: gamma2_tail(n - 1, horizon) },
            ]
        } else {
            vec![TailBound { part: "zeta1", index: n, bound: zeta_tail(n, horizon) }]
        }
    };
    let tails: Vec<TailBound> = (first..=family.last_index()).flat_map(per_index).collect();
    let analytic_metric_bound = (first..first + METRIC_TERMS)
        .map(|n| {
            let total: f64 = per_index(n).iter().map(|t| t.bound).sum();
            (-(n as f64)).exp2() * total.min(1.0)
        })
        .sum();
    Ok(ErrorBudget {
        construction: construction.to_string(),
        tau,
        horizon,
        tails,
        analytic_metric_bound,
        metric_bound: (-tau).exp2(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bounds() {
        assert_eq!(gamma1_tail(100.0), 0.01);
        assert!((gamma2_tail(0, 0.0) - (-1f64).exp()).abs() < 1e-15);
        let pi = std::f64::consts::PI;
        let expected = 4.0 / pi * (-10.0 * pi).exp();
        assert!((zeta_tail(2, 10.0) - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn budgets_stay_below_the_metric_bound() {
        for tau in 0..=12 {
            for name in ["gamma", "zeta"] {
                let b = certified_error_budget(name, tau as f64).unwrap();
                assert!(b.analytic_metric_bound < b.metric_bound, "{name} tau={tau}: {b:?}");
            }
        }
        let b = certified_error_budget("gamma", 8.0).unwrap();
        assert_eq!(b.horizon, 768.0);
        assert_eq!(b.tails.len(), 12);
        assert!(matches!(certified_error_budget("inverter", 1.0), Err(ConstructionError::Unknown(_))));
    }
}
