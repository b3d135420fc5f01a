//! The function space C(Ω, ℝ) sampled on a spatial grid, its family of
//! sup-on-interval pseudonorms and the metric induced by them.
//!
//! Pseudonorms are maxima over grid samples, not true suprema: the gap is a
//! property of the grid resolution. Unbounded domains are represented by a
//! finite grid; a [`PseudonormFamily`] only answers indices whose cutoff is
//! covered by the grid, and the metric reuses the widest available
//! pseudonorm for the indices past it.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of series terms kept when evaluating the metric. With geometric
/// weights the dropped tail is below 2⁻⁶⁰.
pub const METRIC_TERMS: u32 = 60;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrechetError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("expected {expected} values for the grid, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("value at grid point {index} is not finite")]
    NonFinite { index: usize },
    #[error("grid functions live on different grids")]
    GridMismatch,
    #[error("pseudonorm index {n} outside {first}..={last}")]
    IndexOutOfRange { n: u32, first: u32, last: u32 },
    #[error("invalid pseudonorm family: {0}")]
    InvalidFamily(String),
    #[error("epsilon must lie in (0, 1), got {0}")]
    EpsilonOutOfRange(f64),
    #[error("invalid metric weights: {0}")]
    InvalidWeights(String),
    #[error("malformed grid function data: {0}")]
    Format(String),
}

/// Sample locations of a closed interval Ω = [lower, upper], where `upper`
/// may be +∞ (`None`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    lower: f64,
    upper: Option<f64>,
    points: Vec<f64>,
}

impl SpatialGrid {
    pub fn new(lower: f64, upper: Option<f64>, points: Vec<f64>) -> Result<Self, FrechetError> {
        if !lower.is_finite() {
            return Err(FrechetError::InvalidGrid("lower endpoint must be finite".into()));
        }
        if let Some(u) = upper {
            if !u.is_finite() || u < lower {
                return Err(FrechetError::InvalidGrid(format!(
                    "upper endpoint {u} must be finite and at least {lower}"
                )));
            }
        }
        let Some(&first) = points.first() else {
            return Err(FrechetError::InvalidGrid("no grid points".into()));
        };
        if !first.is_finite() || first < lower {
            return Err(FrechetError::InvalidGrid(format!(
                "first point {first} lies below the lower endpoint {lower}"
            )));
        }
        for w in points.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(FrechetError::InvalidGrid(format!(
                    "points must be finite and strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        if let (Some(u), Some(&last)) = (upper, points.last()) {
            if last > u {
                return Err(FrechetError::InvalidGrid(format!(
                    "last point {last} exceeds the upper endpoint {u}"
                )));
            }
        }
        Ok(SpatialGrid { lower, upper, points })
    }

    /// Evenly spaced points `lower, lower + step, …` up to `last` inclusive.
    pub fn uniform(lower: f64, upper: Option<f64>, last: f64, step: f64) -> Result<Self, FrechetError> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(FrechetError::InvalidGrid(format!("step must be positive, got {step}")));
        }
        if !(last >= lower) {
            return Err(FrechetError::InvalidGrid(format!(
                "last point {last} lies below the lower endpoint {lower}"
            )));
        }
        let count = ((last - lower) / step + 1e-9).floor() as usize + 1;
        if count > 1_000_000 {
            return Err(FrechetError::InvalidGrid(format!("{count} points is too many")));
        }
        let points = (0..count).map(|i| lower + i as f64 * step).collect();
        SpatialGrid::new(lower, upper, points)
    }

    /// A single point, used when a value must be viewed as a one-sample function.
    pub fn single(x: f64) -> Self {
        SpatialGrid { lower: x, upper: Some(x), points: vec![x] }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> Option<f64> {
        self.upper
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of leading points with location ≤ `cutoff`.
    fn count_up_to(&self, cutoff: f64) -> usize {
        self.points.partition_point(|&p| p <= cutoff)
    }
}

/// A member of C(Ω, ℝ) represented by its grid samples.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    grid: Arc<SpatialGrid>,
    values: Vec<f64>,
}

impl fmt::Debug for GridFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridFunction")
            .field("points", &self.grid.points)
            .field("values", &self.values)
            .finish()
    }
}

impl GridFunction {
    pub fn new(grid: Arc<SpatialGrid>, values: Vec<f64>) -> Result<Self, FrechetError> {
        if values.len() != grid.len() {
            return Err(FrechetError::LengthMismatch { expected: grid.len(), found: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(FrechetError::NonFinite { index });
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: Arc<SpatialGrid>, f: impl Fn(f64) -> f64) -> Result<Self, FrechetError> {
        let values = grid.points.iter().map(|&x| f(x)).collect();
        GridFunction::new(grid, values)
    }

    pub fn constant(grid: Arc<SpatialGrid>, c: f64) -> Result<Self, FrechetError> {
        GridFunction::from_fn(grid, |_| c)
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid
    }

    /// Value at grid point `x`, if `x` is one of the sample locations.
    pub fn at(&self, x: f64) -> Option<f64> {
        let i = self.grid.points.iter().position(|&p| p == x)?;
        Some(self.values[i])
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction, FrechetError> {
        if !self.same_grid(other) {
            return Err(FrechetError::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(GridFunction { grid: self.grid.clone(), values })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,value\n");
        for (x, v) in self.grid.points.iter().zip(&self.values) {
            out.push_str(&format!("{x},{v}\n"));
        }
        out
    }

    /// Reads the two-column `x,value` form. The grid is rebuilt from the x
    /// column with Ω = [first x, last x].
    pub fn from_csv(text: &str) -> Result<GridFunction, FrechetError> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| FrechetError::Format(e.to_string()))?;
        if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "value" {
            return Err(FrechetError::Format("expected header `x,value`".into()));
        }
        let mut xs = Vec::new();
        let mut values = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| FrechetError::Format(e.to_string()))?;
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| FrechetError::Format(format!("{s:?}: {e}")));
            xs.push(parse(&record[0])?);
            values.push(parse(&record[1])?);
        }
        let (Some(&lo), Some(&hi)) = (xs.first(), xs.last()) else {
            return Err(FrechetError::Format("no rows".into()));
        };
        let grid = SpatialGrid::new(lo, Some(hi), xs)?;
        GridFunction::new(Arc::new(grid), values)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("grid functions serialize")
    }

    pub fn from_json(text: &str) -> Result<GridFunction, FrechetError> {
        let raw: GridFunction = serde_json::from_str(text).map_err(|e| FrechetError::Format(e.to_string()))?;
        let grid = SpatialGrid::new(raw.grid.lower, raw.grid.upper, raw.grid.points.clone())?;
        GridFunction::new(Arc::new(grid), raw.values)
    }
}

/// The nested family ‖g‖ₙ = max{|g(x)| : x ∈ grid, x ≤ cutoffₙ}, indexed
/// from `first_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudonormFamily {
    grid: Arc<SpatialGrid>,
    first_index: u32,
    cutoffs: Vec<f64>,
    /// Prefix lengths of the grid covered by each cutoff.
    prefix: Vec<usize>,
}

impl PseudonormFamily {
    pub fn new(grid: Arc<SpatialGrid>, first_index: u32, cutoffs: Vec<f64>) -> Result<Self, FrechetError> {
        if cutoffs.is_empty() {
            return Err(FrechetError::InvalidFamily("no cutoffs".into()));
        }
        for w in cutoffs.windows(2) {
            if w[1] < w[0] {
                return Err(FrechetError::InvalidFamily("cutoffs must be nondecreasing".into()));
            }
        }
        if cutoffs[0] < grid.lower || cutoffs.iter().any(|c| c.is_nan()) {
            return Err(FrechetError::InvalidFamily(format!(
                "cutoff {} lies below the lower endpoint {}",
                cutoffs[0], grid.lower
            )));
        }
        let prefix = cutoffs.iter().map(|&c| grid.count_up_to(c)).collect();
        Ok(PseudonormFamily { grid, first_index, cutoffs, prefix })
    }

    /// ‖g‖ₙ = sup over [lower, n] for n = `first_index`, …, K where K is the
    /// largest integer covered by the grid (at least `first_index`).
    pub fn unit_intervals(grid: Arc<SpatialGrid>, first_index: u32) -> Result<Self, FrechetError> {
        let last_point = *grid.points.last().expect("grids are non-empty");
        let last = (last_point.floor().max(0.0) as u32).max(first_index);
        let cutoffs = (first_index..=last).map(f64::from).collect();
        PseudonormFamily::new(grid, first_index, cutoffs)
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    pub fn first_index(&self) -> u32 {
        self.first_index
    }

    pub fn last_index(&self) -> u32 {
        self.first_index + self.cutoffs.len() as u32 - 1
    }

    pub fn cutoffs(&self) -> &[f64] {
        &self.cutoffs
    }

    fn slot(&self, n: u32) -> Result<usize, FrechetError> {
        if n < self.first_index || n > self.last_index() {
            return Err(FrechetError::IndexOutOfRange { n, first: self.first_index, last: self.last_index() });
        }
        Ok((n - self.first_index) as usize)
    }

    fn check_grid(&self, f: &GridFunction) -> Result<(), FrechetError> {
        if Arc::ptr_eq(&self.grid, &f.grid) || *self.grid == *f.grid {
            Ok(())
        } else {
            Err(FrechetError::GridMismatch)
        }
    }

    /// All pseudonorms of `f` for the indices of this family, in order.
    pub fn all(&self, f: &GridFunction) -> Result<Vec<f64>, FrechetError> {
        self.check_grid(f)?;
        Ok(self.sweep(&f.values))
    }

    fn sweep(&self, values: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.prefix.len());
        let mut running = 0.0f64;
        let mut covered = 0;
        for &p in &self.prefix {
            while covered < p {
                running = running.max(values[covered].abs());
                covered += 1;
            }
            out.push(running);
        }
        out
    }
}

/// Positive summable weights wₙ.
#[derive(Clone)]
pub enum Weights {
    /// wₙ = 2⁻ⁿ.
    Geometric,
    /// A user rule together with its declared (finite) total Σ wₙ.
    Custom { rule: Arc<dyn Fn(u32) -> f64 + Send + Sync>, declared_sum: f64 },
}

impl fmt::Debug for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weights::Geometric => f.write_str("Geometric"),
            Weights::Custom { declared_sum, .. } => write!(f, "Custom(sum = {declared_sum})"),
        }
    }
}

impl Weights {
    pub fn weight(&self, n: u32) -> f64 {
        match self {
            Weights::Geometric => 2f64.powi(-(n as i32)),
            Weights::Custom { rule, .. } => rule(n),
        }
    }
}

/// Weights and clamp of the metric d(f, g) = Σ wₙ·γ(‖f − g‖ₙ), with
/// γ(t) = min(t, 1).
#[derive(Debug, Clone)]
pub struct MetricConfig {
    weights: Weights,
    terms: u32,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig { weights: Weights::Geometric, terms: METRIC_TERMS }
    }
}

impl MetricConfig {
    pub fn with_weights(rule: Arc<dyn Fn(u32) -> f64 + Send + Sync>, declared_sum: f64) -> Result<Self, FrechetError> {
        if !(declared_sum > 0.0) || !declared_sum.is_finite() {
            return Err(FrechetError::InvalidWeights(format!("declared sum {declared_sum} must be finite and positive")));
        }
        Ok(MetricConfig { weights: Weights::Custom { rule, declared_sum }, terms: METRIC_TERMS })
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn terms(&self) -> u32 {
        self.terms
    }

    pub fn clamp(t: f64) -> f64 {
        t.min(1.0)
    }

    /// Σ wₙ over the indices the metric sums for `family`; an upper bound on
    /// every distance.
    pub fn weight_total(&self, family: &PseudonormFamily) -> f64 {
        let first = family.first_index();
        (first..first + self.terms).map(|n| self.weights.weight(n)).sum()
    }
}

/// ‖f‖ₙ: the largest |f| over grid points at or below the n-th cutoff.
pub fn pseudonorm(f: &GridFunction, n: u32, family: &PseudonormFamily) -> Result<f64, FrechetError> {
    family.check_grid(f)?;
    let slot = family.slot(n)?;
    let covered = family.prefix[slot];
    Ok(f.values[..covered].iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// d(f, g) = Σₙ wₙ·min(‖f − g‖ₙ, 1), summed over `METRIC_TERMS` indices
/// starting at the family's first index.
pub fn metric(f: &GridFunction, g: &GridFunction, family: &PseudonormFamily, cfg: &MetricConfig) -> Result<f64, FrechetError> {
    family.check_grid(f)?;
    family.check_grid(g)?;
    let diff: Vec<f64> = f.values.iter().zip(&g.values).map(|(a, b)| a - b).collect();
    Ok(metric_from_norms(&family.sweep(&diff), family.first_index(), cfg))
}

/// The metric evaluated from precomputed pseudonorms `norms[i] = ‖·‖_{first+i}`;
/// indices past the end reuse the last entry.
pub fn metric_from_norms(norms: &[f64], first_index: u32, cfg: &MetricConfig) -> f64 {
    let last = *norms.last().unwrap_or(&0.0);
    (0..cfg.terms)
        .map(|i| {
            let norm = norms.get(i as usize).copied().unwrap_or(last);
            cfg.weights.weight(first_index + i) * MetricConfig::clamp(norm)
        })
        .sum()
}

/// δ = ε·2⁻ᴹ: a metric distance below δ forces ‖x − y‖ₙ < ε for n ≤ M
/// (geometric weights, clamp min(t, 1)).
pub fn metric_to_pseudonorm_bound(epsilon: f64, m: u32) -> Result<f64, FrechetError> {
    check_epsilon(epsilon)?;
    Ok(epsilon * 2f64.powi(-(m as i32)))
}

/// δ = ε/2 and the smallest M with 2⁻ᴹ ≤ ε/2: pseudonorms below δ for
/// n = 1, …, M force a metric distance below ε. Assumes indexing from n ≥ 1.
pub fn pseudonorm_to_metric_bound(epsilon: f64) -> Result<(f64, u32), FrechetError> {
    check_epsilon(epsilon)?;
    let delta = epsilon / 2.0;
    let mut m = 0u32;
    while 2f64.powi(-(m as i32)) > delta {
        m += 1;
    }
    Ok((delta, m))
}

fn check_epsilon(epsilon: f64) -> Result<(), FrechetError> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(FrechetError::EpsilonOutOfRange(epsilon))
    }
}
