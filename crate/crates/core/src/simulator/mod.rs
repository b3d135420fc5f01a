//! Numerical integration of bound networks.
//!
//! The real subsystem runs as one ODE instance and the function-space
//! subsystem as one instance per grid point. Instances are independent, so
//! with the `parallel` feature they run on the rayon pool; results do not
//! depend on the execution mode.

mod eval;
mod rk;
mod trace;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::network::{BoundNetwork, ChannelKind, Domain, NodeId};
use eval::Instance;

pub use trace::{evaluate_channel, pchip, Samples, StreamTrace, TraceError, TraceSet, Value};

/// Environment variable overriding both default tolerances.
pub const TOLERANCE_ENV: &str = "LGPAC_SOLVER_TOL";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Classical fixed-step Runge–Kutta; steps are shortened to hit samples.
    Rk4 { step: f64 },
    /// Adaptive Dormand–Prince 5(4).
    DormandPrince,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub h_init: Option<f64>,
    /// Defaults to `t_end / 100`.
    pub h_max: Option<f64>,
    pub max_steps: usize,
    pub execution: Execution,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::DormandPrince,
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            h_init: None,
            h_max: None,
            max_steps: 50_000_000,
            execution: Execution::Parallel,
        }
    }
}

impl SolverConfig {
    /// Defaults with tolerances taken from [`TOLERANCE_ENV`] when it holds a
    /// positive number.
    pub fn from_env() -> Result<SolverConfig, SimError> {
        let mut cfg = SolverConfig::default();
        if let Ok(raw) = std::env::var(TOLERANCE_ENV) {
            let tol: f64 = raw.trim().parse().map_err(|_| SimError::InvalidConfig(format!("{TOLERANCE_ENV}={raw} is not a number")))?;
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(SimError::InvalidConfig(format!("{TOLERANCE_ENV} must be positive")));
            }
            cfg.abs_tol = tol;
            cfg.rel_tol = tol;
        }
        Ok(cfg)
    }

    pub fn rk4(step: f64) -> SolverConfig {
        SolverConfig { method: Method::Rk4 { step }, ..SolverConfig::default() }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub(crate) fn h_max_for(&self, t_end: f64) -> f64 {
        self.h_max.unwrap_or(if t_end > 0.0 { t_end / 100.0 } else { 1.0 })
    }

    fn check(&self, t_end: f64) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidConfig(m.to_string()));
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if let Method::Rk4 { step } = self.method {
            if !(step > 0.0 && step.is_finite()) {
                return bad("the RK4 step must be positive");
            }
        }
        let h_max = self.h_max_for(t_end);
        if !(h_max > 0.0 && h_max.is_finite()) {
            return bad("h_max must be positive");
        }
        if let Some(h) = self.h_init {
            if !(h > 0.0 && h <= h_max) {
                return bad("h_init must lie in (0, h_max]");
            }
        }
        Ok(())
    }
}

/// Output sample times in [0, t_end].
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    t_end: f64,
    samples: Vec<f64>,
}

impl TimeGrid {
    pub fn new(t_end: f64, samples: Vec<f64>) -> Result<TimeGrid, SimError> {
        let bad = |m: &str| Err(SimError::InvalidTimeGrid(m.to_string()));
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return bad("t_end must be a finite nonnegative number");
        }
        if samples.is_empty() {
            return bad("at least one sample time is required");
        }
        if samples[0] < 0.0 || samples.iter().any(|t| !t.is_finite()) || samples[samples.len() - 1] > t_end {
            return bad("sample times must lie in [0, t_end]");
        }
        if samples.windows(2).any(|w| w[0] >= w[1]) {
            return bad("sample times must be strictly increasing");
        }
        Ok(TimeGrid { t_end, samples })
    }

    /// `n ≥ 2` evenly spaced samples `i·t_end/(n−1)`.
    pub fn uniform(t_end: f64, n: usize) -> Result<TimeGrid, SimError> {
        if t_end == 0.0 {
            return TimeGrid::new(0.0, vec![0.0]);
        }
        if n < 2 {
            return Err(SimError::InvalidTimeGrid("at least two samples are required".into()));
        }
        let last = (n - 1) as f64;
        TimeGrid::new(t_end, (0..n).map(|i| if i == n - 1 { t_end } else { i as f64 * t_end / last }).collect())
    }

    /// Sorted, deduplicated union of the given times and 0.
    pub fn at(times: &[f64]) -> Result<TimeGrid, SimError> {
        let mut s: Vec<f64> = times.iter().copied().chain([0.0]).collect();
        s.sort_by(f64::total_cmp);
        s.dedup();
        let t_end = s.last().copied().unwrap_or(0.0);
        TimeGrid::new(t_end, s)
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("step size underflow at t = {t} (last valid time)")]
    StepSizeUnderflow { t: f64 },
    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("step limit exceeded at t = {t}")]
    StepLimit { t: f64 },
    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

impl SimError {
    /// Time up to which the solution was valid, when known.
    pub fn frontier(&self) -> Option<f64> {
        match self {
            SimError::StepSizeUnderflow { t } | SimError::NonFiniteState { t } | SimError::StepLimit { t } => Some(*t),
            _ => None,
        }
    }
}

/// Node values recorded per instance: `[sample][slot]`.
type Recorded = Vec<Vec<f64>>;

pub fn simulate(sys: &BoundNetwork, tg: &TimeGrid, cfg: &SolverConfig) -> Result<TraceSet, SimError> {
    cfg.check(tg.t_end())?;
    let compiled = sys.system();
    let has_real = compiled.channels().iter().any(|c| !c.kind.is_spatial());
    let points = compiled.grid().map_or(0, |g| g.len());

    // arena slots whose values go into the traces
    let mut slots: Vec<NodeId> = Vec::new();
    for c in compiled.channels() {
        slots.push(c.value);
        slots.extend(c.derivative);
    }
    slots.sort_unstable();
    slots.dedup();

    let mut jobs: Vec<(Domain, usize)> = Vec::new();
    if has_real {
        jobs.push((Domain::Real, 0));
    }
    jobs.extend((0..points).map(|j| (Domain::Spatial, j)));

    let run = |&(domain, point): &(Domain, usize)| run_instance(sys, domain, point, tg, cfg, &slots);
    let results: Vec<Result<Recorded, SimError>> = match cfg.execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            jobs.par_iter().map(run).collect()
        }
        _ => jobs.iter().map(run).collect(),
    };
    // report the earliest failure
    let mut recorded = Vec::with_capacity(results.len());
    let mut first_err: Option<SimError> = None;
    for r in results {
        match r {
            Ok(v) => recorded.push(v),
            Err(e) => {
                let earlier = match (&first_err, e.frontier()) {
                    (None, _) => true,
                    (Some(prev), Some(t)) => prev.frontier().is_some_and(|p| t < p),
                    _ => false,
                };
                if earlier {
                    first_err = Some(e);
                }
            }
        }
    }
    if let Some(e) = first_err {
        return Err(e);
    }

    let slot_of = |id: NodeId| slots.binary_search(&id).expect("recorded slot");
    let (real, spatial): (Option<&Recorded>, &[Recorded]) =
        if has_real { (Some(&recorded[0]), &recorded[1..]) } else { (None, &recorded[..]) };
    let n_samples = tg.samples().len();
    let gather = |id: NodeId, kind: ChannelKind| -> Samples {
        let s = slot_of(id);
        if kind.is_spatial() {
            Samples::Grid((0..n_samples).map(|i| spatial.iter().map(|inst| inst[i][s]).collect()).collect())
        } else {
            Samples::Real(real.expect("real instance").iter().map(|row| row[s]).collect())
        }
    };
    let mut channels = BTreeMap::new();
    for c in compiled.channels() {
        let trace = StreamTrace {
            kind: c.kind,
            samples: gather(c.value, c.kind),
            derivative: c.derivative.map(|d| gather(d, c.kind)),
        };
        channels.insert(c.name.clone(), trace);
    }
    Ok(TraceSet { times: tg.samples().to_vec(), grid: compiled.grid().cloned(), channels })
}

fn run_instance(
    sys: &BoundNetwork,
    domain: Domain,
    point: usize,
    tg: &TimeGrid,
    cfg: &SolverConfig,
    slots: &[NodeId],
) -> Result<Recorded, SimError> {
    let inst = Instance::new(sys, domain, point);
    let mut buf = inst.buffer();
    let y0 = inst.initial_state(&mut buf);
    let mut rec_buf = inst.buffer();
    let mut out: Recorded = Vec::with_capacity(tg.samples().len());
    let mut f = |t: f64, y: &[f64], dy: &mut [f64]| inst.rate(t, y, &mut buf, dy);
    let mut record = |t: f64, y: &[f64]| {
        inst.eval(t, y, &mut rec_buf);
        out.push(slots.iter().map(|&s| rec_buf[s]).collect());
        Ok(())
    };
    rk::integrate(&mut f, y0, tg.samples(), tg.t_end(), cfg, &mut record)?;
    Ok(out)
}
