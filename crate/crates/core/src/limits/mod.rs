//! Moduli of convergence and effective limits.
//!
//! A limit is extracted from two probes of a stream (or sequence) at the
//! modulus-prescribed positions `T(τ)` and `T(τ+1)`. The result is flagged
//! `certified` when the measured gap is below `2^-τ`; this is consistent
//! with convergence at the probed pair, not a proof of it.

mod checks;
mod modulus;

use serde::Serialize;
use thiserror::Error;

use crate::dsl::{DocumentError, DslDocument};
use crate::frechet::{metric, FrechetError, MetricConfig, PseudonormFamily};
use crate::network::{BindError, Binding, BoundNetwork, Network};
use crate::simulator::{simulate, SimError, SolverConfig, TimeGrid, TraceError, Value};

pub use checks::{
    check_fc_sequence, check_fc_stream, check_metric_sequence, check_metric_stream, CheckOutcome, Lattice,
};
pub use modulus::{
    generator_network, metric_to_pseudonorm_modulus, pseudonorm_to_metric_modulus, Flavor, Generator, Modulus,
    ModulusForm, ModulusSpec, PseudonormModulus, GENERATOR_HORIZON,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LimitError {
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),
    #[error("argument {0} lies outside the modulus domain")]
    OutOfDomain(f64),
    #[error("pseudonorm index {n} lies below the first index {first}")]
    IndexOutOfRange { n: u32, first: u32 },
    #[error("non-finite {0}")]
    NonFinite(String),
    #[error("precision must be finite and nonnegative, got {0}")]
    InvalidPrecision(f64),
    #[error("sequence has {len} terms but index {needed} is required")]
    SequenceTooShort { needed: u64, len: usize },
    #[error("a function-valued limit needs a pseudonorm family")]
    MissingFamily,
    #[error("cannot compare a real value with a function value")]
    KindMismatch,
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error(transparent)]
    Metric(#[from] FrechetError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Bind(#[from] BindError),
}

/// Outcome of a limit extraction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifiedLimit {
    /// The later probe, u(T(τ+1)) or g_{N(ν+1)}.
    pub value: Value,
    pub precision: f64,
    /// Always 2^-precision.
    pub bound: f64,
    pub empirical_gap: f64,
    pub certified: bool,
    /// Probe positions (times or indices).
    pub probes: (f64, f64),
}

impl CertifiedLimit {
    fn from_probes(precision: f64, probes: (f64, f64), value: Value, gap: f64) -> CertifiedLimit {
        let bound = (-precision).exp2();
        CertifiedLimit { value, precision, bound, empirical_gap: gap, certified: gap < bound, probes }
    }
}

/// Anything that can be evaluated at a batch of times.
pub trait StreamSource {
    fn sample_at(&self, times: &[f64]) -> Result<Vec<Value>, LimitError>;
}

impl<S: StreamSource + ?Sized> StreamSource for &S {
    fn sample_at(&self, times: &[f64]) -> Result<Vec<Value>, LimitError> {
        (**self).sample_at(times)
    }
}

/// A stream given by a closure.
pub struct FnStream<F>(pub F);

impl<F: Fn(f64) -> Value> StreamSource for FnStream<F> {
    fn sample_at(&self, times: &[f64]) -> Result<Vec<Value>, LimitError> {
        Ok(times.iter().map(|&t| (self.0)(t)).collect())
    }
}

/// A channel of a bound network; each batch is one simulation up to the
/// latest requested time.
#[derive(Debug, Clone)]
pub struct NetworkStream {
    bound: BoundNetwork,
    channel: String,
    cfg: SolverConfig,
}

impl NetworkStream {
    /// `channel` may be a channel name or an output label.
    pub fn new(bound: BoundNetwork, channel: &str, cfg: SolverConfig) -> Result<NetworkStream, LimitError> {
        let sys = bound.system();
        let resolved = sys
            .outputs()
            .iter()
            .find(|(label, _)| label == channel)
            .map(|(_, src)| src.clone())
            .unwrap_or_else(|| channel.to_string());
        if sys.channel(&resolved).is_none() {
            return Err(TraceError::UnknownChannel(channel.to_string()).into());
        }
        Ok(NetworkStream { bound, channel: resolved, cfg })
    }

    pub fn from_network(
        net: &Network,
        grid: Option<std::sync::Arc<crate::frechet::SpatialGrid>>,
        bindings: &std::collections::BTreeMap<String, Binding>,
        channel: &str,
        cfg: SolverConfig,
    ) -> Result<NetworkStream, LimitError> {
        NetworkStream::new(BoundNetwork::new(net, grid, bindings)?, channel, cfg)
    }

    pub fn channel(&self) -> &str {
        &self.channel
    }
}

impl StreamSource for NetworkStream {
    fn sample_at(&self, times: &[f64]) -> Result<Vec<Value>, LimitError> {
        let tg = TimeGrid::at(times)?;
        let traces = simulate(&self.bound, &tg, &self.cfg)?;
        times
            .iter()
            .map(|t| {
                let i = traces.times.partition_point(|s| s < t);
                Ok(traces.sample(&self.channel, i)?)
            })
            .collect()
    }
}

/// The stream u∘T.
#[derive(Debug, Clone)]
pub struct Reindexed<S> {
    inner: S,
    modulus: Modulus,
}

pub fn reindex_stream<S: StreamSource>(inner: S, modulus: Modulus) -> Result<Reindexed<S>, LimitError> {
    if modulus.flavor() != Flavor::Continuous {
        return Err(LimitError::InvalidModulus("streams are reindexed by continuous moduli".into()));
    }
    Ok(Reindexed { inner, modulus })
}

impl<S: StreamSource> StreamSource for Reindexed<S> {
    fn sample_at(&self, times: &[f64]) -> Result<Vec<Value>, LimitError> {
        let mapped = times.iter().map(|&t| self.modulus.eval(t)).collect::<Result<Vec<_>, _>>()?;
        self.inner.sample_at(&mapped)
    }
}

/// g∘N: the terms g_{N(0)}, g_{N(1)}, … that exist in `seq`.
pub fn reindex_sequence<T: Clone>(seq: &[T], modulus: &Modulus) -> Result<Vec<T>, LimitError> {
    if modulus.flavor() != Flavor::Discrete {
        return Err(LimitError::InvalidModulus("sequences are reindexed by discrete moduli".into()));
    }
    let mut out = Vec::new();
    for n in 0u64.. {
        let i = modulus.index(n)?;
        if i as usize >= seq.len() {
            break;
        }
        out.push(seq[i as usize].clone());
    }
    Ok(out)
}

/// |a − b| for reals, the Fréchet metric for grid functions.
pub fn distance(a: &Value, b: &Value, family: Option<&PseudonormFamily>, cfg: &MetricConfig) -> Result<f64, LimitError> {
    match (a, b) {
        (Value::Real(p), Value::Real(q)) => Ok((p - q).abs()),
        (Value::Grid(f), Value::Grid(g)) => Ok(metric(f, g, family.ok_or(LimitError::MissingFamily)?, cfg)?),
        _ => Err(LimitError::KindMismatch),
    }
}

fn check_precision(tau: f64) -> Result<(), LimitError> {
    if tau >= 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(LimitError::InvalidPrecision(tau))
    }
}

/// Probes `source` at T(τ) and T(τ+1).
pub fn continuous_limit(
    source: &dyn StreamSource,
    modulus: &Modulus,
    tau: f64,
    family: Option<&PseudonormFamily>,
    cfg: &MetricConfig,
) -> Result<CertifiedLimit, LimitError> {
    Ok(continuous_limits(source, modulus, &[tau], family, cfg)?.remove(0))
}

/// Several precisions from a single batch of samples.
pub fn continuous_limits(
    source: &dyn StreamSource,
    modulus: &Modulus,
    taus: &[f64],
    family: Option<&PseudonormFamily>,
    cfg: &MetricConfig,
) -> Result<Vec<CertifiedLimit>, LimitError> {
    if modulus.flavor() != Flavor::Continuous {
        return Err(LimitError::InvalidModulus("a continuous limit needs a continuous modulus".into()));
    }
    let mut times = Vec::with_capacity(2 * taus.len());
    for &tau in taus {
        check_precision(tau)?;
        times.push(modulus.eval(tau)?);
        times.push(modulus.eval(tau + 1.0)?);
    }
    let values = source.sample_at(&times)?;
    let mut out = Vec::with_capacity(taus.len());
    for (k, &tau) in taus.iter().enumerate() {
        let (a, b) = (&values[2 * k], &values[2 * k + 1]);
        let gap = distance(a, b, family, cfg)?;
        out.push(CertifiedLimit::from_probes(tau, (times[2 * k], times[2 * k + 1]), b.clone(), gap));
    }
    Ok(out)
}

/// Probes `seq` at N(ν) and N(ν+1).
pub fn discrete_limit(
    seq: &[Value],
    modulus: &Modulus,
    nu: u64,
    family: Option<&PseudonormFamily>,
    cfg: &MetricConfig,
) -> Result<CertifiedLimit, LimitError> {
    if modulus.flavor() != Flavor::Discrete {
        return Err(LimitError::InvalidModulus("a discrete limit needs a discrete modulus".into()));
    }
    let (i, j) = (modulus.index(nu)?, modulus.index(nu + 1)?);
    let needed = i.max(j);
    if needed as usize >= seq.len() {
        return Err(LimitError::SequenceTooShort { needed, len: seq.len() });
    }
    let (a, b) = (&seq[i as usize], &seq[j as usize]);
    let gap = distance(a, b, family, cfg)?;
    Ok(CertifiedLimit::from_probes(nu as f64, (i as f64, j as f64), b.clone(), gap))
}

/// Limit of u through the reindexed stream u∘T with the identity modulus.
pub fn reindexed_limit(
    source: &dyn StreamSource,
    modulus: &Modulus,
    tau: f64,
    family: Option<&PseudonormFamily>,
    cfg: &MetricConfig,
) -> Result<CertifiedLimit, LimitError> {
    let r = reindex_stream(source, modulus.clone())?;
    let mut out = continuous_limit(&r, &Modulus::identity(Flavor::Continuous), tau, family, cfg)?;
    out.probes = (modulus.eval(tau)?, modulus.eval(tau + 1.0)?);
    Ok(out)
}

/// A limit module's certified value at one precision.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TapLimit {
    pub name: String,
    pub source: String,
    pub limit: CertifiedLimit,
}

/// Evaluates every limit module of a document at precision `tau`.
pub fn document_limits(doc: &DslDocument, tau: f64, cfg: &SolverConfig) -> Result<Vec<TapLimit>, LimitError> {
    let bound = doc.bound().map_err(|e| match e {
        DocumentError::Grid(g) => LimitError::Metric(g),
        DocumentError::Bind(b) => LimitError::Bind(b),
    })?;
    let taps = bound.system().limit_taps().to_vec();
    let family = match bound.system().grid() {
        Some(grid) => Some(PseudonormFamily::unit_intervals(grid.clone(), doc.first_index())?),
        None => None,
    };
    let mut out = Vec::with_capacity(taps.len());
    for tap in taps {
        let spec = doc
            .modulus(&tap.modulus)
            .ok_or_else(|| LimitError::InvalidModulus(format!("modulus '{}' is not declared", tap.modulus)))?;
        let modulus = Modulus::from_spec(spec)?;
        let stream = NetworkStream::new(bound.clone(), &tap.source, cfg.clone())?;
        let limit = continuous_limit(&stream, &modulus, tau, family.as_ref(), &MetricConfig::default())?;
        out.push(TapLimit { name: tap.name, source: tap.source, limit });
    }
    Ok(out)
}
