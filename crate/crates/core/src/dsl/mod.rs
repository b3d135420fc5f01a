//! The `.lgpac` network description language.
//!
//! Line oriented; `#` starts a comment. Comment lines at the very top of a
//! file form the document description and survive a print/parse cycle.
//!
//! ```text
//! grid [1, 6] step 0.25
//! family start 1
//! modulus T = exp2 3
//!
//! input b : rstream
//! const minus1 : rstream = -1
//! mul sq : rstream { in1 = a; in2 = a }
//! integrator a : rstream { c = k; u = neg; v = b }
//! limit G : xscalar { in = gamma } modulus T
//! wire a -> sq.in1
//! output a = a
//!
//! bind b = t; deriv 1
//!
//! simulate 10 samples 101
//! precision 8
//! expect a = 1/(1 + t)
//! ```

mod lexer;
mod parser;
mod printer;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::formula::Formula;
use crate::frechet::{FrechetError, SpatialGrid};
use crate::limits::ModulusSpec;
use crate::network::{BindError, Binding, BoundNetwork, Network};
use crate::simulator::{Samples, SimError, TimeGrid, TraceError, TraceSet};

pub use parser::{parse, parse_bytes, parse_formula};
pub use printer::print;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Severity {
    Error,
    Warning,
}

/// Source location: 1-based line, 1-based character columns `[col_start,
/// col_end)`, and the matching byte range in the whole text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Span {
    pub line: usize,
    pub col_start: usize,
    pub col_end: usize,
    pub byte_start: usize,
    pub byte_end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub span: Span,
    pub message: String,
    pub hint: Option<String>,
}

impl Diagnostic {
    pub(crate) fn error(span: Span, message: impl Into<String>) -> Diagnostic {
        Diagnostic { severity: Severity::Error, span, message: message.into(), hint: None }
    }

    pub(crate) fn with_hint(mut self, hint: impl Into<String>) -> Diagnostic {
        self.hint = Some(hint.into());
        self
    }

    /// Message followed by the offending source line and a caret marker.
    pub fn render(&self, src: &str) -> String {
        let mut out = self.to_string();
        if let Some(line) = src.split('\n').nth(self.span.line - 1) {
            let line = line.strip_suffix('\r').unwrap_or(line);
            let width = self.span.col_end.saturating_sub(self.span.col_start).max(1);
            out.push_str(&format!("\n  | {line}\n  | {}{}", " ".repeat(self.span.col_start - 1), "^".repeat(width)));
        }
        if let Some(h) = &self.hint {
            out.push_str(&format!("\n  = hint: {h}"));
        }
        out
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {sev}: {}", self.span.line, self.span.col_start, self.message)
    }
}

impl std::error::Error for Diagnostic {}

#[derive(Debug, Clone, PartialEq)]
pub enum GridLayout {
    /// Evenly spaced from the lower end; `upto` closes an unbounded domain.
    Step { step: f64, upto: Option<f64> },
    Points(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridDecl {
    pub lower: f64,
    /// `None` for an unbounded right end.
    pub upper: Option<f64>,
    pub layout: GridLayout,
}

impl GridDecl {
    pub fn step(lower: f64, upper: f64, step: f64) -> GridDecl {
        GridDecl { lower, upper: Some(upper), layout: GridLayout::Step { step, upto: None } }
    }

    pub fn build(&self) -> Result<Arc<SpatialGrid>, FrechetError> {
        let grid = match &self.layout {
            GridLayout::Step { step, upto } => {
                let last = upto.or(self.upper).ok_or_else(|| {
                    FrechetError::InvalidGrid("an unbounded domain needs 'upto' to close the sample range".into())
                })?;
                SpatialGrid::uniform(self.lower, self.upper, last, *step)?
            }
            GridLayout::Points(p) => SpatialGrid::new(self.lower, self.upper, p.clone())?,
        };
        Ok(Arc::new(grid))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModulusDecl {
    pub name: String,
    pub spec: ModulusSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BindDecl {
    pub label: String,
    pub binding: Binding,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulateDirective {
    pub t_end: f64,
    pub samples: Option<usize>,
}

/// A closed-form oracle for a channel or output label, in `t` and `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectDecl {
    pub channel: String,
    pub formula: Formula,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DocumentError {
    #[error(transparent)]
    Grid(#[from] FrechetError),
    #[error(transparent)]
    Bind(#[from] BindError),
}

/// Samples used when neither the document nor the caller gives a count.
pub const DEFAULT_SAMPLES: usize = 101;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DslDocument {
    pub description: Vec<String>,
    pub grid: Option<GridDecl>,
    /// First pseudonorm index.
    pub family_start: Option<u32>,
    pub moduli: Vec<ModulusDecl>,
    pub network: Network,
    pub bindings: Vec<BindDecl>,
    pub simulate: Option<SimulateDirective>,
    pub precision: Option<f64>,
    pub expects: Vec<ExpectDecl>,
}

impl DslDocument {
    pub fn modulus(&self, name: &str) -> Option<&ModulusSpec> {
        self.moduli.iter().find(|m| m.name == name).map(|m| &m.spec)
    }

    pub fn binding_map(&self) -> std::collections::BTreeMap<String, Binding> {
        self.bindings.iter().map(|b| (b.label.clone(), b.binding.clone())).collect()
    }

    pub fn build_grid(&self) -> Result<Option<Arc<SpatialGrid>>, FrechetError> {
        self.grid.as_ref().map(GridDecl::build).transpose()
    }

    /// Declared first pseudonorm index, else `max(1, ceil(lower))`.
    pub fn first_index(&self) -> u32 {
        self.family_start.unwrap_or_else(|| self.grid.as_ref().map_or(1, |g| g.lower.ceil().max(1.0) as u32))
    }

    /// Compiles the network on the declared grid and applies the bindings.
    pub fn bound(&self) -> Result<BoundNetwork, DocumentError> {
        Ok(BoundNetwork::new(&self.network, self.build_grid()?, &self.binding_map())?)
    }

    /// Uniform sample times up to `t_end`, else up to the `simulate`
    /// directive's horizon.
    pub fn time_grid(&self, t_end: Option<f64>, samples: Option<usize>) -> Result<TimeGrid, SimError> {
        let end = t_end
            .or(self.simulate.map(|s| s.t_end))
            .ok_or_else(|| SimError::InvalidTimeGrid("no horizon given and no simulate directive".into()))?;
        let n = samples.or(self.simulate.and_then(|s| s.samples)).unwrap_or(DEFAULT_SAMPLES);
        TimeGrid::uniform(end, n)
    }

    /// Largest absolute deviation of each `expect` channel from its formula
    /// over all samples.
    pub fn expect_errors(&self, traces: &TraceSet) -> Result<Vec<(String, f64)>, TraceError> {
        let mut out = Vec::new();
        for e in &self.expects {
            let name = self
                .network
                .outputs
                .iter()
                .find(|o| o.label == e.channel)
                .map_or(e.channel.as_str(), |o| o.source.as_str());
            let trace = traces.channel(name)?;
            let mut worst = 0.0f64;
            for (i, &t) in traces.times.iter().enumerate() {
                match &trace.samples {
                    Samples::Real(v) => worst = worst.max((v[i] - e.formula.eval(t, 0.0)).abs()),
                    Samples::Grid(v) => {
                        let grid = traces.grid.as_ref().ok_or_else(|| TraceError::Format("missing grid".into()))?;
                        for (x, val) in grid.points().iter().zip(&v[i]) {
                            worst = worst.max((val - e.formula.eval(t, *x)).abs());
                        }
                    }
                }
            }
            out.push((e.channel.clone(), worst));
        }
        Ok(out)
    }
}
