use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frechet::{GridFunction, SpatialGrid};
use crate::network::ChannelKind;

/// A channel value at one instant: a real or a member of the function space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Real(f64),
    Grid(GridFunction),
}

impl Value {
    pub fn as_real(&self) -> Option<f64> {
        match self {
            Value::Real(v) => Some(*v),
            Value::Grid(_) => None,
        }
    }

    pub fn as_grid(&self) -> Option<&GridFunction> {
        match self {
            Value::Grid(g) => Some(g),
            Value::Real(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Samples {
    Real(Vec<f64>),
    /// Indexed `[sample][grid point]`.
    Grid(Vec<Vec<f64>>),
}

impl Samples {
    pub fn len(&self) -> usize {
        match self {
            Samples::Real(v) => v.len(),
            Samples::Grid(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Samples of one channel, aligned with [`TraceSet::times`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamTrace {
    pub kind: ChannelKind,
    pub samples: Samples,
    /// Time derivative at the same instants; absent for scalar channels
    /// and for imported traces.
    pub derivative: Option<Samples>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSet {
    pub times: Vec<f64>,
    pub grid: Option<Arc<SpatialGrid>>,
    pub channels: BTreeMap<String, StreamTrace>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error("unknown channel '{0}'")]
    UnknownChannel(String),
    #[error("time {t} lies outside [0, {t_end}]")]
    OutOfRange { t: f64, t_end: f64 },
    #[error("channel '{0}' has no derivative samples")]
    NoDerivative(String),
    #[error("malformed trace data: {0}")]
    Format(String),
}

impl TraceSet {
    pub fn t_end(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn channel(&self, name: &str) -> Result<&StreamTrace, TraceError> {
        self.channels.get(name).ok_or_else(|| TraceError::UnknownChannel(name.to_string()))
    }

    /// Stored sample `i` of a channel.
    pub fn sample(&self, name: &str, i: usize) -> Result<Value, TraceError> {
        let tr = self.channel(name)?;
        self.value_of(&tr.samples, i)
    }

    pub fn derivative_sample(&self, name: &str, i: usize) -> Result<Value, TraceError> {
        let tr = self.channel(name)?;
        let d = tr.derivative.as_ref().ok_or_else(|| TraceError::NoDerivative(name.to_string()))?;
        self.value_of(d, i)
    }

    fn value_of(&self, s: &Samples, i: usize) -> Result<Value, TraceError> {
        match s {
            Samples::Real(v) => Ok(Value::Real(v[i])),
            Samples::Grid(v) => {
                let grid = self.grid.clone().ok_or_else(|| TraceError::Format("grid samples without a grid".into()))?;
                GridFunction::new(grid, v[i].clone()).map(Value::Grid).map_err(|e| TraceError::Format(e.to_string()))
            }
        }
    }

    /// Long format `t,x,channel,value`; `x` is empty for real channels.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["t", "x", "channel", "value"]).expect("in-memory write");
        for (name, tr) in &self.channels {
            for (i, t) in self.times.iter().enumerate() {
                match &tr.samples {
                    Samples::Real(v) => {
                        w.write_record([t.to_string(), String::new(), name.clone(), v[i].to_string()]).expect("in-memory write");
                    }
                    Samples::Grid(v) => {
                        let points = self.grid.as_ref().map(|g| g.points()).unwrap_or(&[]);
                        for (x, val) in points.iter().zip(&v[i]) {
                            w.write_record([t.to_string(), x.to_string(), name.clone(), val.to_string()])
                                .expect("in-memory write");
                        }
                    }
                }
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }

    /// Reads the long CSV format back. Channels come back as stream kinds
    /// without derivatives; the grid is rebuilt from the x column.
    pub fn from_csv(text: &str) -> Result<TraceSet, TraceError> {
        let fmt = |e: &dyn std::fmt::Display| TraceError::Format(e.to_string());
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers().map_err(|e| fmt(&e))?;
        if header != vec!["t", "x", "channel", "value"] {
            return Err(TraceError::Format("expected header t,x,channel,value".into()));
        }
        let mut times: Vec<f64> = Vec::new();
        let mut xs: Vec<f64> = Vec::new();
        let mut rows: BTreeMap<String, Vec<(f64, Option<f64>, f64)>> = BTreeMap::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| fmt(&e))?;
            let num = |s: &str| s.parse::<f64>().map_err(|e| fmt(&e));
            let t = num(&rec[0])?;
            let x = if rec[1].is_empty() { None } else { Some(num(&rec[1])?) };
            let v = num(&rec[3])?;
            if !times.contains(&t) {
                times.push(t);
            }
            if let Some(x) = x {
                if !xs.contains(&x) {
                    xs.push(x);
                }
            }
            rows.entry(rec[2].to_string()).or_default().push((t, x, v));
        }
        times.sort_by(f64::total_cmp);
        xs.sort_by(f64::total_cmp);
        let grid = if xs.is_empty() {
            None
        } else {
            Some(Arc::new(SpatialGrid::new(xs[0], Some(xs[xs.len() - 1]), xs.clone()).map_err(|e| fmt(&e))?))
        };
        let mut channels = BTreeMap::new();
        for (name, entries) in rows {
            let spatial = entries[0].1.is_some();
            let samples = if spatial {
                let mut table = vec![vec![f64::NAN; xs.len()]; times.len()];
                for (t, x, v) in entries {
                    let x = x.ok_or_else(|| TraceError::Format(format!("channel '{name}' mixes real and grid rows")))?;
                    let i = times.iter().position(|&s| s == t).expect("collected");
                    let j = xs.iter().position(|&s| s == x).expect("collected");
                    table[i][j] = v;
                }
                if table.iter().flatten().any(|v| v.is_nan()) {
                    return Err(TraceError::Format(format!("channel '{name}' has missing samples")));
                }
                Samples::Grid(table)
            } else {
                let mut vals = vec![f64::NAN; times.len()];
                for (t, x, v) in entries {
                    if x.is_some() {
                        return Err(TraceError::Format(format!("channel '{name}' mixes real and grid rows")));
                    }
                    vals[times.iter().position(|&s| s == t).expect("collected")] = v;
                }
                if vals.iter().any(|v| v.is_nan()) {
                    return Err(TraceError::Format(format!("channel '{name}' has missing samples")));
                }
                Samples::Real(vals)
            };
            let kind = if spatial { ChannelKind::XStream } else { ChannelKind::RStream };
            channels.insert(name, StreamTrace { kind, samples, derivative: None });
        }
        Ok(TraceSet { times, grid, channels })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("traces serialize")
    }

    pub fn from_json(text: &str) -> Result<TraceSet, TraceError> {
        serde_json::from_str(text).map_err(|e| TraceError::Format(e.to_string()))
    }
}

/// Value of `channel` at time `t` by monotone cubic interpolation between
/// samples; exact at sample times.
pub fn evaluate_channel(traces: &TraceSet, channel: &str, t: f64) -> Result<Value, TraceError> {
    let tr = traces.channel(channel)?;
    let times = &traces.times;
    let t_end = traces.t_end();
    if times.is_empty() || !(t >= times[0] && t <= t_end) {
        return Err(TraceError::OutOfRange { t, t_end });
    }
    match &tr.samples {
        Samples::Real(v) => Ok(Value::Real(pchip(times, v, t))),
        Samples::Grid(v) => {
            let grid = traces.grid.clone().ok_or_else(|| TraceError::Format("grid samples without a grid".into()))?;
            let values = (0..grid.len())
                .map(|j| {
                    let column: Vec<f64> = v.iter().map(|row| row[j]).collect();
                    pchip(times, &column, t)
                })
                .collect();
            GridFunction::new(grid, values).map(Value::Grid).map_err(|e| TraceError::Format(e.to_string()))
        }
    }
}

/// Fritsch–Carlson monotone piecewise cubic Hermite interpolation.
pub fn pchip(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if n == 1 {
        return ys[0];
    }
    let i = match xs.binary_search_by(|p| p.total_cmp(&x)) {
        Ok(i) => return ys[i],
        Err(i) => i.clamp(1, n - 1) - 1,
    };
    let secant = |k: usize| (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]);
    let slope = |k: usize| -> f64 {
        if k == 0 {
            return end_slope(xs[1] - xs[0], xs.get(2).map_or(0.0, |x2| x2 - xs[1]), secant(0), if n > 2 { secant(1) } else { secant(0) });
        }
        if k == n - 1 {
            return end_slope(
                xs[n - 1] - xs[n - 2],
                if n > 2 { xs[n - 2] - xs[n - 3] } else { 0.0 },
                secant(n - 2),
                if n > 2 { secant(n - 3) } else { secant(n - 2) },
            );
        }
        let (d0, d1) = (secant(k - 1), secant(k));
        if d0 * d1 <= 0.0 {
            return 0.0;
        }
        let (h0, h1) = (xs[k] - xs[k - 1], xs[k + 1] - xs[k]);
        let (w1, w2) = (2.0 * h1 + h0, h1 + 2.0 * h0);
        (w1 + w2) / (w1 / d0 + w2 / d1)
    };
    let h = xs[i + 1] - xs[i];
    let s = (x - xs[i]) / h;
    let (m0, m1) = (slope(i), slope(i + 1));
    let (s2, s3) = (s * s, s * s * s);
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * ys[i] + h10 * h * m0 + h01 * ys[i + 1] + h11 * h * m1
}

/// One-sided three-point end slope, limited to preserve monotonicity.
fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    if h1 == 0.0 {
        return d0;
    }
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}
