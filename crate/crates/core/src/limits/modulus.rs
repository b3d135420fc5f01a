use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::LimitError;
use crate::formula::{Formula, Func};
use crate::network::{BoundNetwork, ChannelKind, Network};
use crate::simulator::{simulate, Samples, SolverConfig, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    /// N: ℕ → ℕ; values are rounded up.
    Discrete,
    /// T: 𝕋 → 𝕋.
    Continuous,
}

/// A modulus realized by simulating a small generator network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Generator {
    /// y' = C, y(0) = 0.
    Linear(f64),
    /// y' = ln 2 · y, y(0) = C.
    Exp2(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModulusForm {
    /// C·τ.
    Linear(f64),
    /// C·2^τ.
    Exp2(f64),
    /// Piecewise linear through (τ, T) pairs.
    Table(Vec<(f64, f64)>),
    Network(Generator),
}

/// Declarative description of a modulus, as written in documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusSpec {
    pub flavor: Flavor,
    pub form: ModulusForm,
}

impl ModulusSpec {
    pub fn continuous(form: ModulusForm) -> ModulusSpec {
        ModulusSpec { flavor: Flavor::Continuous, form }
    }

    /// Structural checks: finite nonnegative coefficients, and for tables
    /// strictly increasing arguments with nondecreasing nonnegative values.
    pub fn check(&self) -> Result<(), String> {
        let coefficient = |c: f64| {
            if c.is_finite() && c >= 0.0 {
                Ok(())
            } else {
                Err(format!("the coefficient must be finite and nonnegative, got {c}"))
            }
        };
        match &self.form {
            ModulusForm::Linear(c) | ModulusForm::Exp2(c) => coefficient(*c),
            ModulusForm::Network(Generator::Linear(c)) | ModulusForm::Network(Generator::Exp2(c)) => coefficient(*c),
            ModulusForm::Table(pts) => {
                if pts.is_empty() {
                    return Err("a table needs at least one point".into());
                }
                if pts.iter().any(|(a, b)| !a.is_finite() || !b.is_finite() || *a < 0.0 || *b < 0.0) {
                    return Err("table entries must be finite and nonnegative".into());
                }
                if pts.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err("table arguments must be strictly increasing".into());
                }
                if pts.windows(2).any(|w| w[1].1 < w[0].1) {
                    return Err("a modulus must be nondecreasing".into());
                }
                Ok(())
            }
        }
    }
}

type Rule = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Linear(f64),
    Exp2(f64),
    Table(Vec<(f64, f64)>),
    Custom(Rule),
    FromPseudonorm(Box<PseudonormModulus>),
}

/// A nondecreasing modulus of convergence, discrete or continuous.
#[derive(Clone)]
pub struct Modulus {
    flavor: Flavor,
    repr: Repr,
}

impl fmt::Debug for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let repr = match &self.repr {
            Repr::Linear(c) => format!("Linear({c})"),
            Repr::Exp2(c) => format!("Exp2({c})"),
            Repr::Table(p) => format!("Table({} points)", p.len()),
            Repr::Custom(_) => "Custom".to_string(),
            Repr::FromPseudonorm(_) => "FromPseudonorm".to_string(),
        };
        write!(f, "Modulus({:?}, {repr})", self.flavor)
    }
}

/// Horizon up to which generator networks are tabulated.
pub const GENERATOR_HORIZON: f64 = 40.0;
const GENERATOR_SAMPLES_PER_UNIT: usize = 64;

impl Modulus {
    pub fn linear(flavor: Flavor, c: f64) -> Result<Modulus, LimitError> {
        Modulus::from_spec(&ModulusSpec { flavor, form: ModulusForm::Linear(c) })
    }

    pub fn exp2(flavor: Flavor, c: f64) -> Result<Modulus, LimitError> {
        Modulus::from_spec(&ModulusSpec { flavor, form: ModulusForm::Exp2(c) })
    }

    pub fn identity(flavor: Flavor) -> Modulus {
        Modulus { flavor, repr: Repr::Linear(1.0) }
    }

    pub fn table(flavor: Flavor, points: Vec<(f64, f64)>) -> Result<Modulus, LimitError> {
        Modulus::from_spec(&ModulusSpec { flavor, form: ModulusForm::Table(points) })
    }

    /// Wraps a rule after spot-checking that it is nonnegative and
    /// nondecreasing on [0, 64].
    pub fn custom(flavor: Flavor, rule: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Modulus, LimitError> {
        let m = Modulus { flavor, repr: Repr::Custom(Arc::new(rule)) };
        m.spot_check()?;
        Ok(m)
    }

    /// Builds a modulus; generator networks are simulated at tolerance 1e-9
    /// on [0, GENERATOR_HORIZON] and tabulated.
    pub fn from_spec(spec: &ModulusSpec) -> Result<Modulus, LimitError> {
        spec.check().map_err(LimitError::InvalidModulus)?;
        let repr = match &spec.form {
            ModulusForm::Linear(c) => Repr::Linear(*c),
            ModulusForm::Exp2(c) => Repr::Exp2(*c),
            ModulusForm::Table(p) => Repr::Table(p.clone()),
            ModulusForm::Network(g) => Repr::Table(tabulate_generator(g)?),
        };
        Ok(Modulus { flavor: spec.flavor, repr })
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    fn raw(&self, arg: f64) -> Result<f64, LimitError> {
        let v = match &self.repr {
            Repr::Linear(c) => c * arg,
            Repr::Exp2(c) => c * arg.exp2(),
            Repr::Table(p) => interpolate(p, arg)?,
            Repr::Custom(f) => f(arg),
            Repr::FromPseudonorm(pm) => pm.collapse(arg)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(LimitError::NonFinite(format!("modulus value at {arg}")))
        }
    }

    /// T(τ) for continuous moduli; ⌈N(ν)⌉ for discrete ones, which need an
    /// integer argument.
    pub fn eval(&self, arg: f64) -> Result<f64, LimitError> {
        if !(arg >= 0.0 && arg.is_finite()) {
            return Err(LimitError::OutOfDomain(arg));
        }
        match self.flavor {
            Flavor::Continuous => self.raw(arg),
            Flavor::Discrete => {
                if arg.fract() != 0.0 {
                    return Err(LimitError::OutOfDomain(arg));
                }
                Ok(self.raw(arg)?.ceil())
            }
        }
    }

    pub fn index(&self, nu: u64) -> Result<u64, LimitError> {
        let v = self.eval(nu as f64)?;
        Ok(v.max(0.0) as u64)
    }

    fn spot_check(&self) -> Result<(), LimitError> {
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=128 {
            let arg = i as f64 * 0.5;
            let v = self.raw(arg)?;
            if v < 0.0 {
                return Err(LimitError::InvalidModulus(format!("negative value {v} at {arg}")));
            }
            if v < prev {
                return Err(LimitError::InvalidModulus(format!("decreasing at {arg}")));
            }
            prev = v;
        }
        Ok(())
    }
}

fn interpolate(p: &[(f64, f64)], arg: f64) -> Result<f64, LimitError> {
    let (first, last) = (p[0], p[p.len() - 1]);
    if arg < first.0 || arg > last.0 {
        return Err(LimitError::OutOfDomain(arg));
    }
    let i = p.partition_point(|(a, _)| *a <= arg);
    if i == p.len() {
        return Ok(last.1);
    }
    let (a0, b0) = p[i - 1];
    let (a1, b1) = p[i];
    Ok(b0 + (b1 - b0) * (arg - a0) / (a1 - a0))
}

/// Network whose single output `T` is the modulus as a function of time.
pub fn generator_network(g: &Generator) -> Network {
    let mut net = Network::new();
    net.time("tau", ChannelKind::RStream);
    match *g {
        Generator::Linear(c) => {
            net.constant("rate", ChannelKind::RStream, Formula::num(c));
            net.constant("zero", ChannelKind::RScalar, Formula::num(0.0));
            net.integrator("T", ChannelKind::RStream, "zero", "rate", "tau");
        }
        Generator::Exp2(c) => {
            net.constant("ln2", ChannelKind::RStream, Formula::Call(Func::Ln, Box::new(Formula::num(2.0))));
            net.constant("c", ChannelKind::RScalar, Formula::num(c));
            net.multiplier("growth", ChannelKind::RStream, "ln2", "T");
            net.integrator("T", ChannelKind::RStream, "c", "growth", "tau");
        }
    }
    net.output("T", "T");
    net
}

fn tabulate_generator(g: &Generator) -> Result<Vec<(f64, f64)>, LimitError> {
    let bound = BoundNetwork::new(&generator_network(g), None, &Default::default())?;
    let n = GENERATOR_HORIZON as usize * GENERATOR_SAMPLES_PER_UNIT + 1;
    let tg = TimeGrid::uniform(GENERATOR_HORIZON, n)?;
    let traces = simulate(&bound, &tg, &SolverConfig::default())?;
    let Samples::Real(values) = &traces.channel("T")?.samples else {
        unreachable!("generator output is a real stream")
    };
    let mut pts: Vec<(f64, f64)> = traces.times.iter().copied().zip(values.iter().copied()).collect();
    // solver noise must not break monotonicity
    for i in 1..pts.len() {
        if pts[i].1 < pts[i - 1].1 {
            pts[i].1 = pts[i - 1].1;
        }
    }
    Ok(pts)
}

type SectionRule = Arc<dyn Fn(u32, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum PRepr {
    /// Ñ(n, ν) = N(n + ν).
    Shifted(Modulus),
    Custom(SectionRule),
}

/// A pseudonorm-indexed modulus Ñ(n, ν) or T̃(n, τ).
#[derive(Clone)]
pub struct PseudonormModulus {
    flavor: Flavor,
    first_index: u32,
    repr: PRepr,
}

impl fmt::Debug for PseudonormModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let repr = match &self.repr {
            PRepr::Shifted(m) => format!("Shifted({m:?})"),
            PRepr::Custom(_) => "Custom".into(),
        };
        write!(f, "PseudonormModulus({:?}, first {}, {repr})", self.flavor, self.first_index)
    }
}

impl PseudonormModulus {
    /// Spot-checks every section for n in `first_index..first_index + 8`.
    pub fn custom(
        flavor: Flavor,
        first_index: u32,
        rule: impl Fn(u32, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<PseudonormModulus, LimitError> {
        let pm = PseudonormModulus { flavor, first_index, repr: PRepr::Custom(Arc::new(rule)) };
        for n in first_index..first_index + 8 {
            pm.section(n).spot_check()?;
        }
        Ok(pm)
    }

    pub fn with_first_index(mut self, first_index: u32) -> Self {
        self.first_index = first_index;
        self
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn first_index(&self) -> u32 {
        self.first_index
    }

    fn raw(&self, n: u32, arg: f64) -> Result<f64, LimitError> {
        match &self.repr {
            PRepr::Shifted(m) => m.raw(n as f64 + arg),
            PRepr::Custom(f) => {
                let v = f(n, arg);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(LimitError::NonFinite(format!("modulus section {n} at {arg}")))
                }
            }
        }
    }

    pub fn eval(&self, n: u32, arg: f64) -> Result<f64, LimitError> {
        if n < self.first_index {
            return Err(LimitError::IndexOutOfRange { n, first: self.first_index });
        }
        if !(arg >= 0.0 && arg.is_finite()) {
            return Err(LimitError::OutOfDomain(arg));
        }
        match self.flavor {
            Flavor::Continuous => self.raw(n, arg),
            Flavor::Discrete => {
                if arg.fract() != 0.0 {
                    return Err(LimitError::OutOfDomain(arg));
                }
                Ok(self.raw(n, arg)?.ceil())
            }
        }
    }

    /// The modulus `Ñ(n, ·)` for a fixed pseudonorm index.
    pub fn section(&self, n: u32) -> Modulus {
        let pm = self.clone();
        Modulus { flavor: self.flavor, repr: Repr::Custom(Arc::new(move |a| pm.raw(n, a).unwrap_or(f64::NAN))) }
    }

    /// max over n ≤ bound(arg) of the section at arg + 1.
    fn collapse(&self, arg: f64) -> Result<f64, LimitError> {
        let top = match self.flavor {
            Flavor::Discrete => arg + 1.0,
            Flavor::Continuous => (arg + 2.0).floor(),
        };
        let last = (top as u32).max(self.first_index);
        let mut best = f64::NEG_INFINITY;
        for n in self.first_index..=last {
            let v = self.raw(n, arg + 1.0)?;
            best = best.max(match self.flavor {
                Flavor::Discrete => v.ceil(),
                Flavor::Continuous => v,
            });
        }
        Ok(best)
    }
}

/// Ñ(n, ν) = N(n + ν), respectively T̃(n, τ) = T(n + τ).
pub fn metric_to_pseudonorm_modulus(m: &Modulus) -> PseudonormModulus {
    PseudonormModulus { flavor: m.flavor, first_index: 1, repr: PRepr::Shifted(m.clone()) }
}

/// N(ν) = max_{n ≤ ν+1} Ñ(n, ν+1), respectively
/// T(τ) = max_{n ≤ τ+2} T̃(n, τ+1), with n starting at the first index.
pub fn pseudonorm_to_metric_modulus(pm: &PseudonormModulus) -> Modulus {
    Modulus { flavor: pm.flavor, repr: Repr::FromPseudonorm(Box::new(pm.clone())) }
}
