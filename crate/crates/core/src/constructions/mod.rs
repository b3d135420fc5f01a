//! Named network constructions with their recommended grids, moduli and
//! reference values.
//!
//! Every entry is a complete [`DslDocument`]; printing it gives the shipped
//! `.lgpac` example of the same name.

mod budget;
pub mod oracle;

use std::sync::Arc;

use thiserror::Error;

use crate::dsl::{BindDecl, DslDocument, ExpectDecl, GridDecl, ModulusDecl, SimulateDirective};
use crate::formula::Formula;
use crate::frechet::{FrechetError, PseudonormFamily, SpatialGrid};
use crate::limits::{Generator, LimitError, Modulus, ModulusForm, ModulusSpec};
use crate::network::{Binding, ChannelKind, Network};

pub use budget::{certified_error_budget, gamma1_tail, gamma2_tail, zeta_tail, ErrorBudget, TailBound};

use ChannelKind::{RScalar, RStream, XScalar, XStream};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructionError {
    #[error("unknown construction '{0}'")]
    Unknown(String),
    #[error("the grid must extend to at least {min}, got {got}")]
    GridTooSmall { min: f64, got: f64 },
    #[error(transparent)]
    Grid(#[from] FrechetError),
    #[error(transparent)]
    Modulus(#[from] LimitError),
}

/// Reference values for the output of a construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Oracle {
    /// The document's `expect` formulas.
    ClosedForm,
    /// Limit equals the gamma function on the grid.
    Gamma,
    /// Limit equals the Riemann zeta function on the grid.
    Zeta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    pub name: &'static str,
    pub document: DslDocument,
    /// Channel (or output label) of main interest.
    pub channel: String,
    pub oracle: Oracle,
}

impl Construction {
    pub fn network(&self) -> &Network {
        &self.document.network
    }

    pub fn grid(&self) -> Result<Option<Arc<SpatialGrid>>, ConstructionError> {
        Ok(self.document.build_grid()?)
    }

    /// Unit-interval pseudonorms over the recommended grid.
    pub fn family(&self) -> Result<Option<PseudonormFamily>, ConstructionError> {
        let first = self.document.first_index();
        Ok(self.grid()?.map(|g| PseudonormFamily::unit_intervals(g, first)).transpose()?)
    }

    /// The modulus attached to the limit module, if any.
    pub fn modulus(&self) -> Result<Option<Modulus>, ConstructionError> {
        Ok(self.document.moduli.first().map(|m| Modulus::from_spec(&m.spec)).transpose()?)
    }

    /// Channel feeding the limit module, if any.
    pub fn limit_source(&self) -> Option<&str> {
        self.network().wires.iter().find(|w| w.port == crate::network::Port::In).map(|w| w.source.as_str())
    }
}

pub const NAMES: [&str; 19] = [
    "inverter",
    "speedup",
    "slowdown",
    "feedback",
    "modulus_linear",
    "modulus_exp2",
    "gamma_u1",
    "gamma1",
    "gamma_u2",
    "gamma2",
    "gamma",
    "zeta_step1",
    "zeta_step2",
    "zeta_step3",
    "zeta_step4",
    "zeta_step5",
    "zeta_step6",
    "zeta1",
    "zeta",
];

pub fn catalog() -> Vec<Construction> {
    NAMES.iter().map(|n| get(n).expect("catalog names resolve")).collect()
}

pub fn get(name: &str) -> Result<Construction, ConstructionError> {
    let c = match name {
        "inverter" => inverter_doc(),
        "speedup" => speed_doc(true),
        "slowdown" => speed_doc(false),
        "feedback" => feedback_doc(),
        "modulus_linear" => modulus_doc(Generator::Linear(1.0)),
        "modulus_exp2" => modulus_doc(Generator::Exp2(GAMMA_C)),
        "gamma_u1" => gamma_doc(GammaStage::U1, GAMMA_GRID_END)?,
        "gamma1" => gamma_doc(GammaStage::Gamma1, GAMMA_GRID_END)?,
        "gamma_u2" => gamma_doc(GammaStage::U2, GAMMA_GRID_END)?,
        "gamma2" => gamma_doc(GammaStage::Gamma2, GAMMA_GRID_END)?,
        "gamma" => gamma_doc(GammaStage::Full, GAMMA_GRID_END)?,
        "zeta_step1" => zeta_doc(ZetaStage::Step(1), ZETA_GRID_END)?,
        "zeta_step2" => zeta_doc(ZetaStage::Step(2), ZETA_GRID_END)?,
        "zeta_step3" => zeta_doc(ZetaStage::Step(3), ZETA_GRID_END)?,
        "zeta_step4" => zeta_doc(ZetaStage::Step(4), ZETA_GRID_END)?,
        "zeta_step5" => zeta_doc(ZetaStage::Step(5), ZETA_GRID_END)?,
        "zeta_step6" => zeta_doc(ZetaStage::Step(6), ZETA_GRID_END)?,
        "zeta1" => zeta_doc(ZetaStage::Zeta1, ZETA_GRID_END)?,
        "zeta" => zeta_doc(ZetaStage::Full, ZETA_GRID_END)?,
        other => return Err(ConstructionError::Unknown(other.to_string())),
    };
    Ok(c)
}

pub const GAMMA_C: f64 = 3.0;
pub const ZETA_C: f64 = 1.0;
pub const GRID_STEP: f64 = 0.25;
const GAMMA_GRID_END: f64 = 6.0;
const ZETA_GRID_END: f64 = 6.0;

fn f(src: &str) -> Formula {
    Formula::parse(src).expect("builder formulas are well formed")
}

fn expect(channel: &str, src: &str) -> ExpectDecl {
    ExpectDecl { channel: channel.into(), formula: f(src) }
}

fn simulate(t_end: f64, samples: usize) -> Option<SimulateDirective> {
    Some(SimulateDirective { t_end, samples: Some(samples) })
}

fn lines(text: &[&str]) -> Vec<String> {
    text.iter().map(|s| s.to_string()).collect()
}

/// Adds `name' = −name²·b'` with `name(0) = k`.
fn add_inverter(net: &mut Network, name: &str, kind: ChannelKind, k: &str, b: &str) {
    let (m1, sq, neg) = (format!("{name}_m1"), format!("{name}_sq"), format!("{name}_neg"));
    net.constant(&m1, kind, Formula::num(-1.0));
    net.multiplier(&sq, kind, name, name);
    net.multiplier(&neg, kind, &sq, &m1);
    net.integrator(name, kind, k, &neg, b);
}

/// The inverter with proper inputs `k` and `b`.
pub fn build_inverter() -> Network {
    let mut net = Network::new();
    net.input("k", RScalar).input("b", RStream);
    add_inverter(&mut net, "a", RStream, "k", "b");
    net.output("a", "a");
    net
}

fn inverter_doc() -> Construction {
    let document = DslDocument {
        description: lines(&["Inverter: a' = -a^2 b' with a(0) = k.", "With k = 1 and b = t the output is 1/(1 + t)."]),
        network: build_inverter(),
        bindings: vec![
            BindDecl { label: "k".into(), binding: Binding::scalar(Formula::num(1.0)) },
            BindDecl { label: "b".into(), binding: Binding::stream(Formula::t(), Formula::num(1.0)) },
        ],
        simulate: simulate(10.0, 101),
        expects: vec![expect("a", "1/(1 + t)")],
        ..Default::default()
    };
    Construction { name: "inverter", document, channel: "a".into(), oracle: Oracle::ClosedForm }
}

/// t/(1 − t) on [0, 1).
pub fn build_speedup() -> Network {
    speed_network(true)
}

/// t/(1 + t) on [0, ∞).
pub fn build_slowdown() -> Network {
    speed_network(false)
}

fn speed_network(up: bool) -> Network {
    let mut net = Network::new();
    net.time("t", RStream);
    net.constant("one", RScalar, Formula::num(1.0));
    let (s, out) = if up { ("s_up", "speedup") } else { ("s_down", "slowdown") };
    if up {
        net.constant("m1", RStream, Formula::num(-1.0));
        net.multiplier("neg_t", RStream, "t", "m1");
        add_inverter(&mut net, s, RStream, "one", "neg_t");
    } else {
        add_inverter(&mut net, s, RStream, "one", "t");
    }
    net.multiplier(out, RStream, "t", s);
    net.output(out, out);
    net
}

fn speed_doc(up: bool) -> Construction {
    let (name, desc, t_end, oracle) = if up {
        ("speedup", "Speedup t/(1 - t): an inverter with b = -t times t. Defined on [0, 1).", 0.9, "t/(1 - t)")
    } else {
        ("slowdown", "Slowdown t/(1 + t): an inverter with b = t times t.", 10.0, "t/(1 + t)")
    };
    let document = DslDocument {
        description: lines(&[desc]),
        network: speed_network(up),
        simulate: simulate(t_end, if up { 91 } else { 101 }),
        expects: vec![expect(name, oracle)],
        ..Default::default()
    };
    Construction { name, document, channel: name.into(), oracle: Oracle::ClosedForm }
}

/// u2 = g + ∫ u2 du1 and u4 = u2·x.
pub fn build_feedback() -> Network {
    let mut net = Network::new();
    net.input("g", XScalar).input("u1", XStream);
    net.constant("u3", XStream, Formula::x());
    net.integrator("u2", XStream, "g", "u2", "u1");
    net.multiplier("u4", XStream, "u2", "u3");
    net.output("u4", "u4");
    net
}

fn feedback_doc() -> Construction {
    let document = DslDocument {
        description: lines(&[
            "A feedback integrator: u2 = g + int u2 du1, u4 = u2 x.",
            "With g = 1 and u1 = t x the output is x exp(t x).",
        ]),
        grid: Some(GridDecl::step(0.0, 2.0, 0.5)),
        network: build_feedback(),
        bindings: vec![
            BindDecl { label: "g".into(), binding: Binding::scalar(Formula::num(1.0)) },
            BindDecl { label: "u1".into(), binding: Binding::stream(f("t*x"), Formula::x()) },
        ],
        simulate: simulate(2.0, 21),
        expects: vec![expect("u4", "x*exp(t*x)")],
        ..Default::default()
    };
    Construction { name: "feedback", document, channel: "u4".into(), oracle: Oracle::ClosedForm }
}

fn modulus_doc(g: Generator) -> Construction {
    let (name, desc, oracle) = match g {
        Generator::Linear(_) => ("modulus_linear", "Linear modulus generator: T' = 1, T(0) = 0.", "t"),
        Generator::Exp2(_) => ("modulus_exp2", "Exponential modulus generator: T' = ln(2) T, T(0) = 3.", "3*2^t"),
    };
    let document = DslDocument {
        description: lines(&[desc]),
        network: crate::limits::generator_network(&g),
        simulate: simulate(10.0, 11),
        expects: vec![expect("T", oracle)],
        ..Default::default()
    };
    Construction { name, document, channel: "T".into(), oracle: Oracle::ClosedForm }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum GammaStage {
    U1,
    Gamma1,
    U2,
    Gamma2,
    Full,
}

fn spatial_basics(net: &mut Network) {
    net.time("t", XStream);
    net.constant("x", XStream, Formula::x());
    net.constant("one", XScalar, Formula::num(1.0));
    net.constant("zero", XScalar, Formula::num(0.0));
}

/// u1 = −(x + x·t + t)·s↓², with its own slowdown inverter.
fn add_gamma_u1(net: &mut Network) {
    net.multiplier("u1_tx", XStream, "t", "x");
    net.adder("u1_s1", XStream, "x", "u1_tx");
    net.adder("u1_s2", XStream, "t", "u1_s1");
    net.constant("u1_m1", XStream, Formula::num(-1.0));
    add_inverter(net, "u1_sdown", XStream, "one", "t");
    net.multiplier("u1_sq", XStream, "u1_sdown", "u1_sdown");
    net.multiplier("u1_neg", XStream, "u1_s2", "u1_m1");
    net.multiplier("u1", XStream, "u1_sq", "u1_neg");
}

/// u2 = (x − t − 2)·s↓, with its own slowdown inverter.
fn add_gamma_u2(net: &mut Network) {
    net.constant("u2_m1", XStream, Formula::num(-1.0));
    net.constant("u2_m2", XStream, Formula::num(-2.0));
    net.multiplier("u2_negt", XStream, "t", "u2_m1");
    net.adder("u2_xm2", XStream, "u2_m2", "x");
    net.adder("u2_num", XStream, "u2_negt", "u2_xm2");
    add_inverter(net, "u2_sdown", XStream, "one", "t");
    net.multiplier("u2", XStream, "u2_sdown", "u2_num");
}

/// γ'' = u·γ' as two chained integrators, γ'(0) = 1/e and γ(0) = 0.
fn add_second_order(net: &mut Network, out: &str, factor: &str) {
    let (dd, d, d0) = (format!("{out}_dd"), format!("{out}_d"), format!("{out}_d0"));
    net.constant(&d0, XScalar, f("exp(-1)"));
    net.multiplier(&dd, XStream, factor, &d);
    net.integrator(&d, XStream, &d0, &dd, "t");
    net.integrator(out, XStream, "zero", &d, "t");
}

fn check_grid_end(min: f64, got: f64) -> Result<(), ConstructionError> {
    if got >= min && got.is_finite() {
        Ok(())
    } else {
        Err(ConstructionError::GridTooSmall { min, got })
    }
}

fn gamma_network(stage: GammaStage) -> Network {
    let mut net = Network::new();
    spatial_basics(&mut net);
    if stage != GammaStage::U2 && stage != GammaStage::Gamma2 {
        add_gamma_u1(&mut net);
    }
    if matches!(stage, GammaStage::Gamma1 | GammaStage::Full) {
        add_second_order(&mut net, "gamma1", "u1");
    }
    if stage != GammaStage::U1 && stage != GammaStage::Gamma1 {
        add_gamma_u2(&mut net);
    }
    if matches!(stage, GammaStage::Gamma2 | GammaStage::Full) {
        add_second_order(&mut net, "gamma2", "u2");
    }
    if stage == GammaStage::Full {
        net.adder("gamma", XStream, "gamma1", "gamma2");
        net.limit("G", XScalar, "gamma", "T");
        net.output("Gamma", "G");
    }
    match stage {
        GammaStage::U1 => net.output("u1", "u1"),
        GammaStage::Gamma1 => net.output("gamma1", "gamma1"),
        GammaStage::U2 => net.output("u2", "u2"),
        GammaStage::Gamma2 => net.output("gamma2", "gamma2"),
        GammaStage::Full => net.output("gamma", "gamma"),
    };
    net
}

/// The gamma network and its modulus T(τ) = 3·2^τ. The network does not
/// depend on the grid; `grid_end` is only checked.
pub fn build_gamma(grid_end: f64) -> Result<(Network, Modulus), ConstructionError> {
    check_grid_end(1.0, grid_end)?;
    Ok((gamma_network(GammaStage::Full), Modulus::from_spec(&gamma_modulus())?))
}

fn gamma_modulus() -> ModulusSpec {
    ModulusSpec::continuous(ModulusForm::Exp2(GAMMA_C))
}

fn gamma_doc(stage: GammaStage, grid_end: f64) -> Result<Construction, ConstructionError> {
    check_grid_end(1.0, grid_end)?;
    let (name, desc, channel, expects, oracle): (_, &[&str], _, Vec<ExpectDecl>, _) = match stage {
        GammaStage::U1 => (
            "gamma_u1",
            &["Factor u1 = -(x + x t + t)/(1 + t)^2 built from the slowdown 1/(1 + t)."],
            "u1",
            vec![expect("u1", "-(x + x*t + t)/(1 + t)^2")],
            Oracle::ClosedForm,
        ),
        GammaStage::Gamma1 => (
            "gamma1",
            &["First gamma part: gamma1'' = u1 gamma1', gamma1(0) = 0, gamma1'(0) = 1/e."],
            "gamma1",
            vec![expect("gamma1_d", "(1 + t)^(-(x + 1))*exp(-1/(1 + t))")],
            Oracle::ClosedForm,
        ),
        GammaStage::U2 => (
            "gamma_u2",
            &["Factor u2 = (x - t - 2)/(1 + t) built from the slowdown 1/(1 + t)."],
            "u2",
            vec![expect("u2", "(x - t - 2)/(1 + t)")],
            Oracle::ClosedForm,
        ),
        GammaStage::Gamma2 => (
            "gamma2",
            &["Second gamma part: gamma2'' = u2 gamma2', gamma2(0) = 0, gamma2'(0) = 1/e."],
            "gamma2",
            vec![expect("gamma2_d", "(1 + t)^(x - 1)*exp(-(1 + t))")],
            Oracle::ClosedForm,
        ),
        GammaStage::Full => (
            "gamma",
            &[
                "Gamma function as the limit of gamma1 + gamma2.",
                "The limit module uses the modulus T(tau) = 3 2^tau.",
            ],
            "gamma",
            vec![],
            Oracle::Gamma,
        ),
    };
    let full = stage == GammaStage::Full;
    let document = DslDocument {
        description: lines(desc),
        grid: Some(GridDecl::step(1.0, grid_end, GRID_STEP)),
        family_start: Some(1),
        moduli: if full { vec![ModulusDecl { name: "T".into(), spec: gamma_modulus() }] } else { vec![] },
        network: gamma_network(stage),
        simulate: simulate(20.0, 81),
        precision: full.then_some(8.0),
        expects,
        ..Default::default()
    };
    Ok(Construction { name, document, channel: channel.into(), oracle })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ZetaStage {
    Step(u8),
    Zeta1,
    Full,
}

impl ZetaStage {
    fn reaches(self, step: u8) -> bool {
        match self {
            ZetaStage::Step(s) => match s {
                // steps 4 and 5 stand on their own
                4 => step == 1 || step == 4,
                5 => step == 5,
                _ => step <= s,
            },
            _ => true,
        }
    }
}

fn zeta_network(stage: ZetaStage) -> Network {
    let mut net = Network::new();
    spatial_basics(&mut net);
    let mut m1 = false;
    let mut minus_one = |net: &mut Network| {
        if !m1 {
            net.constant("m1", XStream, Formula::num(-1.0));
            m1 = true;
        }
    };
    if stage.reaches(1) {
        net.multiplier("tt", XStream, "t", "t");
        add_inverter(&mut net, "r", XStream, "one", "tt");
    }
    if stage.reaches(2) {
        net.integrator("atan", XStream, "zero", "r", "t");
    }
    if stage.reaches(3) {
        minus_one(&mut net);
        net.multiplier("theta", XStream, "x", "atan");
        net.integrator("sn", XStream, "zero", "cs", "theta");
        net.multiplier("sn_neg", XStream, "sn", "m1");
        net.integrator("cs", XStream, "one", "sn_neg", "theta");
    }
    if stage.reaches(4) {
        net.constant("negx", XStream, f("-x"));
        net.multiplier("pw_rt", XStream, "r", "t");
        net.multiplier("pw_rate", XStream, "negx", "pw_rt");
        net.multiplier("pw_du", XStream, "pw_rate", "pw");
        net.integrator("pw", XStream, "one", "pw_du", "t");
    }
    if stage.reaches(5) {
        minus_one(&mut net);
        // fd' = pi fd (fd - 1) against pi t
        net.constant("pi", XStream, f("pi"));
        net.constant("fd0", XScalar, Formula::num(0.5));
        net.multiplier("fd_pt", XStream, "pi", "t");
        net.adder("fd_m1", XStream, "fd", "m1");
        net.multiplier("fd_du", XStream, "fd", "fd_m1");
        net.integrator("fd", XStream, "fd0", "fd_du", "fd_pt");
    }
    if stage.reaches(6) {
        net.multiplier("sp", XStream, "sn", "pw");
        net.multiplier("zeta2", XStream, "sp", "fd");
    }
    if matches!(stage, ZetaStage::Zeta1 | ZetaStage::Full) {
        net.constant("neg2x", XStream, f("-2^x"));
        net.constant("zeta1_0", XScalar, f("2^(x - 1)/(x - 1)"));
        net.multiplier("zeta1_du", XStream, "neg2x", "zeta2");
        net.integrator("zeta1", XStream, "zeta1_0", "zeta1_du", "t");
    }
    match stage {
        ZetaStage::Full => {
            net.limit("Z", XScalar, "zeta1", "T");
            net.output("Zeta", "Z");
        }
        ZetaStage::Zeta1 => {
            net.output("zeta1", "zeta1");
        }
        ZetaStage::Step(s) => {
            let ch = ["r", "atan", "sn", "pw", "fd", "zeta2"][s as usize - 1];
            net.output(ch, ch);
        }
    }
    net
}

/// The zeta network and its modulus T(τ) = τ; `grid_end` is only checked.
pub fn build_zeta(grid_end: f64) -> Result<(Network, Modulus), ConstructionError> {
    check_grid_end(2.0, grid_end)?;
    Ok((zeta_network(ZetaStage::Full), Modulus::from_spec(&zeta_modulus())?))
}

fn zeta_modulus() -> ModulusSpec {
    ModulusSpec::continuous(ModulusForm::Linear(ZETA_C))
}

fn zeta_doc(stage: ZetaStage, grid_end: f64) -> Result<Construction, ConstructionError> {
    check_grid_end(2.0, grid_end)?;
    let (name, desc, channel, expects, oracle): (_, &[&str], _, Vec<ExpectDecl>, _) = match stage {
        ZetaStage::Step(1) => (
            "zeta_step1",
            &["r = 1/(1 + t^2): an inverter with k = 1 and b = t^2."],
            "r",
            vec![expect("r", "1/(1 + t^2)")],
            Oracle::ClosedForm,
        ),
        ZetaStage::Step(2) => (
            "zeta_step2",
            &["atan t as the integral of 1/(1 + t^2)."],
            "atan",
            vec![expect("atan", "atan(t)")],
            Oracle::ClosedForm,
        ),
        ZetaStage::Step(3) => (
            "zeta_step3",
            &["sin(x atan t) from a sine/cosine integrator pair driven by x atan t."],
            "sn",
            vec![expect("sn", "sin(x*atan(t))"), expect("cs", "cos(x*atan(t))")],
            Oracle::ClosedForm,
        ),
        ZetaStage::Step(4) => (
            "zeta_step4",
            &["pw = (1 + t^2)^(-x/2) from pw' = -x t/(1 + t^2) pw with pw(0) = 1."],
            "pw",
            vec![expect("pw", "(1 + t^2)^(-x/2)")],
            Oracle::ClosedForm,
        ),
        ZetaStage::Step(5) => (
            "zeta_step5",
            &["fd = 1/(exp(pi t) + 1) from fd' = pi fd (fd - 1) with fd(0) = 1/2."],
            "fd",
            vec![expect("fd", "1/(exp(pi*t) + 1)")],
            Oracle::ClosedForm,
        ),
        ZetaStage::Step(_) => (
            "zeta_step6",
            &["zeta2 = sin(x atan t) (1 + t^2)^(-x/2)/(exp(pi t) + 1)."],
            "zeta2",
            vec![expect("zeta2", "sin(x*atan(t))*(1 + t^2)^(-x/2)/(exp(pi*t) + 1)")],
            Oracle::ClosedForm,
        ),
        ZetaStage::Zeta1 => (
            "zeta1",
            &["zeta1 = 2^(x - 1)/(x - 1) - 2^x int zeta2 dt; it tends to the zeta function."],
            "zeta1",
            vec![],
            Oracle::Zeta,
        ),
        ZetaStage::Full => (
            "zeta",
            &["Riemann zeta function as the limit of zeta1.", "The limit module uses the modulus T(tau) = tau."],
            "zeta1",
            vec![],
            Oracle::Zeta,
        ),
    };
    let full = stage == ZetaStage::Full;
    let document = DslDocument {
        description: lines(desc),
        grid: Some(GridDecl::step(2.0, grid_end, GRID_STEP)),
        family_start: Some(2),
        moduli: if full { vec![ModulusDecl { name: "T".into(), spec: zeta_modulus() }] } else { vec![] },
        network: zeta_network(stage),
        simulate: simulate(10.0, 41),
        precision: full.then_some(16.0),
        expects,
        ..Default::default()
    };
    Ok(Construction { name, document, channel: channel.into(), oracle })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse, print};
    use crate::network::{compile, validate};

    #[test]
    fn every_entry_validates_and_compiles() {
        for c in catalog() {
            let report = validate(c.network());
            assert!(report.violations.is_empty(), "{}: {:?}", c.name, report.violations);
            let grid = c.grid().unwrap();
            compile(c.network(), grid).unwrap_or_else(|e| panic!("{}: {e}", c.name));
        }
    }

    #[test]
    fn every_entry_round_trips_through_text() {
        for c in catalog() {
            let text = print(&c.document);
            let doc = parse(&text).unwrap_or_else(|d| panic!("{}: {}", c.name, d[0].render(&text)));
            let mut canonical = c.document.clone();
            canonical.network.canonicalize();
            assert_eq!(doc, canonical, "{}", c.name);
        }
    }

    #[test]
    fn gamma_state_count() {
        let c = get("gamma").unwrap();
        let sys = compile(c.network(), c.grid().unwrap()).unwrap();
        assert_eq!(c.network().integrator_count(), 6);
        assert_eq!(sys.state_count(), 6 * 21);
    }

    #[test]
    fn grid_preconditions() {
        assert!(build_gamma(0.5).is_err());
        assert!(build_zeta(1.5).is_err());
        assert!(build_zeta(2.0).is_ok());
        assert_eq!(get("nope"), Err(ConstructionError::Unknown("nope".into())));
    }
}
