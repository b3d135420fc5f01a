use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use super::validate::{proper_inputs, validate, ProperInput, Violation};
use super::{ChannelKind, ModuleKind, Network, Port};
use crate::formula::{format_number, Var};
use crate::frechet::SpatialGrid;

pub type NodeId = usize;

/// One node of the expression DAG. Children always precede their parents,
/// so evaluating the arena in index order is a valid schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Node {
    Num(f64),
    /// A spatial constant tabulated on the grid.
    Table(usize),
    Time,
    State(usize),
    /// Value of a proper input.
    Input(usize),
    /// Declared time derivative of a proper stream input.
    InputDeriv(usize),
    Add(NodeId, NodeId),
    Mul(NodeId, NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Domain {
    /// Shared by both domains (numbers and time).
    Any,
    Real,
    Spatial,
}

impl Domain {
    fn of_kind(kind: ChannelKind) -> Domain {
        if kind.is_spatial() {
            Domain::Spatial
        } else {
            Domain::Real
        }
    }

    fn join(self, other: Domain) -> Domain {
        match (self, other) {
            (Domain::Any, d) | (d, Domain::Any) => d,
            (a, _) => a,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompiledChannel {
    pub name: String,
    pub kind: ChannelKind,
    pub value: NodeId,
    /// Present for every stream channel.
    pub derivative: Option<NodeId>,
}

/// An integrator output: `rate` is u·v', `init` the initial setting c.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateVar {
    pub channel: String,
    pub kind: ChannelKind,
    pub init: NodeId,
    pub rate: NodeId,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitTap {
    pub name: String,
    pub source: String,
    pub kind: ChannelKind,
    pub modulus: String,
}

/// A network reduced to a first-order initial value problem: integrator
/// outputs are states, every other channel an expression over states, time
/// and proper inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledSystem {
    pub(crate) grid: Option<Arc<SpatialGrid>>,
    pub(crate) nodes: Vec<Node>,
    pub(crate) domains: Vec<Domain>,
    pub(crate) tables: Vec<(String, Vec<f64>)>,
    pub(crate) channels: Vec<CompiledChannel>,
    pub(crate) states: Vec<StateVar>,
    pub(crate) inputs: Vec<ProperInput>,
    pub(crate) limit_taps: Vec<LimitTap>,
    pub(crate) outputs: Vec<(String, String)>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompileError {
    #[error("network is invalid: {}", join(.0))]
    Invalid(Vec<Violation>),
    #[error("network is ill-posed: {}", join(.0))]
    IllPosed(Vec<Violation>),
    #[error("cannot synthesize the derivative of '{channel}': {reason}")]
    UnsupportedDerivative { channel: String, reason: String },
    #[error("the network carries function-space channels but no spatial grid was given")]
    MissingGrid,
    #[error("constant '{module}' is not finite at x = {x}")]
    NonFiniteConstant { module: String, x: f64 },
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

impl CompiledSystem {
    pub fn grid(&self) -> Option<&Arc<SpatialGrid>> {
        self.grid.as_ref()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn channels(&self) -> &[CompiledChannel] {
        &self.channels
    }

    pub fn channel(&self, name: &str) -> Option<&CompiledChannel> {
        self.channels.iter().find(|c| c.name == name)
    }

    pub fn states(&self) -> &[StateVar] {
        &self.states
    }

    pub fn inputs(&self) -> &[ProperInput] {
        &self.inputs
    }

    pub fn limit_taps(&self) -> &[LimitTap] {
        &self.limit_taps
    }

    pub fn outputs(&self) -> &[(String, String)] {
        &self.outputs
    }

    pub(crate) fn domain(&self, id: NodeId) -> Domain {
        self.domains[id]
    }

    pub(crate) fn table(&self, idx: usize) -> &[f64] {
        &self.tables[idx].1
    }

    /// Scalar state count: spatial states count once per grid point.
    pub fn state_count(&self) -> usize {
        let points = self.grid.as_ref().map_or(0, |g| g.len());
        self.states.iter().map(|s| if s.kind.is_spatial() { points } else { 1 }).sum()
    }

    /// Normalized prefix form of an expression, e.g. `(* (* a a) (d b))`.
    pub fn prefix(&self, id: NodeId) -> String {
        match self.nodes[id] {
            Node::Num(v) => format_number(v),
            Node::Table(i) => self.tables[i].0.clone(),
            Node::Time => "t".into(),
            Node::State(i) => self.states[i].channel.clone(),
            Node::Input(i) => self.inputs[i].label.clone(),
            Node::InputDeriv(i) => format!("(d {})", self.inputs[i].label),
            Node::Add(a, b) => format!("(+ {} {})", self.prefix(a), self.prefix(b)),
            Node::Mul(a, b) => format!("(* {} {})", self.prefix(a), self.prefix(b)),
        }
    }

    /// Debug dump: states with their dynamics, and every channel.
    pub fn to_json(&self) -> String {
        let states: Vec<_> = self
            .states
            .iter()
            .map(|s| json!({"channel": s.channel, "kind": s.kind, "init": self.prefix(s.init), "rate": self.prefix(s.rate)}))
            .collect();
        let channels: Vec<_> = self
            .channels
            .iter()
            .map(|c| {
                json!({
                    "name": c.name,
                    "kind": c.kind,
                    "value": self.prefix(c.value),
                    "derivative": c.derivative.map(|d| self.prefix(d)),
                })
            })
            .collect();
        let doc = json!({
            "grid_points": self.grid.as_ref().map(|g| g.points().to_vec()),
            "state_count": self.state_count(),
            "inputs": self.inputs,
            "states": states,
            "channels": channels,
            "limit_taps": self.limit_taps,
        });
        serde_json::to_string_pretty(&doc).expect("json values serialize")
    }
}

/// Hash-consing arena with light algebraic simplification.
struct Arena {
    nodes: Vec<Node>,
    domains: Vec<Domain>,
    index: HashMap<NodeKey, NodeId>,
    state_domains: Vec<Domain>,
    input_domains: Vec<Domain>,
}

#[derive(Hash, PartialEq, Eq)]
enum NodeKey {
    Num(u64),
    Table(usize),
    Time,
    State(usize),
    Input(usize),
    InputDeriv(usize),
    Add(NodeId, NodeId),
    Mul(NodeId, NodeId),
}

impl Arena {
    fn intern(&mut self, node: Node) -> NodeId {
        let key = match node {
            Node::Num(v) => NodeKey::Num((v + 0.0).to_bits()),
            Node::Table(i) => NodeKey::Table(i),
            Node::Time => NodeKey::Time,
            Node::State(i) => NodeKey::State(i),
            Node::Input(i) => NodeKey::Input(i),
            Node::InputDeriv(i) => NodeKey::InputDeriv(i),
            Node::Add(a, b) => NodeKey::Add(a, b),
            Node::Mul(a, b) => NodeKey::Mul(a, b),
        };
        if let Some(&id) = self.index.get(&key) {
            return id;
        }
        let domain = match node {
            Node::Num(_) | Node::Time => Domain::Any,
            Node::Table(_) => Domain::Spatial,
            Node::State(i) => self.state_domains[i],
            Node::Input(i) | Node::InputDeriv(i) => self.input_domains[i],
            Node::Add(a, b) | Node::Mul(a, b) => self.domains[a].join(self.domains[b]),
        };
        let id = self.nodes.len();
        self.nodes.push(node);
        self.domains.push(domain);
        self.index.insert(key, id);
        id
    }

    fn num(&self, id: NodeId) -> Option<f64> {
        match self.nodes[id] {
            Node::Num(v) => Some(v),
            _ => None,
        }
    }

    fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        match (self.num(a), self.num(b)) {
            (Some(x), Some(y)) => self.intern(Node::Num(x + y)),
            (Some(0.0), _) => b,
            (_, Some(0.0)) => a,
            _ => self.intern(Node::Add(a, b)),
        }
    }

    fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        match (self.num(a), self.num(b)) {
            (Some(x), Some(y)) => self.intern(Node::Num(x * y)),
            (Some(x), _) | (_, Some(x)) if x == 0.0 => self.intern(Node::Num(0.0)),
            (Some(1.0), _) => b,
            (_, Some(1.0)) => a,
            _ => self.intern(Node::Mul(a, b)),
        }
    }
}

struct Compiler<'a> {
    net: &'a Network,
    grid: Option<Arc<SpatialGrid>>,
    arena: Arena,
    tables: Vec<(String, Vec<f64>)>,
    inputs: Vec<ProperInput>,
    input_slot: HashMap<String, usize>,
    state_slot: HashMap<&'a str, usize>,
    values: HashMap<String, NodeId>,
    derivs: HashMap<String, NodeId>,
    in_progress: Vec<String>,
}

impl<'a> Compiler<'a> {
    /// The channel name driving `module.port`, or the proper-input label of
    /// the unconnected port.
    fn port_source(&self, module: &str, port: Port) -> String {
        match self.net.drivers(module, port).next() {
            Some(w) => w.source.clone(),
            None => format!("{module}.{port}"),
        }
    }

    fn value(&mut self, name: &str) -> Result<NodeId, CompileError> {
        if let Some(&id) = self.values.get(name) {
            return Ok(id);
        }
        let id = if let Some(&slot) = self.input_slot.get(name) {
            self.arena.intern(Node::Input(slot))
        } else {
            let module = self.net.find_module(name).expect("validated source");
            match &module.kind {
                ModuleKind::Constant(f) => {
                    if module.output.is_spatial() && f.uses(Var::X) {
                        let grid = self.grid.clone().ok_or(CompileError::MissingGrid)?;
                        let mut values = Vec::with_capacity(grid.len());
                        for &x in grid.points() {
                            let v = f.eval(0.0, x);
                            if !v.is_finite() {
                                return Err(CompileError::NonFiniteConstant { module: name.into(), x });
                            }
                            values.push(v);
                        }
                        self.tables.push((name.to_string(), values));
                        self.arena.intern(Node::Table(self.tables.len() - 1))
                    } else {
                        let v = f.eval(0.0, 0.0);
                        if !v.is_finite() {
                            return Err(CompileError::NonFiniteConstant { module: name.into(), x: 0.0 });
                        }
                        self.arena.intern(Node::Num(v))
                    }
                }
                ModuleKind::Time => self.arena.intern(Node::Time),
                ModuleKind::Integrator => self.arena.intern(Node::State(self.state_slot[name])),
                ModuleKind::Adder | ModuleKind::Multiplier => {
                    let a = self.port_source(name, Port::In1);
                    let b = self.port_source(name, Port::In2);
                    let (a, b) = (self.value(&a)?, self.value(&b)?);
                    if module.kind == ModuleKind::Adder {
                        self.arena.add(a, b)
                    } else {
                        self.arena.mul(a, b)
                    }
                }
                ModuleKind::Limit { .. } => unreachable!("limit outputs are rejected by validation"),
            }
        };
        self.values.insert(name.to_string(), id);
        Ok(id)
    }

    fn derivative(&mut self, name: &str) -> Result<NodeId, CompileError> {
        if let Some(&id) = self.derivs.get(name) {
            return Ok(id);
        }
        if self.in_progress.iter().any(|n| n == name) {
            let mut chain = self.in_progress.clone();
            chain.push(name.to_string());
            return Err(CompileError::UnsupportedDerivative {
                channel: name.to_string(),
                reason: format!("the derivative depends on itself through {}", chain.join(" -> ")),
            });
        }
        self.in_progress.push(name.to_string());
        let id = if let Some(&slot) = self.input_slot.get(name) {
            self.arena.intern(Node::InputDeriv(slot))
        } else {
            let module = self.net.find_module(name).expect("validated source");
            match &module.kind {
                ModuleKind::Constant(_) => self.arena.intern(Node::Num(0.0)),
                ModuleKind::Time => self.arena.intern(Node::Num(1.0)),
                ModuleKind::Adder => {
                    let a = self.port_source(name, Port::In1);
                    let b = self.port_source(name, Port::In2);
                    let (da, db) = (self.derivative(&a)?, self.derivative(&b)?);
                    self.arena.add(da, db)
                }
                ModuleKind::Multiplier => {
                    let a = self.port_source(name, Port::In1);
                    let b = self.port_source(name, Port::In2);
                    let (va, vb) = (self.value(&a)?, self.value(&b)?);
                    let (da, db) = (self.derivative(&a)?, self.derivative(&b)?);
                    let left = self.arena.mul(da, vb);
                    let right = self.arena.mul(va, db);
                    self.arena.add(left, right)
                }
                ModuleKind::Integrator => {
                    let u = self.port_source(name, Port::U);
                    let v = self.port_source(name, Port::V);
                    let vu = self.value(&u)?;
                    let dv = self.derivative(&v)?;
                    self.arena.mul(vu, dv)
                }
                ModuleKind::Limit { .. } => unreachable!("limit outputs are rejected by validation"),
            }
        };
        self.in_progress.pop();
        self.derivs.insert(name.to_string(), id);
        Ok(id)
    }
}

/// Compiles a valid network. Integrator outputs become states with dynamics
/// w' = u·v' and initial value c; derivatives follow (const)' = 0, t' = 1,
/// (u + v)' = u' + v', (uv)' = u'v + uv' and (∫u dv)' = u·v'.
pub fn compile(net: &Network, grid: Option<Arc<SpatialGrid>>) -> Result<CompiledSystem, CompileError> {
    let report = validate(net);
    if !report.is_valid() {
        let (cycles, other): (Vec<_>, Vec<_>) =
            report.violations.into_iter().partition(|v| matches!(v, Violation::AlgebraicCycle { .. }));
        return Err(if other.is_empty() { CompileError::IllPosed(cycles) } else { CompileError::Invalid(other) });
    }
    let spatial = net.modules.iter().any(|m| m.output.is_spatial()) || net.inputs.iter().any(|i| i.kind.is_spatial());
    if spatial && grid.is_none() {
        return Err(CompileError::MissingGrid);
    }

    let inputs = proper_inputs(net);
    let input_slot = inputs.iter().enumerate().map(|(i, p)| (p.label.clone(), i)).collect();
    let integrators: Vec<_> = net.modules.iter().filter(|m| m.kind == ModuleKind::Integrator).collect();
    let state_slot = integrators.iter().enumerate().map(|(i, m)| (m.name.as_str(), i)).collect();
    let arena = Arena {
        nodes: Vec::new(),
        domains: Vec::new(),
        index: HashMap::new(),
        state_domains: integrators.iter().map(|m| Domain::of_kind(m.output)).collect(),
        input_domains: inputs.iter().map(|p| Domain::of_kind(p.kind)).collect(),
    };
    let mut c = Compiler {
        net,
        grid: grid.clone(),
        arena,
        tables: Vec::new(),
        inputs: inputs.clone(),
        input_slot,
        state_slot,
        values: HashMap::new(),
        derivs: HashMap::new(),
        in_progress: Vec::new(),
    };

    let mut states = Vec::with_capacity(integrators.len());
    for m in &integrators {
        let init_source = c.port_source(&m.name, Port::C);
        let init = c.value(&init_source)?;
        let rate = c.derivative(&m.name)?;
        states.push(StateVar { channel: m.name.clone(), kind: m.output, init, rate });
    }

    let mut channels = Vec::new();
    let mut limit_taps = Vec::new();
    let sources: Vec<(String, ChannelKind)> = c
        .inputs
        .iter()
        .map(|p| (p.label.clone(), p.kind))
        .chain(net.modules.iter().map(|m| (m.name.clone(), m.output)))
        .collect();
    let limit_names: BTreeMap<&str, (&str, ChannelKind)> = net
        .modules
        .iter()
        .filter_map(|m| match &m.kind {
            ModuleKind::Limit { modulus } => Some((m.name.as_str(), (modulus.as_str(), m.output))),
            _ => None,
        })
        .collect();
    for (name, kind) in sources {
        if let Some(&(modulus, kind)) = limit_names.get(name.as_str()) {
            limit_taps.push(LimitTap { source: c.port_source(&name, Port::In), name, kind, modulus: modulus.to_string() });
            continue;
        }
        let value = c.value(&name)?;
        let derivative = if kind.is_stream() { Some(c.derivative(&name)?) } else { None };
        channels.push(CompiledChannel { name, kind, value, derivative });
    }

    Ok(CompiledSystem {
        grid: if spatial { grid } else { None },
        nodes: c.arena.nodes,
        domains: c.arena.domains,
        tables: c.tables,
        channels,
        states,
        inputs,
        limit_taps,
        outputs: net.outputs.iter().map(|o| (o.label.clone(), o.source.clone())).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Formula;
    use ChannelKind::*;

    fn inverter() -> Network {
        let mut net = Network::new();
        net.input("k", RScalar).input("b", RStream);
        net.constant("minus1", RStream, Formula::num(-1.0));
        net.multiplier("sq", RStream, "a", "a");
        net.multiplier("neg", RStream, "sq", "minus1");
        net.integrator("a", RStream, "k", "neg", "b");
        net.output("a", "a");
        net
    }

    #[test]
    fn inverter_has_one_state_with_quadratic_dynamics() {
        let sys = compile(&inverter(), None).unwrap();
        assert_eq!(sys.states().len(), 1);
        assert_eq!(sys.state_count(), 1);
        let a = &sys.states()[0];
        assert_eq!(a.channel, "a");
        assert_eq!(sys.prefix(a.init), "k");
        assert_eq!(sys.prefix(a.rate), "(* (* (* a a) -1) (d b))");
    }

    #[test]
    fn integral_of_one_dt() {
        let mut net = Network::new();
        net.time("t", RStream);
        net.constant("one", RStream, Formula::num(1.0));
        net.constant("c", RScalar, Formula::num(2.5));
        net.integrator("w", RStream, "c", "one", "t");
        let sys = compile(&net, None).unwrap();
        assert_eq!(sys.prefix(sys.states()[0].rate), "1");
        assert_eq!(sys.prefix(sys.states()[0].init), "2.5");
    }

    #[test]
    fn every_stream_channel_gets_a_derivative() {
        let sys = compile(&inverter(), None).unwrap();
        for ch in sys.channels() {
            assert_eq!(ch.derivative.is_some(), ch.kind.is_stream(), "{}", ch.name);
        }
        let neg = sys.channel("neg").unwrap();
        // (-a²)' = -(a'a + aa') with a' = -a²b'
        assert_eq!(
            sys.prefix(neg.derivative.unwrap()),
            "(* (+ (* (* (* (* a a) -1) (d b)) a) (* a (* (* (* a a) -1) (d b)))) -1)"
        );
    }

    #[test]
    fn self_referential_integrator_has_no_derivative() {
        let mut net = Network::new();
        net.constant("one", RStream, Formula::num(1.0));
        net.constant("c", RScalar, Formula::num(1.0));
        net.integrator("w", RStream, "c", "one", "w");
        assert!(matches!(compile(&net, None), Err(CompileError::UnsupportedDerivative { .. })));
    }

    #[test]
    fn cycles_are_ill_posed_and_kinds_invalid() {
        let mut net = Network::new();
        net.time("t", RStream);
        net.multiplier("m", RStream, "t", "m");
        assert!(matches!(compile(&net, None), Err(CompileError::IllPosed(_))));
        let mut net = Network::new();
        net.time("t", RStream);
        net.constant("x", XStream, Formula::x());
        net.adder("s", RStream, "t", "x");
        assert!(matches!(compile(&net, None), Err(CompileError::Invalid(_))));
    }

    #[test]
    fn spatial_networks_need_a_grid_and_vectorize_states() {
        let mut net = Network::new();
        net.input("g", XScalar).input("u1", XStream);
        net.integrator("u2", XStream, "g", "u2", "u1");
        net.constant("u3", XStream, Formula::x());
        net.multiplier("u4", XStream, "u2", "u3");
        assert_eq!(compile(&net, None), Err(CompileError::MissingGrid));
        let grid = Arc::new(SpatialGrid::uniform(0.0, Some(2.0), 2.0, 0.5).unwrap());
        let sys = compile(&net, Some(grid)).unwrap();
        assert_eq!(sys.state_count(), 5);
        assert_eq!(sys.prefix(sys.states()[0].rate), "(* u2 (d u1))");
        assert_eq!(sys.prefix(sys.channel("u4").unwrap().value), "(* u2 u3)");
    }

    #[test]
    fn compilation_is_deterministic() {
        let a = compile(&inverter(), None).unwrap();
        let b = compile(&inverter(), None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn non_finite_constants_are_rejected() {
        let mut net = Network::new();
        net.constant("c", XScalar, Formula::parse("1/(x - 1)").unwrap());
        let grid = Arc::new(SpatialGrid::uniform(1.0, Some(2.0), 2.0, 1.0).unwrap());
        assert_eq!(compile(&net, Some(grid)), Err(CompileError::NonFiniteConstant { module: "c".into(), x: 1.0 }));
    }
}
