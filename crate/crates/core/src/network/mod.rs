//! Networks of constant, adder, multiplier, integrator and continuous limit
//! modules, and their compilation into ODE initial value problems.
//!
//! Every module has exactly one output channel, named after the module.
//! Proper inputs are either declared [`InputDecl`]s, which may drive several
//! ports, or module ports left unconnected; the latter are labelled
//! `module.port`.

mod bind;
mod compile;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::formula::Formula;

pub use bind::{bind, check_binding, Binding, BindError, BoundNetwork};
pub use compile::{compile, CompileError, CompiledChannel, CompiledSystem, Domain, LimitTap, Node, NodeId, StateVar};
pub use validate::{validate, ProperInput, ValidationReport, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChannelKind {
    RScalar,
    XScalar,
    RStream,
    XStream,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 4] = [ChannelKind::RScalar, ChannelKind::XScalar, ChannelKind::RStream, ChannelKind::XStream];

    pub fn is_stream(self) -> bool {
        matches!(self, ChannelKind::RStream | ChannelKind::XStream)
    }

    /// True for channels carrying members of the function space.
    pub fn is_spatial(self) -> bool {
        matches!(self, ChannelKind::XScalar | ChannelKind::XStream)
    }

    pub fn as_scalar(self) -> ChannelKind {
        if self.is_spatial() {
            ChannelKind::XScalar
        } else {
            ChannelKind::RScalar
        }
    }

    pub fn as_stream(self) -> ChannelKind {
        if self.is_spatial() {
            ChannelKind::XStream
        } else {
            ChannelKind::RStream
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            ChannelKind::RScalar => "rscalar",
            ChannelKind::XScalar => "xscalar",
            ChannelKind::RStream => "rstream",
            ChannelKind::XStream => "xstream",
        }
    }

    pub fn from_keyword(word: &str) -> Option<ChannelKind> {
        ChannelKind::ALL.into_iter().find(|k| k.keyword() == word)
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Port {
    In1,
    In2,
    /// Integrator initial setting.
    C,
    /// Integrator integrand.
    U,
    /// Integrator integrator (the stream `v` in ∫ u dv).
    V,
    /// Limit module input.
    In,
}

impl Port {
    pub fn name(self) -> &'static str {
        match self {
            Port::In1 => "in1",
            Port::In2 => "in2",
            Port::C => "c",
            Port::U => "u",
            Port::V => "v",
            Port::In => "in",
        }
    }

    pub fn from_name(name: &str) -> Option<Port> {
        [Port::In1, Port::In2, Port::C, Port::U, Port::V, Port::In]
            .into_iter()
            .find(|p| p.name() == name)
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModuleKind {
    /// A constant; a function of `x` for spatial kinds. Stream-kinded
    /// constants are constant streams.
    Constant(Formula),
    /// The time stream t.
    Time,
    Adder,
    Multiplier,
    /// w(t) = c + ∫₀ᵗ u dv.
    Integrator,
    /// One-input continuous limit, certified against the named modulus.
    Limit { modulus: String },
}

impl ModuleKind {
    pub fn keyword(&self) -> &'static str {
        match self {
            ModuleKind::Constant(_) => "const",
            ModuleKind::Time => "time",
            ModuleKind::Adder => "add",
            ModuleKind::Multiplier => "mul",
            ModuleKind::Integrator => "integrator",
            ModuleKind::Limit { .. } => "limit",
        }
    }

    pub fn ports(&self) -> &'static [Port] {
        match self {
            ModuleKind::Constant(_) | ModuleKind::Time => &[],
            ModuleKind::Adder | ModuleKind::Multiplier => &[Port::In1, Port::In2],
            ModuleKind::Integrator => &[Port::C, Port::U, Port::V],
            ModuleKind::Limit { .. } => &[Port::In],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Module {
    pub name: String,
    pub kind: ModuleKind,
    pub output: ChannelKind,
}

impl Module {
    /// Kind a port must receive, given the module's declared output kind.
    pub fn port_kind(&self, port: Port) -> Option<ChannelKind> {
        if !self.kind.ports().contains(&port) {
            return None;
        }
        Some(match (&self.kind, port) {
            (ModuleKind::Integrator, Port::C) => self.output.as_scalar(),
            (ModuleKind::Limit { .. }, _) => self.output.as_stream(),
            _ => self.output,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDecl {
    pub name: String,
    pub kind: ChannelKind,
}

/// A connection from a channel source (module or declared input) to a port.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wire {
    pub source: String,
    pub module: String,
    pub port: Port,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDecl {
    pub label: String,
    pub source: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub inputs: Vec<InputDecl>,
    pub modules: Vec<Module>,
    pub wires: Vec<Wire>,
    pub outputs: Vec<OutputDecl>,
}

impl Network {
    pub fn new() -> Self {
        Network::default()
    }

    pub fn input(&mut self, name: &str, kind: ChannelKind) -> &mut Self {
        self.inputs.push(InputDecl { name: name.into(), kind });
        self
    }

    pub fn module(&mut self, name: &str, kind: ModuleKind, output: ChannelKind) -> &mut Self {
        self.modules.push(Module { name: name.into(), kind, output });
        self
    }

    pub fn constant(&mut self, name: &str, kind: ChannelKind, value: Formula) -> &mut Self {
        self.module(name, ModuleKind::Constant(value), kind)
    }

    pub fn time(&mut self, name: &str, kind: ChannelKind) -> &mut Self {
        self.module(name, ModuleKind::Time, kind)
    }

    pub fn adder(&mut self, name: &str, kind: ChannelKind, a: &str, b: &str) -> &mut Self {
        self.module(name, ModuleKind::Adder, kind);
        self.connect(a, name, Port::In1).connect(b, name, Port::In2)
    }

    pub fn multiplier(&mut self, name: &str, kind: ChannelKind, a: &str, b: &str) -> &mut Self {
        self.module(name, ModuleKind::Multiplier, kind);
        self.connect(a, name, Port::In1).connect(b, name, Port::In2)
    }

    /// `name = c + ∫ u dv`.
    pub fn integrator(&mut self, name: &str, kind: ChannelKind, c: &str, u: &str, v: &str) -> &mut Self {
        self.module(name, ModuleKind::Integrator, kind);
        self.connect(c, name, Port::C).connect(u, name, Port::U).connect(v, name, Port::V)
    }

    pub fn limit(&mut self, name: &str, kind: ChannelKind, source: &str, modulus: &str) -> &mut Self {
        self.module(name, ModuleKind::Limit { modulus: modulus.into() }, kind.as_scalar());
        self.connect(source, name, Port::In)
    }

    pub fn connect(&mut self, source: &str, module: &str, port: Port) -> &mut Self {
        self.wires.push(Wire { source: source.into(), module: module.into(), port });
        self
    }

    pub fn output(&mut self, label: &str, source: &str) -> &mut Self {
        self.outputs.push(OutputDecl { label: label.into(), source: source.into() });
        self
    }

    pub fn find_module(&self, name: &str) -> Option<&Module> {
        self.modules.iter().find(|m| m.name == name)
    }

    pub fn find_input(&self, name: &str) -> Option<&InputDecl> {
        self.inputs.iter().find(|i| i.name == name)
    }

    /// Kind carried by the channel sourced at `name`.
    pub fn source_kind(&self, name: &str) -> Option<ChannelKind> {
        self.find_module(name)
            .map(|m| m.output)
            .or_else(|| self.find_input(name).map(|i| i.kind))
    }

    /// Sorts wires by sink module declaration order, then by port; wires into
    /// the same port keep their relative order.
    pub fn canonicalize(&mut self) {
        let order = |w: &Wire| {
            let idx = self.modules.iter().position(|m| m.name == w.module).unwrap_or(usize::MAX);
            (idx, w.port)
        };
        let mut keyed: Vec<_> = self.wires.drain(..).map(|w| (order(&w), w)).collect();
        keyed.sort_by_key(|k| k.0);
        self.wires = keyed.into_iter().map(|(_, w)| w).collect();
    }

    /// Wires feeding `module.port`.
    pub fn drivers<'a>(&'a self, module: &'a str, port: Port) -> impl Iterator<Item = &'a Wire> + 'a {
        self.wires.iter().filter(move |w| w.module == module && w.port == port)
    }

    pub fn integrator_count(&self) -> usize {
        self.modules.iter().filter(|m| m.kind == ModuleKind::Integrator).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn port_kinds_follow_output_kind() {
        let m = Module { name: "w".into(), kind: ModuleKind::Integrator, output: ChannelKind::XStream };
        assert_eq!(m.port_kind(Port::C), Some(ChannelKind::XScalar));
        assert_eq!(m.port_kind(Port::V), Some(ChannelKind::XStream));
        assert_eq!(m.port_kind(Port::In1), None);
        let l = Module { name: "l".into(), kind: ModuleKind::Limit { modulus: "T".into() }, output: ChannelKind::XScalar };
        assert_eq!(l.port_kind(Port::In), Some(ChannelKind::XStream));
    }

    #[test]
    fn canonical_wire_order() {
        let mut net = Network::new();
        net.time("t", ChannelKind::RStream);
        net.module("m", ModuleKind::Multiplier, ChannelKind::RStream);
        net.module("a", ModuleKind::Adder, ChannelKind::RStream);
        net.connect("t", "a", Port::In2).connect("t", "m", Port::In2).connect("t", "a", Port::In1).connect("t", "m", Port::In1);
        net.canonicalize();
        let order: Vec<_> = net.wires.iter().map(|w| format!("{}.{}", w.module, w.port)).collect();
        assert_eq!(order, ["m.in1", "m.in2", "a.in1", "a.in2"]);
    }
}
