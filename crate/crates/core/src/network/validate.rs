use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use super::{ChannelKind, ModuleKind, Network, Port};
use crate::formula::Var;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    DuplicateName(String),
    /// A wire or output names a source that does not exist.
    DanglingSource { source: String, sink: String },
    UnknownModule { module: String },
    UnknownPort { module: String, port: Port },
    KindMismatch { sink: String, expected: ChannelKind, found: ChannelKind },
    MultiplyDriven { sink: String, sources: Vec<String> },
    InvalidModule { module: String, reason: String },
    /// A cycle of channels that avoids every integrator output.
    AlgebraicCycle { modules: Vec<String> },
    /// Limit outputs may only drive proper outputs.
    LimitOutputConsumed { module: String, sink: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateName(n) => write!(f, "name '{n}' is declared more than once"),
            Violation::DanglingSource { source, sink } => write!(f, "'{sink}' is driven by unknown source '{source}'"),
            Violation::UnknownModule { module } => write!(f, "unknown module '{module}'"),
            Violation::UnknownPort { module, port } => write!(f, "module '{module}' has no port '{port}'"),
            Violation::KindMismatch { sink, expected, found } => {
                write!(f, "'{sink}' expects a {expected} channel but is driven by a {found} channel")
            }
            Violation::MultiplyDriven { sink, sources } => {
                write!(f, "input '{sink}' is connected to several outputs: {}", sources.join(", "))
            }
            Violation::InvalidModule { module, reason } => write!(f, "module '{module}': {reason}"),
            Violation::AlgebraicCycle { modules } => {
                write!(f, "algebraic cycle without an integrator: {}", modules.join(" -> "))
            }
            Violation::LimitOutputConsumed { module, sink } => {
                write!(f, "limit output '{module}' feeds '{sink}'; limit outputs may only be proper outputs")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProperInput {
    pub label: String,
    pub kind: ChannelKind,
}

/// Outcome of [`validate`]: every violation found, plus the channel
/// classification into proper inputs, mixed channels and proper outputs.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub proper_inputs: Vec<ProperInput>,
    pub mixed: Vec<String>,
    pub proper_outputs: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate(net: &Network) -> ValidationReport {
    let mut report = ValidationReport::default();
    let v = &mut report.violations;

    let mut seen = BTreeSet::new();
    for name in net.inputs.iter().map(|i| &i.name).chain(net.modules.iter().map(|m| &m.name)) {
        if !seen.insert(name.as_str()) {
            v.push(Violation::DuplicateName(name.clone()));
        }
    }

    for m in &net.modules {
        let reason = match &m.kind {
            ModuleKind::Adder | ModuleKind::Multiplier | ModuleKind::Integrator | ModuleKind::Time if !m.output.is_stream() => {
                Some(format!("a {} module must output a stream kind", m.kind.keyword()))
            }
            ModuleKind::Limit { .. } if m.output.is_stream() => Some("a limit module outputs a scalar kind".to_string()),
            ModuleKind::Constant(f) if f.uses(Var::T) => Some("constants cannot depend on t".to_string()),
            ModuleKind::Constant(f) if f.uses(Var::X) && !m.output.is_spatial() => {
                Some(format!("a {} constant cannot depend on x", m.output))
            }
            _ => None,
        };
        if let Some(reason) = reason {
            v.push(Violation::InvalidModule { module: m.name.clone(), reason });
        }
    }

    let mut drivers: BTreeMap<(String, Port), Vec<String>> = BTreeMap::new();
    for w in &net.wires {
        let sink = format!("{}.{}", w.module, w.port);
        let Some(module) = net.find_module(&w.module) else {
            v.push(Violation::UnknownModule { module: w.module.clone() });
            continue;
        };
        let Some(expected) = module.port_kind(w.port) else {
            v.push(Violation::UnknownPort { module: w.module.clone(), port: w.port });
            continue;
        };
        drivers.entry((w.module.clone(), w.port)).or_default().push(w.source.clone());
        match net.source_kind(&w.source) {
            None => v.push(Violation::DanglingSource { source: w.source.clone(), sink }),
            Some(found) if found != expected => v.push(Violation::KindMismatch { sink, expected, found }),
            Some(_) => {}
        }
        if let Some(src) = net.find_module(&w.source) {
            if matches!(src.kind, ModuleKind::Limit { .. }) {
                v.push(Violation::LimitOutputConsumed { module: src.name.clone(), sink: format!("{}.{}", w.module, w.port) });
            }
        }
    }
    for ((module, port), sources) in &drivers {
        if sources.len() > 1 {
            v.push(Violation::MultiplyDriven { sink: format!("{module}.{port}"), sources: sources.clone() });
        }
    }
    for out in &net.outputs {
        if net.source_kind(&out.source).is_none() {
            v.push(Violation::DanglingSource { source: out.source.clone(), sink: out.label.clone() });
        }
    }

    for cycle in algebraic_cycles(net) {
        v.push(Violation::AlgebraicCycle { modules: cycle });
    }

    report.proper_inputs = proper_inputs(net);
    let mut mixed = BTreeSet::new();
    for w in &net.wires {
        if net.find_module(&w.source).is_some() {
            mixed.insert(w.source.clone());
        }
    }
    report.mixed = net.modules.iter().map(|m| m.name.clone()).filter(|n| mixed.contains(n)).collect();
    report.proper_outputs = net.outputs.iter().map(|o| o.label.clone()).collect();
    report
}

/// Declared inputs followed by unconnected module ports, labelled `module.port`.
pub(super) fn proper_inputs(net: &Network) -> Vec<ProperInput> {
    let mut out: Vec<ProperInput> = net.inputs.iter().map(|i| ProperInput { label: i.name.clone(), kind: i.kind }).collect();
    for m in &net.modules {
        for &port in m.kind.ports() {
            if net.drivers(&m.name, port).next().is_none() {
                let kind = m.port_kind(port).expect("declared port");
                out.push(ProperInput { label: format!("{}.{}", m.name, port), kind });
            }
        }
    }
    out
}

/// Cycles in the module graph once every edge into an integrator is removed:
/// an integrator output is a state, so it breaks algebraic dependence.
fn algebraic_cycles(net: &Network) -> Vec<Vec<String>> {
    let mut graph = DiGraph::<&str, ()>::new();
    let index: BTreeMap<&str, _> = net.modules.iter().map(|m| (m.name.as_str(), graph.add_node(m.name.as_str()))).collect();
    for w in &net.wires {
        let (Some(&from), Some(&to)) = (index.get(w.source.as_str()), index.get(w.module.as_str())) else {
            continue;
        };
        if net.find_module(&w.module).is_some_and(|m| m.kind == ModuleKind::Integrator) {
            continue;
        }
        graph.add_edge(from, to, ());
    }
    let mut cycles = Vec::new();
    for scc in tarjan_scc(&graph) {
        let is_cycle = scc.len() > 1 || graph.contains_edge(scc[0], scc[0]);
        if is_cycle {
            let mut names: Vec<String> = scc.iter().map(|&n| graph[n].to_string()).collect();
            names.sort_by_key(|n| net.modules.iter().position(|m| &m.name == n));
            cycles.push(names);
        }
    }
    cycles.sort();
    cycles
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Formula;
    use ChannelKind::*;

    /// Integrator with feedback u₂ = g + ∫u₂ du₁, constant x and u₄ = u₂·x.
    fn feedback_example() -> Network {
        let mut net = Network::new();
        net.input("g", XScalar).input("u1", XStream);
        net.integrator("u2", XStream, "g", "u2", "u1");
        net.constant("u3", XStream, Formula::x());
        net.multiplier("u4", XStream, "u2", "u3");
        net.output("u4", "u4");
        net
    }

    #[test]
    fn feedback_example_is_valid() {
        let report = validate(&feedback_example());
        assert!(report.is_valid(), "{:?}", report.violations);
        let labels: Vec<_> = report.proper_inputs.iter().map(|p| p.label.as_str()).collect();
        assert_eq!(labels, ["g", "u1"]);
        assert_eq!(report.mixed, ["u2", "u3"]);
        assert_eq!(report.proper_outputs, ["u4"]);
    }

    #[test]
    fn self_loop_multiplier_is_an_algebraic_cycle() {
        let mut net = Network::new();
        net.time("t", RStream);
        net.multiplier("m", RStream, "t", "m");
        let report = validate(&net);
        assert_eq!(report.violations, [Violation::AlgebraicCycle { modules: vec!["m".into()] }]);
    }

    #[test]
    fn longer_cycles_are_found() {
        let mut net = Network::new();
        net.time("t", RStream);
        net.adder("a", RStream, "t", "b");
        net.multiplier("b", RStream, "a", "t");
        let report = validate(&net);
        assert_eq!(report.violations, [Violation::AlgebraicCycle { modules: vec!["a".into(), "b".into()] }]);
    }

    #[test]
    fn mixed_kinds_on_an_adder() {
        let mut net = Network::new();
        net.time("t", RStream);
        net.constant("x", XStream, Formula::x());
        net.adder("s", RStream, "t", "x");
        let report = validate(&net);
        assert_eq!(
            report.violations,
            [Violation::KindMismatch { sink: "s.in2".into(), expected: RStream, found: XStream }]
        );
    }

    #[test]
    fn reports_every_wiring_problem() {
        let mut net = Network::new();
        net.time("t", RStream);
        net.time("t", RStream);
        net.adder("s", RStream, "t", "nope");
        net.connect("t", "s", Port::In1);
        net.connect("t", "ghost", Port::In1);
        net.connect("t", "s", Port::C);
        net.constant("k", RScalar, Formula::x());
        let report = validate(&net);
        let v = &report.violations;
        assert!(v.contains(&Violation::DuplicateName("t".into())));
        assert!(v.contains(&Violation::DanglingSource { source: "nope".into(), sink: "s.in2".into() }));
        assert!(v.contains(&Violation::UnknownModule { module: "ghost".into() }));
        assert!(v.contains(&Violation::UnknownPort { module: "s".into(), port: Port::C }));
        assert!(v.contains(&Violation::MultiplyDriven { sink: "s.in1".into(), sources: vec!["t".into(), "t".into()] }));
        assert!(v.iter().any(|x| matches!(x, Violation::InvalidModule { module, .. } if module == "k")));
    }

    #[test]
    fn unconnected_ports_become_proper_inputs() {
        let mut net = Network::new();
        net.time("t", RStream);
        net.module("w", ModuleKind::Integrator, RStream);
        net.connect("t", "w", Port::V);
        let report = validate(&net);
        assert!(report.is_valid());
        let labels: Vec<_> = report.proper_inputs.iter().map(|p| (p.label.as_str(), p.kind)).collect();
        assert_eq!(labels, [("w.c", RScalar), ("w.u", RStream)]);
    }

    #[test]
    fn limit_outputs_cannot_be_consumed() {
        let mut net = Network::new();
        net.time("t", XStream);
        net.limit("l", XStream, "t", "T");
        net.integrator("w", XStream, "l", "t", "t");
        let report = validate(&net);
        assert!(report.violations.contains(&Violation::LimitOutputConsumed { module: "l".into(), sink: "w.c".into() }));
    }
}
