use std::collections::BTreeMap;

use thiserror::Error;

use super::compile::{compile, CompileError, CompiledSystem};
use super::validate::ProperInput;
use super::{ChannelKind, Network};
use crate::formula::{Formula, Var};
use crate::frechet::SpatialGrid;

/// Value supplied for a proper input. Stream inputs carry their time
/// derivative as well; scalar inputs must not.
#[derive(Debug, Clone, PartialEq)]
pub struct Binding {
    pub value: Formula,
    pub derivative: Option<Formula>,
}

impl Binding {
    pub fn scalar(value: Formula) -> Binding {
        Binding { value, derivative: None }
    }

    pub fn stream(value: Formula, derivative: Formula) -> Binding {
        Binding { value, derivative: Some(derivative) }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BindError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("proper input '{0}' has no binding")]
    Missing(String),
    #[error("'{0}' is not a proper input of the network")]
    Unknown(String),
    #[error("stream input '{0}' needs a derivative alongside its value")]
    MissingDerivative(String),
    #[error("input '{label}' is a {kind}: {reason}")]
    KindMismatch { label: String, kind: ChannelKind, reason: String },
}

/// A compiled system with every proper input closed by a formula.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundNetwork {
    system: CompiledSystem,
    bindings: Vec<Binding>,
}

impl BoundNetwork {
    /// Compiles and binds in one go.
    pub fn new(
        net: &Network,
        grid: Option<std::sync::Arc<SpatialGrid>>,
        bindings: &BTreeMap<String, Binding>,
    ) -> Result<BoundNetwork, BindError> {
        bind(compile(net, grid)?, bindings)
    }

    pub fn system(&self) -> &CompiledSystem {
        &self.system
    }

    /// Bindings in proper-input order.
    pub fn bindings(&self) -> &[Binding] {
        &self.bindings
    }
}

/// Checks that a binding suits the kind of its proper input.
pub fn check_binding(input: &ProperInput, b: &Binding) -> Result<(), BindError> {
    let mismatch = |reason: &str| BindError::KindMismatch {
        label: input.label.clone(),
        kind: input.kind,
        reason: reason.to_string(),
    };
    for f in std::iter::once(&b.value).chain(b.derivative.as_ref()) {
        if !input.kind.is_stream() && f.uses(Var::T) {
            return Err(mismatch("a scalar binding cannot depend on t"));
        }
        if !input.kind.is_spatial() && f.uses(Var::X) {
            return Err(mismatch("a real binding cannot depend on x"));
        }
    }
    match (input.kind.is_stream(), &b.derivative) {
        (true, None) => Err(BindError::MissingDerivative(input.label.clone())),
        (false, Some(_)) => Err(mismatch("a scalar binding takes no derivative")),
        _ => Ok(()),
    }
}

pub fn bind(system: CompiledSystem, bindings: &BTreeMap<String, Binding>) -> Result<BoundNetwork, BindError> {
    for label in bindings.keys() {
        if !system.inputs().iter().any(|p| &p.label == label) {
            return Err(BindError::Unknown(label.clone()));
        }
    }
    let mut ordered = Vec::with_capacity(system.inputs().len());
    for input in system.inputs() {
        let b = bindings.get(&input.label).ok_or_else(|| BindError::Missing(input.label.clone()))?;
        check_binding(input, b)?;
        ordered.push(b.clone());
    }
    Ok(BoundNetwork { system, bindings: ordered })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ChannelKind::*;

    fn inverter() -> Network {
        let mut net = Network::new();
        net.input("k", RScalar).input("b", RStream);
        net.constant("minus1", RStream, Formula::num(-1.0));
        net.multiplier("sq", RStream, "a", "a");
        net.multiplier("neg", RStream, "sq", "minus1");
        net.integrator("a", RStream, "k", "neg", "b");
        net
    }

    fn inverter_bindings() -> BTreeMap<String, Binding> {
        BTreeMap::from([
            ("k".to_string(), Binding::scalar(Formula::num(1.0))),
            ("b".to_string(), Binding::stream(Formula::t(), Formula::num(1.0))),
        ])
    }

    #[test]
    fn binds_in_input_order() {
        let bound = BoundNetwork::new(&inverter(), None, &inverter_bindings()).unwrap();
        assert_eq!(bound.bindings()[0].value, Formula::num(1.0));
        assert_eq!(bound.bindings()[1].value, Formula::t());
    }

    #[test]
    fn closed_networks_need_no_bindings() {
        let mut net = Network::new();
        net.time("t", RStream);
        net.constant("one", RStream, Formula::num(1.0));
        net.constant("c", RScalar, Formula::num(0.0));
        net.integrator("w", RStream, "c", "one", "t");
        assert!(BoundNetwork::new(&net, None, &BTreeMap::new()).is_ok());
    }

    #[test]
    fn binding_errors() {
        let mut b = inverter_bindings();
        b.remove("k");
        assert_eq!(BoundNetwork::new(&inverter(), None, &b), Err(BindError::Missing("k".into())));

        let mut b = inverter_bindings();
        b.insert("b".into(), Binding::scalar(Formula::t()));
        assert_eq!(BoundNetwork::new(&inverter(), None, &b), Err(BindError::MissingDerivative("b".into())));

        let mut b = inverter_bindings();
        b.insert("k".into(), Binding::scalar(Formula::x()));
        assert!(matches!(BoundNetwork::new(&inverter(), None, &b), Err(BindError::KindMismatch { .. })));

        let mut b = inverter_bindings();
        b.insert("zz".into(), Binding::scalar(Formula::num(0.0)));
        assert_eq!(BoundNetwork::new(&inverter(), None, &b), Err(BindError::Unknown("zz".into())));
    }
}
