use std::fmt::Write;

use super::{DslDocument, GridLayout};
use crate::formula::format_number;
use crate::limits::{Flavor, Generator, ModulusForm};
use crate::network::{ModuleKind, Network, Wire};

/// Canonical text of a document. Sections (header, network, bindings,
/// directives) are separated by one blank line; empty sections are skipped.
pub fn print(doc: &DslDocument) -> String {
    let mut sections: Vec<String> = Vec::new();

    let mut s = String::new();
    for line in &doc.description {
        if line.is_empty() {
            s.push_str("#\n");
        } else {
            let _ = writeln!(s, "# {line}");
        }
    }
    sections.push(s);

    let mut s = String::new();
    if let Some(g) = &doc.grid {
        let upper = g.upper.map_or("inf".to_string(), format_number);
        let _ = write!(s, "grid [{}, {upper}]", format_number(g.lower));
        match &g.layout {
            GridLayout::Step { step, upto } => {
                let _ = write!(s, " step {}", format_number(*step));
                if let Some(u) = upto {
                    let _ = write!(s, " upto {}", format_number(*u));
                }
            }
            GridLayout::Points(p) => {
                let list: Vec<_> = p.iter().map(|v| format_number(*v)).collect();
                let _ = write!(s, " points {}", list.join(", "));
            }
        }
        s.push('\n');
    }
    if let Some(n) = doc.family_start {
        let _ = writeln!(s, "family start {n}");
    }
    for m in &doc.moduli {
        let _ = write!(s, "modulus {} = ", m.name);
        if m.spec.flavor == Flavor::Discrete {
            s.push_str("discrete ");
        }
        match &m.spec.form {
            ModulusForm::Linear(c) => {
                let _ = write!(s, "linear {}", format_number(*c));
            }
            ModulusForm::Exp2(c) => {
                let _ = write!(s, "exp2 {}", format_number(*c));
            }
            ModulusForm::Table(pts) => {
                let list: Vec<_> = pts.iter().map(|(a, b)| format!("{} {}", format_number(*a), format_number(*b))).collect();
                let _ = write!(s, "table {}", list.join(", "));
            }
            ModulusForm::Network(Generator::Linear(c)) => {
                let _ = write!(s, "network linear {}", format_number(*c));
            }
            ModulusForm::Network(Generator::Exp2(c)) => {
                let _ = write!(s, "network exp2 {}", format_number(*c));
            }
        }
        s.push('\n');
    }
    sections.push(s);

    sections.push(print_network(&doc.network));

    let mut s = String::new();
    for b in &doc.bindings {
        let _ = write!(s, "bind {} = {}", b.label, b.binding.value);
        if let Some(d) = &b.binding.derivative {
            let _ = write!(s, "; deriv {d}");
        }
        s.push('\n');
    }
    sections.push(s);

    let mut s = String::new();
    if let Some(sim) = &doc.simulate {
        let _ = write!(s, "simulate {}", format_number(sim.t_end));
        if let Some(n) = sim.samples {
            let _ = write!(s, " samples {n}");
        }
        s.push('\n');
    }
    if let Some(tau) = doc.precision {
        let _ = writeln!(s, "precision {}", format_number(tau));
    }
    for e in &doc.expects {
        let _ = writeln!(s, "expect {} = {}", e.channel, e.formula);
    }
    sections.push(s);

    sections.retain(|s| !s.is_empty());
    sections.join("\n")
}

fn print_network(net: &Network) -> String {
    let mut s = String::new();
    for i in &net.inputs {
        let _ = writeln!(s, "input {} : {}", i.name, i.kind);
    }
    let mut used = vec![false; net.wires.len()];
    for m in &net.modules {
        let _ = write!(s, "{} {} : {}", m.kind.keyword(), m.name, m.output);
        if let ModuleKind::Constant(f) = &m.kind {
            let _ = write!(s, " = {f}");
        }
        let mut ports = Vec::new();
        for &port in m.kind.ports() {
            let first = net.wires.iter().position(|w: &Wire| w.module == m.name && w.port == port);
            if let Some(k) = first {
                if !used[k] {
                    used[k] = true;
                    ports.push(format!("{port} = {}", net.wires[k].source));
                }
            }
        }
        if !ports.is_empty() {
            let _ = write!(s, " {{ {} }}", ports.join("; "));
        }
        if let ModuleKind::Limit { modulus } = &m.kind {
            let _ = write!(s, " modulus {modulus}");
        }
        s.push('\n');
    }
    for (w, used) in net.wires.iter().zip(&used) {
        if !used {
            let _ = writeln!(s, "wire {} -> {}.{}", w.source, w.module, w.port);
        }
    }
    for o in &net.outputs {
        let _ = writeln!(s, "output {} = {}", o.label, o.source);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn empty_document_prints_empty() {
        assert_eq!(print(&DslDocument::default()), "");
    }

    #[test]
    fn canonical_form_is_a_fixed_point() {
        let src = "\
# demo
input b : rstream
input k : rscalar
integrator a : rstream { v = b; u = neg; c = k }
mul sq : rstream
wire a -> sq.in2
wire a -> sq.in1
mul neg : rstream { in1 = sq; in2 = m1 }
const m1 : rstream = -(1)
grid [0, 1] points 0, 0.5
modulus T = discrete table 0 1, 2 3
output a = a
bind b = t; deriv 1
bind k = 1
expect a = 1/(1 + t)
precision 4
simulate 10 samples 11
";
        let doc = parse(src).unwrap();
        let text = print(&doc);
        let again = parse(&text).unwrap();
        assert_eq!(doc, again);
        assert_eq!(print(&again), text);
        assert!(text.contains("integrator a : rstream { c = k; u = neg; v = b }"));
        assert!(text.contains("mul sq : rstream { in1 = a; in2 = a }"));
        assert!(text.starts_with("# demo\n\ngrid [0, 1] points 0, 0.5\nmodulus T = discrete table 0 1, 2 3\n\ninput b"));
    }
}
