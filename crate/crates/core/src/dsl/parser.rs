use std::collections::{BTreeSet, HashMap};

use super::lexer::{lex, lines, Line, Tok, Token};
use super::{
    BindDecl, Diagnostic, DslDocument, ExpectDecl, GridDecl, GridLayout, ModulusDecl, SimulateDirective, Span,
};
use crate::formula::{BinOp, Formula, Func, Var};
use crate::limits::{Flavor, Generator, ModulusForm, ModulusSpec};
use crate::network::{check_binding, validate, Binding, ChannelKind, ModuleKind, Port, Violation, Wire};

const MAX_DEPTH: usize = 200;
/// Bounds the depth of left-leaning operator chains.
const MAX_OPERATORS: usize = 2000;

const STATEMENTS: &str = "grid, family, modulus, input, time, const, add, mul, integrator, limit, wire, output, bind, simulate, precision, expect";

/// Parses a UTF-8 document. Fails with every diagnostic found; statements
/// after a bad one are still checked.
pub fn parse(text: &str) -> Result<DslDocument, Vec<Diagnostic>> {
    let mut p = Parser::default();
    let mut diags = Vec::new();
    let mut header = true;
    for line in lines(text) {
        let trimmed = line.text.trim();
        if header {
            if let Some(rest) = trimmed.strip_prefix('#') {
                p.doc.description.push(rest.strip_prefix(' ').unwrap_or(rest).trim_end().to_string());
                continue;
            }
            header = false;
        }
        let toks = match lex(&line) {
            Ok(t) => t,
            Err(e) => {
                diags.push(Diagnostic::error(e.span, e.message));
                continue;
            }
        };
        if toks.is_empty() {
            continue;
        }
        let mut c = Cursor { toks: &toks, pos: 0, line, depth: 0, operators: 0 };
        if let Err(d) = p.statement(&mut c) {
            diags.push(d);
        }
    }
    if diags.is_empty() {
        diags = p.check();
    }
    if diags.is_empty() {
        p.doc.network.canonicalize();
        Ok(p.doc)
    } else {
        diags.sort_by_key(|d| (d.span.byte_start, d.span.byte_end));
        Err(diags)
    }
}

/// Like [`parse`], reporting invalid UTF-8 as a diagnostic.
pub fn parse_bytes(bytes: &[u8]) -> Result<DslDocument, Vec<Diagnostic>> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(text),
        Err(e) => {
            let at = e.valid_up_to();
            let prefix = std::str::from_utf8(&bytes[..at]).expect("valid prefix");
            let line_start = prefix.rfind('\n').map_or(0, |i| i + 1);
            let col = prefix[line_start..].chars().count() + 1;
            let len = e.error_len().unwrap_or(bytes.len() - at);
            let span = Span {
                line: prefix.matches('\n').count() + 1,
                col_start: col,
                col_end: col + 1,
                byte_start: at,
                byte_end: at + len,
            };
            Err(vec![Diagnostic::error(span, "source is not valid UTF-8").with_hint("save the file as UTF-8")])
        }
    }
}

/// Parses a single formula such as `2^x/(x - 1)`.
pub fn parse_formula(src: &str) -> Result<Formula, Diagnostic> {
    let line = lines(src).next().expect("split yields at least one item");
    if src.contains('\n') {
        let at = line.text.len();
        return Err(Diagnostic::error(line.span(at, at), "a formula must fit on one line"));
    }
    let toks = lex(&line).map_err(|e| Diagnostic::error(e.span, e.message))?;
    let mut c = Cursor { toks: &toks, pos: 0, line, depth: 0, operators: 0 };
    let f = c.formula()?;
    c.end()?;
    Ok(f)
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    line: Line<'a>,
    depth: usize,
    operators: usize,
}

type PResult<T> = Result<T, Diagnostic>;

impl Cursor<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn span(&self) -> Span {
        self.toks.get(self.pos).map_or_else(|| self.line.end_span(), |t| t.span)
    }

    fn text(&self, span: Span) -> &str {
        let start = span.byte_start - self.line.byte_offset;
        let end = span.byte_end - self.line.byte_offset;
        &self.line.text[start..end]
    }

    fn unexpected(&self, what: &str) -> Diagnostic {
        match self.toks.get(self.pos) {
            Some(t) => Diagnostic::error(t.span, format!("expected {what}, found '{}'", self.text(t.span))),
            None => Diagnostic::error(self.line.end_span(), format!("expected {what}, found end of line")),
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Span)> {
        match self.peek() {
            Some(Tok::Ident(name)) => {
                let out = (name.clone(), self.span());
                self.pos += 1;
                Ok(out)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(n)) if n == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<Span> {
        let span = self.span();
        if self.eat_keyword(kw) {
            Ok(span)
        } else {
            Err(self.unexpected(&format!("'{kw}'")))
        }
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn punct(&mut self, c: char) -> PResult<Span> {
        let span = self.span();
        if self.eat_punct(c) {
            Ok(span)
        } else {
            Err(self.unexpected(&format!("'{c}'")))
        }
    }

    fn number(&mut self) -> PResult<(f64, Span)> {
        let start = self.span();
        let neg = self.eat_punct('-');
        match self.peek() {
            Some(&Tok::Number(v)) => {
                let end = self.span();
                self.pos += 1;
                Ok((if neg { -v } else { v }, join(start, end)))
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    fn count(&mut self, what: &str) -> PResult<(u64, Span)> {
        match self.peek() {
            Some(&Tok::Number(v)) if v.fract() == 0.0 && v <= u32::MAX as f64 => {
                let span = self.span();
                self.pos += 1;
                Ok((v as u64, span))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn kind(&mut self) -> PResult<(ChannelKind, Span)> {
        let (word, span) = self.ident("a channel kind")?;
        ChannelKind::from_keyword(&word).map(|k| (k, span)).ok_or_else(|| {
            Diagnostic::error(span, format!("unknown channel kind '{word}'")).with_hint("use rscalar, xscalar, rstream or xstream")
        })
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn end(&self) -> PResult<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.unexpected("end of line"))
        }
    }

    fn operator(&mut self) -> PResult<()> {
        self.operators += 1;
        if self.operators > MAX_OPERATORS {
            return Err(Diagnostic::error(self.span(), "formula too long"));
        }
        self.pos += 1;
        Ok(())
    }

    fn formula(&mut self) -> PResult<Formula> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Punct('+')) => BinOp::Add,
                Some(Tok::Punct('-')) => BinOp::Sub,
                _ => break,
            };
            self.operator()?;
            let rhs = self.term()?;
            lhs = Formula::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> PResult<Formula> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Punct('*')) => BinOp::Mul,
                Some(Tok::Punct('/')) => BinOp::Div,
                _ => break,
            };
            self.operator()?;
            let rhs = self.unary()?;
            lhs = Formula::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    /// Every recursive path of the grammar passes through here.
    fn unary(&mut self) -> PResult<Formula> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(Diagnostic::error(self.span(), "formula nested too deeply"));
        }
        let out = self.unary_inner();
        self.depth -= 1;
        out
    }

    fn unary_inner(&mut self) -> PResult<Formula> {
        if self.eat_punct('-') {
            // a literal directly after the sign folds into a negative number
            let folded = match (self.toks.get(self.pos).map(|t| &t.tok), self.toks.get(self.pos + 1).map(|t| &t.tok)) {
                (Some(&Tok::Number(v)), next) if next != Some(&Tok::Punct('^')) => Some(v),
                _ => None,
            };
            let out = if let Some(v) = folded {
                self.pos += 1;
                Formula::Num(-v)
            } else {
                Formula::Neg(Box::new(self.unary()?))
            };
            return Ok(out);
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Formula> {
        let base = self.primary()?;
        if self.eat_punct('^') {
            let exp = self.unary()?;
            return Ok(Formula::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> PResult<Formula> {
        match self.peek().cloned() {
            Some(Tok::Number(v)) => {
                self.pos += 1;
                Ok(Formula::Num(v))
            }
            Some(Tok::Punct('(')) => {
                self.pos += 1;
                let f = self.formula()?;
                self.punct(')')?;
                Ok(f)
            }
            Some(Tok::Ident(name)) => {
                let span = self.span();
                self.pos += 1;
                match name.as_str() {
                    "t" => Ok(Formula::Var(Var::T)),
                    "x" => Ok(Formula::Var(Var::X)),
                    "pi" => Ok(Formula::Pi),
                    "e" => Ok(Formula::E),
                    other => match Func::from_name(other) {
                        Some(func) => {
                            self.punct('(')?;
                            let arg = self.formula()?;
                            self.punct(')')?;
                            Ok(Formula::Call(func, Box::new(arg)))
                        }
                        None => Err(Diagnostic::error(span, format!("unknown name '{other}' in formula"))
                            .with_hint("formulas use t, x, pi, e and exp, ln, sin, cos, atan, sqrt, abs")),
                    },
                }
            }
            _ => Err(self.unexpected("a formula")),
        }
    }
}

fn join(a: Span, b: Span) -> Span {
    Span { line: a.line, col_start: a.col_start, col_end: b.col_end, byte_start: a.byte_start, byte_end: b.byte_end }
}

struct WireSpans {
    source: Span,
    module: Span,
    port: Span,
}

#[derive(Default)]
struct Parser {
    doc: DslDocument,
    decl: HashMap<String, Span>,
    duplicate_decls: Vec<(String, Span)>,
    wires: Vec<WireSpans>,
    outputs: Vec<Span>,
    binds: Vec<Span>,
    expects: Vec<Span>,
    limit_moduli: Vec<(String, Span)>,
    moduli: Vec<Span>,
    grid: Option<Span>,
    first_spatial: Option<Span>,
}

impl Parser {
    fn statement(&mut self, c: &mut Cursor<'_>) -> PResult<()> {
        let (kw, kw_span) = c.ident("a statement")?;
        match kw.as_str() {
            "grid" => self.grid(c, kw_span)?,
            "family" => {
                c.keyword("start")?;
                let (n, span) = c.count("a pseudonorm index")?;
                if self.doc.family_start.is_some() {
                    return Err(Diagnostic::error(kw_span, "family declared twice"));
                }
                if n > 1000 {
                    return Err(Diagnostic::error(span, "the first pseudonorm index must be at most 1000"));
                }
                self.doc.family_start = Some(n as u32);
            }
            "modulus" => self.modulus(c)?,
            "input" => {
                let (name, span) = c.ident("an input name")?;
                c.punct(':')?;
                let (kind, kspan) = c.kind()?;
                c.end()?;
                self.declare(&name, span, kind, kspan);
                self.doc.network.input(&name, kind);
            }
            "time" => {
                let (name, span) = c.ident("a module name")?;
                c.punct(':')?;
                let (kind, kspan) = c.kind()?;
                c.end()?;
                self.declare(&name, span, kind, kspan);
                self.doc.network.time(&name, kind);
            }
            "const" => {
                let (name, span) = c.ident("a module name")?;
                c.punct(':')?;
                let (kind, kspan) = c.kind()?;
                c.punct('=')?;
                let f = c.formula()?;
                c.end()?;
                self.declare(&name, span, kind, kspan);
                self.doc.network.constant(&name, kind, f);
            }
            "add" | "mul" | "integrator" | "limit" => self.module(c, &kw)?,
            "wire" => {
                let (source, sspan) = c.ident("a source channel")?;
                if c.peek() != Some(&Tok::Arrow) {
                    return Err(c.unexpected("'->'"));
                }
                c.pos += 1;
                let (module, mspan) = c.ident("a module name")?;
                c.punct('.')?;
                let (port, pspan) = c.ident("a port name")?;
                c.end()?;
                let port = Port::from_name(&port).ok_or_else(|| {
                    Diagnostic::error(pspan, format!("unknown port '{port}'")).with_hint("ports are in1, in2, c, u, v and in")
                })?;
                self.wire(&source, sspan, &module, mspan, port, pspan);
            }
            "output" => {
                let (label, _) = c.ident("an output label")?;
                c.punct('=')?;
                let (source, sspan) = c.ident("a source channel")?;
                c.end()?;
                self.outputs.push(sspan);
                self.doc.network.output(&label, &source);
            }
            "bind" => {
                let (mut label, lspan) = c.ident("an input label")?;
                let mut span = lspan;
                if c.eat_punct('.') {
                    let (port, pspan) = c.ident("a port name")?;
                    label = format!("{label}.{port}");
                    span = join(lspan, pspan);
                }
                c.punct('=')?;
                let value = c.formula()?;
                let derivative = if c.eat_punct(';') {
                    c.keyword("deriv")?;
                    Some(c.formula()?)
                } else {
                    None
                };
                c.end()?;
                self.binds.push(span);
                self.doc.bindings.push(BindDecl { label, binding: Binding { value, derivative } });
            }
            "simulate" => {
                let (t_end, span) = c.number()?;
                let samples = if c.eat_keyword("samples") {
                    let (n, nspan) = c.count("a sample count")?;
                    if !(2..=10_000_000).contains(&n) {
                        return Err(Diagnostic::error(nspan, "sample count must lie in 2..=10000000"));
                    }
                    Some(n as usize)
                } else {
                    None
                };
                c.end()?;
                if self.doc.simulate.is_some() {
                    return Err(Diagnostic::error(kw_span, "simulate declared twice"));
                }
                if !(t_end > 0.0) {
                    return Err(Diagnostic::error(span, "the horizon must be positive"));
                }
                self.doc.simulate = Some(SimulateDirective { t_end, samples });
            }
            "precision" => {
                let (tau, span) = c.number()?;
                c.end()?;
                if self.doc.precision.is_some() {
                    return Err(Diagnostic::error(kw_span, "precision declared twice"));
                }
                if !(0.0..=60.0).contains(&tau) {
                    return Err(Diagnostic::error(span, "precision must lie in [0, 60]"));
                }
                self.doc.precision = Some(tau);
            }
            "expect" => {
                let (channel, span) = c.ident("a channel name")?;
                c.punct('=')?;
                let formula = c.formula()?;
                c.end()?;
                self.expects.push(span);
                self.doc.expects.push(ExpectDecl { channel, formula });
            }
            other => {
                return Err(Diagnostic::error(kw_span, format!("unknown statement '{other}'"))
                    .with_hint(format!("statements: {STATEMENTS}")));
            }
        }
        Ok(())
    }

    fn declare(&mut self, name: &str, span: Span, kind: ChannelKind, kind_span: Span) {
        if self.decl.contains_key(name) {
            self.duplicate_decls.push((name.to_string(), span));
        } else {
            self.decl.insert(name.to_string(), span);
        }
        if kind.is_spatial() && self.first_spatial.is_none() {
            self.first_spatial = Some(kind_span);
        }
    }

    fn wire(&mut self, source: &str, sspan: Span, module: &str, mspan: Span, port: Port, pspan: Span) {
        self.doc.network.wires.push(Wire { source: source.into(), module: module.into(), port });
        self.wires.push(WireSpans { source: sspan, module: mspan, port: pspan });
    }

    fn grid(&mut self, c: &mut Cursor<'_>, kw_span: Span) -> PResult<()> {
        c.punct('[')?;
        let (lower, _) = c.number()?;
        c.punct(',')?;
        let upper = if c.eat_keyword("inf") { None } else { Some(c.number()?.0) };
        c.punct(']')?;
        let layout = if c.eat_keyword("step") {
            let (step, _) = c.number()?;
            let upto = if c.eat_keyword("upto") { Some(c.number()?.0) } else { None };
            GridLayout::Step { step, upto }
        } else if c.eat_keyword("points") {
            let mut pts = vec![c.number()?.0];
            while c.eat_punct(',') {
                pts.push(c.number()?.0);
            }
            GridLayout::Points(pts)
        } else {
            return Err(c.unexpected("'step' or 'points'"));
        };
        c.end()?;
        if self.doc.grid.is_some() {
            return Err(Diagnostic::error(kw_span, "grid declared twice"));
        }
        let span = join(kw_span, c.toks.last().map_or(kw_span, |t| t.span));
        let decl = GridDecl { lower, upper, layout };
        decl.build().map_err(|e| Diagnostic::error(span, e.to_string()))?;
        self.grid = Some(span);
        self.doc.grid = Some(decl);
        Ok(())
    }

    fn modulus(&mut self, c: &mut Cursor<'_>) -> PResult<()> {
        let (name, span) = c.ident("a modulus name")?;
        c.punct('=')?;
        let flavor = if c.eat_keyword("discrete") { Flavor::Discrete } else { Flavor::Continuous };
        let (word, wspan) = c.ident("a modulus form")?;
        let form = match word.as_str() {
            "linear" => ModulusForm::Linear(c.number()?.0),
            "exp2" => ModulusForm::Exp2(c.number()?.0),
            "table" => {
                let mut pts = Vec::new();
                loop {
                    let (a, _) = c.number()?;
                    let (b, _) = c.number()?;
                    pts.push((a, b));
                    if !c.eat_punct(',') {
                        break;
                    }
                }
                ModulusForm::Table(pts)
            }
            "network" => {
                let (g, gspan) = c.ident("'linear' or 'exp2'")?;
                let (v, _) = c.number()?;
                match g.as_str() {
                    "linear" => ModulusForm::Network(Generator::Linear(v)),
                    "exp2" => ModulusForm::Network(Generator::Exp2(v)),
                    _ => return Err(Diagnostic::error(gspan, format!("unknown generator '{g}'")).with_hint("use linear or exp2")),
                }
            }
            _ => {
                return Err(Diagnostic::error(wspan, format!("unknown modulus form '{word}'"))
                    .with_hint("use linear, exp2, table or network"))
            }
        };
        c.end()?;
        let spec = ModulusSpec { flavor, form };
        if let Err(reason) = spec.check() {
            return Err(Diagnostic::error(join(wspan, c.toks.last().map_or(wspan, |t| t.span)), reason));
        }
        if self.doc.moduli.iter().any(|m| m.name == name) {
            return Err(Diagnostic::error(span, format!("modulus '{name}' declared twice")));
        }
        self.moduli.push(span);
        self.doc.moduli.push(ModulusDecl { name, spec });
        Ok(())
    }

    fn module(&mut self, c: &mut Cursor<'_>, kw: &str) -> PResult<()> {
        let (name, span) = c.ident("a module name")?;
        c.punct(':')?;
        let (kind, kspan) = c.kind()?;
        let mut ports = Vec::new();
        if c.eat_punct('{') {
            loop {
                if c.eat_punct('}') {
                    break;
                }
                let (port, pspan) = c.ident("a port name")?;
                c.punct('=')?;
                let (source, sspan) = c.ident("a source channel")?;
                ports.push((port, pspan, source, sspan));
                if !c.eat_punct(';') {
                    c.punct('}')?;
                    break;
                }
            }
        }
        let module_kind = match kw {
            "add" => ModuleKind::Adder,
            "mul" => ModuleKind::Multiplier,
            "integrator" => ModuleKind::Integrator,
            _ => {
                c.keyword("modulus")?;
                let (m, mspan) = c.ident("a modulus name")?;
                self.limit_moduli.push((m.clone(), mspan));
                ModuleKind::Limit { modulus: m }
            }
        };
        c.end()?;
        let mut resolved = Vec::new();
        for (port, pspan, source, sspan) in ports {
            let p = Port::from_name(&port).filter(|p| module_kind.ports().contains(p)).ok_or_else(|| {
                let names: Vec<_> = module_kind.ports().iter().map(|p| p.name()).collect();
                Diagnostic::error(pspan, format!("a {kw} module has no port '{port}'")).with_hint(format!("ports: {}", names.join(", ")))
            })?;
            resolved.push((p, pspan, source, sspan));
        }
        self.declare(&name, span, kind, kspan);
        self.doc.network.module(&name, module_kind, kind);
        for (p, pspan, source, sspan) in resolved {
            self.wire(&source, sspan, &name, span, p, pspan);
        }
        Ok(())
    }

    /// Name resolution and network validation, run once the syntax is clean.
    fn check(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let net = &self.doc.network;
        for (name, span) in &self.duplicate_decls {
            out.push(Diagnostic::error(*span, format!("'{name}' is declared more than once")));
        }
        for (w, s) in net.wires.iter().zip(&self.wires) {
            if net.source_kind(&w.source).is_none() {
                out.push(Diagnostic::error(s.source, format!("unknown channel '{}'", w.source)));
            }
            match net.find_module(&w.module) {
                None => out.push(Diagnostic::error(s.module, format!("unknown module '{}'", w.module))),
                Some(m) if m.port_kind(w.port).is_none() => {
                    out.push(Diagnostic::error(s.port, format!("module '{}' has no port '{}'", w.module, w.port)))
                }
                _ => {}
            }
        }
        for (o, span) in net.outputs.iter().zip(&self.outputs) {
            if net.source_kind(&o.source).is_none() {
                out.push(Diagnostic::error(*span, format!("unknown channel '{}'", o.source)));
            }
        }
        let mut labels = BTreeSet::new();
        for o in &net.outputs {
            if !labels.insert(o.label.as_str()) {
                out.push(Diagnostic::error(self.outputs[0], format!("output label '{}' used twice", o.label)));
            }
        }
        for (m, span) in &self.limit_moduli {
            if self.doc.modulus(m).is_none() {
                out.push(Diagnostic::error(*span, format!("unknown modulus '{m}'")));
            }
        }
        if let (Some(span), None) = (self.first_spatial, &self.doc.grid) {
            out.push(
                Diagnostic::error(span, "function-space channels need a grid declaration").with_hint("add e.g. 'grid [1, 6] step 0.25'"),
            );
        }
        if !out.is_empty() {
            return out;
        }

        let report = validate(net);
        for v in &report.violations {
            if let Some(d) = self.locate(v) {
                out.push(d);
            }
        }
        if !out.is_empty() {
            return out;
        }

        let mut bound = BTreeSet::new();
        for (b, span) in self.doc.bindings.iter().zip(&self.binds) {
            let Some(input) = report.proper_inputs.iter().find(|p| p.label == b.label) else {
                out.push(Diagnostic::error(*span, format!("'{}' is not a proper input", b.label)));
                continue;
            };
            if !bound.insert(b.label.as_str()) {
                out.push(Diagnostic::error(*span, format!("'{}' is bound twice", b.label)));
            }
            if let Err(e) = check_binding(input, &b.binding) {
                out.push(Diagnostic::error(*span, e.to_string()));
            }
        }
        for (e, span) in self.doc.expects.iter().zip(&self.expects) {
            let known = net.source_kind(&e.channel).is_some() || net.outputs.iter().any(|o| o.label == e.channel);
            if !known {
                out.push(Diagnostic::error(*span, format!("unknown channel '{}'", e.channel)));
            }
        }
        out
    }

    fn locate(&self, v: &Violation) -> Option<Diagnostic> {
        let net = &self.doc.network;
        let wire_span = |sink: &str, nth: usize| {
            net.wires
                .iter()
                .zip(&self.wires)
                .filter(|(w, _)| format!("{}.{}", w.module, w.port) == sink)
                .nth(nth)
                .map(|(_, s)| s.source)
        };
        let span = match v {
            // reported by name resolution
            Violation::DuplicateName(_)
            | Violation::DanglingSource { .. }
            | Violation::UnknownModule { .. }
            | Violation::UnknownPort { .. } => return None,
            Violation::KindMismatch { sink, .. } => wire_span(sink, 0),
            Violation::MultiplyDriven { sink, .. } => wire_span(sink, 1),
            Violation::LimitOutputConsumed { sink, .. } => wire_span(sink, 0),
            Violation::InvalidModule { module, .. } => self.decl.get(module).copied(),
            Violation::AlgebraicCycle { modules } => self.decl.get(&modules[0]).copied(),
        }?;
        Some(Diagnostic::error(span, v.to_string()))
    }
}
