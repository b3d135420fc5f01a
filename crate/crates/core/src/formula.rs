//! Closed-form expressions in the time variable `t` and the spatial variable `x`.
//!
//! Formulas are used for function-valued constants (evaluated once on the
//! spatial grid), for proper-input bindings, and for closed-form oracles.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Var {
    T,
    X,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Atan,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 7] = [
        Func::Exp,
        Func::Ln,
        Func::Sin,
        Func::Cos,
        Func::Atan,
        Func::Sqrt,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Atan => "atan",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Exp => v.exp(),
            Func::Ln => v.ln(),
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Atan => v.atan(),
            Func::Sqrt => v.sqrt(),
            Func::Abs => v.abs(),
        }
    }
}

/// Expression tree. `Num` literals are always finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Formula {
    Num(f64),
    Var(Var),
    Pi,
    E,
    Neg(Box<Formula>),
    Bin(BinOp, Box<Formula>, Box<Formula>),
    Call(Func, Box<Formula>),
}

impl Formula {
    pub fn num(v: f64) -> Formula {
        Formula::Num(v)
    }

    pub fn t() -> Formula {
        Formula::Var(Var::T)
    }

    pub fn x() -> Formula {
        Formula::Var(Var::X)
    }

    /// Parses a formula with the DSL expression grammar.
    pub fn parse(src: &str) -> Result<Formula, crate::dsl::Diagnostic> {
        crate::dsl::parse_formula(src)
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        match self {
            Formula::Num(v) => *v,
            Formula::Var(Var::T) => t,
            Formula::Var(Var::X) => x,
            Formula::Pi => std::f64::consts::PI,
            Formula::E => std::f64::consts::E,
            Formula::Neg(a) => -a.eval(t, x),
            Formula::Bin(op, a, b) => {
                let (a, b) = (a.eval(t, x), b.eval(t, x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Formula::Call(f, a) => f.apply(a.eval(t, x)),
        }
    }

    pub fn uses(&self, var: Var) -> bool {
        match self {
            Formula::Var(v) => *v == var,
            Formula::Num(_) | Formula::Pi | Formula::E => false,
            Formula::Neg(a) | Formula::Call(_, a) => a.uses(var),
            Formula::Bin(_, a, b) => a.uses(var) || b.uses(var),
        }
    }

    /// Returns the literal value when the formula is a bare number.
    pub fn as_number(&self) -> Option<f64> {
        match self {
            Formula::Num(v) => Some(*v),
            _ => None,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent: u8) -> fmt::Result {
        match self {
            Formula::Num(v) => {
                // a negative literal binds like unary minus
                if *v < 0.0 && parent > 2 {
                    write!(f, "({})", format_number(*v))
                } else {
                    f.write_str(&format_number(*v))
                }
            }
            Formula::Var(Var::T) => f.write_str("t"),
            Formula::Var(Var::X) => f.write_str("x"),
            Formula::Pi => f.write_str("pi"),
            Formula::E => f.write_str("e"),
            Formula::Neg(a) => {
                let wrap = parent > 2;
                if wrap {
                    f.write_str("(")?;
                }
                f.write_str("-")?;
                if let Formula::Num(v) = **a {
                    // keep the literal from folding into a negative number
                    write!(f, "({})", format_number(v))?;
                } else {
                    a.fmt_prec(f, 3)?;
                }
                if wrap {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Formula::Bin(op, a, b) => {
                let p = op.precedence();
                let wrap = p < parent;
                if wrap {
                    f.write_str("(")?;
                }
                if *op == BinOp::Pow {
                    // right associative
                    a.fmt_prec(f, p + 1)?;
                    f.write_str("^")?;
                    b.fmt_prec(f, 3)?;
                } else {
                    a.fmt_prec(f, p)?;
                    write!(f, " {} ", op.symbol())?;
                    b.fmt_prec(f, p + 1)?;
                }
                if wrap {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Formula::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.fmt_prec(f, 0)?;
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl From<f64> for Formula {
    fn from(v: f64) -> Self {
        Formula::Num(v)
    }
}

/// Shortest decimal text that parses back to exactly `v`.
pub fn format_number(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        // also maps -0.0 to "0"
        return format!("{}", v as i64);
    }
    let plain = format!("{v}");
    let exp = format!("{v:e}");
    if exp.len() < plain.len() {
        exp
    } else {
        plain
    }
}
