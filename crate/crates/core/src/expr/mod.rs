//! Expression language for metric coefficients, integral coefficients and
//! normal-form parameter functions.
//!
//! Expressions are parsed once into an immutable [`Expr`] tree and then
//! evaluated with one of three number types:
//!
//! * [`Jet2`]: value plus all partials up to order two in `(x, y)`,
//! * [`ComplexJet`]: value and `z`-derivatives of a holomorphic expression,
//! * [`Taylor`]: truncated univariate Taylor series (used for `X(x)`, `Y(y)`
//!   and coordinate maps, where third derivatives are needed).
//!
//! The grammar is documented in `docs/expression-grammar.md`.

mod eval;
mod jet;
mod parse;
mod taylor;

use std::fmt;

pub use eval::{eval_complex, eval_jet, eval_univariate, ComplexJet};
pub use jet::Jet2;
pub use parse::parse;
pub use taylor::Taylor;

/// A variable reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
    Z,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::Z => "z",
        }
    }
}

/// Named constants. `I` (the imaginary unit) only exists in complex context.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    I,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

/// Which variables an expression may reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Context {
    /// A field on the chart: `x` and `y`.
    Real,
    /// A function of `x` alone, e.g. `X(x)` or a coordinate map `φ(x)`.
    FunctionOfX,
    /// A function of `y` alone, e.g. `Y(y)`.
    FunctionOfY,
    /// A holomorphic function of `z`; `i` is available as a constant.
    Complex,
}

impl Context {
    pub fn allows(self, var: Var) -> bool {
        matches!(
            (self, var),
            (Context::Real, Var::X | Var::Y)
                | (Context::FunctionOfX, Var::X)
                | (Context::FunctionOfY, Var::Y)
                | (Context::Complex, Var::Z)
        )
    }

    pub fn describe(self) -> &'static str {
        match self {
            Context::Real => "real context (x, y)",
            Context::FunctionOfX => "function of x alone",
            Context::FunctionOfY => "function of y alone",
            Context::Complex => "complex context (z)",
        }
    }
}

/// Expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Const(Constant),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    /// True if no variable occurs in the tree.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Const(_) => true,
            Expr::Var(_) => false,
            Expr::Neg(e) | Expr::Call(_, e) => e.is_constant(),
            Expr::Binary(_, l, r) => l.is_constant() && r.is_constant(),
        }
    }

    /// Real value of a variable-free, real expression.
    pub(crate) fn constant_value(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            Expr::Const(Constant::Pi) => Some(std::f64::consts::PI),
            Expr::Const(Constant::I) | Expr::Var(_) => None,
            Expr::Neg(e) => e.constant_value().map(|v| -v),
            Expr::Binary(op, l, r) => {
                let (a, b) = (l.constant_value()?, r.constant_value()?);
                Some(match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                })
            }
            Expr::Call(..) => None,
        }
    }

    /// Renders the expression in the surface syntax accepted by [`parse`].
    pub fn render(&self) -> String {
        let mut out = String::new();
        write_expr(&mut out, self);
        out
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Binary(BinOp::Pow, ..) => 4,
            Expr::Num(v) if *v < 0.0 || v.is_sign_negative() => 3,
            _ => 5,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn write_wrapped(out: &mut String, e: &Expr, wrap: bool) {
    if wrap {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

fn write_expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Num(v) => {
            if v.is_sign_negative() {
                out.push('-');
            }
            out.push_str(&format!("{}", v.abs()));
        }
        Expr::Var(v) => out.push_str(v.name()),
        Expr::Const(Constant::Pi) => out.push_str("pi"),
        Expr::Const(Constant::I) => out.push('i'),
        Expr::Neg(inner) => {
            out.push('-');
            write_wrapped(out, inner, inner.precedence() <= 2);
        }
        Expr::Call(func, arg) => {
            out.push_str(func.name());
            out.push('(');
            write_expr(out, arg);
            out.push(')');
        }
        Expr::Binary(op, l, r) => {
            let (sym, wrap_l, wrap_r) = match op {
                BinOp::Add => ("+", false, r.precedence() <= 1),
                BinOp::Sub => ("-", false, r.precedence() <= 1),
                BinOp::Mul => ("*", l.precedence() < 2, r.precedence() <= 2),
                BinOp::Div => ("/", l.precedence() < 2, r.precedence() <= 2),
                BinOp::Pow => ("^", l.precedence() <= 4, r.precedence() < 3),
            };
            write_wrapped(out, l, wrap_l);
            out.push_str(sym);
            write_wrapped(out, r, wrap_r);
        }
    }
}
