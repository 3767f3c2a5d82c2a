//! Real-analytic expressions over chart variables.
//!
//! Every Hamiltonian, perturbation, integral of motion and symplectic
//! coefficient in the crate is an [`Expr`]. The tree is immutable once built;
//! derivatives and simplifications return new trees.

mod compile;
mod diff;
mod fold;
mod parse;
pub mod random;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::ChartSpec;

pub use compile::CompiledExpr;
pub use diff::diff;
pub use fold::simplify_fold;
pub use parse::{parse, ParseError};

/// A chart coordinate. Indices are zero-based; the textual names are one-based
/// (`I1`, `z1`, `phi1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Action(usize),
    Param(usize),
    Angle(usize),
}

impl Var {
    pub fn is_angle(self) -> bool {
        matches!(self, Var::Angle(_))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Action(i) => write!(f, "I{}", i + 1),
            Var::Param(a) => write!(f, "z{}", a + 1),
            Var::Angle(i) => write!(f, "phi{}", i + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("not a chart symbol: {0:?}")]
pub struct BadSymbol(pub String);

impl FromStr for Var {
    type Err = BadSymbol;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (ctor, digits): (fn(usize) -> Var, &str) = if let Some(d) = s.strip_prefix("phi") {
            (Var::Angle, d)
        } else if let Some(d) = s.strip_prefix('I') {
            (Var::Action, d)
        } else if let Some(d) = s.strip_prefix('z') {
            (Var::Param, d)
        } else {
            return Err(BadSymbol(s.to_string()));
        };
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(BadSymbol(s.to_string()));
        }
        match digits.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(ctor(n - 1)),
            _ => Err(BadSymbol(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    /// Right operand is always an integer-valued constant.
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("no value bound for {0}")]
    MissingBinding(String),
}

/// Source of variable values for [`Expr::eval`].
pub trait Bindings {
    fn value(&self, var: Var) -> Option<f64>;
}

/// Explicit name-to-value map.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VarBinding(BTreeMap<Var, f64>);

impl VarBinding {
    pub fn new() -> Self {
        Self::default()
    }

    /// Panics on a malformed symbol name; intended for literals in tests and
    /// examples. Use [`VarBinding::insert`] with a parsed [`Var`] otherwise.
    pub fn with(mut self, name: &str, value: f64) -> Self {
        let var: Var = name.parse().expect("valid chart symbol");
        self.0.insert(var, value);
        self
    }

    pub fn insert(&mut self, var: Var, value: f64) {
        self.0.insert(var, value);
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.0.keys().copied()
    }
}

impl Bindings for VarBinding {
    fn value(&self, var: Var) -> Option<f64> {
        self.0.get(&var).copied()
    }
}

/// A point of `V×W×T^k` given as three coordinate slices.
#[derive(Debug, Clone, Copy)]
pub struct Point<'a> {
    pub actions: &'a [f64],
    pub params: &'a [f64],
    pub angles: &'a [f64],
}

impl Bindings for Point<'_> {
    fn value(&self, var: Var) -> Option<f64> {
        match var {
            Var::Action(i) => self.actions.get(i).copied(),
            Var::Param(a) => self.params.get(a).copied(),
            Var::Angle(i) => self.angles.get(i).copied(),
        }
    }
}

impl Expr {
    pub fn constant(value: f64) -> Expr {
        Expr::Const(value)
    }

    pub fn var(var: Var) -> Expr {
        Expr::Var(var)
    }

    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn one() -> Expr {
        Expr::Const(1.0)
    }

    pub fn unary(op: UnaryOp, child: Expr) -> Expr {
        Expr::Unary(op, Box::new(child))
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn powi(base: Expr, exponent: i32) -> Expr {
        Expr::binary(BinaryOp::Pow, base, Expr::Const(exponent as f64))
    }

    pub fn sin(child: Expr) -> Expr {
        Expr::unary(UnaryOp::Sin, child)
    }

    pub fn cos(child: Expr) -> Expr {
        Expr::unary(UnaryOp::Cos, child)
    }

    pub fn exp(child: Expr) -> Expr {
        Expr::unary(UnaryOp::Exp, child)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_const(&self, value: f64) -> bool {
        self.as_const() == Some(value)
    }

    /// Evaluates in IEEE double precision. A zero divisor is reported rather
    /// than producing an infinity.
    pub fn eval<B: Bindings + ?Sized>(&self, bindings: &B) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => bindings
                .value(*v)
                .ok_or_else(|| EvalError::MissingBinding(v.to_string()))?,
            Expr::Unary(op, child) => {
                let x = child.eval(bindings)?;
                match op {
                    UnaryOp::Neg => -x,
                    UnaryOp::Sin => x.sin(),
                    UnaryOp::Cos => x.cos(),
                    UnaryOp::Exp => x.exp(),
                }
            }
            Expr::Binary(op, lhs, rhs) => {
                let a = lhs.eval(bindings)?;
                let b = rhs.eval(bindings)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        a / b
                    }
                    BinaryOp::Pow => {
                        let n = b as i32;
                        if n < 0 && a == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        a.powi(n)
                    }
                }
            }
        })
    }

    /// Set of variables occurring in the folded tree.
    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        simplify_fold(self).collect_vars(&mut out);
        out
    }

    /// Variables occurring syntactically, without folding first.
    pub fn raw_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                out.insert(*v);
            }
            Expr::Unary(_, c) => c.collect_vars(out),
            Expr::Binary(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    pub fn depends_on(&self, var: Var) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(v) => *v == var,
            Expr::Unary(_, c) => c.depends_on(var),
            Expr::Binary(_, l, r) => l.depends_on(var) || r.depends_on(var),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, c) => 1 + c.node_count(),
            Expr::Binary(_, l, r) => 1 + l.node_count() + r.node_count(),
        }
    }

    /// Decides whether the expression vanishes identically on the chart
    /// domain: either it folds to the constant 0, or it evaluates to within
    /// 1e-12 of zero at 100 uniform sample points of `V×W×T^k`.
    pub fn is_identically_zero(&self, chart: &ChartSpec) -> bool {
        const SAMPLES: usize = 100;
        const THRESHOLD: f64 = 1e-12;
        let folded = simplify_fold(self);
        if let Some(c) = folded.as_const() {
            return c == 0.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_2e70);
        (0..SAMPLES).all(|_| {
            let p = chart.sample_state(&mut rng);
            matches!(folded.eval(&p.as_point()), Ok(v) if v.abs() <= THRESHOLD)
        })
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::binary(BinaryOp::Add, self, rhs)
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::binary(BinaryOp::Sub, self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::binary(BinaryOp::Mul, self, rhs)
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::binary(BinaryOp::Div, self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(UnaryOp::Neg, self)
    }
}

// Printing precedence. Higher binds tighter; mirrors the parser.
const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Const(c) if c.is_sign_negative() => PREC_NEG,
            Expr::Const(_) | Expr::Var(_) => PREC_ATOM,
            // -(a*b) prints as -a*b, which re-parses as (-a)*b: same value
            Expr::Unary(UnaryOp::Neg, c) if c.precedence() == PREC_PRODUCT => PREC_PRODUCT,
            Expr::Unary(UnaryOp::Neg, _) => PREC_NEG,
            Expr::Unary(_, _) => PREC_ATOM,
            Expr::Binary(BinaryOp::Add | BinaryOp::Sub, _, _) => PREC_SUM,
            Expr::Binary(BinaryOp::Mul | BinaryOp::Div, _, _) => PREC_PRODUCT,
            Expr::Binary(BinaryOp::Pow, _, _) => PREC_POW,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            f.write_str("(")?;
            self.fmt_at(f, 0)?;
            return f.write_str(")");
        }
        match self {
            Expr::Const(c) => fmt_number(f, *c),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Unary(UnaryOp::Neg, c) => {
                f.write_str("-")?;
                c.fmt_at(f, PREC_NEG.min(c.precedence()).max(PREC_PRODUCT))
            }
            Expr::Unary(op, c) => {
                let name = match op {
                    UnaryOp::Sin => "sin",
                    UnaryOp::Cos => "cos",
                    UnaryOp::Exp => "exp",
                    UnaryOp::Neg => unreachable!(),
                };
                write!(f, "{name}(")?;
                c.fmt_at(f, 0)?;
                f.write_str(")")
            }
            Expr::Binary(op, l, r) => {
                let (sym, prec) = match op {
                    BinaryOp::Add => ("+", PREC_SUM),
                    BinaryOp::Sub => ("-", PREC_SUM),
                    BinaryOp::Mul => ("*", PREC_PRODUCT),
                    BinaryOp::Div => ("/", PREC_PRODUCT),
                    BinaryOp::Pow => {
                        l.fmt_at(f, PREC_ATOM)?;
                        let n = r.as_const().unwrap_or(f64::NAN);
                        return write!(f, "^{}", n as i64);
                    }
                };
                l.fmt_at(f, prec)?;
                if matches!(op, BinaryOp::Add | BinaryOp::Sub) {
                    write!(f, " {sym} ")?;
                } else {
                    f.write_str(sym)?;
                }
                r.fmt_at(f, prec + 1)
            }
        }
    }
}

fn fmt_number(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c.fract() == 0.0 && c.abs() < 1e15 {
        write!(f, "{}", c as i64)
    } else {
        // Debug output is the shortest string that round-trips.
        write!(f, "{c:?}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

/// Draws a uniform point helper used by sampling checks.
pub(crate) fn uniform_in<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}
