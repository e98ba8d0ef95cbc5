use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{EvalError, Point2};

/// Independent variable of a planar field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Var {
    X1,
    X2,
}

impl Var {
    pub fn index(self) -> usize {
        match self {
            Var::X1 => 0,
            Var::X2 => 1,
        }
    }

    pub fn from_index(i: usize) -> Var {
        if i == 0 {
            Var::X1
        } else {
            Var::X2
        }
    }
}

/// Closed-form scalar field over `(x1, x2)`.
///
/// Trees are immutable and share subtrees through `Arc`, so cloning is cheap
/// and values can be read from several threads at once. The enum variants build
/// nodes verbatim; the arithmetic operators and the lowercase constructors
/// (`sum`, `product`, ...) fold trivial constants so derivative trees stay small.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarExpr {
    Const(f64),
    Var(Var),
    Add(Arc<ScalarExpr>, Arc<ScalarExpr>),
    Sub(Arc<ScalarExpr>, Arc<ScalarExpr>),
    Mul(Arc<ScalarExpr>, Arc<ScalarExpr>),
    Div(Arc<ScalarExpr>, Arc<ScalarExpr>),
    Pow(Arc<ScalarExpr>, i32),
    Sin(Arc<ScalarExpr>),
    Cos(Arc<ScalarExpr>),
    Exp(Arc<ScalarExpr>),
}

use ScalarExpr as E;

impl ScalarExpr {
    pub fn constant(c: f64) -> Self {
        E::Const(c)
    }

    pub fn zero() -> Self {
        E::Const(0.0)
    }

    pub fn x1() -> Self {
        E::Var(Var::X1)
    }

    pub fn x2() -> Self {
        E::Var(Var::X2)
    }

    pub fn var(v: Var) -> Self {
        E::Var(v)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            E::Const(c) => Some(*c),
            _ => None,
        }
    }

    fn is_const(&self, value: f64) -> bool {
        matches!(self, E::Const(c) if *c == value)
    }

    pub fn sum(a: ScalarExpr, b: ScalarExpr) -> Self {
        match (&a, &b) {
            (E::Const(x), E::Const(y)) => E::Const(x + y),
            _ if a.is_const(0.0) => b,
            _ if b.is_const(0.0) => a,
            _ => E::Add(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn difference(a: ScalarExpr, b: ScalarExpr) -> Self {
        match (&a, &b) {
            (E::Const(x), E::Const(y)) => E::Const(x - y),
            _ if b.is_const(0.0) => a,
            _ if a.is_const(0.0) => Self::product(E::Const(-1.0), b),
            _ => E::Sub(Arc::new(a), Arc::new(b)),
        }
    }

    /// Folds `0 * e` to `0` even when `e` could fail to evaluate.
    pub fn product(a: ScalarExpr, b: ScalarExpr) -> Self {
        match (&a, &b) {
            (E::Const(x), E::Const(y)) => E::Const(x * y),
            _ if a.is_const(0.0) || b.is_const(0.0) => E::Const(0.0),
            _ if a.is_const(1.0) => b,
            _ if b.is_const(1.0) => a,
            // keep constants on the left so the printed form reads `2 * x1`
            (_, E::Const(_)) => E::Mul(Arc::new(b), Arc::new(a)),
            _ => E::Mul(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn quotient(a: ScalarExpr, b: ScalarExpr) -> Self {
        match (&a, &b) {
            (E::Const(x), E::Const(y)) if *y != 0.0 => E::Const(x / y),
            _ if b.is_const(1.0) => a,
            _ => E::Div(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn powi(self, n: i32) -> Self {
        match (&self, n) {
            (_, 0) => E::Const(1.0),
            (_, 1) => self,
            (E::Const(c), _) if *c != 0.0 || n > 0 => E::Const(c.powi(n)),
            _ => E::Pow(Arc::new(self), n),
        }
    }

    pub fn sin(self) -> Self {
        match self {
            E::Const(c) => E::Const(c.sin()),
            e => E::Sin(Arc::new(e)),
        }
    }

    pub fn cos(self) -> Self {
        match self {
            E::Const(c) => E::Const(c.cos()),
            e => E::Cos(Arc::new(e)),
        }
    }

    pub fn exp(self) -> Self {
        match self {
            E::Const(c) => E::Const(c.exp()),
            e => E::Exp(Arc::new(e)),
        }
    }

    /// Evaluates the tree at `x`.
    ///
    /// A zero denominator (including `0^n` with `n < 0`) and any non-finite
    /// intermediate are reported as errors naming the failing subexpression.
    pub fn eval(&self, x: Point2) -> Result<f64, EvalError> {
        let value = match self {
            E::Const(c) => *c,
            E::Var(v) => x[v.index()],
            E::Add(a, b) => a.eval(x)? + b.eval(x)?,
            E::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            E::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            E::Div(a, b) => {
                let num = a.eval(x)?;
                let den = b.eval(x)?;
                if den == 0.0 {
                    return Err(EvalError::DivisionByZero {
                        expr: self.to_string(),
                        at: x,
                    });
                }
                num / den
            }
            E::Pow(a, n) => {
                let base = a.eval(x)?;
                if base == 0.0 && *n < 0 {
                    return Err(EvalError::DivisionByZero {
                        expr: self.to_string(),
                        at: x,
                    });
                }
                base.powi(*n)
            }
            E::Sin(a) => a.eval(x)?.sin(),
            E::Cos(a) => a.eval(x)?.cos(),
            E::Exp(a) => a.eval(x)?.exp(),
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(EvalError::NonFinite {
                expr: self.to_string(),
                at: x,
            })
        }
    }

    /// Symbolic partial derivative with respect to `var`.
    pub fn partial(&self, var: Var) -> ScalarExpr {
        match self {
            E::Const(_) => E::zero(),
            E::Var(v) => E::Const(if *v == var { 1.0 } else { 0.0 }),
            E::Add(a, b) => E::sum(a.partial(var), b.partial(var)),
            E::Sub(a, b) => E::difference(a.partial(var), b.partial(var)),
            E::Mul(a, b) => E::sum(
                E::product(a.partial(var), (**b).clone()),
                E::product((**a).clone(), b.partial(var)),
            ),
            E::Div(a, b) => {
                let num = E::difference(
                    E::product(a.partial(var), (**b).clone()),
                    E::product((**a).clone(), b.partial(var)),
                );
                E::quotient(num, (**b).clone().powi(2))
            }
            E::Pow(a, n) => {
                if *n == 0 {
                    return E::zero();
                }
                E::product(
                    E::product(E::Const(f64::from(*n)), (**a).clone().powi(n - 1)),
                    a.partial(var),
                )
            }
            E::Sin(a) => E::product((**a).clone().cos(), a.partial(var)),
            E::Cos(a) => E::product(E::Const(-1.0), E::product((**a).clone().sin(), a.partial(var))),
            E::Exp(a) => E::product(self.clone(), a.partial(var)),
        }
    }

    /// Replaces `x1 -> s * x1`, `x2 -> s * x2`.
    pub fn rescale_args(&self, s: f64) -> ScalarExpr {
        self.map_vars(&|v| E::product(E::Const(s), E::Var(v)))
    }

    fn map_vars(&self, f: &dyn Fn(Var) -> ScalarExpr) -> ScalarExpr {
        let rec = |a: &Arc<ScalarExpr>| Arc::new(a.map_vars(f));
        match self {
            E::Const(c) => E::Const(*c),
            E::Var(v) => f(*v),
            E::Add(a, b) => E::Add(rec(a), rec(b)),
            E::Sub(a, b) => E::Sub(rec(a), rec(b)),
            E::Mul(a, b) => E::Mul(rec(a), rec(b)),
            E::Div(a, b) => E::Div(rec(a), rec(b)),
            E::Pow(a, n) => E::Pow(rec(a), *n),
            E::Sin(a) => E::Sin(rec(a)),
            E::Cos(a) => E::Cos(rec(a)),
            E::Exp(a) => E::Exp(rec(a)),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            E::Const(_) | E::Var(_) => 1,
            E::Add(a, b) | E::Sub(a, b) | E::Mul(a, b) | E::Div(a, b) => 1 + a.size() + b.size(),
            E::Pow(a, _) | E::Sin(a) | E::Cos(a) | E::Exp(a) => 1 + a.size(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            E::Add(..) | E::Sub(..) => 1,
            E::Mul(..) | E::Div(..) => 2,
            E::Pow(..) => 3,
            _ => 4,
        }
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn operand(f: &mut fmt::Formatter<'_>, e: &ScalarExpr, parens: bool) -> fmt::Result {
            if parens {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        let binary = |f: &mut fmt::Formatter<'_>, a: &ScalarExpr, op: &str, b: &ScalarExpr, p: u8| {
            operand(f, a, a.precedence() < p)?;
            write!(f, " {op} ")?;
            operand(f, b, b.precedence() <= p)
        };
        match self {
            E::Const(c) => {
                if c.is_sign_negative() {
                    write!(f, "({c:?})")
                } else {
                    write!(f, "{c:?}")
                }
            }
            E::Var(Var::X1) => f.write_str("x1"),
            E::Var(Var::X2) => f.write_str("x2"),
            E::Add(a, b) => binary(f, a, "+", b, 1),
            E::Sub(a, b) => binary(f, a, "-", b, 1),
            E::Mul(a, b) => binary(f, a, "*", b, 2),
            E::Div(a, b) => binary(f, a, "/", b, 2),
            E::Pow(a, n) => {
                operand(f, a, a.precedence() < 4)?;
                if *n < 0 {
                    write!(f, "^({n})")
                } else {
                    write!(f, "^{n}")
                }
            }
            E::Sin(a) => write!(f, "sin({a})"),
            E::Cos(a) => write!(f, "cos({a})"),
            E::Exp(a) => write!(f, "exp({a})"),
        }
    }
}

impl Serialize for ScalarExpr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ScalarExpr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

impl From<f64> for ScalarExpr {
    fn from(c: f64) -> Self {
        E::Const(c)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $ctor:path) => {
        impl $tr for ScalarExpr {
            type Output = ScalarExpr;
            fn $method(self, rhs: ScalarExpr) -> ScalarExpr {
                $ctor(self, rhs)
            }
        }
        impl $tr<f64> for ScalarExpr {
            type Output = ScalarExpr;
            fn $method(self, rhs: f64) -> ScalarExpr {
                $ctor(self, E::Const(rhs))
            }
        }
        impl $tr<ScalarExpr> for f64 {
            type Output = ScalarExpr;
            fn $method(self, rhs: ScalarExpr) -> ScalarExpr {
                $ctor(E::Const(self), rhs)
            }
        }
        impl $tr<&ScalarExpr> for &ScalarExpr {
            type Output = ScalarExpr;
            fn $method(self, rhs: &ScalarExpr) -> ScalarExpr {
                $ctor(self.clone(), rhs.clone())
            }
        }
    };
}

binop!(Add, add, ScalarExpr::sum);
binop!(Sub, sub, ScalarExpr::difference);
binop!(Mul, mul, ScalarExpr::product);
binop!(Div, div, ScalarExpr::quotient);

impl Neg for ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        E::product(E::Const(-1.0), self)
    }
}
