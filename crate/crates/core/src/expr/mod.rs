//! Closed-form scalar expressions over named coordinates.
//!
//! Expressions are immutable trees shared through `Arc`, so cloning is cheap and
//! they can be handed to parallel workers. Construction goes through the smart
//! constructors below, which apply only conservative simplification: constant
//! folding, the `0`/`1` identities and `-(-a) = a`. Equality of two expressions
//! is meant to be checked by evaluation, not structurally.

mod diff;
mod eval;
mod parse;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

pub use eval::{Bindings, CompiledExpr};
pub use parse::parse;

use crate::error::ExprError;

/// Supported unary functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub(crate) fn apply(self, x: f64) -> Result<f64, ExprError> {
        match self {
            Func::Sin => Ok(x.sin()),
            Func::Cos => Ok(x.cos()),
            Func::Exp => Ok(x.exp()),
            Func::Log if x > 0.0 => Ok(x.ln()),
            Func::Log => Err(ExprError::Domain(format!("log of nonpositive value {x}"))),
            Func::Sqrt if x >= 0.0 => Ok(x.sqrt()),
            Func::Sqrt => Err(ExprError::Domain(format!("sqrt of negative value {x}"))),
        }
    }
}

/// A node of the expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var(Arc<str>),
    Neg(Expression),
    Add(Expression, Expression),
    Mul(Expression, Expression),
    Div(Expression, Expression),
    Pow(Expression, i32),
    Call(Func, Expression),
}

/// Immutable scalar expression.
#[derive(Clone, PartialEq)]
pub struct Expression(Arc<Node>);

impl Expression {
    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(c: f64) -> Self {
        Expression(Arc::new(Node::Const(c)))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn var(name: &str) -> Self {
        Expression(Arc::new(Node::Var(Arc::from(name))))
    }

    fn wrap(node: Node) -> Self {
        Expression(Arc::new(node))
    }

    /// The constant value, if this node is a constant.
    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    pub fn neg(a: Expression) -> Self {
        match a.node() {
            Node::Const(c) => Self::constant(-c),
            Node::Neg(inner) => inner.clone(),
            _ => Self::wrap(Node::Neg(a)),
        }
    }

    pub fn add(a: Expression, b: Expression) -> Self {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Self::constant(x + y),
            (Some(x), _) if x == 0.0 => b,
            (_, Some(y)) if y == 0.0 => a,
            _ => Self::wrap(Node::Add(a, b)),
        }
    }

    pub fn sub(a: Expression, b: Expression) -> Self {
        Self::add(a, Self::neg(b))
    }

    pub fn mul(a: Expression, b: Expression) -> Self {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Self::constant(x * y),
            (Some(x), _) if x == 0.0 => Self::zero(),
            (_, Some(y)) if y == 0.0 => Self::zero(),
            (Some(x), _) if x == 1.0 => b,
            (_, Some(y)) if y == 1.0 => a,
            (Some(x), _) if x == -1.0 => Self::neg(b),
            (_, Some(y)) if y == -1.0 => Self::neg(a),
            _ => Self::wrap(Node::Mul(a, b)),
        }
    }

    pub fn div(a: Expression, b: Expression) -> Self {
        if b.is_one() {
            return a;
        }
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) if y != 0.0 && (x / y).is_finite() => Self::constant(x / y),
            (Some(x), _) if x == 0.0 && b.as_const() != Some(0.0) => Self::zero(),
            _ => Self::wrap(Node::Div(a, b)),
        }
    }

    pub fn powi(a: Expression, n: i32) -> Self {
        if n == 0 {
            return Self::one();
        }
        if n == 1 {
            return a;
        }
        if let Some(x) = a.as_const() {
            let v = x.powi(n);
            if v.is_finite() {
                return Self::constant(v);
            }
        }
        Self::wrap(Node::Pow(a, n))
    }

    pub fn call(f: Func, a: Expression) -> Self {
        if let Some(x) = a.as_const() {
            if let Ok(v) = f.apply(x) {
                if v.is_finite() {
                    return Self::constant(v);
                }
            }
        }
        Self::wrap(Node::Call(f, a))
    }

    pub fn sin(a: Expression) -> Self {
        Self::call(Func::Sin, a)
    }

    pub fn cos(a: Expression) -> Self {
        Self::call(Func::Cos, a)
    }

    pub fn exp(a: Expression) -> Self {
        Self::call(Func::Exp, a)
    }

    pub fn scale(c: f64, a: Expression) -> Self {
        Self::mul(Self::constant(c), a)
    }

    /// Sum of an iterator of expressions (zero when empty).
    pub fn sum<I: IntoIterator<Item = Expression>>(items: I) -> Self {
        items.into_iter().fold(Self::zero(), Self::add)
    }

    /// Identifiers occurring in the tree.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self.node() {
            Node::Const(_) => {}
            Node::Var(name) => {
                out.insert(name.to_string());
            }
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => a.collect_vars(out),
            Node::Add(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn depends_on(&self, var: &str) -> bool {
        match self.node() {
            Node::Const(_) => false,
            Node::Var(name) => &**name == var,
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => a.depends_on(var),
            Node::Add(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.depends_on(var) || b.depends_on(var)
            }
        }
    }

    /// Replaces every occurrence of `var` by `with`, re-running the smart constructors.
    pub fn substitute(&self, var: &str, with: &Expression) -> Expression {
        if !self.depends_on(var) {
            return self.clone();
        }
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(name) => {
                if &**name == var {
                    with.clone()
                } else {
                    self.clone()
                }
            }
            Node::Neg(a) => Self::neg(a.substitute(var, with)),
            Node::Add(a, b) => Self::add(a.substitute(var, with), b.substitute(var, with)),
            Node::Mul(a, b) => Self::mul(a.substitute(var, with), b.substitute(var, with)),
            Node::Div(a, b) => Self::div(a.substitute(var, with), b.substitute(var, with)),
            Node::Pow(a, n) => Self::powi(a.substitute(var, with), *n),
            Node::Call(f, a) => Self::call(*f, a.substitute(var, with)),
        }
    }

    /// Substitutes a constant value for a variable.
    pub fn fix(&self, var: &str, value: f64) -> Expression {
        self.substitute(var, &Self::constant(value))
    }

    /// Upper bound on the total polynomial degree in `vars`, or `None` when the
    /// tree is not polynomial in them. Subtrees free of `vars` count as
    /// coefficients of degree zero.
    pub fn polynomial_degree(&self, vars: &[&str]) -> Option<u32> {
        if vars.iter().all(|v| !self.depends_on(v)) {
            return Some(0);
        }
        match self.node() {
            Node::Const(_) => Some(0),
            Node::Var(_) => Some(1),
            Node::Neg(a) => a.polynomial_degree(vars),
            Node::Add(a, b) => Some(a.polynomial_degree(vars)?.max(b.polynomial_degree(vars)?)),
            Node::Mul(a, b) => Some(a.polynomial_degree(vars)? + b.polynomial_degree(vars)?),
            Node::Div(a, b) => {
                if vars.iter().any(|v| b.depends_on(v)) {
                    None
                } else {
                    a.polynomial_degree(vars)
                }
            }
            Node::Pow(a, n) if *n >= 0 => Some(a.polynomial_degree(vars)? * (*n as u32)),
            Node::Pow(..) | Node::Call(..) => None,
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Const(_) | Node::Var(_) => 1,
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => 1 + a.size(),
            Node::Add(a, b) | Node::Mul(a, b) | Node::Div(a, b) => 1 + a.size() + b.size(),
        }
    }
}

impl std::ops::Add for Expression {
    type Output = Expression;
    fn add(self, rhs: Expression) -> Expression {
        Expression::add(self, rhs)
    }
}

impl std::ops::Sub for Expression {
    type Output = Expression;
    fn sub(self, rhs: Expression) -> Expression {
        Expression::sub(self, rhs)
    }
}

impl std::ops::Mul for Expression {
    type Output = Expression;
    fn mul(self, rhs: Expression) -> Expression {
        Expression::mul(self, rhs)
    }
}

impl std::ops::Div for Expression {
    type Output = Expression;
    fn div(self, rhs: Expression) -> Expression {
        Expression::div(self, rhs)
    }
}

impl std::ops::Neg for Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        Expression::neg(self)
    }
}

impl From<f64> for Expression {
    fn from(c: f64) -> Self {
        Expression::constant(c)
    }
}

impl std::str::FromStr for Expression {
    type Err = ExprError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    // `{:?}` is the shortest representation that round-trips exactly.
    if c < 0.0 || (c == 0.0 && c.is_sign_negative()) {
        write!(f, "(-{:?})", -c)
    } else {
        write!(f, "{c:?}")
    }
}

/// Fully parenthesized infix.
impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => write_const(f, *c),
            Node::Var(name) => write!(f, "{name}"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Div(a, b) => write!(f, "({a} / {b})"),
            Node::Pow(a, n) if *n < 0 => write!(f, "({a}^(-{}))", -(*n as i64)),
            Node::Pow(a, n) => write!(f, "({a}^{n})"),
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl fmt::Debug for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expression({self})")
    }
}
