use std::collections::{BTreeMap, HashMap};

use super::{Expression, Func, Node};
use crate::error::ExprError;

/// A source of variable values.
pub trait Bindings {
    fn value(&self, name: &str) -> Option<f64>;
}

impl Bindings for HashMap<String, f64> {
    fn value(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl Bindings for HashMap<&str, f64> {
    fn value(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl Bindings for BTreeMap<String, f64> {
    fn value(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl Bindings for [(&str, f64)] {
    fn value(&self, name: &str) -> Option<f64> {
        self.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }
}

impl<const N: usize> Bindings for [(&str, f64); N] {
    fn value(&self, name: &str) -> Option<f64> {
        self.as_slice().value(name)
    }
}

fn checked(v: f64) -> Result<f64, ExprError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ExprError::Domain("non-finite intermediate value".into()))
    }
}

fn div(a: f64, b: f64) -> Result<f64, ExprError> {
    if b == 0.0 {
        return Err(ExprError::Domain("division by zero".into()));
    }
    checked(a / b)
}

fn powi(a: f64, n: i32) -> Result<f64, ExprError> {
    if a == 0.0 && n < 0 {
        return Err(ExprError::Domain("negative power of zero".into()));
    }
    checked(a.powi(n))
}

impl Expression {
    /// Evaluates the tree at a binding that covers all free variables.
    pub fn evaluate<B: Bindings + ?Sized>(&self, binding: &B) -> Result<f64, ExprError> {
        match self.node() {
            Node::Const(c) => Ok(*c),
            Node::Var(name) => binding
                .value(name)
                .ok_or_else(|| ExprError::MissingBinding(name.to_string())),
            Node::Neg(a) => Ok(-a.evaluate(binding)?),
            Node::Add(a, b) => checked(a.evaluate(binding)? + b.evaluate(binding)?),
            Node::Mul(a, b) => checked(a.evaluate(binding)? * b.evaluate(binding)?),
            Node::Div(a, b) => div(a.evaluate(binding)?, b.evaluate(binding)?),
            Node::Pow(a, n) => powi(a.evaluate(binding)?, *n),
            Node::Call(f, a) => checked(f.apply(a.evaluate(binding)?)?),
        }
    }

    /// Resolves identifiers to slots of `vars` for repeated fast evaluation.
    /// Identifiers not listed in `vars` produce a missing-binding error.
    pub fn compile(&self, vars: &[&str]) -> Result<CompiledExpr, ExprError> {
        let mut ops = Vec::with_capacity(self.size());
        emit(self, vars, &mut ops)?;
        Ok(CompiledExpr {
            ops,
            arity: vars.len(),
        })
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Const(f64),
    Load(usize),
    Neg,
    Add,
    Mul,
    Div,
    Pow(i32),
    Call(Func),
}

fn emit(e: &Expression, vars: &[&str], ops: &mut Vec<Op>) -> Result<(), ExprError> {
    match e.node() {
        Node::Const(c) => ops.push(Op::Const(*c)),
        Node::Var(name) => {
            let slot = vars
                .iter()
                .position(|v| *v == &**name)
                .ok_or_else(|| ExprError::MissingBinding(name.to_string()))?;
            ops.push(Op::Load(slot));
        }
        Node::Neg(a) => {
            emit(a, vars, ops)?;
            ops.push(Op::Neg);
        }
        Node::Add(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
            emit(a, vars, ops)?;
            emit(b, vars, ops)?;
            ops.push(match e.node() {
                Node::Add(..) => Op::Add,
                Node::Mul(..) => Op::Mul,
                _ => Op::Div,
            });
        }
        Node::Pow(a, n) => {
            emit(a, vars, ops)?;
            ops.push(Op::Pow(*n));
        }
        Node::Call(f, a) => {
            emit(a, vars, ops)?;
            ops.push(Op::Call(*f));
        }
    }
    Ok(())
}

/// Postfix program for an expression with positional variables.
#[derive(Debug, Clone)]
pub struct CompiledExpr {
    ops: Vec<Op>,
    arity: usize,
}

impl CompiledExpr {
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// True when the program is a single constant.
    pub fn as_const(&self) -> Option<f64> {
        match self.ops.as_slice() {
            [Op::Const(c)] => Some(*c),
            _ => None,
        }
    }

    pub fn eval(&self, args: &[f64]) -> Result<f64, ExprError> {
        debug_assert_eq!(args.len(), self.arity);
        let mut stack: smallstack::Stack = smallstack::Stack::new();
        for op in &self.ops {
            match *op {
                Op::Const(c) => stack.push(c),
                Op::Load(i) => stack.push(args[i]),
                Op::Neg => {
                    let a = stack.pop();
                    stack.push(-a);
                }
                Op::Add => {
                    let b = stack.pop();
                    let a = stack.pop();
                    stack.push(checked(a + b)?);
                }
                Op::Mul => {
                    let b = stack.pop();
                    let a = stack.pop();
                    stack.push(checked(a * b)?);
                }
                Op::Div => {
                    let b = stack.pop();
                    let a = stack.pop();
                    stack.push(div(a, b)?);
                }
                Op::Pow(n) => {
                    let a = stack.pop();
                    stack.push(powi(a, n)?);
                }
                Op::Call(f) => {
                    let a = stack.pop();
                    stack.push(checked(f.apply(a)?)?);
                }
            }
        }
        Ok(stack.pop())
    }

    /// Like [`eval`](Self::eval) but maps domain errors to NaN, for integrands.
    pub fn eval_or_nan(&self, args: &[f64]) -> f64 {
        self.eval(args).unwrap_or(f64::NAN)
    }
}

mod smallstack {
    /// Evaluation stack that stays on the machine stack for typical depths.
    pub struct Stack {
        inline: [f64; 32],
        len: usize,
        spill: Vec<f64>,
    }

    impl Stack {
        pub fn new() -> Self {
            Stack {
                inline: [0.0; 32],
                len: 0,
                spill: Vec::new(),
            }
        }

        #[inline]
        pub fn push(&mut self, v: f64) {
            if self.len < 32 {
                self.inline[self.len] = v;
            } else {
                self.spill.push(v);
            }
            self.len += 1;
        }

        #[inline]
        pub fn pop(&mut self) -> f64 {
            self.len -= 1;
            if self.len < 32 {
                self.inline[self.len]
            } else {
                self.spill.pop().expect("stack underflow")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn evaluates_examples() {
        let e = parse("exp(x)*cos(y)").unwrap();
        assert_eq!(e.evaluate(&[("x", 0.0), ("y", 0.0)]).unwrap(), 1.0);
        let e = parse("x^2 - y^2").unwrap();
        assert_eq!(e.evaluate(&[("x", 1.0), ("y", 2.0)]).unwrap(), -3.0);
    }

    #[test]
    fn domain_errors() {
        let e = parse("1/x").unwrap();
        assert!(matches!(e.evaluate(&[("x", 0.0)]), Err(ExprError::Domain(_))));
        let e = parse("log(x)").unwrap();
        assert!(matches!(e.evaluate(&[("x", -1.0)]), Err(ExprError::Domain(_))));
        let c = e.compile(&["x"]).unwrap();
        assert!(c.eval(&[0.0]).is_err());
        assert!(c.eval_or_nan(&[0.0]).is_nan());
    }

    #[test]
    fn missing_binding_names_variable() {
        let e = parse("x + y").unwrap();
        match e.evaluate(&[("x", 1.0)]) {
            Err(ExprError::MissingBinding(v)) => assert_eq!(v, "y"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(e.compile(&["x"]), Err(ExprError::MissingBinding(_))));
    }

    #[test]
    fn compiled_matches_tree_walk() {
        let e = parse("sin(u)*x^3 - exp(y)/(1 + x^2) + sqrt(2 + cos(x*y))").unwrap();
        let c = e.compile(&["u", "x", "y"]).unwrap();
        for (u, x, y) in [(0.1, 0.2, 0.3), (-1.0, 2.0, -0.5), (3.0, -4.0, 1.5)] {
            let a = e.evaluate(&[("u", u), ("x", x), ("y", y)]).unwrap();
            assert_eq!(a, c.eval(&[u, x, y]).unwrap());
        }
    }

    #[test]
    fn deep_expressions_spill() {
        // Right-nested sum deeper than the inline stack.
        let mut e = crate::expr::Expression::var("x");
        for _ in 0..100 {
            e = crate::expr::Expression::add(crate::expr::Expression::var("x"), e);
        }
        // Force a deep stack: x + (x + (x + ...)).
        let c = e.compile(&["x"]).unwrap();
        assert_eq!(c.eval(&[1.0]).unwrap(), 101.0);
    }
}
