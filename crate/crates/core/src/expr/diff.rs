use super::{Expression, Func, Node};

impl Expression {
    /// Partial derivative with respect to `var`; other identifiers are constants.
    pub fn differentiate(&self, var: &str) -> Expression {
        if !self.depends_on(var) {
            return Expression::zero();
        }
        match self.node() {
            Node::Const(_) => Expression::zero(),
            Node::Var(name) => {
                if &**name == var {
                    Expression::one()
                } else {
                    Expression::zero()
                }
            }
            Node::Neg(a) => Expression::neg(a.differentiate(var)),
            Node::Add(a, b) => Expression::add(a.differentiate(var), b.differentiate(var)),
            Node::Mul(a, b) => Expression::add(
                Expression::mul(a.differentiate(var), b.clone()),
                Expression::mul(a.clone(), b.differentiate(var)),
            ),
            Node::Div(a, b) => {
                let da = a.differentiate(var);
                let db = b.differentiate(var);
                if db.is_zero() {
                    return Expression::div(da, b.clone());
                }
                Expression::div(
                    Expression::sub(
                        Expression::mul(da, b.clone()),
                        Expression::mul(a.clone(), db),
                    ),
                    Expression::powi(b.clone(), 2),
                )
            }
            Node::Pow(a, n) => Expression::mul(
                Expression::mul(
                    Expression::constant(*n as f64),
                    Expression::powi(a.clone(), n - 1),
                ),
                a.differentiate(var),
            ),
            Node::Call(f, a) => {
                let inner = a.differentiate(var);
                let outer = match f {
                    Func::Sin => Expression::cos(a.clone()),
                    Func::Cos => Expression::neg(Expression::sin(a.clone())),
                    Func::Exp => self.clone(),
                    Func::Log => return Expression::div(inner, a.clone()),
                    Func::Sqrt => {
                        return Expression::div(
                            inner,
                            Expression::scale(2.0, self.clone()),
                        )
                    }
                };
                Expression::mul(outer, inner)
            }
        }
    }
}
