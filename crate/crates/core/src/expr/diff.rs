use thiserror::Error;

use super::{BinaryOp, Constant, Expression, Node, UnaryOp};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiffError {
    #[error("cannot differentiate nonsmooth primitive `{0}`")]
    NonsmoothPrimitive(&'static str),
    #[error("pow with a non-constant exponent has no derivative in this DSL")]
    VariableExponent,
    #[error("variable index {index} is outside arity {arity}")]
    NoSuchVariable { index: usize, arity: usize },
}

impl Expression {
    /// Exact symbolic partial derivative with respect to `x_index`.
    ///
    /// Refuses any tree containing `abs`, `min`, `max`, `sabs_pow`, `spow`
    /// or `piecewise`, even on branches that do not depend on `x_index`.
    pub fn differentiate(&self, index: usize) -> Result<Expression, DiffError> {
        if index >= self.arity {
            return Err(DiffError::NoSuchVariable { index, arity: self.arity });
        }
        if let Some(name) = self.root.first_nonsmooth() {
            return Err(DiffError::NonsmoothPrimitive(name));
        }
        let root = derive(&self.root, index)?;
        Ok(Expression { root, arity: self.arity })
    }

    /// Symbolic gradient, one expression per coordinate.
    pub fn gradient(&self) -> Result<Vec<Expression>, DiffError> {
        (0..self.arity).map(|i| self.differentiate(i)).collect()
    }
}

fn as_const(n: &Node) -> Option<Constant> {
    match n {
        Node::Const(c) => Some(*c),
        _ => None,
    }
}

fn is_value(n: &Node, v: f64) -> bool {
    as_const(n).is_some_and(|c| c.value == v)
}

fn neg(a: Node) -> Node {
    match a {
        Node::Const(c) => Node::Const(c.negated()),
        Node::Unary(UnaryOp::Neg, inner) => *inner,
        other => Node::unary(UnaryOp::Neg, other),
    }
}

fn add(a: Node, b: Node) -> Node {
    if is_value(&a, 0.0) {
        return b;
    }
    if is_value(&b, 0.0) {
        return a;
    }
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => Node::constant(x.value + y.value),
        _ => Node::binary(BinaryOp::Add, a, b),
    }
}

fn sub(a: Node, b: Node) -> Node {
    if is_value(&b, 0.0) {
        return a;
    }
    if is_value(&a, 0.0) {
        return neg(b);
    }
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => Node::constant(x.value - y.value),
        _ => Node::binary(BinaryOp::Sub, a, b),
    }
}

fn mul(a: Node, b: Node) -> Node {
    if is_value(&a, 0.0) || is_value(&b, 0.0) {
        return Node::constant(0.0);
    }
    if is_value(&a, 1.0) {
        return b;
    }
    if is_value(&b, 1.0) {
        return a;
    }
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => Node::constant(x.value * y.value),
        _ => Node::binary(BinaryOp::Mul, a, b),
    }
}

fn div(a: Node, b: Node) -> Node {
    if is_value(&a, 0.0) {
        return Node::constant(0.0);
    }
    if is_value(&b, 1.0) {
        return a;
    }
    Node::binary(BinaryOp::Div, a, b)
}

fn pow(base: Node, exp: Constant) -> Node {
    if exp.value == 1.0 {
        return base;
    }
    if exp.value == 0.0 {
        return Node::constant(1.0);
    }
    Node::binary(BinaryOp::Pow, base, Node::Const(exp))
}

fn derive(node: &Node, i: usize) -> Result<Node, DiffError> {
    Ok(match node {
        Node::Const(_) => Node::constant(0.0),
        Node::Var(j) => Node::constant(if *j == i { 1.0 } else { 0.0 }),
        Node::Unary(op, a) => {
            let da = derive(a, i)?;
            match op {
                UnaryOp::Neg => neg(da),
                UnaryOp::Sin => mul(Node::unary(UnaryOp::Cos, (**a).clone()), da),
                UnaryOp::Cos => mul(neg(Node::unary(UnaryOp::Sin, (**a).clone())), da),
                UnaryOp::Sqrt => div(da, mul(Node::constant(2.0), Node::unary(UnaryOp::Sqrt, (**a).clone()))),
                UnaryOp::Abs => return Err(DiffError::NonsmoothPrimitive("abs")),
            }
        }
        Node::Binary(op, a, b) => match op {
            BinaryOp::Add => add(derive(a, i)?, derive(b, i)?),
            BinaryOp::Sub => sub(derive(a, i)?, derive(b, i)?),
            BinaryOp::Mul => add(mul(derive(a, i)?, (**b).clone()), mul((**a).clone(), derive(b, i)?)),
            BinaryOp::Div => {
                let num = sub(mul(derive(a, i)?, (**b).clone()), mul((**a).clone(), derive(b, i)?));
                div(num, pow((**b).clone(), Constant::new(2.0)))
            }
            BinaryOp::Pow => {
                let Some(c) = as_const(b) else {
                    return Err(DiffError::VariableExponent);
                };
                // c·a^(c−1)·a'
                mul(mul(Node::Const(c), pow((**a).clone(), c.minus_one())), derive(a, i)?)
            }
            BinaryOp::Min | BinaryOp::Max | BinaryOp::SabsPow | BinaryOp::SPow => {
                return Err(DiffError::NonsmoothPrimitive(op.name()))
            }
        },
        Node::Piecewise { .. } => return Err(DiffError::NonsmoothPrimitive("piecewise")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn square() {
        let d = parse("x0^2").unwrap().differentiate(0).unwrap();
        assert_eq!(*d.root(), Node::binary(BinaryOp::Mul, Node::constant(2.0), Node::var(0)));
    }

    #[test]
    fn abs_is_refused() {
        let err = parse("abs(x0)").unwrap().differentiate(0).unwrap_err();
        assert_eq!(err, DiffError::NonsmoothPrimitive("abs"));
        let err = parse("x1 + max(x0, 0)").unwrap().differentiate(1).unwrap_err();
        assert_eq!(err, DiffError::NonsmoothPrimitive("max"));
    }

    #[test]
    fn fractional_power() {
        let d = parse("pow(x0, 2/3)").unwrap().differentiate(0).unwrap();
        let want = Node::binary(
            BinaryOp::Mul,
            Node::rational(2, 3),
            Node::binary(BinaryOp::Pow, Node::var(0), Node::rational(-1, 3)),
        );
        assert_eq!(*d.root(), want);
    }

    #[test]
    fn other_variable_is_constant() {
        let d = parse("x0^2*x1").unwrap().differentiate(1).unwrap();
        let v = d.eval(&[3.0, 100.0]).unwrap();
        assert_eq!(v, 9.0);
        assert!(parse("x0").unwrap().differentiate(1).is_err());
        assert_eq!(parse("pow(x0, x0)").unwrap().differentiate(0), Err(DiffError::VariableExponent));
    }

    #[test]
    fn quotient_and_chain_rules() {
        let f = parse("sin(x0)/x0 + sqrt(x0) - cos(2*x0)").unwrap();
        let d = f.differentiate(0).unwrap();
        let x = 0.7_f64;
        let want = (x.cos() * x - x.sin()) / (x * x) + 0.5 / x.sqrt() + 2.0 * (2.0 * x).sin();
        assert!((d.eval(&[x]).unwrap() - want).abs() < 1e-12);
    }
}
