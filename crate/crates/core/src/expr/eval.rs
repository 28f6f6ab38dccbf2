use thiserror::Error;

use super::{BinaryOp, Expression, Node, UnaryOp};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("point has dimension {found}, function arity is {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of negative number {0}")]
    SqrtOfNegative(f64),
    #[error("negative base {base} raised to non-integer power {exponent}")]
    NegativeBase { base: f64, exponent: f64 },
    #[error("non-finite intermediate value in `{0}`")]
    NonFinite(&'static str),
    #[error("point lies outside the function's domain")]
    OutsideDomain,
}

impl Expression {
    /// Evaluates at `x`; `x.len()` must equal the arity.
    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        if x.len() != self.arity {
            return Err(EvalError::DimensionMismatch { expected: self.arity, found: x.len() });
        }
        eval_node(&self.root, x)
    }
}

fn finite(v: f64, op: &'static str) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite(op))
    }
}

fn power(base: f64, exponent: f64) -> Result<f64, EvalError> {
    if base == 0.0 && exponent < 0.0 {
        return Err(EvalError::DivisionByZero);
    }
    if base < 0.0 && exponent.fract() != 0.0 {
        return Err(EvalError::NegativeBase { base, exponent });
    }
    let v = if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        base.powi(exponent as i32)
    } else {
        base.powf(exponent)
    };
    finite(v, "pow")
}

pub(super) fn eval_node(node: &Node, x: &[f64]) -> Result<f64, EvalError> {
    match node {
        Node::Const(c) => Ok(c.value),
        Node::Var(i) => Ok(x[*i]),
        Node::Unary(op, a) => {
            let a = eval_node(a, x)?;
            match op {
                UnaryOp::Neg => Ok(-a),
                UnaryOp::Abs => Ok(a.abs()),
                UnaryOp::Sin => Ok(a.sin()),
                UnaryOp::Cos => Ok(a.cos()),
                UnaryOp::Sqrt => {
                    if a < 0.0 {
                        Err(EvalError::SqrtOfNegative(a))
                    } else {
                        Ok(a.sqrt())
                    }
                }
            }
        }
        Node::Binary(op, a, b) => {
            let a = eval_node(a, x)?;
            let b = eval_node(b, x)?;
            match op {
                BinaryOp::Add => finite(a + b, "add"),
                BinaryOp::Sub => finite(a - b, "sub"),
                BinaryOp::Mul => finite(a * b, "mul"),
                BinaryOp::Div => {
                    if b == 0.0 {
                        Err(EvalError::DivisionByZero)
                    } else {
                        finite(a / b, "div")
                    }
                }
                BinaryOp::Pow => power(a, b),
                BinaryOp::Min => Ok(a.min(b)),
                BinaryOp::Max => Ok(a.max(b)),
                BinaryOp::SabsPow => power(a.abs(), b),
                BinaryOp::SPow => Ok(a.signum() * power(a.abs(), b)?),
            }
        }
        Node::Piecewise { arms, default } => {
            for (pred, value) in arms {
                let l = eval_node(&pred.lhs, x)?;
                let r = eval_node(&pred.rhs, x)?;
                if pred.op.holds(l, r) {
                    return eval_node(value, x);
                }
            }
            eval_node(default, x)
        }
    }
}
