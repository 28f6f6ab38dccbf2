//! The function DSL: syntax tree, parser, evaluator, symbolic derivative,
//! domains and sampled Lipschitz constants.
//!
//! Functions only ever enter the workbench as [`Expression`]s. An expression
//! is immutable once built; every operation on it is pure.

mod diff;
mod domain;
mod eval;
mod lipschitz;
mod parse;

use std::fmt;

pub use diff::DiffError;
pub use domain::{Disk, Domain, DomainBox, DomainError, Function};
pub use eval::EvalError;
pub use lipschitz::{lipschitz_estimate, LipschitzEstimate};
pub use parse::{parse, parse_with_arity, ParseError, ParseErrorKind};

/// Largest variable index the parser accepts (`x255`).
pub const MAX_VARIABLE_INDEX: usize = 255;

/// A numeric literal. Rational literals (`2/3`) keep their numerator and
/// denominator so that printing reproduces them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant {
    pub value: f64,
    pub rational: Option<(i64, i64)>,
}

impl Constant {
    pub fn new(value: f64) -> Self {
        Constant { value, rational: None }
    }

    /// `num/den` in lowest terms. Panics on a zero denominator.
    pub fn rational(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()).max(1) as i64;
        let (mut n, mut d) = (num / g, den / g);
        if d < 0 {
            n = -n;
            d = -d;
        }
        Constant { value: n as f64 / d as f64, rational: Some((n, d)) }
    }

    pub(crate) fn negated(self) -> Self {
        match self.rational {
            Some((n, d)) => Constant { value: -self.value, rational: Some((-n, d)) },
            None => Constant::new(-self.value),
        }
    }

    pub(crate) fn minus_one(self) -> Self {
        match self.rational {
            Some((n, d)) => match n.checked_sub(d) {
                Some(m) => Constant::rational(m, d),
                None => Constant::new(self.value - 1.0),
            },
            None => Constant::new(self.value - 1.0),
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Abs,
    Sin,
    Cos,
    Sqrt,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "neg",
            UnaryOp::Abs => "abs",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Min,
    Max,
    /// `|a|^b`
    SabsPow,
    /// `sign(a)·|a|^b`
    SPow,
}

impl BinaryOp {
    pub fn name(self) -> &'static str {
        match self {
            BinaryOp::Add => "add",
            BinaryOp::Sub => "sub",
            BinaryOp::Mul => "mul",
            BinaryOp::Div => "div",
            BinaryOp::Pow => "pow",
            BinaryOp::Min => "min",
            BinaryOp::Max => "max",
            BinaryOp::SabsPow => "sabs_pow",
            BinaryOp::SPow => "spow",
        }
    }

    fn infix_symbol(self) -> Option<&'static str> {
        match self {
            BinaryOp::Add => Some("+"),
            BinaryOp::Sub => Some("-"),
            BinaryOp::Mul => Some("*"),
            BinaryOp::Div => Some("/"),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    pub fn holds(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        }
    }
}

/// A comparison guarding one branch of a piecewise node.
#[derive(Debug, Clone, PartialEq)]
pub struct Predicate {
    pub op: CmpOp,
    pub lhs: Node,
    pub rhs: Node,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(Constant),
    Var(usize),
    Unary(UnaryOp, Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
    /// First arm whose predicate holds wins; otherwise `default`.
    Piecewise {
        arms: Vec<(Predicate, Node)>,
        default: Box<Node>,
    },
}

impl Node {
    pub fn constant(value: f64) -> Node {
        Node::Const(Constant::new(value))
    }

    pub fn rational(num: i64, den: i64) -> Node {
        Node::Const(Constant::rational(num, den))
    }

    pub fn var(index: usize) -> Node {
        Node::Var(index)
    }

    pub fn unary(op: UnaryOp, arg: Node) -> Node {
        Node::Unary(op, Box::new(arg))
    }

    pub fn binary(op: BinaryOp, lhs: Node, rhs: Node) -> Node {
        Node::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Highest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Node::Const(_) => None,
            Node::Var(i) => Some(*i),
            Node::Unary(_, a) => a.max_var(),
            Node::Binary(_, a, b) => a.max_var().max(b.max_var()),
            Node::Piecewise { arms, default } => arms
                .iter()
                .flat_map(|(p, e)| [p.lhs.max_var(), p.rhs.max_var(), e.max_var()])
                .fold(default.max_var(), Option::max),
        }
    }

    /// Name of the first nondifferentiable primitive found in a pre-order walk.
    pub fn first_nonsmooth(&self) -> Option<&'static str> {
        match self {
            Node::Const(_) | Node::Var(_) => None,
            Node::Unary(UnaryOp::Abs, _) => Some("abs"),
            Node::Unary(_, a) => a.first_nonsmooth(),
            Node::Binary(op @ (BinaryOp::Min | BinaryOp::Max | BinaryOp::SabsPow | BinaryOp::SPow), _, _) => {
                Some(op.name())
            }
            Node::Binary(_, a, b) => a.first_nonsmooth().or_else(|| b.first_nonsmooth()),
            Node::Piecewise { .. } => Some("piecewise"),
        }
    }
}

/// A parsed function `ℝⁿ → ℝ` with its arity.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
    arity: usize,
}

impl Expression {
    /// Wraps a tree, inferring arity from the highest variable index.
    pub fn new(root: Node) -> Self {
        let arity = root.max_var().map_or(0, |i| i + 1);
        Expression { root, arity }
    }

    /// Wraps a tree with an explicit arity; fails if the tree uses a variable
    /// at or beyond it.
    pub fn with_arity(root: Node, arity: usize) -> Result<Self, ParseError> {
        let needed = root.max_var().map_or(0, |i| i + 1);
        if needed > arity {
            return Err(ParseError::new(ParseErrorKind::ArityMismatch { declared: arity, required: needed }, 1, 1));
        }
        Ok(Expression { root, arity })
    }

    pub fn parse(source: &str) -> Result<Self, ParseError> {
        parse(source)
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_smooth(&self) -> bool {
        self.root.first_nonsmooth().is_none()
    }

    /// `self + other`, arity the larger of the two.
    pub fn add(&self, other: &Expression) -> Expression {
        self.combine(BinaryOp::Add, other)
    }

    pub fn sub(&self, other: &Expression) -> Expression {
        self.combine(BinaryOp::Sub, other)
    }

    pub fn scale(&self, factor: f64) -> Expression {
        Expression { root: Node::binary(BinaryOp::Mul, Node::constant(factor), self.root.clone()), arity: self.arity }
    }

    fn combine(&self, op: BinaryOp, other: &Expression) -> Expression {
        Expression { root: Node::binary(op, self.root.clone(), other.root.clone()), arity: self.arity.max(other.arity) }
    }

    /// The affine function `Σ coeffs[i]·x_i + offset`.
    pub fn affine(coeffs: &[f64], offset: f64) -> Expression {
        let mut root = Node::constant(offset);
        for (i, &c) in coeffs.iter().enumerate() {
            let term = Node::binary(BinaryOp::Mul, Node::constant(c), Node::var(i));
            root = Node::binary(BinaryOp::Add, root, term);
        }
        Expression { root, arity: coeffs.len() }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rational {
            Some((n, d)) => write!(f, "{n}/{d}"),
            None => {
                // `{}` on f64 is the shortest string that parses back to the same bits.
                write!(f, "{}", self.value)
            }
        }
    }
}

// Printing is fully parenthesized so that parse(print(e)) == e structurally.
impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) => write!(f, "{c}"),
            Node::Var(i) => write!(f, "x{i}"),
            Node::Unary(UnaryOp::Neg, a) => write!(f, "-({a})"),
            Node::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Node::Binary(op, a, b) => match op.infix_symbol() {
                Some(sym) => write!(f, "({a} {sym} {b})"),
                None => write!(f, "{}({a}, {b})", op.name()),
            },
            Node::Piecewise { arms, default } => {
                write!(f, "piecewise(")?;
                for (p, e) in arms {
                    write!(f, "{} {} {}, {e}, ", p.lhs, p.op.symbol(), p.rhs)?;
                }
                write!(f, "{default})")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_constants_reduce() {
        let c = Constant::rational(4, -6);
        assert_eq!(c.rational, Some((-2, 3)));
        assert_eq!(c.value, -2.0 / 3.0);
        assert_eq!(Constant::rational(2, 3).minus_one().rational, Some((-1, 3)));
    }

    #[test]
    fn arity_from_highest_index() {
        let e = Expression::parse("x2 + 1").unwrap();
        assert_eq!(e.arity(), 3);
        assert_eq!(Expression::parse("3").unwrap().arity(), 0);
    }

    #[test]
    fn display_is_parenthesized() {
        let e = Expression::parse("x0 - x1 - 2*x0^2").unwrap();
        assert_eq!(e.to_string(), "((x0 - x1) - (2 * pow(x0, 2)))");
    }

    #[test]
    fn nonsmooth_detection() {
        assert_eq!(Expression::parse("sin(x0) + abs(x0)").unwrap().root().first_nonsmooth(), Some("abs"));
        assert!(Expression::parse("pow(x0, 2/3)").unwrap().is_smooth());
    }
}
