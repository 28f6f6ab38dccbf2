//! Recursive-descent parser for the DSL.
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := ("-")? atom ("^" number)?
//! atom   := number | variable | call | "(" expr ")"
//! call   := ident "(" expr ("," expr)* ")"
//! ```
//!
//! Arguments of `piecewise` alternate `lhs <cmp> rhs, value`, ending with a
//! default value. An integer literal immediately followed by `/digits` is a
//! rational literal, so `2/3` is one constant rather than a division.

use thiserror::Error;

use super::{BinaryOp, CmpOp, Constant, Expression, Node, Predicate, UnaryOp, MAX_VARIABLE_INDEX};

const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
}

impl ParseError {
    pub(crate) fn new(kind: ParseErrorKind, line: usize, column: usize) -> Self {
        ParseError { kind, line, column }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("expected {expected}, found {found}")]
    UnexpectedToken { expected: &'static str, found: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("`{name}` takes {expected} argument(s), got {found}")]
    WrongArgCount { name: String, expected: &'static str, found: usize },
    #[error("expression uses {required} variable(s) but arity {declared} was declared")]
    ArityMismatch { declared: usize, required: usize },
    #[error("zero denominator in rational literal")]
    ZeroDenominator,
    #[error("numeric literal out of range")]
    NumberOutOfRange,
    #[error("variable index exceeds x{}", MAX_VARIABLE_INDEX)]
    VariableOutOfRange,
    #[error("comparison is only allowed as a piecewise guard")]
    ComparisonOutsidePiecewise,
    #[error("nesting deeper than {} levels", MAX_DEPTH)]
    TooDeep,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Constant),
    Var(usize),
    Ident(String),
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Cmp(CmpOp),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(c) => format!("number {c}"),
            Tok::Var(i) => format!("variable x{i}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Cmp(op) => format!("`{}`", op.symbol()),
            Tok::End => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let push = |out: &mut Vec<Spanned>, tok| out.push(Spanned { tok, line: tl, column: tc });
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start = i;
        match c {
            '(' => push(&mut out, Tok::LParen),
            ')' => push(&mut out, Tok::RParen),
            ',' => push(&mut out, Tok::Comma),
            '+' => push(&mut out, Tok::Plus),
            '-' => push(&mut out, Tok::Minus),
            '*' => push(&mut out, Tok::Star),
            '/' => push(&mut out, Tok::Slash),
            '^' => push(&mut out, Tok::Caret),
            '<' | '>' | '=' | '!' => {
                let next_eq = chars.get(i + 1) == Some(&'=');
                let op = match (c, next_eq) {
                    ('<', true) => CmpOp::Le,
                    ('<', false) => CmpOp::Lt,
                    ('>', true) => CmpOp::Ge,
                    ('>', false) => CmpOp::Gt,
                    ('=', true) => CmpOp::Eq,
                    ('!', true) => CmpOp::Ne,
                    _ => return Err(ParseError::new(ParseErrorKind::UnexpectedChar(c), tl, tc)),
                };
                if next_eq {
                    i += 1;
                    col += 1;
                }
                push(&mut out, Tok::Cmp(op));
            }
            d if d.is_ascii_digit() || d == '.' => {
                let (tok, len) = lex_number(&chars[i..]).map_err(|k| ParseError::new(k, tl, tc))?;
                push(&mut out, tok);
                i += len;
                col += len;
                continue;
            }
            a if a.is_ascii_alphabetic() || a == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[start..j].iter().collect();
                let tok = match word.strip_prefix('x') {
                    Some(digits) if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) => {
                        match digits.parse::<usize>() {
                            Ok(idx) if idx <= MAX_VARIABLE_INDEX => Tok::Var(idx),
                            _ => return Err(ParseError::new(ParseErrorKind::VariableOutOfRange, tl, tc)),
                        }
                    }
                    _ => Tok::Ident(word),
                };
                push(&mut out, tok);
                col += j - i;
                i = j;
                continue;
            }
            other => return Err(ParseError::new(ParseErrorKind::UnexpectedChar(other), tl, tc)),
        }
        i += 1;
        col += 1;
    }
    out.push(Spanned { tok: Tok::End, line, column: col });
    Ok(out)
}

/// Lexes a decimal (`1`, `0.25`, `1e-3`) or rational (`2/3`) literal.
fn lex_number(chars: &[char]) -> Result<(Tok, usize), ParseErrorKind> {
    let digits = |from: usize| {
        let mut j = from;
        while j < chars.len() && chars[j].is_ascii_digit() {
            j += 1;
        }
        j
    };
    let mut j = digits(0);
    let mut integer = true;
    if j < chars.len() && chars[j] == '.' {
        integer = false;
        j = digits(j + 1);
    }
    if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
        let mut k = j + 1;
        if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
            k += 1;
        }
        let end = digits(k);
        if end > k {
            integer = false;
            j = end;
        }
    }
    let text: String = chars[..j].iter().collect();
    if text == "." {
        return Err(ParseErrorKind::UnexpectedChar('.'));
    }
    if integer && j + 1 < chars.len() && chars[j] == '/' && chars[j + 1].is_ascii_digit() {
        let end = digits(j + 1);
        let den_text: String = chars[j + 1..end].iter().collect();
        let num: i64 = text.parse().map_err(|_| ParseErrorKind::NumberOutOfRange)?;
        let den: i64 = den_text.parse().map_err(|_| ParseErrorKind::NumberOutOfRange)?;
        if den == 0 {
            return Err(ParseErrorKind::ZeroDenominator);
        }
        return Ok((Tok::Num(Constant::rational(num, den)), end));
    }
    let value: f64 = text.parse().map_err(|_| ParseErrorKind::NumberOutOfRange)?;
    if !value.is_finite() {
        return Err(ParseErrorKind::NumberOutOfRange);
    }
    Ok((Tok::Num(Constant::new(value)), j))
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, kind: ParseErrorKind) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError::new(kind, s.line, s.column)
    }

    fn expect(&mut self, want: Tok, expected: &'static str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(ParseErrorKind::UnexpectedToken { expected, found: self.peek().describe() }))
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error_here(ParseErrorKind::TooDeep));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Node::binary(op, lhs, rhs);
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Node::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Node, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            // A minus directly on a literal folds into a negative constant.
            if let Tok::Num(c) = *self.peek() {
                self.bump();
                let base = Node::Const(c.negated());
                return self.power_suffix(base, true);
            }
            let atom = self.atom()?;
            let powered = self.power_suffix(atom, false)?;
            return Ok(Node::unary(UnaryOp::Neg, powered));
        }
        let atom = self.atom()?;
        self.power_suffix(atom, false)
    }

    /// `^ number`. For a folded negative literal the power applies to the
    /// unsigned literal and the sign stays outside, matching `-(2^2)`.
    fn power_suffix(&mut self, base: Node, folded_negative: bool) -> Result<Node, ParseError> {
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let negative_exp = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let exp = match self.bump().tok {
            Tok::Num(c) => {
                if negative_exp {
                    c.negated()
                } else {
                    c
                }
            }
            other => {
                self.pos -= 1;
                return Err(self.error_here(ParseErrorKind::UnexpectedToken {
                    expected: "number after `^`",
                    found: other.describe(),
                }));
            }
        };
        if folded_negative {
            let Node::Const(c) = base else { unreachable!() };
            let pow = Node::binary(BinaryOp::Pow, Node::Const(c.negated()), Node::Const(exp));
            return Ok(Node::unary(UnaryOp::Neg, pow));
        }
        Ok(Node::binary(BinaryOp::Pow, base, Node::Const(exp)))
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let here = self.toks[self.pos].clone();
        match here.tok {
            Tok::Num(c) => {
                self.bump();
                Ok(Node::Const(c))
            }
            Tok::Var(i) => {
                self.bump();
                Ok(Node::Var(i))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                self.call(name, here.line, here.column)
            }
            Tok::Cmp(_) => Err(self.error_here(ParseErrorKind::ComparisonOutsidePiecewise)),
            other => Err(self.error_here(ParseErrorKind::UnexpectedToken {
                expected: "number, variable, function call or `(`",
                found: other.describe(),
            })),
        }
    }

    fn call(&mut self, name: String, line: usize, column: usize) -> Result<Node, ParseError> {
        enum Kind {
            Unary(UnaryOp),
            Binary(BinaryOp),
            Piecewise,
        }
        let kind = match name.as_str() {
            "abs" => Kind::Unary(UnaryOp::Abs),
            "sin" => Kind::Unary(UnaryOp::Sin),
            "cos" => Kind::Unary(UnaryOp::Cos),
            "sqrt" => Kind::Unary(UnaryOp::Sqrt),
            "min" => Kind::Binary(BinaryOp::Min),
            "max" => Kind::Binary(BinaryOp::Max),
            "pow" => Kind::Binary(BinaryOp::Pow),
            "sabs_pow" => Kind::Binary(BinaryOp::SabsPow),
            "spow" => Kind::Binary(BinaryOp::SPow),
            "piecewise" => Kind::Piecewise,
            _ => return Err(ParseError::new(ParseErrorKind::UnknownIdentifier(name), line, column)),
        };
        self.expect(Tok::LParen, "`(` after function name")?;
        self.enter()?;
        let mut args: Vec<(Node, Option<(CmpOp, Node)>)> = Vec::new();
        loop {
            let lhs = self.expr()?;
            let cmp = if let Tok::Cmp(op) = *self.peek() {
                if !matches!(kind, Kind::Piecewise) {
                    return Err(self.error_here(ParseErrorKind::ComparisonOutsidePiecewise));
                }
                self.bump();
                Some((op, self.expr()?))
            } else {
                None
            };
            args.push((lhs, cmp));
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RParen => {
                    self.bump();
                    break;
                }
                other => {
                    return Err(self.error_here(ParseErrorKind::UnexpectedToken {
                        expected: "`,` or `)`",
                        found: other.describe(),
                    }))
                }
            }
        }
        self.depth -= 1;
        let wrong = |expected: &'static str, found: usize| {
            ParseError::new(ParseErrorKind::WrongArgCount { name: name.clone(), expected, found }, line, column)
        };
        match kind {
            Kind::Unary(op) => {
                if args.len() != 1 {
                    return Err(wrong("1", args.len()));
                }
                let (a, _) = args.pop().unwrap();
                Ok(Node::unary(op, a))
            }
            Kind::Binary(op) => {
                if args.len() != 2 {
                    return Err(wrong("2", args.len()));
                }
                let (b, _) = args.pop().unwrap();
                let (a, _) = args.pop().unwrap();
                Ok(Node::binary(op, a, b))
            }
            Kind::Piecewise => {
                if args.len() < 3 || args.len().is_multiple_of(2) {
                    return Err(wrong("an odd number ≥ 3 of", args.len()));
                }
                let (default, default_cmp) = args.pop().unwrap();
                if default_cmp.is_some() {
                    return Err(ParseError::new(
                        ParseErrorKind::UnexpectedToken {
                            expected: "a plain default value as the last piecewise argument",
                            found: "a comparison".into(),
                        },
                        line,
                        column,
                    ));
                }
                let mut arms = Vec::new();
                let mut it = args.into_iter();
                while let (Some((lhs, cmp)), Some((value, value_cmp))) = (it.next(), it.next()) {
                    let Some((op, rhs)) = cmp else {
                        return Err(ParseError::new(
                            ParseErrorKind::UnexpectedToken {
                                expected: "a comparison as piecewise guard",
                                found: "a plain expression".into(),
                            },
                            line,
                            column,
                        ));
                    };
                    if value_cmp.is_some() {
                        return Err(ParseError::new(ParseErrorKind::ComparisonOutsidePiecewise, line, column));
                    }
                    arms.push((Predicate { op, lhs, rhs }, value));
                }
                Ok(Node::Piecewise { arms, default: Box::new(default) })
            }
        }
    }
}

/// Parses DSL text; the arity is one more than the highest variable index.
pub fn parse(source: &str) -> Result<Expression, ParseError> {
    let toks = lex(source)?;
    let mut p = Parser { toks, pos: 0, depth: 0 };
    let root = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error_here(ParseErrorKind::UnexpectedToken {
            expected: "operator or end of input",
            found: p.peek().describe(),
        }));
    }
    Ok(Expression::new(root))
}

/// Parses and checks the result against a declared arity.
pub fn parse_with_arity(source: &str, arity: usize) -> Result<Expression, ParseError> {
    let e = parse(source)?;
    Expression::with_arity(e.root, arity)
}
