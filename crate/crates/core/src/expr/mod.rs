//! Scalar expressions of one variable `x` with exact first derivatives.
//!
//! Expressions arrive as text (`"1/(1+lambda*x^2)"`), are parsed once into an
//! immutable tree and can then be evaluated over any [`ExprScalar`]: plain
//! floats for values, [`Dual`] for `(f, f')`, `Dual<Dual<_>>` for `f''`.
//! Identifiers other than `x` and the function names are named parameters,
//! bound at evaluation time.

mod dual;
mod parser;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use dual::Dual;

use crate::scalar::ExprScalar;

/// Named parameter values, e.g. `lambda = 1`.
pub type Params = BTreeMap<String, f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Asinh,
    Abs,
}

impl Func {
    pub const ALL: [Func; 9] = [
        Func::Exp,
        Func::Ln,
        Func::Sqrt,
        Func::Sin,
        Func::Cos,
        Func::Sinh,
        Func::Cosh,
        Func::Asinh,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Asinh => "asinh",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

/// Expression tree node.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Num(f64),
    Var,
    Param(String),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("empty expression")]
    Empty,
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("unexpected operator {0:?}")]
    UnexpectedOperator(char),
    #[error("invalid number {0:?}")]
    InvalidNumber(String),
    #[error("unbalanced parentheses")]
    UnbalancedParen,
    #[error("unknown function {0:?}")]
    UnknownFunction(String),
    #[error("function {0:?} used without an argument")]
    MissingArgument(String),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected trailing input")]
    TrailingInput,
}

/// Syntax error with the byte offset where it was detected.
#[derive(Clone, Debug, PartialEq, Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

impl ParseError {
    fn new(kind: ParseErrorKind, offset: usize) -> Self {
        Self { kind, offset }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum DomainError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of non-positive value {0}")]
    LogNonPositive(f64),
    #[error("square root of negative value {0}")]
    SqrtNegative(f64),
    #[error("non-integer power {exponent} of negative base {base}")]
    NegativeBase { base: f64, exponent: f64 },
    #[error("derivative undefined: {0}")]
    NonDifferentiable(&'static str),
    #[error("non-finite intermediate result")]
    NonFinite,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound parameter {0:?}")]
    UnboundParameter(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// A parsed, immutable expression. Cloning shares the tree.
#[derive(Clone, Debug, PartialEq)]
pub struct Expression {
    root: Arc<Node>,
}

impl Expression {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parser::Parser::parse(text)
    }

    pub fn from_node(root: Node) -> Self {
        Self { root: Arc::new(root) }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Names of all parameters the expression references.
    pub fn parameters(&self) -> BTreeSet<String> {
        fn walk(n: &Node, out: &mut BTreeSet<String>) {
            match n {
                Node::Param(p) => {
                    out.insert(p.clone());
                }
                Node::Neg(a) | Node::Call(_, a) => walk(a, out),
                Node::Bin(_, a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Node::Num(_) | Node::Var => {}
            }
        }
        let mut out = BTreeSet::new();
        walk(&self.root, &mut out);
        out
    }

    /// Evaluates over any scalar carrier.
    pub fn eval<S: ExprScalar>(&self, x: S, params: &Params) -> Result<S, EvalError> {
        eval_node(&self.root, x, params)
    }

    pub fn eval_value<S: ExprScalar>(&self, x: S, params: &Params) -> Result<S, EvalError> {
        self.eval(x, params)
    }

    /// `(e(x), e'(x))` by forward-mode differentiation.
    pub fn eval_dual<S: ExprScalar>(&self, x: S, params: &Params) -> Result<Dual<S>, EvalError> {
        self.eval(Dual::variable(x), params)
    }

    /// `(e, e', e'')` at `x`.
    pub fn eval_second<S: ExprScalar>(&self, x: S, params: &Params) -> Result<[S; 3], EvalError> {
        let seed = Dual::new(Dual::variable(x), Dual::lift(1.0));
        let r = self.eval(seed, params)?;
        Ok([r.value.value, r.value.deriv, r.deriv.deriv])
    }
}

impl std::str::FromStr for Expression {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expression::parse(s)
    }
}

fn eval_node<S: ExprScalar>(node: &Node, x: S, params: &Params) -> Result<S, EvalError> {
    let r = match node {
        Node::Num(v) => S::lift(*v),
        Node::Var => x,
        Node::Param(name) => S::lift(
            *params
                .get(name)
                .ok_or_else(|| EvalError::UnboundParameter(name.clone()))?,
        ),
        Node::Neg(a) => -eval_node(a, x, params)?,
        Node::Call(f, a) => eval_node(a, x, params)?.apply(*f)?,
        Node::Bin(op, a, b) => {
            let l = eval_node(a, x, params)?;
            let r = eval_node(b, x, params)?;
            match op {
                BinOp::Add => l + r,
                BinOp::Sub => l - r,
                BinOp::Mul => l * r,
                BinOp::Div => l.checked_div(r)?,
                BinOp::Pow => l.checked_pow(r)?,
            }
        }
    };
    if !r.all_finite() {
        return Err(DomainError::NonFinite.into());
    }
    Ok(r)
}

impl fmt::Display for Node {
    /// Fully parenthesized form; parsing it back yields the same tree up to
    /// negative literals, which come back as negated positive literals.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => {
                write!(f, "(-{:?})", -v)
            }
            Node::Num(v) => write!(f, "{v:?}"),
            Node::Var => f.write_str("x"),
            Node::Param(p) => f.write_str(p),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}
