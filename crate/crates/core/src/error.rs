use thiserror::Error;

use crate::expr::{EvalError, ParseError};
use crate::quad::QuadError;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("unknown profile {0:?}")]
    UnknownProfile(String),
    #[error("profile {profile} has no parameter {name:?}")]
    UnknownParameter { profile: String, name: String },
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter { name: String, value: f64, reason: &'static str },
    #[error("{what} is not positive at x = {x} (value {value})")]
    NotPositive { what: &'static str, x: f64, value: f64 },
    #[error("{what} is not positive anywhere on [{lo}, {hi}]")]
    NowherePositive { what: &'static str, lo: f64, hi: f64 },
    #[error("x = {x} lies outside the domain ({lo}, {hi})")]
    OutsideDomain { x: f64, lo: f64, hi: f64 },
    #[error("q = {q} lies outside the attainable range ({lo}, {hi})")]
    OutOfRange { q: f64, lo: f64, hi: f64 },
    #[error("q(0) = {q0} is not zero, so (q/x)^2 diverges at the origin")]
    OriginOffset { q0: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("operators live on different grids")]
    GridMismatch,
    #[error("eigensolver needs a symmetric tridiagonal matrix")]
    NotSymmetricTridiagonal,
    #[error("eigenvalue {index} did not converge")]
    NoConvergence { index: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
