use thiserror::Error;

use crate::expr::{DiffError, DomainError, EvalError};
use crate::geometry::GeometryError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("bad domain: {0}")]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no secant directions: the base point is isolated in the sampled domain")]
    EmptyCone,
    #[error("estimate did not stabilize: {0}")]
    UnstableEstimate(String),
    #[error("not Lipschitz near the point: sampled constant grows from {coarse} to {fine} when the box shrinks")]
    NotLipschitz { coarse: f64, fine: f64 },
    #[error("boundary values are not affine: residual {residual} > tol {tol}")]
    BoundaryHypothesisFailed { residual: f64, tol: f64 },
    #[error("no mean point certified; best residual {best_residual} at {best_point:?}")]
    NoCertificate { best_residual: f64, best_point: Vec<f64> },
    #[error("vector {vector:?} is not normal: angle {violation} with tangent direction {direction:?}")]
    NormalMembershipFailed { vector: Vec<f64>, violation: f64, direction: Vec<f64> },
}

pub type Result<T> = std::result::Result<T, Error>;
