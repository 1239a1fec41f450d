use thiserror::Error;

use crate::orbit::SolutionClass;

pub type Result<T> = std::result::Result<T, DsgError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DsgError {
    #[error("invalid potential parameters: {0}")]
    InvalidParams(String),

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    #[error("boundary values ({left}, {right}) are not within 1e-3 of a multiple of pi")]
    NonVacuumBoundary { left: f64, right: f64 },

    #[error("step limit of {steps} exceeded at x = {x}")]
    StepLimitExceeded { steps: usize, x: f64 },

    #[error("integration blew up at x = {x} (phi = {phi}, dphi = {dphi})")]
    NonFiniteState { x: f64, phi: f64, dphi: f64 },

    #[error("P = {p} does not give a periodic orbit")]
    NotPeriodic { p: f64 },

    #[error("P = {p} sits on a divergent limit of the period")]
    NotBounded { p: f64 },

    #[error("solution class {class:?} has no finite period")]
    NotPeriodicOrStepLike { class: SolutionClass },

    #[error("found {found} center crossings before x_max = {x_max}; need at least 2")]
    EventNotFound { found: usize, x_max: f64 },

    #[error("grid point P = {p} is {found:?}, expected {expected:?}")]
    MixedClasses {
        p: f64,
        found: SolutionClass,
        expected: SolutionClass,
    },

    #[error("branch starting at P = {p} has {points} points; force needs at least 3")]
    BranchTooSmall { p: f64, points: usize },

    #[error("state diagram has {rows} rows; need at least 5")]
    TooFewRows { rows: usize },

    #[error("quadrature did not reach relative tolerance {tol} (last change {change})")]
    QuadratureNotConverged { tol: f64, change: f64 },
}
