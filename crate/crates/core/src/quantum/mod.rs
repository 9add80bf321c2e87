//! Finite-dimensional quantum strategies, the reduction chain and its
//! numerical certificates.

use thiserror::Error;

use crate::games::GameError;
use crate::graph::Color;

pub mod assignment;
pub mod audit;
pub mod linalg;
pub mod random;
pub mod reduce;
pub mod sequential;
pub mod strategy;

pub use assignment::{
    assignment_norms, check_bounds, eps_table, extract_assignment, Assignment, BoundCheck,
    EpsTable, NormReport, Violation,
};
pub use linalg::{matrix_norms, CMatrix, CVector};
pub use reduce::{reduce_edge_to_bcs, reduce_rzkp_to_edge};
pub use sequential::sequential_coloring;
pub use strategy::{win_probability, Pvm, QuantumStrategy};

/// Entrywise tolerance for projector and completeness checks.
pub const TOL: f64 = 1e-9;

/// Absolute slack for certificate comparisons involving `rho^1/2`.
pub const CERT_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("state has norm {0}, expected 1")]
    NotNormalized(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operator for {0} is not a projector")]
    NotProjector(String),
    #[error("measurement for {0} does not sum to the identity")]
    Incomplete(String),
    #[error("no measurement for {0}")]
    MissingPvm(String),
    #[error("projectors of vertex {0} do not sum to the identity")]
    NotVertexComplete(usize),
    #[error("no projector for vertex {0}, color {1}")]
    MissingProjector(usize, Color),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("matrix has a non-finite entry")]
    NonFinite,
    #[error("strategy answers belong to a different game")]
    WrongGame,
    #[error("norm report and table disagree: {0}")]
    InputMismatch(String),
    #[error("every outcome has vanishing probability")]
    ZeroProbability,
    #[error(transparent)]
    Game(#[from] GameError),
}
