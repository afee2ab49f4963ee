use std::fmt;

use thiserror::Error;

use crate::graph::Edge;
use crate::stress::Certificate;

pub type Result<T> = std::result::Result<T, Error>;

/// Which half of an attachment an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::A => f.write_str("A"),
            Side::B => f.write_str("B"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("edge {edge} has an endpoint outside 0..{vertex_count}")]
    EdgeOutOfRange { edge: Edge, vertex_count: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}")]
    DuplicateEdge(Edge),
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error("invalid tolerances: zero_rel={zero_rel}, geom_abs={geom_abs}")]
    InvalidTolerances { zero_rel: f64, geom_abs: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("configuration does not affinely span R^{dim}")]
    DegenerateSpan { dim: usize },
    #[error(
        "distance between corresponding vertices {first} and {second} differs by {mismatch:e}"
    )]
    IncompatibleDistances {
        first: usize,
        second: usize,
        mismatch: f64,
    },
    #[error("invalid attachment: {0}")]
    InvalidAttachment(String),
    #[error("framework has {vertex_count} vertices, at least {required} required")]
    TooFewVertices {
        vertex_count: usize,
        required: usize,
    },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("graph is not complete")]
    NotComplete,
    #[error("configuration is not in general position")]
    NotGeneralPosition,
    #[error("kernel of the first matrix is not contained in the kernel of the second (residual {residual:e})")]
    KernelNotContained { residual: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("{shared} shared vertices, need n >= d+1 = {required}")]
    NotEnoughSharedVertices { shared: usize, required: usize },
    #[error("stress matrix of framework {side} is not certified: {reasons}")]
    UncertifiedInput { side: Side, reasons: String },
    #[error("framework is not infinitesimally rigid (rank {rank}, expected {expected})")]
    NotInfinitesimallyRigid { rank: usize, expected: usize },
    #[error("least-squares residual {residual:e} for edge {edge} exceeds {bound:e}")]
    ResidualTooLarge {
        edge: Edge,
        residual: f64,
        bound: f64,
    },
    #[error("edge {0} is already present in the kept framework")]
    EdgeAlreadyPresent(Edge),
    #[error("no reflection through the shared vertices changes a cross distance")]
    DegenerateReflection,
    #[error("gave up after {attempts} sampling attempts")]
    ExhaustedRetries { attempts: usize },
    #[error("could not place vertex {vertex} in general position")]
    GeneralPositionFailure { vertex: usize },
    #[error("invalid lateration plan: {0}")]
    InvalidPlan(String),
    #[error("certification failed: {}", .0.reasons_summary())]
    CertificationFailed(Box<Certificate>),
}
