//! Universal-rigidity certificates for bar-joint frameworks.
//!
//! A framework is a graph together with a placement of its vertices in
//! `R^d`. A framework in general position with at least `d + 2` vertices is
//! universally rigid whenever it carries a positive semidefinite stress matrix
//! of nullity `d + 1`. This crate builds, verifies and composes such
//! certificates:
//!
//! - [`graph`] and [`framework`]: combinatorics, configurations, the rigidity
//!   matrix, general position and infinitesimal rigidity.
//! - [`stress`]: equilibrium stresses, stress matrices and certificate checks.
//! - [`attach`]: joining two certified frameworks on shared vertices, with and
//!   without removing shared edges inherited from one side.
//! - [`generate`]: random general-position sampling and `(d+1)`-lateration
//!   frameworks with certified stress matrices.
//!
//! Vertices are 0-based indices everywhere in this crate.

pub mod align;
pub mod attach;
pub mod error;
pub mod framework;
pub mod generate;
pub mod graph;
pub mod linalg;
pub mod stress;
pub mod tolerance;

pub use attach::{
    attach, check_attachment_rigidity_condition, combined_stress, combined_stress_via_merge,
    counter_stress, edge_reduced_stress, edge_reduced_stress_with, reflection_counterexample,
    Attachment, AttachmentSpec, CounterStress, EdgeReducedStress, EdgeReduction, EdgeSolve,
    Multiplier,
};
pub use error::{Error, Result, Side};
pub use framework::{Configuration, Framework, RigidityMatrix};
pub use generate::{
    compose_certified, generate_lateration, generate_lateration_from, is_lateration_graph,
    sample_general_position, LaterationPlan,
};
pub use graph::{Edge, Graph};
pub use stress::{
    certify_universal_rigidity, complete_graph_stress, kernel_basis_check, psd_combine,
    psd_combine_matrices, psd_nullity, stress_space_basis, verify_stress_matrix, Certificate,
    PsdReport, Reason, StressMatrix, StressVector, Verdict,
};
pub use tolerance::Tolerances;
