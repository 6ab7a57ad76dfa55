//! Directed mixed-membership stochastic blockmodel (DiMMSB) toolkit core.
//!
//! This crate holds the pure algorithmic pieces: the domain types, the
//! generative model, a truncated SVD for sparse and dense matrices, the
//! successive projection vertex hunter, the spectral membership estimators
//! and the mixed-Hamming metrics. It is `no_std` and only needs `alloc`;
//! file formats, the experiment harness and the command line live in the
//! `dimmsb` companion crate.
#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod estimator;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod preprocess;
pub mod rng;
pub mod types;
pub mod vertexhunt;

pub use error::{Axis, Error, MembershipViolation, Result};
pub use estimator::{
    disp, disp_equivalence, estimate_from_factor, ideal_disp, reconstruct_memberships, DispOptions, DispResult,
};
pub use linalg::{spectral_norm, top_k_svd, LinearOperator, SvdOptions};
pub use metrics::{di_mixed_hamming, diversity, match_permutation, mixed_hamming, network_stats, NetworkStats};
pub use model::{
    build_omega, check_identifiability, make_planted_memberships, prune_zero_degree, sample_adjacency,
    IdentifiabilityReport, MixedProfileSpec, ModelParams,
};
pub use preprocess::{
    common_submatrix, degree_filter, largest_strong_component, largest_weak_component, DegreeFilterOutcome,
};
pub use types::{validate_membership, BiAdjacency, MembershipMatrix, ProbabilityMatrix, SvdFactor, VertexSet};

/// Dense matrix type used throughout the toolkit.
pub type Matrix = nalgebra::DMatrix<f64>;
