//! Eigenvalue bounds, equality diagnosis and proof replay.

pub mod data;
pub mod diagnose;
pub mod poly;
pub mod replay;
pub mod report;
pub mod space;
pub mod verify;

pub use data::{snap_kernel, BoundData, FirstModeIntegrals};
pub use diagnose::{diagnose_bundle, diagnose_model, DIAGNOSIS_TOL};
pub use poly::{EigenBasis, Poly, PolySpace};
pub use replay::{replay_proof, ChainStep, ChainTheorem, ProofChainReport, StepKind};
pub use report::{
    BoundId, BoundReport, EqualityDiagnosis, InputDigest, MatchedCase, TOL_EQ_ANALYTIC,
    TOL_EQ_NUMERICAL,
};
pub use space::{FunctionSpace, GridSpace};
pub use verify::{
    am_gm, applicable_bounds, eigenvalues_needed, optimal_delta, verify, verify_intro_bounds,
    OptimalDelta,
};
