//! Spectral discretization of the operator on Fourier-parametrized tori.

pub mod bundle;
pub mod grid;
pub mod immersion;
pub mod operator;
pub mod solver;
pub mod spectrum;

pub use bundle::{build_bundle, CurvatureBundle, PositionIdentities};
pub use grid::{SpectralOps, TorusGrid};
pub use immersion::{FourierImmersion, FourierTerm, Trig};
pub use operator::SolverOperator;
pub use solver::{
    assemble_dense, dense_smallest, lanczos_smallest, DenseAssembly, EigenPairs, LanczosOptions,
    LinearOperator,
};
pub use spectrum::{
    cluster_eigenvalues, solve, spectrum, Cluster, SolverChoice, SpectrumOptions, SpectrumResult,
};
