//! Periodic homogenization of nondivergence-form operators `-A(x/eps):D^2`.
//!
//! The crate computes invariant measures, correctors, the effective matrix
//! and the third-order tensor `c_j^{kl}` of a periodic diffusion matrix,
//! decides whether the matrix is type-eps^2 (symmetrized tensor vanishes)
//! or type-eps, and measures Dirichlet homogenization rates on the unit
//! square and cube.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar for the common case.

pub mod dirichlet;
pub mod discretization;
pub mod error;
pub mod field;
pub mod constructions;
pub mod homogenize;
pub mod linalg;
pub mod scalar;
pub mod solver;
pub mod suites;

pub use discretization::Discretization;
pub use error::{HomError, Result};
pub use homogenize::{ClassificationReport, ClassifyConfig, Criterion, ThirdOrderTensor, Verdict};
pub use scalar::Real;
pub use solver::{SolveReport, SolverConfig};

pub type Field64 = field::PeriodicField<f64>;
pub type Field32 = field::PeriodicField<f32>;
pub type Coefficients64 = field::CoefficientField<f64>;
pub type Coefficients32 = field::CoefficientField<f32>;
pub type Tensor64 = homogenize::ThirdOrderTensor<f64>;
pub type Tensor32 = homogenize::ThirdOrderTensor<f32>;
