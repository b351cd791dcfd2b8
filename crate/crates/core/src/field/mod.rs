//! Real periodic scalar and symmetric-matrix fields on the torus.

pub mod fft;
mod json;
mod matrix;
mod scalar_field;

pub use json::{default_resolution, FieldSpec, MatrixFieldSpec, TermSpec};
pub use matrix::{identity_mat, pair_index, sym_eigen_bounds, upper_pairs, zero_mat, CoefficientField, Mat3};
pub use scalar_field::{padded_resolution_cap, PeriodicField, Phase, WaveTerm, SHORT_TERM_LIST};
