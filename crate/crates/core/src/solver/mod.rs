//! Singular periodic problems: invariant measure, cell problems, Poisson.

pub mod dense;
pub mod gmres;
mod periodic;

use serde::{Deserialize, Serialize};

pub use periodic::PeriodicOperator;

use crate::discretization::Discretization;
use crate::error::{HomError, Result};
use crate::field::{CoefficientField, PeriodicField, WaveTerm};
use crate::scalar::{lit, to_f64, two_pi, Real};

/// Diagnostics of one periodic solve.
///
/// `residual_linf` is the sup norm of the residual after the
/// constant-coefficient inverse has been applied, which bounds the error of
/// the solution; `operator_residual_linf` is the raw `A:D^2 v + rhs`, whose
/// roundoff floor grows with the square of the resolution.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub residual_linf: f64,
    pub operator_residual_linf: f64,
    pub iterations: usize,
    pub compatibility_defect: f64,
    pub resolution_used: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub restart: usize,
    /// Largest admissible `|int r rhs|`, relative to `max(1, |rhs|_inf)`.
    pub compatibility_tolerance: f64,
    pub discretization: Discretization,
    /// Grid resolution override; the field's own resolution otherwise.
    pub resolution: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-11,
            max_iterations: 500,
            restart: 50,
            compatibility_tolerance: 1e-9,
            discretization: Discretization::Spectral,
            resolution: None,
        }
    }
}

impl SolverConfig {
    pub fn with_resolution(mut self, n: usize) -> Self {
        self.resolution = Some(n);
        self
    }

    pub fn with_discretization(mut self, d: Discretization) -> Self {
        self.discretization = d;
        self
    }

    /// The configured tolerance, raised to what the scalar type can reach.
    pub fn effective_tolerance<T: Real>(&self) -> f64 {
        self.tolerance.max(200.0 * T::eps_f64())
    }

    pub fn compatibility_for<T: Real>(&self) -> f64 {
        self.compatibility_tolerance.max(1e3 * T::eps_f64())
    }
}

/// Builds the grid operator for `a` at the configured resolution.
pub fn operator_for<T: Real>(a: &CoefficientField<T>, cfg: &SolverConfig) -> Result<PeriodicOperator<T>> {
    let n = cfg.resolution.unwrap_or(a.resolution());
    PeriodicOperator::new(a.dim(), n, a.sample_values(n)?, cfg.discretization)
}

/// Invariant measure `r > 0`, `int r = 1`, `-D^2:(rA) = 0`.
pub fn solve_invariant_measure<T: Real>(
    a: &CoefficientField<T>,
    cfg: &SolverConfig,
) -> Result<(PeriodicField<T>, SolveReport)> {
    let op = operator_for(a, cfg)?;
    let (r, report) = op.invariant_measure(cfg)?;
    Ok((PeriodicField::from_grid(a.dim(), op.resolution(), &r)?, report))
}

/// Mean-zero `v` with `-A:D^2 v = rhs`, given the invariant measure `r`.
pub fn solve_cell<T: Real>(
    a: &CoefficientField<T>,
    r: &PeriodicField<T>,
    rhs: &PeriodicField<T>,
    cfg: &SolverConfig,
) -> Result<(PeriodicField<T>, SolveReport)> {
    let op = operator_for(a, cfg)?;
    let n = op.resolution();
    let (v, report) = op.solve_cell(&r.sample_values(n)?, &rhs.sample_values(n)?, cfg)?;
    Ok((PeriodicField::from_grid(a.dim(), n, &v)?, report))
}

/// Mean-zero `w` with `-Laplace w = rhs`, by exact division of each mode.
pub fn solve_poisson<T: Real>(rhs: &PeriodicField<T>) -> Result<PeriodicField<T>> {
    let m = rhs.mean();
    let scale = T::one().max(rhs.max_abs());
    if to_f64(m.abs()) > 1e-12 * to_f64(scale) {
        return Err(HomError::Compatibility { defect: to_f64(m.abs()) });
    }
    let tp2 = two_pi::<T>() * two_pi::<T>();
    let terms: Vec<WaveTerm<T>> = rhs
        .terms()
        .iter()
        .filter(|t| !t.is_constant())
        .map(|t| {
            let k2: i64 = t.k.iter().map(|c| c * c).sum();
            WaveTerm { amp: t.amp / (tp2 * lit::<T>(k2 as f64)), ..*t }
        })
        .collect();
    PeriodicField::from_derived_terms(rhs.dim(), rhs.resolution(), terms)
}
