//! Dirichlet experiments on the unit square and cube: the oscillatory
//! problem, its homogenized limit, the first-order corrector `z`, and
//! log-log rate fits of the sup-norm errors.

mod dst;
pub mod expr;
pub mod fd;
pub mod grid;
pub mod rate;

pub use dst::DirichletPoisson;
pub use expr::Expression;
pub use fd::{flat_axes, DirichletConfig, DirichletOperator, DirichletReport};
pub use grid::{Grid, GridFunction};
pub use rate::{
    boundary_datum_is_exact, fit_rate, homogenize_for, preset, run_rate_experiment, solve_homogenized, solve_oscillatory,
    solve_z, tensor_source, BvpSpec, BvpSpecFile, CellData, EpsilonRow, Homogenized, RateConfig, RateExperiment, RateFit, RateFlag,
    MIN_CELLS_PER_PERIOD, PRESET_NAMES,
};
