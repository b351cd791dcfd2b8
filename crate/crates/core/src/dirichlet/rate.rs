use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructions::gallery;
use crate::discretization::Discretization;
use crate::error::{HomError, Result};
use crate::field::{zero_mat, CoefficientField, Mat3, MatrixFieldSpec};
use crate::homogenize::{CellSolution, ThirdOrderTensor};
use crate::scalar::{lit, to_f64, Real};
use crate::solver::SolverConfig;

use super::expr::Expression;
use super::fd::{flat_axes, DirichletConfig, DirichletOperator, DirichletReport};
use super::grid::{Grid, GridFunction};

/// Smallest admissible number of FD cells per period.
pub const MIN_CELLS_PER_PERIOD: usize = 16;

/// Dirichlet problem `-A(x/eps):D^2 u = f` in `(0,1)^n`, `u = g` on the
/// boundary, for `eps = 1/m` with `m` running through `inverse_epsilons`.
#[derive(Clone, Debug, Serialize)]
pub struct BvpSpec<T: Real> {
    #[serde(skip)]
    pub field: CoefficientField<T>,
    pub f: Expression,
    pub g: Expression,
    /// Increasing `m`, so `eps = 1/m` decreases.
    pub inverse_epsilons: Vec<usize>,
    /// FD cells per period of `A(x/eps)` along the axes where `A` varies.
    pub cells_per_period: usize,
    /// Cells along axes on which `A` does not depend; `cells_per_period * m`
    /// when unset.
    pub flat_axis_cells: Option<usize>,
}

impl<T: Real> BvpSpec<T> {
    pub fn new(field: CoefficientField<T>, f: &str, g: &str, inverse_epsilons: Vec<usize>) -> Result<Self> {
        let dim = field.dim();
        let spec = Self {
            f: Expression::parse(f, dim)?,
            g: Expression::parse(g, dim)?,
            field,
            inverse_epsilons,
            cells_per_period: MIN_CELLS_PER_PERIOD,
            flat_axis_cells: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn epsilons(&self) -> Vec<f64> {
        self.inverse_epsilons.iter().map(|&m| 1.0 / m as f64).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        if !(2..=3).contains(&dim) {
            return Err(HomError::Invalid(format!("Dirichlet experiments run in dimension 2 or 3, not {dim}")));
        }
        if self.inverse_epsilons.iter().any(|&m| m < 4) {
            return Err(HomError::Invalid("each eps = 1/m needs m >= 4".into()));
        }
        if self.inverse_epsilons.windows(2).any(|w| w[1] <= w[0]) {
            return Err(HomError::Invalid("eps values must be strictly decreasing".into()));
        }
        if self.cells_per_period < MIN_CELLS_PER_PERIOD {
            return Err(HomError::Invalid(format!(
                "{} cells per period do not resolve the microstructure (need {MIN_CELLS_PER_PERIOD})",
                self.cells_per_period
            )));
        }
        if self.flat_axis_cells.is_some_and(|c| c < 4) {
            return Err(HomError::Invalid("flat axes need at least 4 cells".into()));
        }
        let (lo, hi) = self.field.ellipticity();
        if !(lo > T::zero()) {
            return Err(HomError::Ellipticity { lambda_min: to_f64(lo) });
        }
        // only the cross stencil can break monotonicity
        let diagonal = self.field.is_diagonal(lit(1e-14));
        if !diagonal && to_f64(lo / hi) < 0.1 {
            return Err(HomError::Invalid(format!(
                "ellipticity ratio {:.3} below 0.1; the cross stencil may lose monotonicity",
                to_f64(lo / hi)
            )));
        }
        Ok(())
    }

    /// FD grid for `eps = 1/m`.
    pub fn grid_for(&self, m: usize) -> Result<Grid> {
        let flat = flat_axes(&self.field);
        let cells: Vec<usize> = (0..self.dim())
            .map(|a| match (flat[a], self.flat_axis_cells) {
                (true, Some(c)) => c,
                _ => self.cells_per_period * m,
            })
            .collect();
        Grid::new(self.dim(), &cells)
    }
}

/// Solution of the oscillatory problem at `eps = 1/m`.
pub fn solve_oscillatory<T: Real>(
    spec: &BvpSpec<T>,
    m: usize,
    cfg: &DirichletConfig,
) -> Result<(GridFunction<T>, DirichletReport)> {
    let op = DirichletOperator::oscillating(&spec.field, m, spec.grid_for(m)?)?;
    op.solve(&spec.f, &spec.g, cfg)
}

/// Effective matrix and tensor of `A` for the rate experiment.
#[derive(Clone, Debug)]
pub struct Homogenized<T: Real> {
    pub effective: Mat3<T>,
    pub tensor: ThirdOrderTensor<T>,
}

/// How the effective data entering `u` and `z` is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellData {
    /// Cell problems discretized by the same centered differences and the
    /// same cells per period as the Dirichlet grid, so that `u` and `z` are
    /// the limits of the discrete scheme.
    Matched,
    /// Spectral cell problems, i.e. the continuum values.
    Spectral,
}

pub fn homogenize_for<T: Real>(spec: &BvpSpec<T>, data: CellData) -> Result<Homogenized<T>> {
    let cfg = match data {
        CellData::Matched => SolverConfig::default()
            .with_discretization(Discretization::CentralDifference)
            .with_resolution(spec.cells_per_period),
        CellData::Spectral => SolverConfig::default(),
    };
    let sol = CellSolution::new(&spec.field, &cfg)?;
    Ok(Homogenized { effective: sol.effective, tensor: sol.tensor() })
}

/// `-Abar:D^2 u = f`, `u = g` on the boundary.
pub fn solve_homogenized<T: Real>(
    spec: &BvpSpec<T>,
    effective: &Mat3<T>,
    grid: Grid,
    cfg: &DirichletConfig,
) -> Result<(GridFunction<T>, DirichletReport)> {
    DirichletOperator::constant(effective, grid)?.solve(&spec.f, &spec.g, cfg)
}

/// Whether `g` itself solves the homogenized problem, checked on the exact
/// second derivatives at the nodes of `grid`.
pub fn boundary_datum_is_exact<T: Real>(spec: &BvpSpec<T>, effective: &Mat3<T>, grid: Grid) -> Result<bool> {
    let dim = spec.dim();
    let mut hess = Vec::new();
    for k in 0..dim {
        for l in 0..dim {
            if effective[k][l] != T::zero() {
                hess.push((to_f64(effective[k][l]), spec.g.derivative(&[k, l])?));
            }
        }
    }
    let scale = 1.0 + GridFunction::<f64>::from_expression(grid, &spec.g).max_abs();
    Ok((0..grid.node_count()).all(|i| {
        let x = grid.coords(grid.unravel(i));
        let lhs: f64 = hess.iter().map(|(c, e)| c * e.eval(&x)).sum();
        (lhs + spec.f.eval(&x)).abs() <= 1e-9 * scale
    }))
}

/// `sum_jkl c_j^{kl} d^3_jkl u` on the grid nodes, from exact derivatives of
/// `g` when `g` is the homogenized solution and from differences of `u`
/// otherwise.
pub fn tensor_source<T: Real>(
    tensor: &ThirdOrderTensor<T>,
    u: &GridFunction<T>,
    exact: Option<&Expression>,
) -> Result<GridFunction<T>> {
    let dim = tensor.dim;
    let grid = u.grid;
    let mut out = GridFunction::<T>::zeros(grid);
    for j in 0..dim {
        for k in 0..dim {
            for l in 0..dim {
                let c = tensor.c[j][k][l];
                if c == T::zero() {
                    continue;
                }
                let d = match exact {
                    Some(g) => GridFunction::from_expression(grid, &g.derivative(&[j, k, l])?),
                    None => u.third_derivative([j, k, l]),
                };
                out = out.lin_comb(T::one(), &d, c)?;
            }
        }
    }
    Ok(out)
}

/// `-Abar:D^2 z = -source`, `z = 0` on the boundary.
pub fn solve_z<T: Real>(
    effective: &Mat3<T>,
    source: &GridFunction<T>,
    cfg: &DirichletConfig,
) -> Result<(GridFunction<T>, DirichletReport)> {
    let grid = source.grid;
    let op = DirichletOperator::constant(effective, grid)?;
    let rhs: Vec<T> = grid.interior_to_full().into_iter().map(|c| -source.values[c]).collect();
    op.solve_values(&rhs, &Expression::zero(grid.dim), cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateFlag {
    /// Errors fail to decrease with `eps`.
    NonMonotone,
    /// Constant coefficients: the errors are discretization noise.
    Degenerate,
    /// Log-log fit residual above 0.05; the slope is not reliable.
    PoorFit,
}

/// Least-squares line through `(log eps, log err)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the log residuals.
    pub residual: f64,
}

pub fn fit_rate(eps: &[f64], err: &[f64]) -> Result<RateFit> {
    if eps.len() != err.len() || eps.len() < 2 {
        return Err(HomError::Invalid("a rate fit needs matching lists of at least two points".into()));
    }
    if err.iter().chain(eps).any(|&v| !(v > 0.0)) {
        return Err(HomError::Degenerate("log-log fit needs positive values".into()));
    }
    let x: Vec<f64> = eps.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    Ok(RateFit { slope, intercept, residual: (ss / n).sqrt() })
}

#[derive(Clone, Debug, Serialize)]
pub struct EpsilonRow {
    pub epsilon: f64,
    pub error_u: f64,
    pub error_z: f64,
    pub oscillatory: DirichletReport,
    pub homogenized: DirichletReport,
    pub corrector: DirichletReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct RateExperiment {
    pub rows: Vec<EpsilonRow>,
    pub fit_u: Option<RateFit>,
    pub fit_z: Option<RateFit>,
    pub flags: Vec<RateFlag>,
    pub interior_norm: bool,
    pub cell_data: CellData,
    pub effective: Vec<Vec<f64>>,
    /// Whether `u = g` held exactly and third derivatives came from `g`.
    pub exact_homogenized: bool,
}

impl RateExperiment {
    pub fn errors_u(&self) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.epsilon, r.error_u)).collect()
    }

    pub fn errors_z(&self) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.epsilon, r.error_z)).collect()
    }

    pub fn fitted_rate_u(&self) -> Option<f64> {
        self.fit_u.map(|f| f.slope)
    }

    pub fn fitted_rate_z(&self) -> Option<f64> {
        self.fit_z.map(|f| f.slope)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RateConfig {
    pub solver: DirichletConfig,
    /// Measure errors on `[1/4, 3/4]^n` only.
    pub interior: bool,
    pub cell_data: CellData,
}

impl Default for RateConfig {
    fn default() -> Self {
        Self { solver: DirichletConfig::default(), interior: true, cell_data: CellData::Matched }
    }
}

fn one_epsilon<T: Real>(spec: &BvpSpec<T>, hom: &Homogenized<T>, exact: bool, m: usize, cfg: &RateConfig) -> Result<EpsilonRow> {
    let (ueps, rep_eps) = solve_oscillatory(spec, m, &cfg.solver)?;
    let grid = ueps.grid;
    let (u, rep_u) = solve_homogenized(spec, &hom.effective, grid, &cfg.solver)?;
    let source = tensor_source(&hom.tensor, &u, exact.then_some(&spec.g))?;
    let (z, rep_z) = solve_z(&hom.effective, &source, &cfg.solver)?;
    let eps = 1.0 / m as f64;
    let error_u = ueps.max_diff(&u, cfg.interior)?;
    // u^eps - u + 2 eps z
    let expansion = u.lin_comb(T::one(), &z, lit(-2.0 * eps))?;
    let error_z = ueps.max_diff(&expansion, cfg.interior)?;
    Ok(EpsilonRow { epsilon: eps, error_u, error_z, oscillatory: rep_eps, homogenized: rep_u, corrector: rep_z })
}

/// Solves every `eps` of the spec, measures `|u^eps - u|` and
/// `|u^eps - u + 2 eps z|` in the sup norm and fits log-log slopes.
pub fn run_rate_experiment<T: Real>(spec: &BvpSpec<T>, cfg: &RateConfig) -> Result<RateExperiment> {
    spec.validate()?;
    let hom = homogenize_for(spec, cfg.cell_data)?;
    let coarse = spec.grid_for(spec.inverse_epsilons[0])?;
    let exact = boundary_datum_is_exact(spec, &hom.effective, coarse)?;
    let rows = spec
        .inverse_epsilons
        .par_iter()
        .map(|&m| one_epsilon(spec, &hom, exact, m, cfg))
        .collect::<Result<Vec<_>>>()?;

    let mut flags = Vec::new();
    let degenerate = spec.field.is_constant(lit(1e-12));
    if degenerate {
        flags.push(RateFlag::Degenerate);
    }
    if !degenerate && rows.windows(2).any(|w| w[1].error_u >= w[0].error_u) {
        flags.push(RateFlag::NonMonotone);
    }
    let eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    let eu: Vec<f64> = rows.iter().map(|r| r.error_u).collect();
    let ez: Vec<f64> = rows.iter().map(|r| r.error_z).collect();
    let (fit_u, fit_z) = if rows.len() >= 4 && !degenerate {
        (fit_rate(&eps, &eu).ok(), fit_rate(&eps, &ez).ok())
    } else {
        (None, None)
    };
    if fit_u.is_some_and(|f| f.residual >= 0.05) {
        flags.push(RateFlag::PoorFit);
    }
    let dim = spec.dim();
    let effective = (0..dim).map(|k| (0..dim).map(|l| to_f64(hom.effective[k][l])).collect()).collect();
    Ok(RateExperiment { rows, fit_u, fit_z, flags, interior_norm: cfg.interior, cell_data: cfg.cell_data, effective, exact_homogenized: exact })
}

/// The three-dimensional optimal-rate example: the constant-trace field with
/// `a3 = 10 - b1 - b2`, `f = 0`, `g = 8 x1^3 - 3 x1 x3^2`, `eps` from 1/8 to
/// 1/32. The field does not depend on `y3`, so the third axis uses a fixed
/// number of cells.
pub fn preset_optimal_rate_3d<T: Real>() -> Result<BvpSpec<T>> {
    let field = gallery::<T>("rate_example_3d")?.field;
    let mut spec = BvpSpec::new(field, "0", "8*x1^3 - 3*x1*x3^2", vec![8, 12, 16, 24, 32])?;
    spec.flat_axis_cells = Some(32);
    Ok(spec)
}

/// A diagonal planar field with `f = 0` and `g = x1^3 + x2^3`. For diagonal
/// fields in the plane the first-order term vanishes whenever `u` is
/// `Abar`-harmonic, so the error is second order.
pub fn preset_diagonal_2d<T: Real>() -> Result<BvpSpec<T>> {
    let field = gallery::<T>("st_2d")?.field;
    BvpSpec::new(field, "0", "x1^3 + x2^3", vec![8, 12, 16, 24, 32])
}

/// Constant coefficients: the rates are meaningless and flagged.
pub fn preset_constant_2d<T: Real>() -> Result<BvpSpec<T>> {
    let mut m = zero_mat::<T>();
    m[0][0] = T::one();
    m[1][1] = lit(2.0);
    let field = CoefficientField::constant(2, 16, &m)?;
    BvpSpec::new(field, "1", "x1^3 + x2^3", vec![4, 6, 8, 12])
}

pub const PRESET_NAMES: [&str; 3] = ["optimal_rate_3d", "diagonal_2d", "constant_2d"];

pub fn preset<T: Real>(name: &str) -> Result<BvpSpec<T>> {
    match name {
        "optimal_rate_3d" => preset_optimal_rate_3d(),
        "diagonal_2d" => preset_diagonal_2d(),
        "constant_2d" => preset_constant_2d(),
        _ => Err(HomError::UnknownName(name.to_string())),
    }
}

/// JSON form of a rate experiment. Exactly one of `preset`, `gallery` and
/// `field` names the coefficients; a preset also supplies `f`, `g` and the
/// `eps` list, which the other keys may override.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BvpSpecFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gallery: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<MatrixFieldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    /// `eps` values; each must be the reciprocal of an integer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells_per_period: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flat_axis_cells: Option<usize>,
}

fn inverse_epsilon(eps: f64) -> Result<usize> {
    let m = (1.0 / eps).round();
    if !(eps > 0.0) || m < 1.0 || (1.0 / eps - m).abs() > 1e-9 * m {
        return Err(HomError::Invalid(format!("eps = {eps} is not the reciprocal of an integer")));
    }
    Ok(m as usize)
}

impl BvpSpecFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| HomError::Parse(e.to_string()))
    }

    pub fn to_spec<T: Real>(&self) -> Result<BvpSpec<T>> {
        let sources = [self.preset.is_some(), self.gallery.is_some(), self.field.is_some()];
        if sources.iter().filter(|&&s| s).count() != 1 {
            return Err(HomError::Invalid("give exactly one of `preset`, `gallery` and `field`".into()));
        }
        let ms = self.epsilons.as_ref().map(|v| v.iter().map(|&e| inverse_epsilon(e)).collect::<Result<Vec<_>>>()).transpose()?;
        let mut spec = if let Some(name) = &self.preset {
            let mut s = preset::<T>(name)?;
            let dim = s.dim();
            if let Some(f) = &self.f {
                s.f = Expression::parse(f, dim)?;
            }
            if let Some(g) = &self.g {
                s.g = Expression::parse(g, dim)?;
            }
            if let Some(ms) = ms {
                s.inverse_epsilons = ms;
            }
            s
        } else {
            let field = match (&self.gallery, &self.field) {
                (Some(name), _) => gallery::<T>(name)?.field,
                (_, Some(doc)) => doc.to_field()?,
                _ => unreachable!(),
            };
            let (Some(f), Some(g), Some(ms)) = (&self.f, &self.g, ms) else {
                return Err(HomError::Invalid("`f`, `g` and `epsilons` are required without a preset".into()));
            };
            BvpSpec::new(field, f, g, ms)?
        };
        if let Some(p) = self.cells_per_period {
            spec.cells_per_period = p;
        }
        if self.flat_axis_cells.is_some() {
            spec.flat_axis_cells = self.flat_axis_cells;
        }
        spec.validate()?;
        Ok(spec)
    }
}
