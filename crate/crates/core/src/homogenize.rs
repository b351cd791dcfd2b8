//! Effective matrix, third-order tensor and the type-eps / type-eps^2 verdict.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretization::Discretization;
use crate::error::{HomError, Result};
use crate::field::{upper_pairs, zero_mat, CoefficientField, Mat3, PeriodicField};
use crate::scalar::{lit, mean, Real};
use crate::solver::{operator_for, PeriodicOperator, SolveReport, SolverConfig};

pub type Tensor3<T> = [[[T; 3]; 3]; 3];

/// Default base resolution of the two-resolution classification.
pub fn default_resolution(dim: usize) -> usize {
    if dim == 3 {
        32
    } else {
        64
    }
}

/// Invariant measure, correctors and effective matrix on one grid.
pub struct CellSolution<T: Real> {
    op: PeriodicOperator<T>,
    pub r: Vec<T>,
    /// Correctors `v^{kl}` in upper-triangle order.
    pub correctors: Vec<Vec<T>>,
    pub effective: Mat3<T>,
    pub invariant_report: SolveReport,
    pub corrector_reports: Vec<SolveReport>,
}

impl<T: Real> CellSolution<T> {
    pub fn new(a: &CoefficientField<T>, cfg: &SolverConfig) -> Result<Self> {
        Self::from_operator(operator_for(a, cfg)?, cfg)
    }

    /// Runs the invariant-measure solve and the `n(n+1)/2` cell problems.
    pub fn from_operator(op: PeriodicOperator<T>, cfg: &SolverConfig) -> Result<Self> {
        let (r, invariant_report) = op.invariant_measure(cfg)?;
        let pairs = upper_pairs(op.dim());
        let mut effective = zero_mat();
        let mut rhs = Vec::with_capacity(pairs.len());
        for &(k, l) in &pairs {
            let a = op.coefficient(k, l);
            let abar = mean(&r.iter().zip(a).map(|(&x, &y)| x * y).collect::<Vec<_>>());
            effective[k][l] = abar;
            effective[l][k] = abar;
            rhs.push(a.iter().map(|&x| x - abar).collect::<Vec<T>>());
        }
        let solved: Vec<(Vec<T>, SolveReport)> =
            rhs.par_iter().map(|b| op.solve_cell(&r, b, cfg)).collect::<Result<Vec<_>>>()?;
        let (correctors, corrector_reports) = solved.into_iter().unzip();
        Ok(Self { op, r, correctors, effective, invariant_report, corrector_reports })
    }

    pub fn operator(&self) -> &PeriodicOperator<T> {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn resolution(&self) -> usize {
        self.op.resolution()
    }

    pub fn corrector(&self, k: usize, l: usize) -> &[T] {
        let (k, l) = if k <= l { (k, l) } else { (l, k) };
        let p = upper_pairs(self.dim()).iter().position(|&q| q == (k, l)).unwrap();
        &self.correctors[p]
    }

    pub fn r_field(&self) -> Result<PeriodicField<T>> {
        PeriodicField::from_grid(self.dim(), self.resolution(), &self.r)
    }

    pub fn corrector_field(&self, k: usize, l: usize) -> Result<PeriodicField<T>> {
        PeriodicField::from_grid(self.dim(), self.resolution(), self.corrector(k, l))
    }

    /// `int r (A e_j) . grad v` by grid quadrature, the tensor building block.
    pub fn flux_moment(&self, v: &[T], j: usize) -> T {
        let flux = self.op.flux(v, j);
        mean(&flux.iter().zip(&self.r).map(|(&f, &r)| f * r).collect::<Vec<_>>())
    }

    /// Assembles `c_j^{kl}`, `C_jkl` and the effective matrix.
    pub fn tensor(&self) -> ThirdOrderTensor<T> {
        let dim = self.dim();
        let mut c = [[[T::zero(); 3]; 3]; 3];
        for (p, &(k, l)) in upper_pairs(dim).iter().enumerate() {
            for (j, cj) in c.iter_mut().enumerate().take(dim) {
                let v = self.flux_moment(&self.correctors[p], j);
                cj[k][l] = v;
                cj[l][k] = v;
            }
        }
        let mut reports = vec![self.invariant_report.clone()];
        reports.extend(self.corrector_reports.iter().cloned());
        ThirdOrderTensor::new(dim, c, self.effective, self.resolution(), self.op.discretization(), reports)
    }
}

/// `c_j^{kl}` (stored as `c[j][k][l]`), its symmetrization and `Abar`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ThirdOrderTensor<T: Real> {
    pub dim: usize,
    pub c: Tensor3<T>,
    pub c_sym: Tensor3<T>,
    pub effective: Mat3<T>,
    /// Frobenius norm of the effective matrix.
    pub scale: T,
    pub resolution: usize,
    pub discretization: Discretization,
    pub reports: Vec<SolveReport>,
}

impl<T: Real> ThirdOrderTensor<T> {
    pub fn new(
        dim: usize,
        c: Tensor3<T>,
        effective: Mat3<T>,
        resolution: usize,
        discretization: Discretization,
        reports: Vec<SolveReport>,
    ) -> Self {
        let mut c_sym = [[[T::zero(); 3]; 3]; 3];
        for j in 0..dim {
            for k in 0..dim {
                for l in 0..dim {
                    c_sym[j][k][l] = c[j][k][l] + c[k][j][l] + c[l][j][k];
                }
            }
        }
        let mut s = T::zero();
        for row in effective.iter().take(dim) {
            for &x in row.iter().take(dim) {
                s = s + x * x;
            }
        }
        Self { dim, c, c_sym, effective, scale: s.sqrt(), resolution, discretization, reports }
    }

    /// `c_j^{kl}` with 0-based indices.
    pub fn get(&self, j: usize, k: usize, l: usize) -> T {
        self.c[j][k][l]
    }

    fn fold(&self, t: &Tensor3<T>) -> T {
        let mut m = T::zero();
        for plane in t.iter().take(self.dim) {
            for row in plane.iter().take(self.dim) {
                for &x in row.iter().take(self.dim) {
                    m = m.max(x.abs());
                }
            }
        }
        m
    }

    pub fn max_abs_c(&self) -> T {
        self.fold(&self.c)
    }

    pub fn max_abs_sym(&self) -> T {
        self.fold(&self.c_sym)
    }

    /// Largest entrywise difference of `c` against another tensor.
    pub fn max_diff_c(&self, other: &Self) -> T {
        let mut d = [[[T::zero(); 3]; 3]; 3];
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    d[j][k][l] = self.c[j][k][l] - other.c[j][k][l];
                }
            }
        }
        self.fold(&d)
    }

    pub fn max_diff_sym(&self, other: &Self) -> T {
        let mut d = [[[T::zero(); 3]; 3]; 3];
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    d[j][k][l] = self.c_sym[j][k][l] - other.c_sym[j][k][l];
                }
            }
        }
        self.fold(&d)
    }

    /// `sum_{jkl} c_j^{kl} d3(j, k, l)`, the source of the first-order corrector.
    pub fn contract(&self, d3: impl Fn(usize, usize, usize) -> T) -> T {
        let mut s = T::zero();
        for j in 0..self.dim {
            for k in 0..self.dim {
                for l in 0..self.dim {
                    if self.c[j][k][l] != T::zero() {
                        s = s + self.c[j][k][l] * d3(j, k, l);
                    }
                }
            }
        }
        s
    }

    /// Entries as `(j, k, l, value)` with 1-based indices, `k <= l`.
    pub fn entries(&self) -> Vec<(usize, usize, usize, T)> {
        let mut v = Vec::new();
        for j in 0..self.dim {
            for (k, l) in upper_pairs(self.dim) {
                v.push((j + 1, k + 1, l + 1, self.c[j][k][l]));
            }
        }
        v
    }
}

/// Effective matrix `int r A` by grid quadrature against a given `r`.
pub fn effective_matrix<T: Real>(a: &CoefficientField<T>, r: &PeriodicField<T>) -> Result<Mat3<T>> {
    let n = a.resolution().max(r.resolution());
    let rv = r.sample_values(n)?;
    let mut m = zero_mat();
    for (e, (k, l)) in a.entries().iter().zip(upper_pairs(a.dim())) {
        let ev = e.sample_values(n)?;
        let v = mean(&ev.iter().zip(&rv).map(|(&x, &y)| x * y).collect::<Vec<_>>());
        m[k][l] = v;
        m[l][k] = v;
    }
    Ok(m)
}

/// Full pipeline at the configured (or the field's) resolution.
pub fn third_order_tensor<T: Real>(a: &CoefficientField<T>, cfg: &SolverConfig) -> Result<ThirdOrderTensor<T>> {
    Ok(CellSolution::new(a, cfg)?.tensor())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    TypeEps2,
    TypeEps,
    Unresolved,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::TypeEps2 => "type-eps^2",
            Verdict::TypeEps => "type-eps",
            Verdict::Unresolved => "unresolved",
        })
    }
}

/// Which tensor the verdict looks at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// `max |C_jkl|`, valid for every field.
    Symmetrized,
    /// `max |c_j^{kl}|`, valid for diagonal or constant-trace planar fields.
    Full,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ClassificationReport<T: Real> {
    /// Tensor on the finer grid.
    pub tensor: ThirdOrderTensor<T>,
    pub coarse: ThirdOrderTensor<T>,
    pub verdict: Verdict,
    pub criterion: Criterion,
    /// Largest tested entry on the finer grid.
    pub max_c: T,
    pub threshold: T,
    /// Largest entrywise disagreement between the two grids.
    pub gap: T,
    pub resolutions: (usize, usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub solver: SolverConfig,
    /// Base resolution `N`; the check also runs at `2N`.
    pub resolution: Option<usize>,
    /// Relative verdict threshold, multiplied by `max(1, |Abar|_F)`.
    pub threshold: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self { solver: SolverConfig::default(), resolution: None, threshold: 1e-7 }
    }
}

impl ClassifyConfig {
    pub fn with_resolution(mut self, n: usize) -> Self {
        self.resolution = Some(n);
        self
    }
}

fn tensor_pair<T: Real>(a: &CoefficientField<T>, cfg: &ClassifyConfig) -> Result<(ThirdOrderTensor<T>, ThirdOrderTensor<T>)> {
    let n = cfg.resolution.unwrap_or_else(|| default_resolution(a.dim()));
    let (coarse, fine) = rayon::join(
        || third_order_tensor(a, &cfg.solver.clone().with_resolution(n)),
        || third_order_tensor(a, &cfg.solver.clone().with_resolution(2 * n)),
    );
    Ok((coarse?, fine?))
}

pub(crate) fn decide<T: Real>(
    coarse: ThirdOrderTensor<T>,
    fine: ThirdOrderTensor<T>,
    criterion: Criterion,
    rel_threshold: f64,
) -> ClassificationReport<T> {
    let threshold = lit::<T>(rel_threshold) * T::one().max(fine.scale);
    let (mc, mf, gap) = match criterion {
        Criterion::Symmetrized => (coarse.max_abs_sym(), fine.max_abs_sym(), coarse.max_diff_sym(&fine)),
        Criterion::Full => (coarse.max_abs_c(), fine.max_abs_c(), coarse.max_diff_c(&fine)),
    };
    let verdict = if gap > threshold / lit(10.0) {
        Verdict::Unresolved
    } else if mc <= threshold && mf <= threshold {
        Verdict::TypeEps2
    } else if mc > threshold && mf > threshold {
        Verdict::TypeEps
    } else {
        Verdict::Unresolved
    };
    let resolutions = (coarse.resolution, fine.resolution);
    ClassificationReport { tensor: fine, coarse, verdict, criterion, max_c: mf, threshold, gap, resolutions }
}

/// Two-resolution verdict from the symmetrized tensor.
pub fn classify<T: Real>(a: &CoefficientField<T>, cfg: &ClassifyConfig) -> Result<ClassificationReport<T>> {
    let (coarse, fine) = tensor_pair(a, cfg)?;
    Ok(decide(coarse, fine, Criterion::Symmetrized, cfg.threshold))
}

/// Verdict from the full tensor, valid when `A` is diagonal or when `n = 2`
/// and the trace is constant.
pub fn diagonal_classify_shortcut<T: Real>(a: &CoefficientField<T>, cfg: &ClassifyConfig) -> Result<ClassificationReport<T>> {
    let tol = lit::<T>(1e-12) * T::one().max(a.ellipticity().1);
    let diagonal = a.is_diagonal(tol);
    let const_trace = a.dim() == 2 && a.trace()?.is_constant(tol);
    if !diagonal && !const_trace {
        return Err(HomError::Domain("field is neither diagonal nor a planar constant-trace field".into()));
    }
    let (coarse, fine) = tensor_pair(a, cfg)?;
    Ok(decide(coarse, fine, Criterion::Full, cfg.threshold))
}

/// `max_j |int r (A e_j) . grad phi|` over a family of test functions, a
/// spectral check of `div(rA) = 0` in the weak sense.
pub fn divergence_defect<T: Real>(sol: &CellSolution<T>, tests: &[Vec<T>]) -> T {
    let mut m = T::zero();
    for phi in tests {
        for j in 0..sol.dim() {
            m = m.max(sol.flux_moment(phi, j).abs());
        }
    }
    m
}
