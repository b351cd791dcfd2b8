use rayon::prelude::*;
use serde::Serialize;

use crate::error::{HomError, Result};
use crate::field::{upper_pairs, CoefficientField, Mat3};
use crate::scalar::{lit, to_f64, Real};
use crate::solver::gmres::{gmres, GmresConfig};

use super::dst::DirichletPoisson;
use super::expr::Expression;
use super::grid::{Grid, GridFunction};

/// Krylov settings for the Dirichlet solves.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirichletConfig {
    /// Sup norm target of the preconditioned residual, relative to
    /// `max(1, |P b|_inf)`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub restart: usize,
}

impl Default for DirichletConfig {
    fn default() -> Self {
        Self { tolerance: 1e-11, max_iterations: 400, restart: 20 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DirichletReport {
    pub cells: Vec<usize>,
    pub unknowns: usize,
    pub iterations: usize,
    /// Sup norm of the preconditioned residual at exit.
    pub residual: f64,
}

/// Coefficient samples on one period, looked up by node index modulo the
/// period along the axes where the field varies.
#[derive(Clone, Debug)]
struct PeriodicTable<T> {
    period: usize,
    varies: [bool; 3],
    values: Vec<T>,
}

impl<T: Real> PeriodicTable<T> {
    fn at(&self, dim: usize, ix: [usize; 3]) -> T {
        let mut idx = 0;
        for a in 0..dim {
            let i = if self.varies[a] { ix[a] % self.period } else { 0 };
            idx = idx * self.period + i;
        }
        self.values[idx]
    }
}

/// Second-order centered discretization of `-A(x/eps):D^2` on the interior
/// nodes of a [`Grid`]: three-point stencils on the diagonal, the four-point
/// cross stencil for mixed derivatives.
pub struct DirichletOperator<T: Real> {
    grid: Grid,
    pairs: Vec<(usize, usize, PeriodicTable<T>)>,
    inner: Vec<usize>,
    precond: DirichletPoisson<T>,
}

/// Axes along which none of the entries varies.
pub fn flat_axes<T: Real>(a: &CoefficientField<T>) -> [bool; 3] {
    let mut flat = [true; 3];
    for (axis, f) in flat.iter_mut().enumerate().take(a.dim()) {
        *f = a.entries().iter().all(|e| e.terms().iter().all(|t| t.k[axis] == 0));
    }
    flat
}

impl<T: Real> DirichletOperator<T> {
    /// `A(x/eps)` with `eps = 1/m`. Along every axis on which `A` varies the
    /// grid must carry a whole number `p = cells / m` of cells per period,
    /// the same on each such axis.
    pub fn oscillating(a: &CoefficientField<T>, m: usize, grid: Grid) -> Result<Self> {
        let dim = a.dim();
        if grid.dim != dim {
            return Err(HomError::Invalid("grid and field dimensions differ".into()));
        }
        let flat = flat_axes(a);
        let mut period = None;
        for axis in 0..dim {
            if flat[axis] {
                continue;
            }
            let cells = grid.cells[axis];
            if cells % m != 0 {
                return Err(HomError::Invalid(format!("{cells} cells on axis {} do not fit eps = 1/{m}", axis + 1)));
            }
            let p = cells / m;
            if period.is_some_and(|q| q != p) {
                return Err(HomError::Invalid("oscillating axes need the same cells per period".into()));
            }
            period = Some(p);
        }
        let period = period.unwrap_or(1);
        let mut varies = [false; 3];
        for axis in 0..dim {
            varies[axis] = !flat[axis];
        }
        // nodes y = j / period of one cell, including the flat axes at y = 0
        let len = period.pow(dim as u32);
        let mut tables: Vec<Vec<T>> = vec![vec![T::zero(); len]; upper_pairs(dim).len()];
        for idx in 0..len {
            let mut rest = idx;
            let mut y = [T::zero(); 3];
            for axis in (0..dim).rev() {
                y[axis] = lit::<T>((rest % period) as f64 / period as f64);
                rest /= period;
            }
            let mat = a.eval(&y[..dim]);
            for (p, (k, l)) in upper_pairs(dim).into_iter().enumerate() {
                tables[p][idx] = mat[k][l];
            }
        }
        let pairs = upper_pairs(dim)
            .into_iter()
            .zip(tables)
            .filter(|(_, t)| t.iter().any(|&v| v != T::zero()))
            .map(|((k, l), values)| (k, l, PeriodicTable { period, varies, values }))
            .collect();
        Self::build(grid, pairs)
    }

    /// Constant coefficients `m`.
    pub fn constant(m: &Mat3<T>, grid: Grid) -> Result<Self> {
        let pairs = upper_pairs(grid.dim)
            .into_iter()
            .filter(|&(k, l)| m[k][l] != T::zero())
            .map(|(k, l)| (k, l, PeriodicTable { period: 1, varies: [false; 3], values: vec![m[k][l]] }))
            .collect();
        Self::build(grid, pairs)
    }

    fn build(grid: Grid, pairs: Vec<(usize, usize, PeriodicTable<T>)>) -> Result<Self> {
        let dim = grid.dim;
        let mut diag = vec![T::zero(); dim];
        for (k, l, t) in &pairs {
            if k == l {
                diag[*k] = t.values.iter().copied().sum::<T>() / lit::<T>(t.values.len() as f64);
            }
        }
        if diag.iter().any(|&d| !(d > T::zero())) {
            return Err(HomError::Ellipticity { lambda_min: diag.iter().map(|&d| to_f64(d)).fold(f64::INFINITY, f64::min) });
        }
        let precond = DirichletPoisson::new(dim, grid.cells, &diag);
        Ok(Self { grid, pairs, inner: grid.interior_to_full(), precond })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// `-A:D^2 u` at the interior nodes for a full node array `u`.
    pub fn apply_full(&self, u: &[T], out: &mut [T]) {
        let g = self.grid;
        let dim = g.dim;
        let mut stride = [0usize; 3];
        for a in 0..dim {
            stride[a] = (a + 1..dim).map(|b| g.nodes(b)).product();
        }
        let inv_h: Vec<T> = (0..dim).map(|a| lit::<T>(g.cells[a] as f64)).collect();
        let quarter = lit::<T>(0.25);
        let two = lit::<T>(2.0);
        out.par_iter_mut().zip(self.inner.par_iter()).for_each(|(o, &c)| {
            let ix = g.unravel(c);
            let mut acc = T::zero();
            for (k, l, table) in &self.pairs {
                let coef = table.at(dim, ix);
                if k == l {
                    let s = stride[*k];
                    let d2 = (u[c + s] - two * u[c] + u[c - s]) * inv_h[*k] * inv_h[*k];
                    acc = acc + coef * d2;
                } else {
                    let (sk, sl) = (stride[*k], stride[*l]);
                    let cross = u[c + sk + sl] - u[c + sk - sl] - u[c - sk + sl] + u[c - sk - sl];
                    acc = acc + two * coef * cross * quarter * inv_h[*k] * inv_h[*l];
                }
            }
            *o = -acc;
        });
    }

    fn embed(&self, x: &[T]) -> Vec<T> {
        let mut full = vec![T::zero(); self.grid.node_count()];
        for (&c, &v) in self.inner.iter().zip(x) {
            full[c] = v;
        }
        full
    }

    /// Solves `-A:D^2 u = f` with `u = g` on the boundary.
    pub fn solve(&self, f: &Expression, g: &Expression, cfg: &DirichletConfig) -> Result<(GridFunction<T>, DirichletReport)> {
        let grid = self.grid;
        let rhs: Vec<T> = self.inner.iter().map(|&c| lit(f.eval(&grid.coords(grid.unravel(c))))).collect();
        self.solve_values(&rhs, g, cfg)
    }

    /// As [`Self::solve`] with the source given at the interior nodes.
    pub fn solve_values(&self, rhs: &[T], g: &Expression, cfg: &DirichletConfig) -> Result<(GridFunction<T>, DirichletReport)> {
        let grid = self.grid;
        let mut lift = GridFunction::<T>::zeros(grid);
        for (idx, v) in lift.values.iter_mut().enumerate() {
            let ix = grid.unravel(idx);
            if grid.is_boundary(ix) {
                *v = lit(g.eval(&grid.coords(ix)));
            }
        }
        let mut b = vec![T::zero(); self.inner.len()];
        self.apply_full(&lift.values, &mut b);
        for (bi, &r) in b.iter_mut().zip(rhs) {
            *bi = r - *bi;
        }
        let mut pb = vec![T::zero(); b.len()];
        self.precond.solve(&b, &mut pb);
        let scale = pb.iter().fold(1.0f64, |m, &v| m.max(to_f64(v.abs())));
        let gcfg = GmresConfig {
            restart: cfg.restart,
            max_iterations: cfg.max_iterations,
            tolerance: cfg.tolerance.max(200.0 * T::eps_f64()) * scale,
        };
        let apply = |x: &[T], out: &mut [T]| self.apply_full(&self.embed(x), out);
        let precond = |x: &[T], out: &mut [T]| self.precond.solve(x, out);
        let outcome = gmres(apply, precond, &b, Some(pb), &gcfg);
        if !outcome.converged {
            return Err(HomError::Convergence { iterations: outcome.iterations, residual: to_f64(outcome.residual) });
        }
        for (&c, &v) in self.inner.iter().zip(&outcome.x) {
            lift.values[c] = v;
        }
        let report = DirichletReport {
            cells: grid.cells[..grid.dim].to_vec(),
            unknowns: self.inner.len(),
            iterations: outcome.iterations,
            residual: to_f64(outcome.residual),
        };
        Ok((lift, report))
    }

    /// Dense matrix of the interior operator, row-major. Only for small grids.
    pub fn dense_matrix(&self) -> Vec<T> {
        let n = self.inner.len();
        let mut m = vec![T::zero(); n * n];
        let mut e = vec![T::zero(); n];
        let mut col = vec![T::zero(); n];
        for j in 0..n {
            e[j] = T::one();
            self.apply_full(&self.embed(&e), &mut col);
            for i in 0..n {
                m[i * n + j] = col[i];
            }
            e[j] = T::zero();
        }
        m
    }
}
