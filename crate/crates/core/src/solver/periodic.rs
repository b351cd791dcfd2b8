use num_complex::Complex;

use super::gmres::{gmres, GmresConfig};
use super::{SolveReport, SolverConfig};
use crate::discretization::{AxisSymbols, Discretization};
use crate::error::{HomError, Result};
use crate::field::fft::{unravel, NdFft};
use crate::field::{upper_pairs, Mat3};
use crate::scalar::{lit, max_abs, mean, to_f64, Real};

/// The discrete operator `v -> A:D^2 v` on an `N^n` periodic grid together
/// with its exact transpose `s -> D^2:(s A)`.
pub struct PeriodicOperator<T: Real> {
    dim: usize,
    n: usize,
    disc: Discretization,
    coeffs: Vec<Vec<T>>,
    active: Vec<bool>,
    symbols: Vec<Vec<T>>,
    inv_precond: Vec<T>,
    axis: AxisSymbols<T>,
    mean: Mat3<T>,
    fft: NdFft<T>,
}

impl<T: Real> PeriodicOperator<T> {
    /// `coeffs` are grid samples of the upper-triangle entries.
    pub fn new(dim: usize, n: usize, coeffs: Vec<Vec<T>>, disc: Discretization) -> Result<Self> {
        let pairs = upper_pairs(dim);
        let len = n.pow(dim as u32);
        if coeffs.len() != pairs.len() || coeffs.iter().any(|c| c.len() != len) {
            return Err(HomError::Invalid("coefficient samples do not match the grid".into()));
        }
        let axis = disc.axis_symbols::<T>(n);
        let active: Vec<bool> = coeffs.iter().map(|c| c.iter().any(|&v| v != T::zero())).collect();
        let mut mean_m = [[T::zero(); 3]; 3];
        for (c, &(k, l)) in coeffs.iter().zip(&pairs) {
            mean_m[k][l] = mean(c);
            mean_m[l][k] = mean_m[k][l];
        }
        let mut symbols = vec![vec![T::zero(); len]; pairs.len()];
        let mut inv_precond = vec![T::zero(); len];
        for idx in 0..len {
            let ix = unravel(idx, dim, n);
            let mut pre = T::zero();
            for (p, &(k, l)) in pairs.iter().enumerate() {
                let s = if k == l {
                    axis.second[ix[k]]
                } else {
                    -axis.first[ix[k]] * axis.first[ix[l]]
                };
                symbols[p][idx] = s;
                let w = if k == l { T::one() } else { lit(2.0) };
                pre = pre + w * mean_m[k][l] * s;
            }
            inv_precond[idx] = if idx == 0 || pre == T::zero() { T::zero() } else { T::one() / pre };
        }
        Ok(Self { dim, n, disc, coeffs, active, symbols, inv_precond, axis, mean: mean_m, fft: NdFft::new(dim, n) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn discretization(&self) -> Discretization {
        self.disc
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid samples of entry `(k, l)`.
    pub fn coefficient(&self, k: usize, l: usize) -> &[T] {
        let (k, l) = if k <= l { (k, l) } else { (l, k) };
        let p = upper_pairs(self.dim).iter().position(|&q| q == (k, l)).unwrap();
        &self.coeffs[p]
    }

    pub fn mean_matrix(&self) -> Mat3<T> {
        self.mean
    }

    fn to_complex(v: &[T]) -> Vec<Complex<T>> {
        v.iter().map(|&x| Complex::new(x, T::zero())).collect()
    }

    fn normalize(&self, buf: &mut [Complex<T>]) {
        let s = T::one() / lit::<T>(self.len() as f64);
        for c in buf.iter_mut() {
            *c = *c * s;
        }
    }

    /// `out = A:D^2 v`.
    pub fn apply_forward(&self, v: &[T], out: &mut [T]) {
        let mut vh = Self::to_complex(v);
        self.fft.forward(&mut vh);
        self.normalize(&mut vh);
        out.iter_mut().for_each(|o| *o = T::zero());
        for (p, &(k, l)) in upper_pairs(self.dim).iter().enumerate() {
            if !self.active[p] {
                continue;
            }
            let mut buf: Vec<Complex<T>> = vh.iter().zip(&self.symbols[p]).map(|(&c, &s)| c * s).collect();
            self.fft.inverse(&mut buf);
            let w = if k == l { T::one() } else { lit(2.0) };
            for ((o, b), &a) in out.iter_mut().zip(&buf).zip(&self.coeffs[p]) {
                *o = *o + w * a * b.re;
            }
        }
    }

    /// `out = D^2:(s A)`, the exact transpose of [`Self::apply_forward`].
    pub fn apply_adjoint(&self, s: &[T], out: &mut [T]) {
        let zero = Complex::new(T::zero(), T::zero());
        let mut acc = vec![zero; self.len()];
        for (p, &(k, l)) in upper_pairs(self.dim).iter().enumerate() {
            if !self.active[p] {
                continue;
            }
            let mut buf: Vec<Complex<T>> =
                s.iter().zip(&self.coeffs[p]).map(|(&x, &a)| Complex::new(x * a, T::zero())).collect();
            self.fft.forward(&mut buf);
            let w = if k == l { T::one() } else { lit(2.0) };
            for ((c, b), &sym) in acc.iter_mut().zip(&buf).zip(&self.symbols[p]) {
                *c = *c + *b * (w * sym);
            }
        }
        self.normalize(&mut acc);
        self.fft.inverse(&mut acc);
        for (o, c) in out.iter_mut().zip(&acc) {
            *o = c.re;
        }
    }

    /// Inverse of the constant-coefficient operator `mean(A):D^2` on
    /// mean-zero functions; the constant mode is mapped to zero.
    pub fn precondition(&self, b: &[T], out: &mut [T]) {
        let mut bh = Self::to_complex(b);
        self.fft.forward(&mut bh);
        self.normalize(&mut bh);
        for (c, &s) in bh.iter_mut().zip(&self.inv_precond) {
            *c = *c * s;
        }
        self.fft.inverse(&mut bh);
        for (o, c) in out.iter_mut().zip(&bh) {
            *o = c.re;
        }
    }

    /// Discrete flux component `sum_m a_jm G_jm v`, the grid version of
    /// `A e_j . grad v`. For centered differences the off-axis derivative is
    /// averaged along axis `j` so the product matches the cross stencil.
    pub fn flux(&self, v: &[T], j: usize) -> Vec<T> {
        let mut vh = Self::to_complex(v);
        self.fft.forward(&mut vh);
        self.normalize(&mut vh);
        let mut out = vec![T::zero(); self.len()];
        for m in 0..self.dim {
            let a = self.coefficient(j, m);
            if a.iter().all(|&x| x == T::zero()) {
                continue;
            }
            let mut buf = vh.clone();
            for (idx, c) in buf.iter_mut().enumerate() {
                let ix = unravel(idx, self.dim, self.n);
                let mut sym = self.axis.first[ix[m]];
                if m != j && self.disc == Discretization::CentralDifference {
                    sym = sym * self.axis.average[ix[j]];
                }
                *c = Complex::new(-c.im * sym, c.re * sym);
            }
            self.fft.inverse(&mut buf);
            for ((o, b), &ajm) in out.iter_mut().zip(&buf).zip(a) {
                *o = *o + ajm * b.re;
            }
        }
        out
    }

    /// Discrete derivative of `v` along `axis`.
    pub fn gradient(&self, v: &[T], axis: usize) -> Vec<T> {
        let mut vh = Self::to_complex(v);
        self.fft.forward(&mut vh);
        self.normalize(&mut vh);
        for (idx, c) in vh.iter_mut().enumerate() {
            let ix = unravel(idx, self.dim, self.n);
            let sym = self.axis.first[ix[axis]];
            *c = Complex::new(-c.im * sym, c.re * sym);
        }
        self.fft.inverse(&mut vh);
        vh.into_iter().map(|c| c.re).collect()
    }

    fn gmres_config(&self, cfg: &SolverConfig) -> GmresConfig {
        GmresConfig {
            restart: cfg.restart,
            max_iterations: cfg.max_iterations,
            tolerance: cfg.effective_tolerance::<T>(),
        }
    }

    fn preconditioned_sup(&self, r: &[T]) -> T {
        let mut z = vec![T::zero(); self.len()];
        self.precondition(r, &mut z);
        max_abs(&z)
    }

    /// Invariant measure: `D^2:(rA) = 0`, `mean(r) = 1`, written as
    /// `r = 1 + s` with `s` mean-zero.
    pub fn invariant_measure(&self, cfg: &SolverConfig) -> Result<(Vec<T>, SolveReport)> {
        let len = self.len();
        let ones = vec![T::one(); len];
        let mut b = vec![T::zero(); len];
        self.apply_adjoint(&ones, &mut b);
        b.iter_mut().for_each(|x| *x = -*x);
        let out = gmres(|x, y| self.apply_adjoint(x, y), |x, y| self.precondition(x, y), &b, None, &self.gmres_config(cfg));
        let mut r = out.x;
        let m = mean(&r);
        r.iter_mut().for_each(|x| *x = *x - m + T::one());
        let mut res = vec![T::zero(); len];
        self.apply_adjoint(&r, &mut res);
        let report = SolveReport {
            residual_linf: to_f64(self.preconditioned_sup(&res)),
            operator_residual_linf: to_f64(max_abs(&res)),
            iterations: out.iterations,
            compatibility_defect: 0.0,
            resolution_used: self.n,
        };
        if !out.converged {
            return Err(HomError::Convergence { iterations: out.iterations, residual: report.residual_linf });
        }
        let rmin = r.iter().copied().fold(T::infinity(), T::min);
        if !(rmin > T::zero()) {
            return Err(HomError::Positivity(format!(
                "invariant measure has minimum {} on the grid; resolution too coarse or field not elliptic",
                to_f64(rmin)
            )));
        }
        Ok((r, report))
    }

    /// Mean-zero solution of `-A:D^2 v = rhs` after removing the component
    /// of `rhs` that violates `int r rhs = 0`.
    pub fn solve_cell(&self, r: &[T], rhs: &[T], cfg: &SolverConfig) -> Result<(Vec<T>, SolveReport)> {
        let len = self.len();
        let rmean = mean(r);
        let defect = r.iter().zip(rhs).map(|(&a, &b)| a * b).sum::<T>() / lit::<T>(len as f64) / rmean;
        let scale = T::one().max(max_abs(rhs));
        let defect_f = to_f64(defect);
        if defect_f.abs() > cfg.compatibility_for::<T>() * to_f64(scale) {
            return Err(HomError::Compatibility { defect: defect_f.abs() });
        }
        let b: Vec<T> = rhs.iter().map(|&x| -(x - defect)).collect();
        if max_abs(&b) == T::zero() {
            let report = SolveReport {
                residual_linf: 0.0,
                operator_residual_linf: 0.0,
                iterations: 0,
                compatibility_defect: defect_f.abs(),
                resolution_used: self.n,
            };
            return Ok((vec![T::zero(); len], report));
        }
        let out = gmres(|x, y| self.apply_forward(x, y), |x, y| self.precondition(x, y), &b, None, &self.gmres_config(cfg));
        let mut v = out.x;
        let m = mean(&v);
        v.iter_mut().for_each(|x| *x = *x - m);
        let mut res = vec![T::zero(); len];
        self.apply_forward(&v, &mut res);
        for (x, &bi) in res.iter_mut().zip(&b) {
            *x = *x - bi;
        }
        let report = SolveReport {
            residual_linf: to_f64(self.preconditioned_sup(&res)),
            operator_residual_linf: to_f64(max_abs(&res)),
            iterations: out.iterations,
            compatibility_defect: defect_f.abs(),
            resolution_used: self.n,
        };
        if !out.converged {
            return Err(HomError::Convergence { iterations: out.iterations, residual: report.residual_linf });
        }
        Ok((v, report))
    }
}
