use serde::Serialize;

use crate::error::{HomError, Result};
use crate::scalar::{lit, to_f64, Real};

use super::expr::Expression;

/// Uniform node grid on the unit square or cube with `cells[a]` cells along
/// axis `a`. Nodes are stored row-major, axis 0 slowest, boundary included.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Grid {
    pub dim: usize,
    pub cells: [usize; 3],
}

impl Grid {
    pub fn new(dim: usize, cells: &[usize]) -> Result<Self> {
        if !(2..=3).contains(&dim) || cells.len() != dim {
            return Err(HomError::Invalid(format!("grid needs {dim} axis sizes in dimension 2 or 3")));
        }
        if cells.iter().any(|&c| c < 2) {
            return Err(HomError::Invalid("each axis needs at least 2 cells".into()));
        }
        let mut c = [1usize; 3];
        c[..dim].copy_from_slice(cells);
        Ok(Self { dim, cells: c })
    }

    pub fn uniform(dim: usize, cells: usize) -> Result<Self> {
        Self::new(dim, &vec![cells; dim])
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        1.0 / self.cells[axis] as f64
    }

    /// Nodes per axis, boundary included.
    pub fn nodes(&self, axis: usize) -> usize {
        if axis < self.dim {
            self.cells[axis] + 1
        } else {
            1
        }
    }

    pub fn node_count(&self) -> usize {
        (0..self.dim).map(|a| self.nodes(a)).product()
    }

    pub fn interior(&self, axis: usize) -> usize {
        if axis < self.dim {
            self.cells[axis] - 1
        } else {
            1
        }
    }

    pub fn interior_count(&self) -> usize {
        (0..self.dim).map(|a| self.interior(a)).product()
    }

    pub fn index(&self, ix: [usize; 3]) -> usize {
        (0..self.dim).fold(0, |acc, a| acc * self.nodes(a) + ix[a])
    }

    pub fn unravel(&self, mut idx: usize) -> [usize; 3] {
        let mut ix = [0; 3];
        for a in (0..self.dim).rev() {
            ix[a] = idx % self.nodes(a);
            idx /= self.nodes(a);
        }
        ix
    }

    pub fn coords(&self, ix: [usize; 3]) -> [f64; 3] {
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = ix[a] as f64 * self.spacing(a);
        }
        x
    }

    pub fn is_boundary(&self, ix: [usize; 3]) -> bool {
        (0..self.dim).any(|a| ix[a] == 0 || ix[a] == self.cells[a])
    }

    /// Node inside the closed box `[lo, hi]^n`.
    pub fn in_box(&self, ix: [usize; 3], lo: f64, hi: f64) -> bool {
        let x = self.coords(ix);
        let slack = 1e-12;
        (0..self.dim).all(|a| x[a] >= lo - slack && x[a] <= hi + slack)
    }

    /// Position of each interior node in the full node array.
    pub(crate) fn interior_to_full(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.interior_count());
        for idx in 0..self.node_count() {
            if !self.is_boundary(self.unravel(idx)) {
                out.push(idx);
            }
        }
        out
    }
}

/// Values at every node of a [`Grid`].
#[derive(Clone, Debug)]
pub struct GridFunction<T: Real> {
    pub grid: Grid,
    pub values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![T::zero(); grid.node_count()] }
    }

    pub fn from_expression(grid: Grid, e: &Expression) -> Self {
        let values = (0..grid.node_count()).map(|i| lit(e.eval(&grid.coords(grid.unravel(i))))).collect();
        Self { grid, values }
    }

    pub fn at(&self, ix: [usize; 3]) -> T {
        self.values[self.grid.index(ix)]
    }

    /// Largest `|self - other|` over all nodes, or over `[1/4, 3/4]^n` when
    /// `interior` is set.
    pub fn max_diff(&self, other: &Self, interior: bool) -> Result<f64> {
        if self.grid != other.grid {
            return Err(HomError::Invalid("grid functions live on different grids".into()));
        }
        let mut m = 0.0f64;
        for (i, (&a, &b)) in self.values.iter().zip(&other.values).enumerate() {
            if interior && !self.grid.in_box(self.grid.unravel(i), 0.25, 0.75) {
                continue;
            }
            m = m.max(to_f64((a - b).abs()));
        }
        Ok(m)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(to_f64(v.abs())))
    }

    pub fn lin_comb(&self, alpha: T, other: &Self, beta: T) -> Result<Self> {
        if self.grid != other.grid {
            return Err(HomError::Invalid("grid functions live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| alpha * a + beta * b).collect();
        Ok(Self { grid: self.grid, values })
    }

    /// Centered difference approximation of `d^3 u / dx_j dx_k dx_l`, with
    /// each 1D stencil shifted inward where it would leave the grid.
    pub fn third_derivative(&self, axes: [usize; 3]) -> Self {
        let mut count = [0usize; 3];
        for &a in &axes {
            count[a] += 1;
        }
        let mut out = self.clone();
        for (a, &c) in count.iter().enumerate().take(self.grid.dim) {
            if c > 0 {
                out = out.difference_along(a, c);
            }
        }
        out
    }

    fn difference_along(&self, axis: usize, order: usize) -> Self {
        let g = self.grid;
        let n = g.cells[axis];
        let h = lit::<T>(g.spacing(axis));
        // (offsets, weights, half-width) of the centered stencils
        let (offs, w, reach): (&[i64], Vec<f64>, usize) = match order {
            1 => (&[-1, 1], vec![-0.5, 0.5], 1),
            2 => (&[-1, 0, 1], vec![1.0, -2.0, 1.0], 1),
            _ => (&[-2, -1, 1, 2], vec![-0.5, 1.0, -1.0, 0.5], 2),
        };
        let scale = h.powi(order as i32);
        let mut values = vec![T::zero(); self.values.len()];
        for (idx, v) in values.iter_mut().enumerate() {
            let mut ix = g.unravel(idx);
            ix[axis] = ix[axis].clamp(reach, n - reach);
            let mut acc = T::zero();
            for (&o, &wt) in offs.iter().zip(&w) {
                let mut jx = ix;
                jx[axis] = (ix[axis] as i64 + o) as usize;
                acc = acc + lit::<T>(wt) * self.values[g.index(jx)];
            }
            *v = acc / scale;
        }
        Self { grid: g, values }
    }
}
