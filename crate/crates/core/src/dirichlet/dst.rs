use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::scalar::{lit, Real};

/// Type-I discrete sine transform along one axis of a row-major array,
/// `Y_k = sum_j v_j sin(pi j k / N)` for `j, k = 1..N-1`, computed from a
/// complex FFT of the odd extension of length `2N`.
struct Dst1<T: Real> {
    n: usize,
    fft: Arc<dyn Fft<T>>,
}

impl<T: Real> Dst1<T> {
    fn new(n: usize) -> Self {
        Self { n, fft: FftPlanner::new().plan_fft_forward(2 * n) }
    }

    fn transform_line(&self, line: &mut [T], buf: &mut [Complex<T>]) {
        let n = self.n;
        let zero = Complex::new(T::zero(), T::zero());
        buf.iter_mut().for_each(|c| *c = zero);
        for (j, &v) in line.iter().enumerate() {
            buf[j + 1] = Complex::new(v, T::zero());
            buf[2 * n - j - 1] = Complex::new(-v, T::zero());
        }
        self.fft.process(buf);
        let half = lit::<T>(-0.5);
        for (k, out) in line.iter_mut().enumerate() {
            *out = buf[k + 1].im * half;
        }
    }
}

/// Exact inverse of `-sum_a c_a delta_aa` with homogeneous Dirichlet data on
/// the interior nodes of a grid with `cells[a]` cells per axis.
pub struct DirichletPoisson<T: Real> {
    dim: usize,
    interior: [usize; 3],
    transforms: Vec<Dst1<T>>,
    inv_eigen: Vec<T>,
}

impl<T: Real> DirichletPoisson<T> {
    /// `diag` holds the positive constants `c_a`.
    pub fn new(dim: usize, cells: [usize; 3], diag: &[T]) -> Self {
        let mut interior = [1usize; 3];
        for a in 0..dim {
            interior[a] = cells[a] - 1;
        }
        let transforms = (0..dim).map(|a| Dst1::new(cells[a])).collect();
        let eigen_axis: Vec<Vec<T>> = (0..dim)
            .map(|a| {
                let n = cells[a];
                let h = T::one() / lit::<T>(n as f64);
                (1..n)
                    .map(|k| {
                        let s = (T::PI() * lit::<T>(k as f64) / lit::<T>(2.0 * n as f64)).sin();
                        diag[a] * lit::<T>(4.0) * s * s / (h * h)
                    })
                    .collect()
            })
            .collect();
        let len: usize = interior[..dim].iter().product();
        let mut inv_eigen = vec![T::zero(); len];
        for (idx, e) in inv_eigen.iter_mut().enumerate() {
            let mut rest = idx;
            let mut sum = T::zero();
            for a in (0..dim).rev() {
                sum = sum + eigen_axis[a][rest % interior[a]];
                rest /= interior[a];
            }
            *e = T::one() / sum;
        }
        Self { dim, interior, transforms, inv_eigen }
    }

    fn transform_axis(&self, data: &mut [T], axis: usize) {
        let n = self.interior[axis];
        let stride: usize = self.interior[axis + 1..self.dim].iter().product();
        let outer = data.len() / (n * stride);
        let mut line = vec![T::zero(); n];
        let mut buf = vec![Complex::new(T::zero(), T::zero()); 2 * (n + 1)];
        for o in 0..outer {
            for s in 0..stride {
                let base = o * n * stride + s;
                for (j, l) in line.iter_mut().enumerate() {
                    *l = data[base + j * stride];
                }
                self.transforms[axis].transform_line(&mut line, &mut buf);
                for (j, &l) in line.iter().enumerate() {
                    data[base + j * stride] = l;
                }
            }
        }
    }

    /// `out = (-sum_a c_a delta_aa)^{-1} b`.
    pub fn solve(&self, b: &[T], out: &mut [T]) {
        out.copy_from_slice(b);
        for a in 0..self.dim {
            self.transform_axis(out, a);
        }
        // DST-I is its own inverse up to the factor 2/N per axis
        let mut norm = T::one();
        for a in 0..self.dim {
            norm = norm * lit::<T>(2.0 / (self.interior[a] + 1) as f64);
        }
        for (o, &e) in out.iter_mut().zip(&self.inv_eigen) {
            *o = *o * e * norm;
        }
        for a in 0..self.dim {
            self.transform_axis(out, a);
        }
    }
}
