use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::scalar::Real;

/// Signed wavenumber of FFT index `i` on an `n`-point axis, in `[-n/2, n/2)`.
#[inline]
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// FFT index of a (possibly negative) wavenumber.
#[inline]
pub fn wave_index(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// Splits a flat row-major index into per-axis indices (axis 0 slowest).
#[inline]
pub fn unravel(mut idx: usize, dim: usize, n: usize) -> [usize; 3] {
    let mut out = [0usize; 3];
    for axis in (0..dim).rev() {
        out[axis] = idx % n;
        idx /= n;
    }
    out
}

/// Multi-dimensional complex FFT on an `n^dim` row-major grid.
///
/// Both directions are unnormalized, matching rustfft.
pub struct NdFft<T: Real> {
    dim: usize,
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> NdFft<T> {
    pub fn new(dim: usize, n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            dim,
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.run(data, &self.forward);
    }

    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.run(data, &self.inverse);
    }

    fn run(&self, data: &mut [Complex<T>], fft: &Arc<dyn Fft<T>>) {
        let n = self.n;
        debug_assert_eq!(data.len(), self.len());
        // innermost axis is contiguous
        fft.process(data);
        if self.dim == 1 {
            return;
        }
        let mut lines = vec![Complex::new(T::zero(), T::zero()); data.len()];
        for axis in 0..self.dim - 1 {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            let outer = data.len() / (n * stride);
            let mut line = 0;
            for o in 0..outer {
                for inner in 0..stride {
                    let base = o * n * stride + inner;
                    let dst = &mut lines[line * n..(line + 1) * n];
                    for (t, d) in dst.iter_mut().enumerate() {
                        *d = data[base + t * stride];
                    }
                    line += 1;
                }
            }
            fft.process(&mut lines);
            line = 0;
            for o in 0..outer {
                for inner in 0..stride {
                    let base = o * n * stride + inner;
                    let src = &lines[line * n..(line + 1) * n];
                    for (t, s) in src.iter().enumerate() {
                        data[base + t * stride] = *s;
                    }
                    line += 1;
                }
            }
        }
    }

    /// Normalized spectrum of real grid data: `c_k = N^-dim * sum_j x_j e^{-2 pi i k j / N}`.
    pub fn analyze(&self, values: &[T]) -> Vec<Complex<T>> {
        let mut buf: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.forward(&mut buf);
        let scale = T::one() / T::from_usize(self.len()).unwrap();
        for c in &mut buf {
            *c = *c * scale;
        }
        buf
    }

    /// Real part of the synthesis `sum_k c_k e^{2 pi i k j / N}`.
    pub fn synthesize(&self, mut spectrum: Vec<Complex<T>>) -> Vec<T> {
        self.inverse(&mut spectrum);
        spectrum.into_iter().map(|c| c.re).collect()
    }
}
