//! Dense direct solves of the discrete periodic operators, built from
//! explicit differentiation matrices. Independent of the FFT code path and
//! meant for small grids only.

use crate::discretization::Discretization;
use crate::error::{HomError, Result};
use crate::field::upper_pairs;
use crate::linalg::lu_solve;
use crate::scalar::{lit, Real};

/// Largest grid the dense path accepts.
pub const DENSE_MAX_RESOLUTION: usize = 24;

/// First and second derivative matrices on an `n`-point periodic axis.
pub fn differentiation_matrices<T: Real>(n: usize, disc: Discretization) -> (Vec<T>, Vec<T>) {
    let mut d1 = vec![T::zero(); n * n];
    let mut d2 = vec![T::zero(); n * n];
    let nn = lit::<T>(n as f64);
    let pi = T::PI();
    match disc {
        Discretization::Spectral => {
            // periodic sinc interpolant, even n
            for i in 0..n {
                for j in 0..n {
                    let d = (i as i64 - j as i64).rem_euclid(n as i64);
                    if d == 0 {
                        d2[i * n + j] = -pi * pi * (nn * nn + lit(2.0)) / lit(3.0);
                        continue;
                    }
                    let sign = if d % 2 == 0 { T::one() } else { -T::one() };
                    let x = pi * lit::<T>(d as f64) / nn;
                    d1[i * n + j] = sign * pi / x.tan();
                    d2[i * n + j] = -lit::<T>(2.0) * pi * pi * sign / (x.sin() * x.sin());
                }
            }
        }
        Discretization::CentralDifference => {
            for i in 0..n {
                let ip = (i + 1) % n;
                let im = (i + n - 1) % n;
                d1[i * n + ip] = d1[i * n + ip] + nn * lit(0.5);
                d1[i * n + im] = d1[i * n + im] - nn * lit(0.5);
                d2[i * n + ip] = d2[i * n + ip] + nn * nn;
                d2[i * n + im] = d2[i * n + im] + nn * nn;
                d2[i * n + i] = d2[i * n + i] - lit::<T>(2.0) * nn * nn;
            }
        }
    }
    (d1, d2)
}

fn kron_axis<T: Real>(mat: &[T], n: usize, dim: usize, axis: usize) -> Vec<T> {
    let len = n.pow(dim as u32);
    let mut out = vec![T::zero(); len * len];
    let stride = n.pow((dim - 1 - axis) as u32);
    for row in 0..len {
        let ir = (row / stride) % n;
        let base = row - ir * stride;
        for jc in 0..n {
            let v = mat[ir * n + jc];
            if v != T::zero() {
                out[row * len + base + jc * stride] = v;
            }
        }
    }
    out
}

fn matmul<T: Real>(a: &[T], b: &[T], len: usize) -> Vec<T> {
    let mut out = vec![T::zero(); len * len];
    for i in 0..len {
        for k in 0..len {
            let aik = a[i * len + k];
            if aik == T::zero() {
                continue;
            }
            for j in 0..len {
                out[i * len + j] = out[i * len + j] + aik * b[k * len + j];
            }
        }
    }
    out
}

/// Dense matrix of `v -> A:D^2 v` on an `n^dim` grid (`dim <= 2`).
pub fn dense_operator<T: Real>(dim: usize, n: usize, coeffs: &[Vec<T>], disc: Discretization) -> Result<Vec<T>> {
    if dim > 2 || n > DENSE_MAX_RESOLUTION {
        return Err(HomError::Domain(format!(
            "dense oracle limited to dimension <= 2 and N <= {DENSE_MAX_RESOLUTION}"
        )));
    }
    let len = n.pow(dim as u32);
    let (d1, d2) = differentiation_matrices::<T>(n, disc);
    let first: Vec<Vec<T>> = (0..dim).map(|a| kron_axis(&d1, n, dim, a)).collect();
    let mut op = vec![T::zero(); len * len];
    for (p, (k, l)) in upper_pairs(dim).into_iter().enumerate() {
        let block = if k == l { kron_axis(&d2, n, dim, k) } else { matmul(&first[k], &first[l], len) };
        let w = if k == l { T::one() } else { lit(2.0) };
        for row in 0..len {
            let a = coeffs[p][row] * w;
            for col in 0..len {
                op[row * len + col] = op[row * len + col] + a * block[row * len + col];
            }
        }
    }
    Ok(op)
}

/// Invariant measure by a direct nullspace solve of the transposed operator
/// with one equation replaced by the normalization `mean(r) = 1`.
pub fn dense_invariant_measure<T: Real>(dim: usize, n: usize, coeffs: &[Vec<T>], disc: Discretization) -> Result<Vec<T>> {
    let len = n.pow(dim as u32);
    let op = dense_operator(dim, n, coeffs, disc)?;
    let mut m = vec![T::zero(); len * len];
    for i in 0..len {
        for j in 0..len {
            m[i * len + j] = op[j * len + i];
        }
    }
    let last = len - 1;
    let inv = T::one() / lit::<T>(len as f64);
    for j in 0..len {
        m[last * len + j] = inv;
    }
    let mut b = vec![T::zero(); len];
    b[last] = T::one();
    lu_solve(m, len, b)
}

/// Mean-zero cell solution of `-A:D^2 v = rhs` by a bordered direct solve.
pub fn dense_cell<T: Real>(dim: usize, n: usize, coeffs: &[Vec<T>], rhs: &[T], disc: Discretization) -> Result<Vec<T>> {
    let len = n.pow(dim as u32);
    let op = dense_operator(dim, n, coeffs, disc)?;
    // bordered system [[-L, 1], [1^T/len, 0]] [v; mu] = [rhs; 0]
    let size = len + 1;
    let mut m = vec![T::zero(); size * size];
    for i in 0..len {
        for j in 0..len {
            m[i * size + j] = -op[i * len + j];
        }
        m[i * size + len] = T::one();
        m[len * size + i] = T::one() / lit::<T>(len as f64);
    }
    let mut b = rhs.to_vec();
    b.push(T::zero());
    let mut x = lu_solve(m, size, b)?;
    x.truncate(len);
    Ok(x)
}
