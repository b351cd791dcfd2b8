//! Small dense linear algebra used by the oracles.

use crate::error::{HomError, Result};
use crate::scalar::Real;

/// Solves `M x = b` for a row-major `n x n` matrix by LU with partial pivoting.
pub fn lu_solve<T: Real>(mut m: Vec<T>, n: usize, mut b: Vec<T>) -> Result<Vec<T>> {
    assert_eq!(m.len(), n * n);
    assert_eq!(b.len(), n);
    let scale = m.iter().fold(T::zero(), |a, &x| a.max(x.abs()));
    for col in 0..n {
        let mut piv = col;
        for row in col + 1..n {
            if m[row * n + col].abs() > m[piv * n + col].abs() {
                piv = row;
            }
        }
        if m[piv * n + col].abs() <= scale * T::epsilon() {
            return Err(HomError::SingularSystem(format!("zero pivot in column {col}")));
        }
        if piv != col {
            for k in 0..n {
                m.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let d = m[col * n + col];
        for row in col + 1..n {
            let f = m[row * n + col] / d;
            if f == T::zero() {
                continue;
            }
            m[row * n + col] = f;
            for k in col + 1..n {
                m[row * n + k] = m[row * n + k] - f * m[col * n + k];
            }
            b[row] = b[row] - f * b[col];
        }
    }
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s = s - m[row * n + k] * b[k];
        }
        b[row] = s / m[row * n + row];
    }
    Ok(b)
}
