use serde::{Deserialize, Serialize};

use crate::field::fft::wavenumber;
use crate::scalar::{lit, two_pi, Real};

/// How derivatives act on grid functions of the torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Discretization {
    /// Exact differentiation of the trigonometric interpolant. First
    /// derivatives drop the Nyquist mode; pure second derivatives keep it.
    #[default]
    Spectral,
    /// Centered differences with spacing `1/N`: the three-point stencil for
    /// pure second derivatives and the four-point cross stencil for mixed ones.
    CentralDifference,
}

/// Per-axis Fourier symbols of the basic difference operators.
///
/// A first derivative acts as multiplication by `i * first[k]`, a pure
/// second derivative by `second[k]`, a mixed one by `-first[k] first[l]`.
#[derive(Clone, Debug)]
pub struct AxisSymbols<T> {
    pub first: Vec<T>,
    pub second: Vec<T>,
    /// Symbol of the two-point average `(u(x+h) + u(x-h)) / 2`.
    pub average: Vec<T>,
}

impl Discretization {
    pub fn axis_symbols<T: Real>(self, n: usize) -> AxisSymbols<T> {
        let tp = two_pi::<T>();
        let nn = lit::<T>(n as f64);
        let mut first = Vec::with_capacity(n);
        let mut second = Vec::with_capacity(n);
        let mut average = Vec::with_capacity(n);
        for i in 0..n {
            let k = wavenumber(i, n);
            let kk = lit::<T>(k as f64);
            match self {
                Discretization::Spectral => {
                    let nyquist = n % 2 == 0 && k == -((n / 2) as i64);
                    first.push(if nyquist { T::zero() } else { tp * kk });
                    second.push(-(tp * kk) * (tp * kk));
                    average.push(T::one());
                }
                Discretization::CentralDifference => {
                    let theta = tp * kk / nn;
                    let s = (theta * lit(0.5)).sin();
                    first.push(nn * theta.sin());
                    second.push(-lit::<T>(4.0) * nn * nn * s * s);
                    average.push(theta.cos());
                }
            }
        }
        AxisSymbols { first, second, average }
    }
}
