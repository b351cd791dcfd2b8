use exmex::prelude::*;
use exmex::Differentiate;
use serde::{Serialize, Serializer};

use crate::error::{HomError, Result};

/// A smooth function of `x1, ..., xn` written as a string, e.g.
/// `8*x1^3 - 3*x1*x3^2` or `sin(2*PI*x1)*x2`.
#[derive(Clone, Debug)]
pub struct Expression {
    text: String,
    dim: usize,
    ex: FlatEx<f64>,
    /// Coordinate axis of each exmex variable.
    axes: Vec<usize>,
}

fn axes_of(names: &[String], dim: usize) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|name| {
            let axis = name
                .strip_prefix('x')
                .and_then(|s| s.parse::<usize>().ok())
                .filter(|&i| (1..=dim).contains(&i))
                .ok_or_else(|| HomError::Parse(format!("unknown variable `{name}` (expected x1..x{dim})")))?;
            Ok(axis - 1)
        })
        .collect()
}

impl Expression {
    pub fn parse(text: &str, dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(HomError::Invalid(format!("dimension {dim} not in 1..=3")));
        }
        let ex = FlatEx::<f64>::parse(text).map_err(|e| HomError::Parse(format!("`{text}`: {e}")))?;
        let axes = axes_of(ex.var_names(), dim)?;
        Ok(Self { text: text.to_string(), dim, ex, axes })
    }

    pub fn zero(dim: usize) -> Self {
        Self::parse("0", dim).expect("constant expression")
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let args: Vec<f64> = self.axes.iter().map(|&a| x[a]).collect();
        self.ex.eval(&args).unwrap_or(f64::NAN)
    }

    /// Exact partial derivative along coordinate `axis`.
    pub fn partial(&self, axis: usize) -> Result<Self> {
        let Some(var) = self.axes.iter().position(|&a| a == axis) else {
            return Ok(Self { text: "0".into(), ..Self::zero(self.dim) });
        };
        let ex = self.ex.clone().partial(var).map_err(|e| HomError::Parse(e.to_string()))?;
        let axes = axes_of(ex.var_names(), self.dim)?;
        Ok(Self { text: format!("d{}({})", axis + 1, self.text), dim: self.dim, ex, axes })
    }

    pub fn derivative(&self, axes: &[usize]) -> Result<Self> {
        axes.iter().try_fold(self.clone(), |e, &a| e.partial(a))
    }

    /// True when the expression vanishes at every probe point.
    pub fn vanishes_on(&self, points: impl IntoIterator<Item = [f64; 3]>, tol: f64) -> bool {
        points.into_iter().all(|p| self.eval(&p).abs() <= tol)
    }
}

impl Serialize for Expression {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.text)
    }
}
