use super::quadrature::adaptive_simpson;
use crate::discretization::Discretization;
use crate::error::{HomError, Result};
use crate::field::{zero_mat, CoefficientField, PeriodicField, WaveTerm};
use crate::homogenize::ThirdOrderTensor;
use crate::scalar::{lit, to_f64, Real};
use crate::solver::solve_poisson;

/// `Q1`, `Q2` and the tensor they predict for
/// `A = (1/r) diag(a, c - a)` with `r(y) = r1(y1 + y2) + r2(y1 - y2)`.
#[derive(Clone, Debug)]
pub struct QCriterion<T: Real> {
    /// Mean-zero `R_i` with `R_i'' = r_i - int r_i`.
    pub big_r1: PeriodicField<T>,
    pub big_r2: PeriodicField<T>,
    /// Spectral values of `int int a R1'(y1 + y2)` and `int int a R2'(y1 - y2)`.
    pub q1: T,
    pub q2: T,
    /// The same integrals reduced to one variable and integrated by
    /// adaptive Simpson.
    pub q1_quadrature: f64,
    pub q2_quadrature: f64,
    pub mean_a: T,
    pub c: T,
    pub predicted: ThirdOrderTensor<T>,
}

impl<T: Real> QCriterion<T> {
    pub fn is_type_eps2(&self, tol: T) -> bool {
        self.q1.abs() <= tol && self.q2.abs() <= tol
    }
}

/// Lifts a 1D field `f(t)` to `f(y1 + sign * y2)` on the 2-torus.
pub fn lift_diagonal<T: Real>(f: &PeriodicField<T>, sign: i64, n: usize) -> Result<PeriodicField<T>> {
    if f.dim() != 1 {
        return Err(HomError::Domain("expected a 1D profile".into()));
    }
    let terms = f.terms().iter().map(|t| WaveTerm { k: [t.k[0], sign * t.k[0], 0], ..*t }).collect();
    PeriodicField::from_terms(2, terms, n)
}

/// `t -> int_0^1 a(s, sign * (t - s))`: only modes with `k2 = sign * k1`
/// survive the average, each becoming the 1D mode `k1`.
fn diagonal_profile<T: Real>(a: &PeriodicField<T>, sign: i64) -> Vec<(i64, bool, f64)> {
    a.terms()
        .iter()
        .filter(|t| t.k[1] == sign * t.k[0])
        .map(|t| (t.k[0], matches!(t.phase, crate::field::Phase::Cos), to_f64(t.amp)))
        .collect()
}

fn eval_profile(profile: &[(i64, bool, f64)], t: f64) -> f64 {
    let tp = 2.0 * std::f64::consts::PI;
    profile
        .iter()
        .map(|&(k, cos, amp)| if cos { amp * (tp * k as f64 * t).cos() } else { amp * (tp * k as f64 * t).sin() })
        .sum()
}

fn second_antiderivative<T: Real>(r: &PeriodicField<T>) -> Result<PeriodicField<T>> {
    // R'' = r - mean  <=>  -R'' = mean - r
    let rhs = r.add_constant(-r.mean()).scale(-T::one());
    solve_poisson(&rhs)
}

/// The coefficient field `(1/r) diag(a, c - a)` sampled at resolution `n`.
pub fn special_structure_field<T: Real>(
    r1: &PeriodicField<T>,
    r2: &PeriodicField<T>,
    a: &PeriodicField<T>,
    c: T,
    n: usize,
) -> Result<CoefficientField<T>> {
    let r = lift_diagonal(r1, 1, n)?.add(&lift_diagonal(r2, -1, n)?)?;
    if !(r.min_value() > T::zero()) {
        return Err(HomError::Positivity(format!("r has minimum {}", to_f64(r.min_value()))));
    }
    let a = a.resampled(n)?;
    let inv = r.map(|x| T::one() / x)?;
    let d1 = a.pointwise_product(&inv)?;
    let d2 = a.scale(-T::one()).add_constant(c).pointwise_product(&inv)?;
    CoefficientField::diagonal(vec![d1, d2])
}

pub fn q_criterion_special<T: Real>(
    r1: &PeriodicField<T>,
    r2: &PeriodicField<T>,
    a: &PeriodicField<T>,
    c: T,
) -> Result<QCriterion<T>> {
    if a.dim() != 2 {
        return Err(HomError::Domain("a must live on the 2-torus".into()));
    }
    let n = a.resolution().max(4 * (r1.bandwidth().max(r2.bandwidth()) as usize + 1));
    let r = lift_diagonal(r1, 1, n)?.add(&lift_diagonal(r2, -1, n)?)?;
    if !(r.min_value() > T::zero()) {
        return Err(HomError::Positivity(format!("r has minimum {}", to_f64(r.min_value()))));
    }
    if !(a.min_value() > T::zero() && a.max_value() < c) {
        return Err(HomError::Invalid("a must take values in (0, c)".into()));
    }
    let big_r1 = second_antiderivative(r1)?;
    let big_r2 = second_antiderivative(r2)?;
    let d1 = big_r1.partial(0);
    let d2 = big_r2.partial(0);
    let q1 = a.inner_product(&lift_diagonal(&d1, 1, n)?);
    let q2 = a.inner_product(&lift_diagonal(&d2, -1, n)?);

    let p1 = diagonal_profile(a, 1);
    let p2 = diagonal_profile(a, -1);
    let q1_quadrature = adaptive_simpson(|t| eval_profile(&p1, t) * to_f64(d1.eval(&[lit(t)])), 0.0, 1.0, 1e-13);
    let q2_quadrature = adaptive_simpson(|t| eval_profile(&p2, t) * to_f64(d2.eval(&[lit(t)])), 0.0, 1.0, 1e-13);

    let mean_a = a.mean();
    let mut t = [[[T::zero(); 3]; 3]; 3];
    let lo = mean_a / c;
    let hi = (c - mean_a) / c;
    t[0][0][0] = lo * (q1 + q2);
    t[1][0][0] = lo * (q2 - q1);
    t[0][1][1] = hi * (q1 + q2);
    t[1][1][1] = hi * (q2 - q1);
    // r_B = 1 for B = (2/c) rA, so the effective matrix is diag(int a, c - int a)
    let mut eff = zero_mat();
    eff[0][0] = mean_a;
    eff[1][1] = c - mean_a;
    let predicted = ThirdOrderTensor::new(2, t, eff, n, Discretization::Spectral, Vec::new());
    Ok(QCriterion { big_r1, big_r2, q1, q2, q1_quadrature, q2_quadrature, mean_a, c, predicted })
}
