use super::structure::operator_on;
use crate::error::{HomError, Result};
use crate::field::{CoefficientField, PeriodicField, WaveTerm};
use crate::homogenize::CellSolution;
use crate::scalar::{lit, max_abs, mean, to_f64, two_pi, Real};
use crate::solver::{operator_for, solve_poisson, SolverConfig};

/// Output of the explicit perturbation of `diag(1 + a, 1 - a)`.
#[derive(Clone, Debug)]
pub struct TypeEpsPerturbation<T: Real> {
    pub base: CoefficientField<T>,
    pub r: PeriodicField<T>,
    pub abar: T,
    /// `-Laplace w = r a - abar`.
    pub w: PeriodicField<T>,
    /// `phi = s d1 w`.
    pub phi: PeriodicField<T>,
    pub gamma: PeriodicField<T>,
    pub field: CoefficientField<T>,
    /// `-2 s (1 + abar) int (d12 w)^2`.
    pub predicted_c111: T,
}

fn degenerate_tol<T: Real>(scale: T) -> T {
    lit::<T>(1e3) * T::epsilon() * T::one().max(scale)
}

/// `gamma diag(1 + a, 1 - a)` with `gamma = 1/(1 + A:D^2 phi)`, a type-eps
/// perturbation of a type-eps^2 diagonal field.
pub fn perturb_type_eps<T: Real>(a: &PeriodicField<T>, s: T, cfg: &SolverConfig) -> Result<TypeEpsPerturbation<T>> {
    if a.dim() != 2 {
        return Err(HomError::Domain("the explicit perturbation is planar".into()));
    }
    let n = cfg.resolution.unwrap_or(a.resolution());
    let cfg = cfg.clone().with_resolution(n);
    let a = a.resampled(n)?;
    let base = CoefficientField::diagonal(vec![a.add_constant(T::one()), a.scale(-T::one()).add_constant(T::one())])?;
    let op = operator_for(&base, &cfg)?;
    let (rv, _) = op.invariant_measure(&cfg)?;
    let av = a.values();
    let ra: Vec<T> = rv.iter().zip(av).map(|(&r, &x)| r * x).collect();
    let abar = mean(&ra);
    let r = PeriodicField::from_grid(2, n, &rv)?;

    let flux: Vec<T> = rv.iter().zip(av).map(|(&r, &x)| r * (T::one() + x)).collect();
    let d1flux = PeriodicField::from_grid(2, n, &flux)?.partial(0);
    if d1flux.max_abs() <= degenerate_tol(max_abs(&flux)) {
        return Err(HomError::Degenerate("d1[r(1 + a)] vanishes; the perturbation stays type-eps^2".into()));
    }
    let src = PeriodicField::from_grid(2, n, &ra.iter().map(|&x| x - abar).collect::<Vec<_>>())?;
    let w = solve_poisson(&src)?;
    let w12 = w.derivative(&[0, 1]);
    if w12.max_abs() <= degenerate_tol(w.max_abs()) {
        return Err(HomError::Degenerate("d12 w vanishes identically".into()));
    }
    let phi = w.partial(0).scale(s);
    let denom = operator_on(&base, &phi)?.add_constant(T::one());
    if !(denom.min_value() > T::zero()) {
        return Err(HomError::Positivity(format!(
            "1 + A:D^2 phi reaches {}; decrease s",
            to_f64(denom.min_value())
        )));
    }
    let gamma = denom.map(|x| T::one() / x)?;
    let field = base.scaled_pointwise(&gamma)?;
    let predicted_c111 = -lit::<T>(2.0) * s * (T::one() + abar) * w12.inner_product(&w12);
    Ok(TypeEpsPerturbation { base, r, abar, w, phi, gamma, field, predicted_c111 })
}

/// Intermediate objects of the density construction.
#[derive(Clone, Debug)]
pub struct DensityPerturbation<T: Real> {
    pub base: CoefficientField<T>,
    pub r0: PeriodicField<T>,
    /// `A1 = A0 + delta Z / r0` with `Z = zeta(y1 + y2) diag(1, -1, 0)`.
    pub a1: CoefficientField<T>,
    /// `q(y) = Q(y1 + y2)`, `Q' = zeta - mean(zeta)`, scaled so that
    /// `|A1:D^2 q|_inf = 1`.
    pub q: PeriodicField<T>,
    pub gamma: PeriodicField<T>,
    pub field: CoefficientField<T>,
    pub delta: T,
    pub s: T,
}

impl<T: Real> DensityPerturbation<T> {
    /// `(c_1^{11}` predicted from `A1`, `c_1^{11}` computed from the output,
    /// `|r1 - r0|_inf)`.
    pub fn check(&self, cfg: &SolverConfig) -> Result<(T, T, T)> {
        let n = self.a1.resolution();
        let cfg = cfg.clone().with_resolution(n);
        let sol1 = CellSolution::new(&self.a1, &cfg)?;
        let r_err = sol1.r.iter().zip(self.r0.values()).fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()));
        let qv: Vec<T> = self.q.sample_values(n)?.iter().map(|&x| x * self.s).collect();
        let t1 = sol1.tensor();
        let predicted = t1.c[0][0][0] + sol1.effective[0][0] * sol1.flux_moment(&qv, 0);
        let out = CellSolution::new(&self.field, &cfg)?.tensor();
        Ok((predicted, out.c[0][0][0], r_err))
    }
}

/// Moves `a0` into the type-eps set: first `A1 = A0 + delta P` keeps the
/// invariant measure, then `A = gamma A1` with `gamma = 1/(1 + s A1:D^2 q)`.
pub fn density_perturb<T: Real>(
    a0: &CoefficientField<T>,
    delta: T,
    s: T,
    cfg: &SolverConfig,
) -> Result<DensityPerturbation<T>> {
    let dim = a0.dim();
    if dim < 2 {
        return Err(HomError::Domain("the density construction needs n >= 2".into()));
    }
    let n = cfg.resolution.unwrap_or(a0.resolution());
    let cfg = cfg.clone().with_resolution(n);
    let base = a0.resampled(n)?;
    let (rv, _) = operator_for(&base, &cfg)?.invariant_measure(&cfg)?;
    let r0 = PeriodicField::from_grid(dim, n, &rv)?;
    let rmin = r0.min_value();
    // zeta = kappa sin(2 pi t) with |P|_inf = |zeta / r0|_inf <= 1/2
    let kappa = rmin * lit(0.5);
    let mut k = [0i64; 3];
    k[0] = 1;
    k[1] = 1;
    let zeta = PeriodicField::from_terms(dim, vec![WaveTerm::sin(&k[..dim], kappa)], n)?;
    let p = zeta.pointwise_product(&r0.map(|x| T::one() / x)?)?;
    let mut entries = base.entries().to_vec();
    entries[0] = entries[0].lin_comb(T::one(), &p, delta)?;
    let i22 = crate::field::pair_index(dim, 1, 1);
    entries[i22] = entries[i22].lin_comb(T::one(), &p, -delta)?;
    let a1 = CoefficientField::new(dim, entries)?;

    // Q(t) = -kappa cos(2 pi t) / (2 pi)
    let qraw = PeriodicField::from_terms(dim, vec![WaveTerm::cos(&k[..dim], -kappa / two_pi::<T>())], n)?;
    let norm = operator_on(&a1, &qraw)?.max_abs();
    let q = qraw.scale(T::one() / norm);
    let denom = operator_on(&a1, &q)?.scale(s).add_constant(T::one());
    if !(denom.min_value() > T::zero()) {
        return Err(HomError::Positivity("1 + s A1:D^2 q must stay positive".into()));
    }
    let gamma = denom.map(|x| T::one() / x)?;
    let field = a1.scaled_pointwise(&gamma)?;
    Ok(DensityPerturbation { base, r0, a1, q, gamma, field, delta, s })
}

/// Trace-preserving variant for diagonal planar fields of constant trace:
/// perturb, add a constant off-diagonal `delta_off`, renormalize the trace.
#[derive(Clone, Debug)]
pub struct TracePerturbation<T: Real> {
    pub field: CoefficientField<T>,
    pub b_tilde: CoefficientField<T>,
    pub delta_off: T,
    pub c111_b_tilde: T,
    pub halvings: usize,
}

pub fn density_perturb_trace<T: Real>(
    a: &CoefficientField<T>,
    delta: T,
    s: T,
    delta_off: T,
    cfg: &SolverConfig,
) -> Result<TracePerturbation<T>> {
    if a.dim() != 2 {
        return Err(HomError::Domain("the trace-preserving variant is planar".into()));
    }
    let tol = lit::<T>(1e-12) * T::one().max(a.ellipticity().1);
    if !a.is_diagonal(tol) {
        return Err(HomError::Domain("expected a diagonal field".into()));
    }
    let tr = a.trace()?;
    if !tr.is_constant(lit::<T>(1e-10)) {
        return Err(HomError::Domain("expected constant trace".into()));
    }
    let b = density_perturb(a, delta, s, cfg)?.field;
    let n = b.resolution();
    let cfg = cfg.clone().with_resolution(n);
    let threshold = lit::<T>(1e-7);
    let mut d = delta_off;
    for halvings in 0..=5 {
        let mut entries = b.entries().to_vec();
        entries[1] = entries[1].add_constant(d);
        let b_tilde = CoefficientField::new(2, entries)?;
        let c111 = CellSolution::new(&b_tilde, &cfg)?.tensor().c[0][0][0];
        if c111.abs() > threshold {
            let inv = b_tilde.trace()?.map(|x| T::one() / x)?;
            let field = b_tilde.scaled_pointwise(&inv)?;
            return Ok(TracePerturbation { field, b_tilde, delta_off: d, c111_b_tilde: c111, halvings });
        }
        d = d * lit(0.5);
    }
    Err(HomError::Degenerate("c_1^{11} of the off-diagonal perturbation vanished after 5 halvings".into()))
}
