use crate::error::{HomError, Result};
use crate::field::{upper_pairs, zero_mat, CoefficientField, Mat3, PeriodicField};
use crate::homogenize::{decide, CellSolution, ClassificationReport, ClassifyConfig, Criterion, ThirdOrderTensor};
use crate::scalar::{lit, max_abs, mean, to_f64, Real};
use crate::discretization::Discretization;
use crate::solver::{operator_for, PeriodicOperator, SolveReport, SolverConfig};

fn grid_field<T: Real>(dim: usize, n: usize, v: &[T]) -> Result<PeriodicField<T>> {
    PeriodicField::from_grid(dim, n, v)
}

fn max_diff<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()))
}

/// `M : D^2 f` for a constant symmetric `M`, by exact term differentiation.
pub fn hessian_contract<T: Real>(f: &PeriodicField<T>, m: &Mat3<T>) -> Result<PeriodicField<T>> {
    let mut out = PeriodicField::zero(f.dim(), f.resolution())?;
    for (k, l) in upper_pairs(f.dim()) {
        let w = if k == l { m[k][k] } else { m[k][l] + m[l][k] };
        if w != T::zero() {
            out = out.lin_comb(T::one(), &f.derivative(&[k, l]), w)?;
        }
    }
    Ok(out)
}

/// `M : D^2 v` for grid samples `v`, using the same discrete symbols as the
/// cell solver so identities hold to solver precision.
pub fn hessian_contract_grid<T: Real>(v: &[T], m: &Mat3<T>, dim: usize, n: usize, disc: Discretization) -> Result<Vec<T>> {
    let len = n.pow(dim as u32);
    let coeffs = upper_pairs(dim).into_iter().map(|(k, l)| vec![m[k][l]; len]).collect();
    let op = PeriodicOperator::new(dim, n, coeffs, disc)?;
    let mut out = vec![T::zero(); len];
    op.apply_forward(v, &mut out);
    Ok(out)
}

/// `A : D^2 f` with variable `A`, as a collocation product on the grid.
pub fn operator_on<T: Real>(a: &CoefficientField<T>, f: &PeriodicField<T>) -> Result<PeriodicField<T>> {
    let n = a.resolution().max(f.resolution());
    let len = n.pow(a.dim() as u32);
    let mut acc = vec![T::zero(); len];
    for (e, (k, l)) in a.entries().iter().zip(upper_pairs(a.dim())) {
        let w = if k == l { T::one() } else { lit(2.0) };
        let ev = e.sample_values(n)?;
        let dv = f.derivative(&[k, l]).sample_values(n)?;
        for ((s, &x), &y) in acc.iter_mut().zip(&ev).zip(&dv) {
            *s = *s + w * x * y;
        }
    }
    grid_field(a.dim(), n, &acc)
}

/// The structured family `A(y) = C + a(y) M`, which is always type-eps^2.
#[derive(Clone, Debug)]
pub struct CplusAM<T: Real> {
    pub c: Mat3<T>,
    pub m: Mat3<T>,
    pub a: PeriodicField<T>,
    pub assembled: CoefficientField<T>,
}

/// Closed forms of the `C + aM` family next to the solver output.
#[derive(Clone, Debug)]
pub struct CplusAmCheck<T: Real> {
    pub abar: T,
    /// `-A:D^2 w = a - abar`, mean zero.
    pub w: PeriodicField<T>,
    /// `1 + M:D^2 w`.
    pub r_pred: PeriodicField<T>,
    pub r_error: T,
    /// Largest `|v^{kl} - m_kl w|` over all pairs.
    pub corrector_error: T,
    /// `|-C:D^2 w - (r a - abar)|_inf`.
    pub identity_error: T,
    pub tensor: ThirdOrderTensor<T>,
}

pub fn build_c_plus_am<T: Real>(c: &Mat3<T>, m: &Mat3<T>, a: &PeriodicField<T>) -> Result<CplusAM<T>> {
    let dim = a.dim();
    let entries = upper_pairs(dim).into_iter().map(|(k, l)| a.scale(m[k][l]).add_constant(c[k][l])).collect();
    let assembled = CoefficientField::new(dim, entries)?;
    Ok(CplusAM { c: *c, m: *m, a: a.clone(), assembled })
}

impl<T: Real> CplusAM<T> {
    /// Solves for `r`, the correctors and `w` and compares them with
    /// `r = 1 + M:D^2 w`, `v^{kl} = m_kl w` and `-C:D^2 w = r a - abar`.
    pub fn check(&self, cfg: &SolverConfig) -> Result<CplusAmCheck<T>> {
        let sol = CellSolution::new(&self.assembled, cfg)?;
        let dim = sol.dim();
        let n = sol.resolution();
        let av = self.a.sample_values(n)?;
        let abar = mean(&sol.r.iter().zip(&av).map(|(&r, &a)| r * a).collect::<Vec<_>>());
        let rhs: Vec<T> = av.iter().map(|&x| x - abar).collect();
        let (wv, _) = sol.operator().solve_cell(&sol.r, &rhs, cfg)?;
        let w = grid_field(dim, n, &wv)?;
        let disc = cfg.discretization;
        let r_grid: Vec<T> = hessian_contract_grid(&wv, &self.m, dim, n, disc)?.into_iter().map(|x| x + T::one()).collect();
        let r_error = max_diff(&r_grid, &sol.r);
        let r_pred = grid_field(dim, n, &r_grid)?;
        let mut corrector_error = T::zero();
        for (k, l) in upper_pairs(dim) {
            let pred: Vec<T> = wv.iter().map(|&x| x * self.m[k][l]).collect();
            corrector_error = corrector_error.max(max_diff(&pred, sol.corrector(k, l)));
        }
        let lhs: Vec<T> = hessian_contract_grid(&wv, &self.c, dim, n, disc)?.into_iter().map(|x| -x).collect();
        let ra: Vec<T> = sol.r.iter().zip(&av).map(|(&r, &a)| r * a - abar).collect();
        let identity_error = max_diff(&lhs, &ra);
        Ok(CplusAmCheck { abar, w, r_pred, r_error, corrector_error, identity_error, tensor: sol.tensor() })
    }
}

/// Both sides of the four identities for `A = aB` with a positive scalar `a`.
#[derive(Clone, Debug)]
pub struct ScalingCheck<T: Real> {
    pub abar: T,
    /// `|r_A - abar r_B / a|_inf`.
    pub r_error: T,
    /// `|Abar - abar Bbar|_max`.
    pub effective_error: T,
    /// `max |v_A^{kl} - v_B^{kl} - bbar_kl w|_inf`.
    pub corrector_error: T,
    /// `max |c(A) - abar (c(B) + bbar_kl int r_B B e_j . grad w)|`.
    pub tensor_error: T,
    pub tensor_a: ThirdOrderTensor<T>,
    pub tensor_b: ThirdOrderTensor<T>,
}

/// Checks how invariant measure, effective matrix, correctors and tensor
/// transform under multiplication by a positive scalar field.
pub fn scalar_multiple_check<T: Real>(
    a: &PeriodicField<T>,
    b: &CoefficientField<T>,
    cfg: &SolverConfig,
) -> Result<ScalingCheck<T>> {
    let n = cfg.resolution.unwrap_or(b.resolution().max(a.resolution()));
    let cfg = cfg.clone().with_resolution(n);
    let b = b.resampled(n)?;
    let a = a.resampled(n)?;
    let prod = b.scaled_pointwise(&a)?;
    let sol_b = CellSolution::new(&b, &cfg)?;
    let sol_a = CellSolution::new(&prod, &cfg)?;
    let av = a.values();
    let dscale = T::one() / mean(&sol_b.r.iter().zip(av).map(|(&r, &x)| r / x).collect::<Vec<_>>());
    let r_pred: Vec<T> = sol_b.r.iter().zip(av).map(|(&r, &x)| dscale * r / x).collect();
    let r_error = max_diff(&r_pred, &sol_a.r);
    let abar = mean(&sol_a.r.iter().zip(av).map(|(&r, &x)| r * x).collect::<Vec<_>>());
    let dim = b.dim();
    let mut effective_error = T::zero();
    for k in 0..dim {
        for l in 0..dim {
            effective_error = effective_error.max((sol_a.effective[k][l] - abar * sol_b.effective[k][l]).abs());
        }
    }
    let rhs: Vec<T> = av.iter().map(|&x| x - abar).collect();
    let (w, _) = sol_a.operator().solve_cell(&sol_a.r, &rhs, &cfg)?;
    let mut corrector_error = T::zero();
    for (k, l) in upper_pairs(dim) {
        let bb = sol_b.effective[k][l];
        let pred: Vec<T> = sol_b.corrector(k, l).iter().zip(&w).map(|(&v, &x)| v + bb * x).collect();
        corrector_error = corrector_error.max(max_diff(&pred, sol_a.corrector(k, l)));
    }
    let tensor_a = sol_a.tensor();
    let tensor_b = sol_b.tensor();
    let mut tensor_error = T::zero();
    for j in 0..dim {
        let moment = sol_b.flux_moment(&w, j);
        for (k, l) in upper_pairs(dim) {
            let pred = abar * (tensor_b.c[j][k][l] + sol_b.effective[k][l] * moment);
            tensor_error = tensor_error.max((pred - tensor_a.c[j][k][l]).abs());
        }
    }
    Ok(ScalingCheck { abar, r_error, effective_error, corrector_error, tensor_error, tensor_a, tensor_b })
}

/// Splits a planar diagonal field as `A = a diag(1 + b, 1 - b)` with
/// `a = tr(A)/2` and `b = (a11 - a22)/(a11 + a22)`.
pub fn split_diagonal<T: Real>(a: &CoefficientField<T>) -> Result<(PeriodicField<T>, PeriodicField<T>)> {
    if a.dim() != 2 {
        return Err(HomError::Domain("the diagonal split is planar".into()));
    }
    let tol = lit::<T>(1e-12) * T::one().max(a.ellipticity().1);
    if !a.is_diagonal(tol) {
        return Err(HomError::Domain("field is not diagonal".into()));
    }
    let n = a.resolution();
    let d1 = a.entry(0, 0).values();
    let d2 = a.entry(1, 1).values();
    let half = lit::<T>(0.5);
    let av: Vec<T> = d1.iter().zip(d2).map(|(&x, &y)| (x + y) * half).collect();
    let bv: Vec<T> = d1.iter().zip(d2).map(|(&x, &y)| (x - y) / (x + y)).collect();
    Ok((grid_field(2, n, &av)?, grid_field(2, n, &bv)?))
}

/// Ingredients of the planar diagonal characterization for `A = aB`,
/// `B = diag(1 + b, 1 - b)`.
#[derive(Clone, Debug)]
pub struct CharacterizationData2D<T: Real> {
    pub a: PeriodicField<T>,
    pub b: PeriodicField<T>,
    pub r_b: PeriodicField<T>,
    /// `-A:D^2 w_A = a - int r a`.
    pub w_a: PeriodicField<T>,
    /// `-Laplace w_B = r_B b - int r_B b`.
    pub w_b: PeriodicField<T>,
    pub abar: T,
    pub bbar: T,
    /// `(int d1 w_A d22 w_B, int d2 w_A d11 w_B)`.
    pub integrals: (T, T),
    /// Tensor of `A` from the closed forms in `abar`, `bbar` and the integrals.
    pub predicted: ThirdOrderTensor<T>,
    /// `|r_B - (1 + d11 w_B - d22 w_B)|_inf`.
    pub r_b_identity_error: T,
    /// `|-Laplace w_B - (r_B b - bbar)|_inf`.
    pub poisson_identity_error: T,
}

pub fn characterize_2d_diagonal<T: Real>(
    a: &PeriodicField<T>,
    b: &PeriodicField<T>,
    cfg: &SolverConfig,
) -> Result<CharacterizationData2D<T>> {
    if a.dim() != 2 || b.dim() != 2 {
        return Err(HomError::Domain("characterization is planar".into()));
    }
    let n = cfg.resolution.unwrap_or(a.resolution().max(b.resolution()));
    let cfg = cfg.clone().with_resolution(n);
    let a = a.resampled(n)?;
    let b = b.resampled(n)?;
    if !(a.min_value() > T::zero()) {
        return Err(HomError::Positivity(format!("a has minimum {}", to_f64(a.min_value()))));
    }
    if !(max_abs(b.values()) < T::one()) {
        return Err(HomError::Invalid("b must stay inside (-1, 1)".into()));
    }
    let one_plus = b.add_constant(T::one());
    let one_minus = b.scale(-T::one()).add_constant(T::one());
    let bfield = CoefficientField::diagonal(vec![one_plus, one_minus])?;
    let op_b = operator_for(&bfield, &cfg)?;
    let (rb, rep_b) = op_b.invariant_measure(&cfg)?;
    let bv = b.values();
    let bbar = mean(&rb.iter().zip(bv).map(|(&r, &x)| r * x).collect::<Vec<_>>());
    let (wb, rep_wb) = op_b.solve_cell(&rb, &bv.iter().map(|&x| x - bbar).collect::<Vec<_>>(), &cfg)?;

    let afield = bfield.scaled_pointwise(&a)?;
    let op_a = operator_for(&afield, &cfg)?;
    let av = a.values();
    let abar = T::one() / mean(&rb.iter().zip(av).map(|(&r, &x)| r / x).collect::<Vec<_>>());
    let ra: Vec<T> = rb.iter().zip(av).map(|(&r, &x)| abar * r / x).collect();
    let (wa, rep_wa) = op_a.solve_cell(&ra, &av.iter().map(|&x| x - abar).collect::<Vec<_>>(), &cfg)?;

    let r_b = grid_field(2, n, &rb)?;
    let w_a = grid_field(2, n, &wa)?;
    let w_b = grid_field(2, n, &wb)?;
    let i1 = w_a.partial(0).inner_product(&w_b.derivative(&[1, 1]));
    let i2 = w_a.partial(1).inner_product(&w_b.derivative(&[0, 0]));

    let two = lit::<T>(2.0);
    let (p, m) = (T::one() + bbar, T::one() - bbar);
    let mut c = [[[T::zero(); 3]; 3]; 3];
    c[0][0][0] = -two * abar * p * i1;
    c[1][0][0] = two * abar * p * i2;
    c[0][1][1] = -two * abar * m * i1;
    c[1][1][1] = two * abar * m * i2;
    let mut eff = zero_mat();
    eff[0][0] = abar * p;
    eff[1][1] = abar * m;
    let reports: Vec<SolveReport> = vec![rep_b, rep_wb, rep_wa];
    let predicted = ThirdOrderTensor::new(2, c, eff, n, cfg.discretization, reports);

    let rb_pred = w_b.derivative(&[0, 0]).sub(&w_b.derivative(&[1, 1]))?.add_constant(T::one());
    let r_b_identity_error = max_diff(rb_pred.values(), &rb);
    let lap = w_b.derivative(&[0, 0]).add(&w_b.derivative(&[1, 1]))?;
    let src: Vec<T> = rb.iter().zip(bv).map(|(&r, &x)| r * x - bbar).collect();
    let poisson_identity_error = lap.values().iter().zip(&src).fold(T::zero(), |acc, (&l, &s)| acc.max((l + s).abs()));

    Ok(CharacterizationData2D {
        a,
        b,
        r_b,
        w_a,
        w_b,
        abar,
        bbar,
        integrals: (i1, i2),
        predicted,
        r_b_identity_error,
        poisson_identity_error,
    })
}

/// Two-resolution verdict from the characterization's predicted tensor.
pub fn characterize_classify<T: Real>(
    a: &PeriodicField<T>,
    b: &PeriodicField<T>,
    cfg: &ClassifyConfig,
) -> Result<ClassificationReport<T>> {
    let n = cfg.resolution.unwrap_or(64);
    let coarse = characterize_2d_diagonal(a, b, &cfg.solver.clone().with_resolution(n))?.predicted;
    let fine = characterize_2d_diagonal(a, b, &cfg.solver.clone().with_resolution(2 * n))?.predicted;
    Ok(decide(coarse, fine, Criterion::Full, cfg.threshold))
}

/// The orbit representative `gamma A` with `gamma = 1/(C:A)`.
#[derive(Clone, Debug)]
pub struct OrbitScaled<T: Real> {
    pub field: CoefficientField<T>,
    pub gamma: PeriodicField<T>,
}

pub fn orbit_scale<T: Real>(a: &CoefficientField<T>, c: &Mat3<T>) -> Result<OrbitScaled<T>> {
    let ca = a.contract(c)?;
    if !(ca.min_value() > T::zero()) {
        return Err(HomError::Positivity(format!("C:A has minimum {} on the grid", to_f64(ca.min_value()))));
    }
    let gamma = ca.map(|x| T::one() / x)?;
    let field = a.scaled_pointwise(&gamma)?;
    Ok(OrbitScaled { field, gamma })
}

/// `w = -gammabar sum_ij c_ij v^{ij}` with `gammabar = 1/(C:Abar)`, the
/// solution of `-gamma A:D^2 w = gamma - gammabar`.
pub fn orbit_corrector<T: Real>(sol: &CellSolution<T>, c: &Mat3<T>) -> Vec<T> {
    let dim = sol.dim();
    let mut cab = T::zero();
    for i in 0..dim {
        for j in 0..dim {
            cab = cab + c[i][j] * sol.effective[i][j];
        }
    }
    let gbar = T::one() / cab;
    let mut w = vec![T::zero(); sol.r.len()];
    for (k, l) in upper_pairs(dim) {
        let weight = if k == l { c[k][k] } else { c[k][l] + c[l][k] };
        if weight == T::zero() {
            continue;
        }
        for (x, &v) in w.iter_mut().zip(sol.corrector(k, l)) {
            *x = *x - gbar * weight * v;
        }
    }
    w
}

/// Lifts a planar diagonal field to `diag(b1, b2, c - b1 - b2)` on the
/// 3-torus, constant along `y3`, sampled on an `n^3` grid.
pub fn lift_to_3d_constant_trace<T: Real>(b: &CoefficientField<T>, c: T, n: usize) -> Result<CoefficientField<T>> {
    if b.dim() != 2 {
        return Err(HomError::Domain("lift expects a planar field".into()));
    }
    let tol = lit::<T>(1e-12) * T::one().max(b.ellipticity().1);
    if !b.is_diagonal(tol) {
        return Err(HomError::Domain("lift expects a diagonal field".into()));
    }
    let b1 = b.entry(0, 0).sample_values(n)?;
    let b2 = b.entry(1, 1).sample_values(n)?;
    let sup = b1.iter().zip(&b2).fold(T::neg_infinity(), |m, (&x, &y)| m.max(x + y));
    if !(c > sup) {
        return Err(HomError::Trace { constant: to_f64(c), sup: to_f64(sup) });
    }
    let b3: Vec<T> = b1.iter().zip(&b2).map(|(&x, &y)| c - x - y).collect();
    let extend = |v: &[T]| -> Result<PeriodicField<T>> {
        let mut out = Vec::with_capacity(n * n * n);
        for &x in v {
            out.extend(std::iter::repeat_n(x, n));
        }
        grid_field(3, n, &out)
    };
    CoefficientField::diagonal(vec![extend(&b1)?, extend(&b2)?, extend(&b3)?])
}
