use super::scalar_field::PeriodicField;
use crate::error::{HomError, Result};
use crate::scalar::{lit, Real};

/// Dense 3x3 storage; only the leading `dim x dim` block is meaningful.
pub type Mat3<T> = [[T; 3]; 3];

pub fn zero_mat<T: Real>() -> Mat3<T> {
    [[T::zero(); 3]; 3]
}

pub fn identity_mat<T: Real>(dim: usize) -> Mat3<T> {
    let mut m = zero_mat();
    for (i, row) in m.iter_mut().enumerate().take(dim) {
        row[i] = T::one();
    }
    m
}

/// Upper-triangle index pairs in storage order.
pub fn upper_pairs(dim: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for k in 0..dim {
        for l in k..dim {
            v.push((k, l));
        }
    }
    v
}

pub fn pair_index(dim: usize, k: usize, l: usize) -> usize {
    let (k, l) = if k <= l { (k, l) } else { (l, k) };
    upper_pairs(dim).iter().position(|&p| p == (k, l)).expect("index pair in range")
}

/// Extreme eigenvalues of the symmetric leading block of `m`.
pub fn sym_eigen_bounds<T: Real>(m: &Mat3<T>, dim: usize) -> (T, T) {
    match dim {
        1 => (m[0][0], m[0][0]),
        2 => {
            let half = lit::<T>(0.5);
            let mid = (m[0][0] + m[1][1]) * half;
            let d = ((m[0][0] - m[1][1]) * half).hypot(m[0][1]);
            (mid - d, mid + d)
        }
        _ => {
            // trigonometric solution of the characteristic cubic
            let p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
            let tr = m[0][0] + m[1][1] + m[2][2];
            let q = tr / lit(3.0);
            if p1 == T::zero() {
                let d = [m[0][0], m[1][1], m[2][2]];
                let lo = d.iter().copied().fold(T::infinity(), T::min);
                let hi = d.iter().copied().fold(T::neg_infinity(), T::max);
                return (lo, hi);
            }
            let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + lit::<T>(2.0) * p1;
            let p = (p2 / lit(6.0)).sqrt();
            let b = |i: usize, j: usize| (m[i][j] - if i == j { q } else { T::zero() }) / p;
            let det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(1, 2)) - b(0, 1) * (b(0, 1) * b(2, 2) - b(1, 2) * b(0, 2))
                + b(0, 2) * (b(0, 1) * b(1, 2) - b(1, 1) * b(0, 2));
            let r = (det * lit(0.5)).max(-T::one()).min(T::one());
            let phi = r.acos() / lit(3.0);
            let two = lit::<T>(2.0);
            let e1 = q + two * p * phi.cos();
            let e3 = q + two * p * (phi + lit::<T>(2.0) * T::PI() / lit(3.0)).cos();
            (e3, e1)
        }
    }
}

/// Symmetric-matrix-valued periodic field `A(y)` with grid ellipticity bounds.
#[derive(Clone, Debug)]
pub struct CoefficientField<T: Real> {
    dim: usize,
    n: usize,
    entries: Vec<PeriodicField<T>>,
    lambda_min: T,
    lambda_max: T,
}

impl<T: Real> CoefficientField<T> {
    /// Builds from the upper-triangle entries in `upper_pairs` order.
    /// All entries are brought to the finest resolution among them.
    pub fn new(dim: usize, entries: Vec<PeriodicField<T>>) -> Result<Self> {
        let expected = dim * (dim + 1) / 2;
        if entries.len() != expected {
            return Err(HomError::Invalid(format!("expected {expected} upper-triangle entries, got {}", entries.len())));
        }
        if entries.iter().any(|e| e.dim() != dim) {
            return Err(HomError::Invalid("entry dimension mismatch".into()));
        }
        let n = entries.iter().map(|e| e.resolution()).max().unwrap_or(2);
        let entries = entries.into_iter().map(|e| e.resampled(n)).collect::<Result<Vec<_>>>()?;
        let mut field = Self { dim, n, entries, lambda_min: T::zero(), lambda_max: T::zero() };
        let (lo, hi) = field.compute_bounds();
        if lo.is_nan() || lo <= T::zero() {
            return Err(HomError::Ellipticity { lambda_min: lo.to_f64().unwrap_or(f64::NAN) });
        }
        field.lambda_min = lo;
        field.lambda_max = hi;
        Ok(field)
    }

    pub fn diagonal(diag: Vec<PeriodicField<T>>) -> Result<Self> {
        let dim = diag.len();
        let n = diag.iter().map(|e| e.resolution()).max().unwrap_or(2);
        let mut entries = Vec::new();
        for (k, l) in upper_pairs(dim) {
            entries.push(if k == l { diag[k].clone() } else { PeriodicField::zero(dim, n)? });
        }
        Self::new(dim, entries)
    }

    pub fn constant(dim: usize, n: usize, m: &Mat3<T>) -> Result<Self> {
        let entries = upper_pairs(dim)
            .into_iter()
            .map(|(k, l)| PeriodicField::constant(dim, n, m[k][l]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim, entries)
    }

    /// Samples a matrix-valued function on the grid.
    pub fn from_fn(dim: usize, n: usize, f: impl Fn(&[T]) -> Mat3<T>) -> Result<Self> {
        let entries = upper_pairs(dim)
            .into_iter()
            .map(|(k, l)| PeriodicField::from_fn(dim, n, |y| f(y)[k][l]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim, entries)
    }

    fn compute_bounds(&self) -> (T, T) {
        let len = self.n.pow(self.dim as u32);
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for idx in 0..len {
            let (a, b) = sym_eigen_bounds(&self.matrix_at_node(idx), self.dim);
            lo = lo.min(a);
            hi = hi.max(b);
        }
        (lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    /// `(lambda_min, lambda_max)` over the grid nodes.
    pub fn ellipticity(&self) -> (T, T) {
        (self.lambda_min, self.lambda_max)
    }

    pub fn entry(&self, k: usize, l: usize) -> &PeriodicField<T> {
        &self.entries[pair_index(self.dim, k, l)]
    }

    /// Upper-triangle entries in `upper_pairs` order.
    pub fn entries(&self) -> &[PeriodicField<T>] {
        &self.entries
    }

    pub fn matrix_at_node(&self, idx: usize) -> Mat3<T> {
        let mut m = zero_mat();
        for (e, (k, l)) in self.entries.iter().zip(upper_pairs(self.dim)) {
            m[k][l] = e.values()[idx];
            m[l][k] = m[k][l];
        }
        m
    }

    pub fn eval(&self, y: &[T]) -> Mat3<T> {
        let mut m = zero_mat();
        for (e, (k, l)) in self.entries.iter().zip(upper_pairs(self.dim)) {
            m[k][l] = e.eval(y);
            m[l][k] = m[k][l];
        }
        m
    }

    /// Entrywise cell means.
    pub fn mean_matrix(&self) -> Mat3<T> {
        let mut m = zero_mat();
        for (e, (k, l)) in self.entries.iter().zip(upper_pairs(self.dim)) {
            m[k][l] = e.mean();
            m[l][k] = m[k][l];
        }
        m
    }

    pub fn is_diagonal(&self, tol: T) -> bool {
        upper_pairs(self.dim)
            .iter()
            .zip(&self.entries)
            .all(|(&(k, l), e)| k == l || e.terms().iter().all(|t| t.amp.abs() <= tol))
    }

    pub fn is_constant(&self, tol: T) -> bool {
        self.entries.iter().all(|e| e.is_constant(tol))
    }

    pub fn trace(&self) -> Result<PeriodicField<T>> {
        let mut t = self.entry(0, 0).clone();
        for i in 1..self.dim {
            t = t.add(self.entry(i, i))?;
        }
        Ok(t)
    }

    /// `C : A(y)` for a constant symmetric matrix `C`.
    pub fn contract(&self, c: &Mat3<T>) -> Result<PeriodicField<T>> {
        let mut out = PeriodicField::zero(self.dim, self.n)?;
        for (e, (k, l)) in self.entries.iter().zip(upper_pairs(self.dim)) {
            let w = if k == l { c[k][k] } else { c[k][l] + c[l][k] };
            out = out.lin_comb(T::one(), e, w)?;
        }
        Ok(out)
    }

    /// Grid samples of every entry at resolution `m`, upper-triangle order.
    pub fn sample_values(&self, m: usize) -> Result<Vec<Vec<T>>> {
        self.entries.iter().map(|e| e.sample_values(m)).collect()
    }

    pub fn resampled(&self, m: usize) -> Result<Self> {
        if m == self.n {
            return Ok(self.clone());
        }
        let entries = self.entries.iter().map(|e| e.resampled(m)).collect::<Result<Vec<_>>>()?;
        Self::new(self.dim, entries)
    }

    pub fn scale(&self, s: T) -> Result<Self> {
        Self::new(self.dim, self.entries.iter().map(|e| e.scale(s)).collect())
    }

    /// `gamma(y) A(y)` as a collocation product on the grid.
    pub fn scaled_pointwise(&self, gamma: &PeriodicField<T>) -> Result<Self> {
        let entries = self.entries.iter().map(|e| e.pointwise_product(gamma)).collect::<Result<Vec<_>>>()?;
        Self::new(self.dim, entries)
    }

    /// `A(y) + C` for a constant symmetric matrix `C`.
    pub fn add_constant(&self, c: &Mat3<T>) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .zip(upper_pairs(self.dim))
            .map(|(e, (k, l))| e.add_constant(c[k][l]))
            .collect();
        Self::new(self.dim, entries)
    }

    /// `alpha A + beta B` entrywise.
    pub fn lin_comb(&self, alpha: T, other: &Self, beta: T) -> Result<Self> {
        if self.dim != other.dim {
            return Err(HomError::Invalid("dimension mismatch".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.lin_comb(alpha, b, beta))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.dim, entries)
    }

    /// Largest entrywise deviation over the grid nodes.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        let mut m = T::zero();
        for (a, b) in self.entries.iter().zip(&other.entries) {
            m = m.max(a.max_abs_diff(b)?);
        }
        Ok(m)
    }

    pub fn cast<U: Real>(&self) -> Result<CoefficientField<U>> {
        CoefficientField::new(self.dim, self.entries.iter().map(|e| e.cast()).collect())
    }
}
