use std::cmp::Ordering;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::fft::{unravel, wave_index, wavenumber, NdFft};
use crate::error::{HomError, Result};
use crate::scalar::{lit, two_pi, Real};

/// Term lists up to this length are multiplied exactly by product-to-sum.
pub const SHORT_TERM_LIST: usize = 64;

/// Largest padded grid a dealiased product may allocate, per dimension.
pub fn padded_resolution_cap(dim: usize) -> usize {
    match dim {
        1 => 1 << 20,
        2 => 4096,
        _ => 256,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Cos,
    Sin,
}

/// One real harmonic `amp * cos(2 pi k.y)` or `amp * sin(2 pi k.y)`.
///
/// Unused wavevector components (beyond the field dimension) are zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveTerm<T> {
    pub k: [i64; 3],
    pub phase: Phase,
    pub amp: T,
}

fn canonical_sign(k: &[i64; 3]) -> i64 {
    k.iter().find(|&&c| c != 0).map_or(0, |c| c.signum())
}

impl<T: Real> WaveTerm<T> {
    /// Builds a term in canonical form (first nonzero component positive).
    pub fn new(k: &[i64], phase: Phase, amp: T) -> Result<Self> {
        if k.len() > 3 {
            return Err(HomError::Invalid(format!("wavevector of length {} (at most 3)", k.len())));
        }
        let mut kk = [0i64; 3];
        kk[..k.len()].copy_from_slice(k);
        let sign = canonical_sign(&kk);
        match (sign, phase) {
            (0, Phase::Sin) => Err(HomError::Canonical),
            (-1, Phase::Cos) => Ok(Self { k: kk.map(|c| -c), phase, amp }),
            (-1, Phase::Sin) => Ok(Self { k: kk.map(|c| -c), phase, amp: -amp }),
            _ => Ok(Self { k: kk, phase, amp }),
        }
    }

    pub fn cos(k: &[i64], amp: T) -> Self {
        Self::new(k, Phase::Cos, amp).expect("cos terms are always valid")
    }

    /// Panics on a zero wavevector; use [`WaveTerm::new`] for untrusted input.
    pub fn sin(k: &[i64], amp: T) -> Self {
        Self::new(k, Phase::Sin, amp).expect("sin term needs a nonzero wavevector")
    }

    pub fn constant(amp: T) -> Self {
        Self { k: [0; 3], phase: Phase::Cos, amp }
    }

    pub fn is_constant(&self) -> bool {
        self.k == [0; 3]
    }

    pub fn eval(&self, y: &[T]) -> T {
        let mut arg = T::zero();
        for (i, &yi) in y.iter().enumerate().take(3) {
            arg = arg + lit::<T>(self.k[i] as f64) * yi;
        }
        let arg = two_pi::<T>() * arg;
        match self.phase {
            Phase::Cos => self.amp * arg.cos(),
            Phase::Sin => self.amp * arg.sin(),
        }
    }

    fn key_cmp(&self, other: &Self) -> Ordering {
        self.k.cmp(&other.k).then(self.phase.cmp(&other.phase))
    }
}

/// Sorts, canonicalizes and merges duplicate harmonics.
fn normalize_terms<T: Real>(mut terms: Vec<WaveTerm<T>>) -> Vec<WaveTerm<T>> {
    terms.sort_by(|a, b| a.key_cmp(b));
    let mut out: Vec<WaveTerm<T>> = Vec::with_capacity(terms.len());
    for t in terms {
        match out.last_mut() {
            Some(last) if last.key_cmp(&t) == Ordering::Equal => last.amp = last.amp + t.amp,
            _ => out.push(t),
        }
    }
    out.retain(|t| t.amp != T::zero());
    out
}

/// Real Y-periodic function on the n-torus: an exact trigonometric term list
/// plus collocated samples on an `N^n` grid.
///
/// The term list is authoritative; the samples are recomputed from it.
#[derive(Clone, Debug)]
pub struct PeriodicField<T: Real> {
    dim: usize,
    n: usize,
    terms: Vec<WaveTerm<T>>,
    values: Vec<T>,
}

fn check_dim_res(dim: usize, n: usize) -> Result<()> {
    if !(1..=3).contains(&dim) {
        return Err(HomError::Invalid(format!("dimension {dim} not in 1..=3")));
    }
    if n < 2 || !n.is_power_of_two() {
        return Err(HomError::Invalid(format!("resolution {n} is not a power of two >= 2")));
    }
    Ok(())
}

impl<T: Real> PeriodicField<T> {
    /// Field from an explicit term list.
    pub fn from_terms(dim: usize, terms: Vec<WaveTerm<T>>, n: usize) -> Result<Self> {
        check_dim_res(dim, n)?;
        let mut canon = Vec::with_capacity(terms.len());
        for t in terms {
            if t.k[dim..].iter().any(|&c| c != 0) {
                return Err(HomError::Invalid(format!("wavevector {:?} exceeds dimension {dim}", t.k)));
            }
            canon.push(WaveTerm::new(&t.k, t.phase, t.amp)?);
        }
        let terms = normalize_terms(canon);
        let kmax = terms.iter().flat_map(|t| t.k).map(i64::abs).max().unwrap_or(0);
        let required = 2 * (kmax as usize + 1);
        if n < required {
            return Err(HomError::Alias { resolution: n, max_wavenumber: kmax, required });
        }
        Ok(Self::from_canonical(dim, n, terms))
    }

    /// Rebuilds a field from terms derived from another field at the same
    /// resolution, where symmetric Nyquist terms are legitimate.
    pub(crate) fn from_derived_terms(dim: usize, n: usize, terms: Vec<WaveTerm<T>>) -> Result<Self> {
        let kmax = terms.iter().flat_map(|t| t.k).map(i64::abs).max().unwrap_or(0) as usize;
        if 2 * kmax > n {
            return Err(HomError::Alias { resolution: n, max_wavenumber: kmax as i64, required: 2 * (kmax + 1) });
        }
        Ok(Self::from_canonical(dim, n, normalize_terms(terms)))
    }

    fn from_canonical(dim: usize, n: usize, terms: Vec<WaveTerm<T>>) -> Self {
        let values = synthesize_terms(dim, n, &terms);
        Self { dim, n, terms, values }
    }

    /// Spectral analysis of grid samples. The result interpolates the samples
    /// exactly; Nyquist content is split symmetrically.
    pub fn from_grid(dim: usize, n: usize, values: &[T]) -> Result<Self> {
        check_dim_res(dim, n)?;
        if values.len() != n.pow(dim as u32) {
            return Err(HomError::Invalid(format!(
                "expected {} grid values, got {}",
                n.pow(dim as u32),
                values.len()
            )));
        }
        let fft = NdFft::new(dim, n);
        let spec = fft.analyze(values);
        let terms = spectrum_to_terms(dim, n, &spec, |_| true);
        Ok(Self::from_canonical(dim, n, terms))
    }

    /// Samples `f` on the grid and analyzes the samples.
    pub fn from_fn(dim: usize, n: usize, f: impl Fn(&[T]) -> T) -> Result<Self> {
        check_dim_res(dim, n)?;
        let values = sample_fn(dim, n, f);
        Self::from_grid(dim, n, &values)
    }

    pub fn constant(dim: usize, n: usize, c: T) -> Result<Self> {
        Self::from_terms(dim, vec![WaveTerm::constant(c)], n)
    }

    pub fn zero(dim: usize, n: usize) -> Result<Self> {
        Self::from_terms(dim, Vec::new(), n)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[WaveTerm<T>] {
        &self.terms
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Mean over the unit cell: the zero-wavevector cos amplitude.
    pub fn mean(&self) -> T {
        match self.terms.first() {
            Some(t) if t.is_constant() => t.amp,
            _ => T::zero(),
        }
    }

    /// Largest absolute wavevector component among the terms.
    pub fn bandwidth(&self) -> i64 {
        self.terms.iter().flat_map(|t| t.k).map(i64::abs).max().unwrap_or(0)
    }

    /// True when every non-constant amplitude is at most `tol` in size.
    pub fn is_constant(&self, tol: T) -> bool {
        self.terms.iter().all(|t| t.is_constant() || t.amp.abs() <= tol)
    }

    /// Exact evaluation of the term list at an arbitrary point.
    pub fn eval(&self, y: &[T]) -> T {
        self.terms.iter().map(|t| t.eval(y)).sum()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Grid coordinates of node `idx`.
    pub fn node(&self, idx: usize) -> [T; 3] {
        node_coords(idx, self.dim, self.n)
    }

    /// Samples on an `m^dim` grid. Subsamples the cached values when `m`
    /// divides the resolution, synthesizes exactly otherwise.
    pub fn sample_values(&self, m: usize) -> Result<Vec<T>> {
        check_dim_res(self.dim, m)?;
        if m == self.n {
            return Ok(self.values.clone());
        }
        if self.n % m == 0 {
            let step = self.n / m;
            let len = m.pow(self.dim as u32);
            return Ok((0..len)
                .map(|idx| {
                    let c = unravel(idx, self.dim, m);
                    let mut flat = 0;
                    for &ci in c.iter().take(self.dim) {
                        flat = flat * self.n + ci * step;
                    }
                    self.values[flat]
                })
                .collect());
        }
        if (self.bandwidth() as usize) < m / 2 {
            return Ok(synthesize_terms(self.dim, m, &self.terms));
        }
        Ok(sample_fn(self.dim, m, |y| self.eval(y)))
    }

    /// The same function represented at resolution `m` (collocation at the
    /// new nodes when `m` is coarser than the bandwidth requires).
    pub fn resampled(&self, m: usize) -> Result<Self> {
        if m == self.n {
            return Ok(self.clone());
        }
        if (self.bandwidth() as usize) < m / 2 {
            check_dim_res(self.dim, m)?;
            return Ok(Self::from_canonical(self.dim, m, self.terms.clone()));
        }
        let vals = self.sample_values(m)?;
        Self::from_grid(self.dim, m, &vals)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(HomError::Invalid(format!("dimension mismatch {} vs {}", self.dim, other.dim)));
        }
        Ok(())
    }

    /// `alpha * self + beta * other` on the finer of the two resolutions.
    pub fn lin_comb(&self, alpha: T, other: &Self, beta: T) -> Result<Self> {
        self.check_compatible(other)?;
        let n = self.n.max(other.n);
        let mut terms: Vec<WaveTerm<T>> = self
            .terms
            .iter()
            .map(|t| WaveTerm { amp: t.amp * alpha, ..*t })
            .chain(other.terms.iter().map(|t| WaveTerm { amp: t.amp * beta, ..*t }))
            .collect();
        terms = normalize_terms(terms);
        if self.n == other.n {
            let values = self.values.iter().zip(&other.values).map(|(&a, &b)| alpha * a + beta * b).collect();
            return Ok(Self { dim: self.dim, n, terms, values });
        }
        Ok(Self::from_canonical(self.dim, n, terms))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.lin_comb(T::one(), other, T::one())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.lin_comb(T::one(), other, -T::one())
    }

    pub fn scale(&self, s: T) -> Self {
        let terms = normalize_terms(self.terms.iter().map(|t| WaveTerm { amp: t.amp * s, ..*t }).collect());
        let values = self.values.iter().map(|&v| v * s).collect();
        Self { dim: self.dim, n: self.n, terms, values }
    }

    pub fn add_constant(&self, c: T) -> Self {
        let mut terms = self.terms.clone();
        terms.push(WaveTerm::constant(c));
        let terms = normalize_terms(terms);
        let values = self.values.iter().map(|&v| v + c).collect();
        Self { dim: self.dim, n: self.n, terms, values }
    }

    /// Product of two fields. Short term lists are convolved exactly and the
    /// resolution grows as needed; longer ones go through a zero-padded grid
    /// and are truncated back to the working resolution.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        if self.terms.len() <= SHORT_TERM_LIST && other.terms.len() <= SHORT_TERM_LIST {
            return self.multiply_exact(other);
        }
        let n = self.n.max(other.n);
        let padded = 2 * n;
        if padded > padded_resolution_cap(self.dim) {
            return Err(HomError::Alias {
                resolution: padded_resolution_cap(self.dim),
                max_wavenumber: (self.bandwidth() + other.bandwidth()),
                required: padded,
            });
        }
        let f = synthesize_terms(self.dim, padded, &self.terms);
        let g = synthesize_terms(self.dim, padded, &other.terms);
        let prod: Vec<T> = f.iter().zip(&g).map(|(&a, &b)| a * b).collect();
        let fft = NdFft::new(self.dim, padded);
        let spec = fft.analyze(&prod);
        let half = (n / 2) as i64;
        let terms = spectrum_to_terms(self.dim, padded, &spec, |k| k.iter().all(|c| c.abs() < half));
        Ok(Self::from_canonical(self.dim, n, terms))
    }

    fn multiply_exact(&self, other: &Self) -> Result<Self> {
        let half = lit::<T>(0.5);
        let mut out = Vec::with_capacity(2 * self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let plus = std::array::from_fn::<i64, 3, _>(|i| a.k[i] + b.k[i]);
                let minus = std::array::from_fn::<i64, 3, _>(|i| a.k[i] - b.k[i]);
                let p = a.amp * b.amp * half;
                // cos/sin product-to-sum identities
                let (phase, k1, a1, k2, a2) = match (a.phase, b.phase) {
                    (Phase::Cos, Phase::Cos) => (Phase::Cos, minus, p, plus, p),
                    (Phase::Sin, Phase::Sin) => (Phase::Cos, minus, p, plus, -p),
                    (Phase::Sin, Phase::Cos) => (Phase::Sin, plus, p, minus, p),
                    (Phase::Cos, Phase::Sin) => (Phase::Sin, plus, p, minus, -p),
                };
                for (k, amp) in [(k1, a1), (k2, a2)] {
                    if phase == Phase::Sin && k == [0; 3] {
                        continue;
                    }
                    out.push(WaveTerm::new(&k, phase, amp)?);
                }
            }
        }
        let terms = normalize_terms(out);
        let kmax = terms.iter().flat_map(|t| t.k).map(i64::abs).max().unwrap_or(0) as usize;
        let mut n = self.n.max(other.n);
        while n < 2 * (kmax + 1) {
            n *= 2;
        }
        if n > padded_resolution_cap(self.dim) {
            return Err(HomError::Alias {
                resolution: padded_resolution_cap(self.dim),
                max_wavenumber: kmax as i64,
                required: n,
            });
        }
        Ok(Self::from_canonical(self.dim, n, terms))
    }

    /// Pointwise product of the grid samples, re-analyzed at the working
    /// resolution. Aliasing is the caller's responsibility; this is the
    /// collocation product a pseudo-spectral solver sees.
    pub fn pointwise_product(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let n = self.n.max(other.n);
        let a = self.sample_values(n)?;
        let b = other.sample_values(n)?;
        let prod: Vec<T> = a.iter().zip(&b).map(|(&x, &y)| x * y).collect();
        Self::from_grid(self.dim, n, &prod)
    }

    /// Applies `f` to every grid sample (collocation).
    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        let vals: Vec<T> = self.values.iter().map(|&v| f(v)).collect();
        Self::from_grid(self.dim, self.n, &vals)
    }

    /// Exact spectral derivative; `axes` lists the differentiation directions
    /// (0-based), e.g. `&[0, 1, 1]` is the third derivative in y1, y2, y2.
    pub fn derivative(&self, axes: &[usize]) -> Self {
        let tp = two_pi::<T>();
        let mut terms = self.terms.clone();
        for &axis in axes {
            assert!(axis < self.dim, "axis {axis} out of range for dimension {}", self.dim);
            terms = terms
                .into_iter()
                .filter_map(|t| {
                    let f = tp * lit::<T>(t.k[axis] as f64);
                    if t.k[axis] == 0 {
                        return None;
                    }
                    Some(match t.phase {
                        Phase::Cos => WaveTerm { phase: Phase::Sin, amp: -f * t.amp, ..t },
                        Phase::Sin => WaveTerm { phase: Phase::Cos, amp: f * t.amp, ..t },
                    })
                })
                .collect();
        }
        Self::from_canonical(self.dim, self.n, normalize_terms(terms))
    }

    pub fn partial(&self, axis: usize) -> Self {
        self.derivative(&[axis])
    }

    /// `int_Y f g` by Parseval on the term lists.
    pub fn inner_product(&self, other: &Self) -> T {
        let half = lit::<T>(0.5);
        let (mut i, mut j) = (0, 0);
        let mut acc = T::zero();
        while i < self.terms.len() && j < other.terms.len() {
            let (a, b) = (&self.terms[i], &other.terms[j]);
            match a.key_cmp(b) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    let w = if a.is_constant() { T::one() } else { half };
                    acc = acc + w * a.amp * b.amp;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    /// Largest amplitude difference between the two term lists.
    pub fn max_term_difference(&self, other: &Self) -> T {
        let (mut i, mut j) = (0, 0);
        let mut m = T::zero();
        while i < self.terms.len() || j < other.terms.len() {
            let ord = match (self.terms.get(i), other.terms.get(j)) {
                (Some(a), Some(b)) => a.key_cmp(b),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            match ord {
                Ordering::Less => {
                    m = m.max(self.terms[i].amp.abs());
                    i += 1;
                }
                Ordering::Greater => {
                    m = m.max(other.terms[j].amp.abs());
                    j += 1;
                }
                Ordering::Equal => {
                    m = m.max((self.terms[i].amp - other.terms[j].amp).abs());
                    i += 1;
                    j += 1;
                }
            }
        }
        m
    }

    /// Sup-norm distance between the grid samples at the finer resolution.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        let n = self.n.max(other.n);
        let a = self.sample_values(n)?;
        let b = other.sample_values(n)?;
        Ok(a.iter().zip(&b).fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs())))
    }

    /// Converts to another scalar type.
    pub fn cast<U: Real>(&self) -> PeriodicField<U> {
        let terms = self
            .terms
            .iter()
            .map(|t| WaveTerm { k: t.k, phase: t.phase, amp: U::from_f64(t.amp.to_f64().unwrap()).unwrap() })
            .collect();
        PeriodicField::from_canonical(self.dim, self.n, terms)
    }
}

pub(crate) fn node_coords<T: Real>(idx: usize, dim: usize, n: usize) -> [T; 3] {
    let c = unravel(idx, dim, n);
    let h = T::one() / lit::<T>(n as f64);
    [lit::<T>(c[0] as f64) * h, lit::<T>(c[1] as f64) * h, lit::<T>(c[2] as f64) * h]
}

pub(crate) fn sample_fn<T: Real>(dim: usize, n: usize, f: impl Fn(&[T]) -> T) -> Vec<T> {
    let len = n.pow(dim as u32);
    (0..len)
        .map(|idx| {
            let y = node_coords::<T>(idx, dim, n);
            f(&y[..dim])
        })
        .collect()
}

/// Grid samples of a term list by inverse FFT (terms must fit the grid).
pub(crate) fn synthesize_terms<T: Real>(dim: usize, n: usize, terms: &[WaveTerm<T>]) -> Vec<T> {
    let len = n.pow(dim as u32);
    let zero = Complex::new(T::zero(), T::zero());
    let mut spec = vec![zero; len];
    let half = lit::<T>(0.5);
    let flat = |k: &[i64; 3]| -> usize {
        let mut idx = 0;
        for &c in k.iter().take(dim) {
            idx = idx * n + wave_index(c, n);
        }
        idx
    };
    for t in terms {
        if t.is_constant() {
            spec[0].re = spec[0].re + t.amp;
            continue;
        }
        let kp = flat(&t.k);
        let km = flat(&t.k.map(|c| -c));
        let h = t.amp * half;
        match t.phase {
            Phase::Cos => {
                spec[kp].re = spec[kp].re + h;
                spec[km].re = spec[km].re + h;
            }
            Phase::Sin => {
                spec[kp].im = spec[kp].im - h;
                spec[km].im = spec[km].im + h;
            }
        }
    }
    NdFft::new(dim, n).synthesize(spec)
}

/// Reads canonical terms off a normalized spectrum, keeping only what `keep`
/// accepts. A Nyquist component is split evenly between `+N/2` and `-N/2`,
/// which is the real interpolant whose first derivatives vanish there.
/// Amplitudes at roundoff level are dropped.
pub(crate) fn spectrum_to_terms<T: Real>(
    dim: usize,
    n: usize,
    spec: &[Complex<T>],
    keep: impl Fn(&[i64; 3]) -> bool,
) -> Vec<WaveTerm<T>> {
    let nyq = -((n / 2) as i64);
    let peak = spec.iter().fold(T::zero(), |m, c| m.max(c.re.abs()).max(c.im.abs()));
    let cutoff = peak * T::epsilon();
    let two = lit::<T>(2.0);
    let mut terms = Vec::new();
    let mut emit = |k: [i64; 3], c: Complex<T>| {
        if k == [0; 3] {
            if c.re.abs() > cutoff {
                terms.push(WaveTerm::constant(c.re));
            }
            return;
        }
        if canonical_sign(&k) < 0 {
            return;
        }
        if c.re.abs() > cutoff {
            terms.push(WaveTerm { k, phase: Phase::Cos, amp: two * c.re });
        }
        if c.im.abs() > cutoff {
            terms.push(WaveTerm { k, phase: Phase::Sin, amp: -two * c.im });
        }
    };
    for (idx, &c) in spec.iter().enumerate() {
        let ix = unravel(idx, dim, n);
        let mut k = [0i64; 3];
        for a in 0..dim {
            k[a] = wavenumber(ix[a], n);
        }
        if !keep(&k) {
            continue;
        }
        let axes: Vec<usize> = (0..dim).filter(|&a| k[a] == nyq).collect();
        if axes.is_empty() {
            emit(k, c);
            continue;
        }
        let share = c * lit::<T>(0.5f64.powi(axes.len() as i32));
        for mask in 0..(1usize << axes.len()) {
            let mut kk = k;
            for (bit, &a) in axes.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    kk[a] = -nyq;
                }
            }
            emit(kk, share);
        }
    }
    normalize_terms(terms)
}
