//! Seeded generators of admissible random fields. Bandwidth stays at most 3
//! and amplitudes are capped so every field has `lambda_min >= 0.2`.

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::field::{identity_mat, sym_eigen_bounds, upper_pairs, zero_mat, CoefficientField, Mat3, PeriodicField, Phase, WaveTerm};
use crate::scalar::{lit, Real};

pub const MAX_BANDWIDTH: i64 = 3;
pub const MIN_ELLIPTICITY: f64 = 0.2;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mean-zero trigonometric polynomial with `terms` random modes and
/// `sum |amp| = sup_bound`, so `|f|_inf <= sup_bound`.
pub fn random_trig<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    n: usize,
    terms: usize,
    sup_bound: f64,
) -> Result<PeriodicField<T>> {
    let mut raw = Vec::with_capacity(terms);
    for _ in 0..terms {
        let mut k = [0i64; 3];
        while k[..dim].iter().all(|&c| c == 0) {
            for c in k.iter_mut().take(dim) {
                *c = rng.random_range(-MAX_BANDWIDTH..=MAX_BANDWIDTH);
            }
        }
        let phase = if rng.random_bool(0.5) { Phase::Cos } else { Phase::Sin };
        raw.push((k, phase, rng.random_range(-1.0..1.0f64)));
    }
    let total: f64 = raw.iter().map(|t| t.2.abs()).sum::<f64>().max(1e-300);
    let out = raw
        .into_iter()
        .map(|(k, phase, amp)| WaveTerm::new(&k[..dim], phase, lit(amp * sup_bound / total)))
        .collect::<Result<Vec<_>>>()?;
    PeriodicField::from_terms(dim, out, n)
}

/// Positive scalar `1 + f` with `|f|_inf <= spread < 1`.
pub fn random_positive<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize, n: usize, spread: f64) -> Result<PeriodicField<T>> {
    let terms = rng.random_range(1..=4);
    Ok(random_trig::<T, R>(rng, dim, n, terms, spread)?.add_constant(T::one()))
}

/// Random symmetric matrix with entries in `[-1, 1]`.
pub fn random_symmetric<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Mat3<T> {
    let mut m = zero_mat();
    for (k, l) in upper_pairs(dim) {
        let v = lit::<T>(rng.random_range(-1.0..1.0));
        m[k][l] = v;
        m[l][k] = v;
    }
    m
}

/// Random symmetric positive definite matrix with spectrum in `[lo, hi]`
/// (Gershgorin: diagonal in `[lo + off, hi - off]`, off-diagonal row sums
/// below `off`).
pub fn random_spd<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize, lo: f64, hi: f64) -> Mat3<T> {
    let off = 0.25 * (hi - lo);
    let mut m = zero_mat();
    for k in 0..dim {
        m[k][k] = lit::<T>(rng.random_range(lo + off..hi - off));
    }
    let per = off / (dim.max(2) - 1) as f64;
    for (k, l) in upper_pairs(dim) {
        if k != l {
            let v = lit::<T>(rng.random_range(-per..per));
            m[k][l] = v;
            m[l][k] = v;
        }
    }
    m
}

fn frobenius<T: Real>(m: &Mat3<T>, dim: usize) -> T {
    let mut s = T::zero();
    for row in m.iter().take(dim) {
        for &x in row.iter().take(dim) {
            s = s + x * x;
        }
    }
    s.sqrt()
}

/// `(C, M, a)` with `C + a(y) M` uniformly elliptic with margin.
pub fn random_c_m_a<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    n: usize,
    diagonal: bool,
) -> Result<(Mat3<T>, Mat3<T>, PeriodicField<T>)> {
    let c = if diagonal {
        let mut c = zero_mat();
        for (k, row) in c.iter_mut().enumerate().take(dim) {
            row[k] = lit(rng.random_range(1.0..2.0));
        }
        c
    } else {
        random_spd(rng, dim, 1.0, 2.5)
    };
    let mut m = random_symmetric::<T, R>(rng, dim);
    if diagonal {
        for (k, l) in upper_pairs(dim) {
            if k != l {
                m[k][l] = T::zero();
                m[l][k] = T::zero();
            }
        }
    }
    let (cmin, _) = sym_eigen_bounds(&c, dim);
    let mnorm = frobenius(&m, dim).max(lit(1e-3));
    // |a M| <= (cmin - 0.2 - margin) keeps lambda_min >= 0.2
    let budget: T = (cmin - lit::<T>(MIN_ELLIPTICITY + 0.1)) / mnorm;
    let bound = budget.min(T::one()).to_f64().unwrap() * rng.random_range(0.5..1.0f64);
    let terms = rng.random_range(1..=4);
    let a = random_trig::<T, R>(rng, dim, n, terms, bound)?;
    Ok((c, m, a))
}

/// Generic elliptic field `C + sum of small random trig entries`.
pub fn random_coefficient_field<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize, n: usize) -> Result<CoefficientField<T>> {
    let c = random_spd::<T, R>(rng, dim, 1.0, 2.0);
    let (cmin, _) = sym_eigen_bounds(&c, dim);
    let pairs = upper_pairs(dim);
    // Gershgorin on the perturbation: each row touches `dim` entries
    let per_entry = (cmin.to_f64().unwrap() - MIN_ELLIPTICITY - 0.1) / dim as f64;
    let mut entries = Vec::with_capacity(pairs.len());
    for &(k, l) in &pairs {
        let terms = rng.random_range(1..=3);
        let bound = per_entry * rng.random_range(0.3..1.0);
        entries.push(random_trig::<T, R>(rng, dim, n, terms, bound)?.add_constant(c[k][l]));
    }
    CoefficientField::new(dim, entries)
}

/// A constant symmetric matrix `C` with `C:A > 0` for the given field,
/// drawn as `I + small symmetric`.
pub fn random_admissible_c<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Mat3<T> {
    let mut c = identity_mat::<T>(dim);
    let e = random_symmetric::<T, R>(rng, dim);
    let scale = lit::<T>(0.4 / dim as f64);
    for k in 0..dim {
        for l in 0..dim {
            c[k][l] = c[k][l] + scale * e[k][l];
        }
    }
    c
}
