use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::matrix::{upper_pairs, CoefficientField};
use super::scalar_field::{PeriodicField, Phase, WaveTerm};
use crate::error::{HomError, Result};
use crate::scalar::{lit, to_f64, Real};

/// Resolution used when a JSON document does not pin one.
pub fn default_resolution(dim: usize) -> usize {
    if dim == 3 {
        32
    } else {
        64
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TermSpec {
    pub k: Vec<i64>,
    pub phase: Phase,
    pub amp: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FieldSpec {
    pub dimension: usize,
    pub terms: Vec<TermSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
}

/// Matrix field document: `"entries"` maps upper-triangle pairs such as
/// `"11"`, `"12"` (1-based) to term lists. Missing pairs are zero.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixFieldSpec {
    pub dimension: usize,
    pub entries: BTreeMap<String, Vec<TermSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
}

fn terms_to_spec<T: Real>(dim: usize, terms: &[WaveTerm<T>]) -> Vec<TermSpec> {
    terms
        .iter()
        .map(|t| TermSpec { k: t.k[..dim].to_vec(), phase: t.phase, amp: to_f64(t.amp) })
        .collect()
}

fn spec_to_terms<T: Real>(dim: usize, terms: &[TermSpec]) -> Result<Vec<WaveTerm<T>>> {
    terms
        .iter()
        .map(|t| {
            if t.k.len() != dim {
                return Err(HomError::Parse(format!("wavevector {:?} has length {} in dimension {dim}", t.k, t.k.len())));
            }
            WaveTerm::new(&t.k, t.phase, lit(t.amp))
        })
        .collect()
}

/// Smallest power of two that represents all terms, at least `floor`.
fn fitting_resolution(terms: &[TermSpec], floor: usize) -> usize {
    let kmax = terms.iter().flat_map(|t| t.k.iter()).map(|k| k.unsigned_abs() as usize).max().unwrap_or(0);
    let mut n = floor.max(2);
    while n < 2 * (kmax + 1) {
        n *= 2;
    }
    n
}

impl FieldSpec {
    pub fn from_field<T: Real>(f: &PeriodicField<T>) -> Self {
        Self { dimension: f.dim(), terms: terms_to_spec(f.dim(), f.terms()), resolution: Some(f.resolution()) }
    }

    pub fn to_field<T: Real>(&self) -> Result<PeriodicField<T>> {
        let n = self
            .resolution
            .unwrap_or_else(|| fitting_resolution(&self.terms, default_resolution(self.dimension)));
        PeriodicField::from_terms(self.dimension, spec_to_terms(self.dimension, &self.terms)?, n)
    }
}

impl MatrixFieldSpec {
    pub fn from_field<T: Real>(a: &CoefficientField<T>) -> Self {
        let dim = a.dim();
        let entries = upper_pairs(dim)
            .into_iter()
            .zip(a.entries())
            .map(|((k, l), e)| (format!("{}{}", k + 1, l + 1), terms_to_spec(dim, e.terms())))
            .collect();
        Self { dimension: dim, entries, resolution: Some(a.resolution()) }
    }

    pub fn to_field<T: Real>(&self) -> Result<CoefficientField<T>> {
        let dim = self.dimension;
        if !(1..=3).contains(&dim) {
            return Err(HomError::Parse(format!("dimension {dim} not in 1..=3")));
        }
        let valid: Vec<String> = upper_pairs(dim).iter().map(|(k, l)| format!("{}{}", k + 1, l + 1)).collect();
        for key in self.entries.keys() {
            if !valid.contains(key) {
                return Err(HomError::Parse(format!("entry key `{key}` is not an upper-triangle pair in dimension {dim}")));
            }
        }
        let all: Vec<TermSpec> = self.entries.values().flatten().cloned().collect();
        let n = self.resolution.unwrap_or_else(|| fitting_resolution(&all, default_resolution(dim)));
        let entries = valid
            .iter()
            .map(|key| {
                let terms = self.entries.get(key).map(|t| spec_to_terms(dim, t)).transpose()?.unwrap_or_default();
                PeriodicField::from_terms(dim, terms, n)
            })
            .collect::<Result<Vec<_>>>()?;
        CoefficientField::new(dim, entries)
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| HomError::Parse(e.to_string()))
    }
}
