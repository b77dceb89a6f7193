//! Persistent entropy of a normalized per-box spectrum.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::Field;
use crate::grid::{GridBox, GridPoint};
use crate::mbi::decompose;
use crate::module::PersistenceModule;
use crate::table::InvariantTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumSource {
    /// Singular values of the transition (rational modules).
    SvdOfTransition,
    /// One unit weight per indecomposable summand alive across the box.
    SummandWeights,
}

/// Positive weights in descending order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub source: SpectrumSource,
}

impl Spectrum {
    pub fn new(mut values: Vec<f64>, source: SpectrumSource) -> Self {
        values.retain(|v| *v > 0.0);
        values.sort_by(|a, b| b.total_cmp(a));
        Spectrum { values, source }
    }

    /// `-sum p_i ln p_i` with `p_i = v_i / sum v`; 0 for at most one value.
    pub fn entropy(&self) -> f64 {
        shannon(&self.values)
    }
}

pub fn shannon(values: &[f64]) -> f64 {
    if values.len() <= 1 {
        return 0.0;
    }
    let total: f64 = values.iter().sum();
    values
        .iter()
        .map(|v| v / total)
        .filter(|p| *p > 0.0)
        .map(|p| -p * p.ln())
        .sum()
}

/// Singular values below this are treated as zero.
const SVD_TOLERANCE: f64 = 1e-12;

pub fn spectrum(m: &PersistenceModule, a: &GridPoint, b: &GridPoint) -> Result<Spectrum> {
    let t = m.transition(a, b)?;
    match m.field() {
        Field::Rational => {
            let sv = t.svd_real()?;
            let scale = sv.first().copied().unwrap_or(0.0).max(1.0);
            let kept = sv.into_iter().filter(|s| *s > SVD_TOLERANCE * scale).collect();
            Ok(Spectrum::new(kept, SpectrumSource::SvdOfTransition))
        }
        Field::Prime(_) => {
            let region = GridBox::new(a.clone(), b.clone())?;
            let local = Arc::new(m.restrict(&region)?);
            let (lo, hi) = (local.grid().lowest(), local.grid().highest());
            let d = decompose(&local)?;
            let mut alive = 0;
            for s in &d.summands {
                if !s.transition(&lo, &hi)?.is_zero() {
                    alive += 1;
                }
            }
            Ok(Spectrum::new(vec![1.0; alive], SpectrumSource::SummandWeights))
        }
    }
}

/// Entropy in nats.
pub fn persistent_entropy(m: &PersistenceModule, a: &GridPoint, b: &GridPoint) -> Result<f64> {
    Ok(spectrum(m, a, b)?.entropy())
}

pub fn entropy_table(m: &PersistenceModule, within: Option<&GridBox>) -> Result<InvariantTable<f64>> {
    if let Some(b) = within {
        m.grid().check_box(b)?;
    }
    let pairs = m.grid().comparable_pairs(within);
    let values = pairs
        .par_iter()
        .map(|(a, b)| persistent_entropy(m, a, b))
        .collect::<Result<Vec<_>>>()?;
    Ok(InvariantTable::from_entries(
        m.grid().clone(),
        pairs.into_iter().zip(values),
    ))
}
