//! Rank invariant and pointwise Betti numbers.

use rayon::prelude::*;

use crate::error::Result;
use crate::grid::{GridBox, GridPoint};
use crate::module::PersistenceModule;
use crate::table::InvariantTable;

/// `rank M(a <= b)`.
pub fn rank_at(m: &PersistenceModule, a: &GridPoint, b: &GridPoint) -> Result<usize> {
    Ok(m.transition(a, b)?.rank())
}

/// Ranks of all comparable pairs inside `within` (or the whole grid).
pub fn rank_table(m: &PersistenceModule, within: Option<&GridBox>) -> Result<InvariantTable<usize>> {
    if let Some(b) = within {
        m.grid().check_box(b)?;
    }
    let pairs = m.grid().comparable_pairs(within);
    let values = pairs
        .par_iter()
        .map(|(a, b)| rank_at(m, a, b))
        .collect::<Result<Vec<_>>>()?;
    Ok(InvariantTable::from_entries(
        m.grid().clone(),
        pairs.into_iter().zip(values),
    ))
}

pub fn betti_pointwise(m: &PersistenceModule, t: &GridPoint) -> Result<usize> {
    m.grid().check(t)?;
    Ok(m.dim(t))
}
