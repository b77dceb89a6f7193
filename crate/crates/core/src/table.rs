//! Tables indexed by comparable grid pairs.

use std::collections::BTreeMap;

use crate::grid::{GridPoint, GridPoset};

/// Values keyed by `(a, b)` with `a <= b`, iterated in lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantTable<T> {
    grid: GridPoset,
    entries: BTreeMap<(GridPoint, GridPoint), T>,
}

impl<T> InvariantTable<T> {
    pub fn new(grid: GridPoset) -> Self {
        InvariantTable {
            grid,
            entries: BTreeMap::new(),
        }
    }

    pub fn from_entries(grid: GridPoset, entries: impl IntoIterator<Item = ((GridPoint, GridPoint), T)>) -> Self {
        InvariantTable {
            grid,
            entries: entries.into_iter().collect(),
        }
    }

    pub fn grid(&self) -> &GridPoset {
        &self.grid
    }

    pub fn insert(&mut self, a: GridPoint, b: GridPoint, value: T) {
        self.entries.insert((a, b), value);
    }

    pub fn get(&self, a: &GridPoint, b: &GridPoint) -> Option<&T> {
        self.entries.get(&(a.clone(), b.clone()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GridPoint, &GridPoint, &T)> {
        self.entries.iter().map(|((a, b), v)| (a, b, v))
    }

    pub fn keys(&self) -> impl Iterator<Item = &(GridPoint, GridPoint)> {
        self.entries.keys()
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> InvariantTable<U> {
        InvariantTable {
            grid: self.grid.clone(),
            entries: self.entries.iter().map(|(k, v)| (k.clone(), f(v))).collect(),
        }
    }
}

impl<T: Copy + Into<f64>> InvariantTable<T> {
    /// Largest absolute difference over keys present in both tables; 0 if none.
    pub fn max_abs_diff(&self, other: &InvariantTable<T>) -> f64 {
        self.entries
            .iter()
            .filter_map(|(k, v)| other.entries.get(k).map(|w| ((*v).into() - (*w).into()).abs()))
            .fold(0.0, f64::max)
    }
}

impl InvariantTable<usize> {
    /// Largest absolute difference over keys present in both tables; 0 if none.
    pub fn max_count_diff(&self, other: &InvariantTable<usize>) -> usize {
        self.entries
            .iter()
            .filter_map(|(k, v)| other.entries.get(k).map(|w| v.abs_diff(*w)))
            .max()
            .unwrap_or(0)
    }
}
