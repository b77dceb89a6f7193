//! Online sparse row echelon form for constraint systems.
//!
//! Rows are pushed one at a time and reduced against existing pivots. The
//! pivot of a row is its largest column, so when variables are numbered in
//! the order they are introduced, a row touching a fresh variable usually
//! becomes a pivot at once. New columns may appear at any time, so a system
//! can grow in place.

use crate::field::{Field, Scalar};

/// Sparse row: strictly increasing column indices with nonzero values.
pub type SparseRow = Vec<(usize, Scalar)>;

#[derive(Clone, Debug)]
pub struct SparseEchelon {
    field: Field,
    /// Pivot rows by pivot column, normalized to 1 at the pivot.
    pivots: Vec<Option<SparseRow>>,
    rank: usize,
}

impl SparseEchelon {
    pub fn new(field: Field) -> Self {
        SparseEchelon {
            field,
            pivots: Vec::new(),
            rank: 0,
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Reduces `row` against the stored pivots; if anything survives it becomes
    /// a new pivot row. Returns whether the rank grew.
    pub fn push(&mut self, row: SparseRow) -> bool {
        let mut row = normalize(row);
        loop {
            let Some((lead, _)) = row.last() else {
                return false;
            };
            let lead = *lead;
            if lead >= self.pivots.len() {
                self.pivots.resize(lead + 1, None);
            }
            match &self.pivots[lead] {
                Some(pivot) => {
                    let factor = row.last().unwrap().1.clone();
                    row = axpy(&row, &factor, pivot);
                }
                None => {
                    let inv = row.last().unwrap().1.inv().expect("nonzero lead");
                    for (_, v) in row.iter_mut() {
                        *v = &*v * &inv;
                    }
                    self.pivots[lead] = Some(row);
                    self.rank += 1;
                    return true;
                }
            }
        }
    }

    /// A basis of the solution space of the pushed rows over `ncols`
    /// variables, one vector per free column in increasing order; the free
    /// column carries 1 and the other free columns 0.
    pub fn kernel_basis(&self, ncols: usize) -> Vec<SparseRow> {
        // back-substitute so that pivot rows have no entries at other pivot columns
        let mut reduced: Vec<Option<SparseRow>> = vec![None; ncols.max(self.pivots.len())];
        for col in 0..self.pivots.len() {
            let Some(row) = &self.pivots[col] else { continue };
            let mut row = row.clone();
            // entries below the pivot, largest first; eliminating one only
            // introduces entries at smaller columns
            let mut bound = col;
            while let Some(k) = row.iter().rposition(|(c, _)| *c < bound && reduced[*c].is_some()) {
                let c = row[k].0;
                let factor = row[k].1.clone();
                row = axpy(&row, &factor, reduced[c].as_ref().unwrap());
                bound = c;
            }
            reduced[col] = Some(row);
        }
        let mut free_rows: Vec<Vec<(usize, Scalar)>> = vec![Vec::new(); ncols];
        for (col, row) in reduced.iter().enumerate() {
            let Some(row) = row else { continue };
            for (c, v) in row {
                if *c != col && *c < ncols {
                    free_rows[*c].push((col, -v));
                }
            }
        }
        let mut basis = Vec::new();
        for f in 0..ncols {
            if matches!(reduced.get(f), Some(Some(_))) {
                continue;
            }
            let mut v = std::mem::take(&mut free_rows[f]);
            v.push((f, self.field.one()));
            v.sort_by_key(|(c, _)| *c);
            basis.push(v);
        }
        basis
    }
}

fn normalize(mut row: SparseRow) -> SparseRow {
    row.sort_by_key(|(c, _)| *c);
    let mut out: SparseRow = Vec::with_capacity(row.len());
    for (c, v) in row {
        match out.last_mut() {
            Some((lc, lv)) if *lc == c => *lv = &*lv + &v,
            _ => out.push((c, v)),
        }
    }
    out.retain(|(_, v)| !v.is_zero());
    out
}

/// `row - factor * pivot`, merged by column.
fn axpy(row: &SparseRow, factor: &Scalar, pivot: &SparseRow) -> SparseRow {
    let mut out = Vec::with_capacity(row.len() + pivot.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < pivot.len() {
        let ci = row.get(i).map_or(usize::MAX, |e| e.0);
        let cj = pivot.get(j).map_or(usize::MAX, |e| e.0);
        if ci < cj {
            out.push(row[i].clone());
            i += 1;
        } else if cj < ci {
            out.push((cj, -&(factor * &pivot[j].1)));
            j += 1;
        } else {
            let v = &row[i].1 - &(factor * &pivot[j].1);
            if !v.is_zero() {
                out.push((ci, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    #[test]
    fn rank_matches_dense() {
        let f = Field::Prime(3);
        let dense = Matrix::from_rows(f, &[[1, 2, 0, 1], [2, 1, 0, 2], [0, 0, 1, 1], [1, 2, 1, 2]]);
        let mut e = SparseEchelon::new(f);
        for r in 0..dense.rows() {
            let row: SparseRow = dense
                .row(r)
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(c, v)| (c, v.clone()))
                .collect();
            e.push(row);
        }
        assert_eq!(e.rank(), dense.rank());
    }

    #[test]
    fn kernel_matches_dense() {
        let f = Field::Prime(5);
        let dense = Matrix::from_rows(f, &[[1, 2, 0, 1, 3], [0, 1, 4, 2, 0], [1, 3, 4, 3, 3], [2, 0, 1, 0, 4]]);
        let mut e = SparseEchelon::new(f);
        for r in 0..dense.rows() {
            e.push(dense.row(r).iter().cloned().enumerate().collect());
        }
        let sparse = e.kernel_basis(5);
        assert_eq!(sparse.len(), dense.kernel_basis().len());
        let mut cols = Vec::new();
        for s in &sparse {
            let mut full = vec![f.zero(); 5];
            for (c, v) in s {
                full[*c] = v.clone();
            }
            let x = Matrix::column_vector(f, full.clone());
            assert!(dense.multiply(&x).unwrap().is_zero());
            cols.push(full);
        }
        let stacked = Matrix::from_scalars(f, cols.len(), 5, cols.concat()).unwrap();
        assert_eq!(stacked.rank(), sparse.len());
    }

    #[test]
    fn duplicate_columns_are_merged() {
        let f = Field::GF2;
        let mut e = SparseEchelon::new(f);
        assert!(!e.push(vec![(3, f.one()), (3, f.one())]));
        assert!(e.push(vec![(5, f.one()), (1, f.one())]));
        assert!(!e.push(vec![(1, f.one()), (5, f.one())]));
        assert_eq!(e.rank(), 1);
    }
}
