//! Finite grids standing in for `(R^n, <=)`.
//!
//! Points are integer index tuples ordered componentwise; real coordinates are
//! carried only as axis labels. Linear indices are row-major with axis 0 most
//! significant, so iterating linear indices is lexicographic order.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GridPoint(pub Vec<usize>);

impl GridPoint {
    pub fn new(idx: impl Into<Vec<usize>>) -> Self {
        GridPoint(idx.into())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &GridPoint) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn offset(&self, delta: &[usize]) -> GridPoint {
        GridPoint(self.0.iter().zip(delta).map(|(a, d)| a + d).collect())
    }

    /// `self - other` componentwise; `None` if any component would go negative.
    pub fn checked_sub(&self, other: &[usize]) -> Option<GridPoint> {
        self.0
            .iter()
            .zip(other)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(GridPoint)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<usize>> for GridPoint {
    fn from(v: Vec<usize>) -> Self {
        GridPoint(v)
    }
}

impl<const N: usize> From<[usize; N]> for GridPoint {
    fn from(v: [usize; N]) -> Self {
        GridPoint(v.to_vec())
    }
}

/// Closed box `[lower, upper]` of grid points.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridBox {
    pub lower: GridPoint,
    pub upper: GridPoint,
}

impl GridBox {
    pub fn new(lower: impl Into<GridPoint>, upper: impl Into<GridPoint>) -> Result<Self> {
        let (lower, upper) = (lower.into(), upper.into());
        if !lower.le(&upper) {
            return Err(Error::NotComparable(lower.0, upper.0));
        }
        Ok(GridBox { lower, upper })
    }

    pub fn contains(&self, p: &GridPoint) -> bool {
        self.lower.le(p) && p.le(&self.upper)
    }

    pub fn contains_box(&self, other: &GridBox) -> bool {
        self.contains(&other.lower) && self.contains(&other.upper)
    }

    pub fn shape(&self) -> Vec<usize> {
        self.lower.0.iter().zip(&self.upper.0).map(|(a, b)| b - a + 1).collect()
    }

    /// Points of the box in lexicographic order.
    pub fn points(&self) -> BoxPoints {
        BoxPoints {
            lower: self.lower.0.clone(),
            upper: self.upper.0.clone(),
            next: Some(self.lower.0.clone()),
        }
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for GridBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}..{}]", self.lower, self.upper)
    }
}

/// Lexicographic iterator over a box.
pub struct BoxPoints {
    lower: Vec<usize>,
    upper: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for BoxPoints {
    type Item = GridPoint;

    fn next(&mut self) -> Option<GridPoint> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        let mut advanced = false;
        for i in (0..succ.len()).rev() {
            if succ[i] < self.upper[i] {
                succ[i] += 1;
                advanced = true;
                break;
            }
            succ[i] = self.lower[i];
        }
        if advanced {
            self.next = Some(succ);
        }
        Some(GridPoint(cur))
    }
}

/// Product of per-axis strictly increasing coordinate lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoset {
    axes: Vec<Vec<f64>>,
}

impl GridPoset {
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidGrid("a grid needs at least one axis".into()));
        }
        for (i, axis) in axes.iter().enumerate() {
            if axis.is_empty() {
                return Err(Error::InvalidGrid(format!("axis {i} is empty")));
            }
            if axis.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidGrid(format!("axis {i} has a non-finite value")));
            }
            if axis.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidGrid(format!("axis {i} is not strictly increasing")));
            }
        }
        Ok(GridPoset { axes })
    }

    /// Grid with coordinates `0, 1, ..., len-1` on every axis of `shape`.
    pub fn range(shape: &[usize]) -> Result<Self> {
        Self::new(shape.iter().map(|&n| (0..n).map(|v| v as f64).collect()).collect())
    }

    /// Grid with coordinates `start, start+1, ...` on every axis of `shape`.
    pub fn integer(shape: &[usize], start: i64) -> Result<Self> {
        Self::new(
            shape
                .iter()
                .map(|&n| (0..n).map(|v| (start + v as i64) as f64).collect())
                .collect(),
        )
    }

    pub fn nparams(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &[f64] {
        &self.axes[i]
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, p: &GridPoint) -> bool {
        p.0.len() == self.axes.len() && p.0.iter().zip(&self.axes).all(|(i, a)| *i < a.len())
    }

    pub fn check(&self, p: &GridPoint) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::PointOutOfRange(p.0.clone()))
        }
    }

    pub fn linear(&self, p: &GridPoint) -> usize {
        p.0.iter().zip(&self.axes).fold(0, |acc, (i, a)| acc * a.len() + i)
    }

    pub fn point(&self, mut lin: usize) -> GridPoint {
        let mut idx = vec![0; self.axes.len()];
        for (k, a) in self.axes.iter().enumerate().rev() {
            idx[k] = lin % a.len();
            lin /= a.len();
        }
        GridPoint(idx)
    }

    /// Real coordinates of a grid point.
    pub fn coords(&self, p: &GridPoint) -> Vec<f64> {
        p.0.iter().zip(&self.axes).map(|(i, a)| a[*i]).collect()
    }

    pub fn lowest(&self) -> GridPoint {
        GridPoint(vec![0; self.axes.len()])
    }

    pub fn highest(&self) -> GridPoint {
        GridPoint(self.axes.iter().map(|a| a.len() - 1).collect())
    }

    pub fn full_box(&self) -> GridBox {
        GridBox {
            lower: self.lowest(),
            upper: self.highest(),
        }
    }

    pub fn check_box(&self, b: &GridBox) -> Result<()> {
        self.check(&b.lower)?;
        self.check(&b.upper)?;
        if !b.lower.le(&b.upper) {
            return Err(Error::NotComparable(b.lower.0.clone(), b.upper.0.clone()));
        }
        Ok(())
    }

    pub fn points(&self) -> BoxPoints {
        self.full_box().points()
    }

    /// `p + e_axis` if it lies in the grid.
    pub fn step(&self, p: &GridPoint, axis: usize) -> Option<GridPoint> {
        let mut q = p.clone();
        q.0[axis] += 1;
        self.contains(&q).then_some(q)
    }

    /// Whether the axis coordinates are evenly spaced (relative tolerance 1e-9).
    pub fn is_uniform(&self, axis: usize) -> bool {
        let a = &self.axes[axis];
        if a.len() < 3 {
            return true;
        }
        let h = a[1] - a[0];
        a.windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1.0))
    }

    /// Index of `value` on `axis`, if it is a grid coordinate (within 1e-9).
    pub fn index_of(&self, axis: usize, value: f64) -> Option<usize> {
        self.axes[axis]
            .iter()
            .position(|v| (v - value).abs() <= 1e-9 * v.abs().max(1.0))
    }

    /// Componentwise `min(p + delta, top)`.
    pub fn clamp_offset(&self, p: &GridPoint, delta: &[usize]) -> GridPoint {
        GridPoint(
            p.0.iter()
                .zip(delta)
                .zip(&self.axes)
                .map(|((i, d), a)| (i + d).min(a.len() - 1))
                .collect(),
        )
    }

    /// The sub-grid spanned by a box.
    pub fn restrict(&self, b: &GridBox) -> Result<GridPoset> {
        self.check_box(b)?;
        GridPoset::new(
            self.axes
                .iter()
                .enumerate()
                .map(|(i, a)| a[b.lower.0[i]..=b.upper.0[i]].to_vec())
                .collect(),
        )
    }

    /// All comparable pairs `(a, b)`, `a <= b`, inside `within` (or the whole
    /// grid), in lexicographic order of `(a, b)`.
    pub fn comparable_pairs(&self, within: Option<&GridBox>) -> Vec<(GridPoint, GridPoint)> {
        let b = within.cloned().unwrap_or_else(|| self.full_box());
        let mut out = Vec::new();
        for a in b.points() {
            let upper = GridBox {
                lower: a.clone(),
                upper: b.upper.clone(),
            };
            for c in upper.points() {
                out.push((a.clone(), c));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_axes() {
        assert!(GridPoset::new(vec![]).is_err());
        assert!(GridPoset::new(vec![vec![]]).is_err());
        assert!(GridPoset::new(vec![vec![1.0, 1.0]]).is_err());
        assert!(GridPoset::new(vec![vec![2.0, 1.0]]).is_err());
    }

    #[test]
    fn linear_order_is_lexicographic() {
        let g = GridPoset::range(&[2, 3]).unwrap();
        let pts: Vec<GridPoint> = g.points().collect();
        assert_eq!(pts.len(), 6);
        let mut sorted = pts.clone();
        sorted.sort();
        assert_eq!(pts, sorted);
        for (k, p) in pts.iter().enumerate() {
            assert_eq!(g.linear(p), k);
            assert_eq!(&g.point(k), p);
        }
    }

    #[test]
    fn comparable_pairs_count() {
        // 1-parameter grid of 4: 4*5/2 pairs; 2x2 grid: 9
        assert_eq!(GridPoset::range(&[4]).unwrap().comparable_pairs(None).len(), 10);
        assert_eq!(GridPoset::range(&[2, 2]).unwrap().comparable_pairs(None).len(), 9);
    }

    #[test]
    fn uniformity_and_clamp() {
        let g = GridPoset::new(vec![vec![0.0, 0.5, 1.0], vec![0.0, 1.0, 3.0]]).unwrap();
        assert!(g.is_uniform(0));
        assert!(!g.is_uniform(1));
        assert_eq!(
            g.clamp_offset(&GridPoint::from([1, 1]), &[5, 1]),
            GridPoint::from([2, 2])
        );
        assert_eq!(g.index_of(0, 0.5), Some(1));
    }
}
