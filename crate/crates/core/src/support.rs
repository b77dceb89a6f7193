//! Subsets of a grid used as interval supports.

use crate::error::{Error, Result};
use crate::grid::{GridBox, GridPoint, GridPoset};

/// Membership mask over the linear indices of a grid.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Support {
    shape: Vec<usize>,
    members: Vec<bool>,
}

impl Support {
    pub fn empty(grid: &GridPoset) -> Self {
        Support {
            shape: grid.shape(),
            members: vec![false; grid.len()],
        }
    }

    pub fn full(grid: &GridPoset) -> Self {
        Support {
            shape: grid.shape(),
            members: vec![true; grid.len()],
        }
    }

    pub fn from_box(grid: &GridPoset, b: &GridBox) -> Result<Self> {
        grid.check_box(b)?;
        Ok(Self::from_predicate(grid, |p| b.contains(p)))
    }

    pub fn from_points<'a>(grid: &GridPoset, points: impl IntoIterator<Item = &'a GridPoint>) -> Result<Self> {
        let mut s = Self::empty(grid);
        for p in points {
            grid.check(p)?;
            s.members[grid.linear(p)] = true;
        }
        Ok(s)
    }

    pub fn from_predicate(grid: &GridPoset, pred: impl Fn(&GridPoint) -> bool) -> Self {
        Support {
            shape: grid.shape(),
            members: grid.points().map(|p| pred(&p)).collect(),
        }
    }

    pub fn contains_linear(&self, lin: usize) -> bool {
        self.members[lin]
    }

    pub fn contains(&self, grid: &GridPoset, p: &GridPoint) -> bool {
        grid.contains(p) && self.members[grid.linear(p)]
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|m| **m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|m| *m)
    }

    pub fn points(&self, grid: &GridPoset) -> Vec<GridPoint> {
        (0..self.members.len())
            .filter(|&i| self.members[i])
            .map(|i| grid.point(i))
            .collect()
    }

    pub fn mask(&self) -> &[bool] {
        &self.members
    }

    pub fn intersect(&self, other: &Support) -> Support {
        Support {
            shape: self.shape.clone(),
            members: self.members.iter().zip(&other.members).map(|(a, b)| *a && *b).collect(),
        }
    }

    /// `Ok` if the support is order-convex; otherwise the first (lexicographic)
    /// point lying between two support points without belonging to it.
    pub fn check_convex(&self, grid: &GridPoset) -> Result<()> {
        let n = grid.nparams();
        let len = grid.len();
        // up[t]: some support point is <= t; down[t]: some support point is >= t
        let mut up = self.members.clone();
        for lin in 0..len {
            if up[lin] {
                continue;
            }
            let p = grid.point(lin);
            up[lin] = (0..n).any(|i| {
                p.0[i] > 0 && {
                    let mut q = p.clone();
                    q.0[i] -= 1;
                    up[grid.linear(&q)]
                }
            });
        }
        let mut down = self.members.clone();
        for lin in (0..len).rev() {
            if down[lin] {
                continue;
            }
            let p = grid.point(lin);
            down[lin] = (0..n).any(|i| grid.step(&p, i).is_some_and(|q| down[grid.linear(&q)]));
        }
        match (0..len).find(|&l| up[l] && down[l] && !self.members[l]) {
            None => Ok(()),
            Some(l) => Err(Error::NotConvex(grid.point(l).0)),
        }
    }

    /// Connected components under grid adjacency, ordered by their first point.
    pub fn components(&self, grid: &GridPoset) -> Vec<Support> {
        let len = grid.len();
        let mut label = vec![usize::MAX; len];
        let mut out = Vec::new();
        for start in 0..len {
            if !self.members[start] || label[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut comp = Support::empty(grid);
            let mut stack = vec![start];
            label[start] = id;
            while let Some(cur) = stack.pop() {
                comp.members[cur] = true;
                let p = grid.point(cur);
                for i in 0..grid.nparams() {
                    let mut nbrs = Vec::with_capacity(2);
                    if let Some(q) = grid.step(&p, i) {
                        nbrs.push(grid.linear(&q));
                    }
                    if p.0[i] > 0 {
                        let mut q = p.clone();
                        q.0[i] -= 1;
                        nbrs.push(grid.linear(&q));
                    }
                    for nb in nbrs {
                        if self.members[nb] && label[nb] == usize::MAX {
                            label[nb] = id;
                            stack.push(nb);
                        }
                    }
                }
            }
            out.push(comp);
        }
        out
    }
}
