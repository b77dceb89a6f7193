//! Persistence modules on a finite grid.
//!
//! A module stores a dimension per grid point and a matrix per covering edge
//! `t -> t + e_i`, of shape `dim(t + e_i) x dim(t)`. Every other structure map
//! is a composite; functoriality reduces to commutativity of the 2-faces.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{GridBox, GridPoint, GridPoset};
use crate::matrix::Matrix;
use crate::support::Support;

#[derive(Clone, Debug, PartialEq)]
pub struct PersistenceModule {
    grid: GridPoset,
    field: Field,
    dims: Vec<usize>,
    /// Indexed by `linear * nparams + axis`; `None` where the edge leaves the grid.
    maps: Vec<Option<Matrix>>,
}

/// A failed functoriality check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EdgeShape {
        point: GridPoint,
        axis: usize,
        expected: (usize, usize),
        found: (usize, usize),
    },
    EdgeField {
        point: GridPoint,
        axis: usize,
    },
    /// `map(t+e_j, i) map(t, j) != map(t+e_i, j) map(t, i)`.
    Face {
        point: GridPoint,
        axes: (usize, usize),
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EdgeShape {
                point,
                axis,
                expected,
                found,
            } => write!(
                f,
                "edge at {point} along axis {axis}: expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Violation::EdgeField { point, axis } => {
                write!(f, "edge at {point} along axis {axis}: wrong coefficient field")
            }
            Violation::Face { point, axes } => write!(
                f,
                "face at {point} spanned by axes {} and {} does not commute",
                axes.0, axes.1
            ),
        }
    }
}

impl PersistenceModule {
    /// Module with the given dimensions and zero structure maps.
    pub fn with_dims(grid: GridPoset, field: Field, dims: Vec<usize>) -> Result<Self> {
        if dims.len() != grid.len() {
            return Err(Error::Invalid(format!(
                "expected {} dimensions, got {}",
                grid.len(),
                dims.len()
            )));
        }
        let n = grid.nparams();
        let mut maps = Vec::with_capacity(grid.len() * n);
        for lin in 0..grid.len() {
            let p = grid.point(lin);
            for axis in 0..n {
                maps.push(
                    grid.step(&p, axis)
                        .map(|q| Matrix::zeros(field, dims[grid.linear(&q)], dims[lin])),
                );
            }
        }
        Ok(PersistenceModule {
            grid,
            field,
            dims,
            maps,
        })
    }

    pub fn zero(grid: GridPoset, field: Field) -> Self {
        let len = grid.len();
        Self::with_dims(grid, field, vec![0; len]).expect("consistent")
    }

    /// The constant module `F^dim` with identity maps; `dim = 1` is the
    /// tensor unit.
    pub fn constant(grid: GridPoset, field: Field, dim: usize) -> Self {
        let len = grid.len();
        let mut m = Self::with_dims(grid, field, vec![dim; len]).expect("consistent");
        for slot in m.maps.iter_mut().flatten() {
            *slot = Matrix::identity(field, dim);
        }
        m
    }

    /// Interval module on an order-convex support: `F` on the support, `0`
    /// elsewhere, identities inside.
    pub fn interval(grid: GridPoset, field: Field, support: &Support) -> Result<Self> {
        support.check_convex(&grid)?;
        let dims = (0..grid.len())
            .map(|l| usize::from(support.contains_linear(l)))
            .collect();
        let mut m = Self::with_dims(grid, field, dims)?;
        for lin in 0..m.grid.len() {
            if !support.contains_linear(lin) {
                continue;
            }
            let p = m.grid.point(lin);
            for axis in 0..m.grid.nparams() {
                if let Some(q) = m.grid.step(&p, axis) {
                    if support.contains_linear(m.grid.linear(&q)) {
                        m.maps[lin * m.grid.nparams() + axis] = Some(Matrix::identity(field, 1));
                    }
                }
            }
        }
        Ok(m)
    }

    pub fn interval_on_box(grid: GridPoset, field: Field, b: &GridBox) -> Result<Self> {
        let s = Support::from_box(&grid, b)?;
        Self::interval(grid, field, &s)
    }

    pub fn grid(&self) -> &GridPoset {
        &self.grid
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn nparams(&self) -> usize {
        self.grid.nparams()
    }

    pub fn dim(&self, p: &GridPoint) -> usize {
        self.dims[self.grid.linear(p)]
    }

    pub fn dim_linear(&self, lin: usize) -> usize {
        self.dims[lin]
    }

    /// Pointwise dimensions in lexicographic point order.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.dims.iter().all(|d| *d == 0)
    }

    /// Structure map on the covering edge `p -> p + e_axis`.
    pub fn map(&self, p: &GridPoint, axis: usize) -> Option<&Matrix> {
        self.map_linear(self.grid.linear(p), axis)
    }

    pub fn map_linear(&self, lin: usize, axis: usize) -> Option<&Matrix> {
        self.maps[lin * self.grid.nparams() + axis].as_ref()
    }

    /// Replaces the map on an edge; the shape must match the dimensions.
    pub fn set_map(&mut self, p: &GridPoint, axis: usize, m: Matrix) -> Result<()> {
        self.grid.check(p)?;
        if axis >= self.grid.nparams() {
            return Err(Error::Invalid(format!("axis {axis} out of range")));
        }
        let q = self
            .grid
            .step(p, axis)
            .ok_or_else(|| Error::Invalid(format!("edge at {p} along axis {axis} leaves the grid")))?;
        if m.field() != self.field {
            return Err(Error::FieldMismatch(self.field, m.field()));
        }
        let expected = (self.dim(&q), self.dim(p));
        if m.shape() != expected {
            return Err(Error::Shape {
                location: format!("edge at {p} along axis {axis}"),
                expected,
                found: m.shape(),
            });
        }
        let lin = self.grid.linear(p);
        self.maps[lin * self.grid.nparams() + axis] = Some(m);
        Ok(())
    }

    /// Replaces an edge map without shape checks; `validate` reports problems.
    pub fn set_map_unchecked(&mut self, p: &GridPoint, axis: usize, m: Matrix) {
        let lin = self.grid.linear(p);
        self.maps[lin * self.grid.nparams() + axis] = Some(m);
    }

    /// Pointwise dimension vector as a map-free summary.
    pub fn dimension_vector(&self) -> Vec<usize> {
        self.dims.clone()
    }

    /// Shape and 2-face commutativity checks; empty iff the module is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let n = self.grid.nparams();
        let mut out = Vec::new();
        let mut shape_ok = vec![true; self.maps.len()];
        for lin in 0..self.grid.len() {
            let p = self.grid.point(lin);
            for axis in 0..n {
                let Some(q) = self.grid.step(&p, axis) else { continue };
                let m = self.maps[lin * n + axis].as_ref().expect("edge inside grid");
                let expected = (self.dim(&q), self.dims[lin]);
                if m.field() != self.field {
                    out.push(Violation::EdgeField { point: p.clone(), axis });
                    shape_ok[lin * n + axis] = false;
                } else if m.shape() != expected {
                    out.push(Violation::EdgeShape {
                        point: p.clone(),
                        axis,
                        expected,
                        found: m.shape(),
                    });
                    shape_ok[lin * n + axis] = false;
                }
            }
        }
        for lin in 0..self.grid.len() {
            let p = self.grid.point(lin);
            for i in 0..n {
                for j in (i + 1)..n {
                    let (Some(pi), Some(pj)) = (self.grid.step(&p, i), self.grid.step(&p, j)) else {
                        continue;
                    };
                    let (li, lj) = (self.grid.linear(&pi), self.grid.linear(&pj));
                    let edges = [(lin, i), (lin, j), (li, j), (lj, i)];
                    if edges.iter().any(|&(l, a)| !shape_ok[l * n + a]) {
                        continue;
                    }
                    let via_j = self
                        .map_linear(lj, i)
                        .unwrap()
                        .multiply(self.map_linear(lin, j).unwrap());
                    let via_i = self
                        .map_linear(li, j)
                        .unwrap()
                        .multiply(self.map_linear(lin, i).unwrap());
                    if via_j.ok() != via_i.ok() {
                        out.push(Violation::Face {
                            point: p.clone(),
                            axes: (i, j),
                        });
                    }
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// `M(a <= b)` along the staircase path that exhausts axis 0 first.
    pub fn transition(&self, a: &GridPoint, b: &GridPoint) -> Result<Matrix> {
        self.grid.check(a)?;
        self.grid.check(b)?;
        if !a.le(b) {
            return Err(Error::NotComparable(a.0.clone(), b.0.clone()));
        }
        let mut cur = a.clone();
        let mut acc = Matrix::identity(self.field, self.dim(a));
        for axis in 0..self.nparams() {
            while cur.0[axis] < b.0[axis] {
                let m = self.map(&cur, axis).expect("edge inside grid");
                acc = m.multiply(&acc)?;
                cur.0[axis] += 1;
            }
        }
        Ok(acc)
    }

    /// The module on the sub-grid spanned by `b`.
    pub fn restrict(&self, b: &GridBox) -> Result<PersistenceModule> {
        let grid = self.grid.restrict(b)?;
        let dims = b.points().map(|p| self.dim(&p)).collect();
        let mut out = Self::with_dims(grid, self.field, dims)?;
        let n = self.nparams();
        for (lin, p) in b.points().enumerate() {
            for axis in 0..n {
                if p.0[axis] < b.upper.0[axis] {
                    out.maps[lin * n + axis] = self.map(&p, axis).cloned();
                }
            }
        }
        Ok(out)
    }

    fn check_compatible(&self, other: &PersistenceModule) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field, other.field));
        }
        Ok(())
    }

    pub fn direct_sum(&self, other: &PersistenceModule) -> Result<PersistenceModule> {
        self.combine(other, |a, b| a + b, |x, y| x.direct_sum(y))
    }

    /// Direct sum of a list; the zero module for an empty list.
    pub fn direct_sum_all(grid: &GridPoset, field: Field, parts: &[PersistenceModule]) -> Result<PersistenceModule> {
        parts
            .iter()
            .try_fold(Self::zero(grid.clone(), field), |acc, m| acc.direct_sum(m))
    }

    pub fn tensor(&self, other: &PersistenceModule) -> Result<PersistenceModule> {
        self.combine(other, |a, b| a * b, |x, y| x.kronecker(y))
    }

    fn combine(
        &self,
        other: &PersistenceModule,
        dim: impl Fn(usize, usize) -> usize,
        edge: impl Fn(&Matrix, &Matrix) -> std::result::Result<Matrix, crate::error::MatrixError>,
    ) -> Result<PersistenceModule> {
        self.check_compatible(other)?;
        let dims = self.dims.iter().zip(&other.dims).map(|(a, b)| dim(*a, *b)).collect();
        let mut out = Self::with_dims(self.grid.clone(), self.field, dims)?;
        for (slot, (x, y)) in out.maps.iter_mut().zip(self.maps.iter().zip(&other.maps)) {
            if let (Some(x), Some(y)) = (x, y) {
                *slot = Some(edge(x, y)?);
            }
        }
        Ok(out)
    }

    /// `M[delta](t) = M(min(t + delta, top))`.
    ///
    /// Indices past the grid edge reuse the last grid value, so the shift is
    /// total; maps whose endpoints clamp to the same point are identities.
    pub fn shift(&self, delta: &[usize]) -> Result<PersistenceModule> {
        if delta.len() != self.nparams() {
            return Err(Error::Invalid(format!(
                "shift vector has {} entries for a {}-parameter grid",
                delta.len(),
                self.nparams()
            )));
        }
        for (axis, d) in delta.iter().enumerate() {
            if *d > 0 && !self.grid.is_uniform(axis) {
                return Err(Error::NonUniformAxis(axis));
            }
        }
        let dims = self
            .grid
            .points()
            .map(|p| self.dim(&self.grid.clamp_offset(&p, delta)))
            .collect();
        let mut out = Self::with_dims(self.grid.clone(), self.field, dims)?;
        let n = self.nparams();
        for lin in 0..self.grid.len() {
            let p = self.grid.point(lin);
            let from = self.grid.clamp_offset(&p, delta);
            for axis in 0..n {
                if let Some(q) = self.grid.step(&p, axis) {
                    let to = self.grid.clamp_offset(&q, delta);
                    out.maps[lin * n + axis] = Some(self.transition(&from, &to)?);
                }
            }
        }
        Ok(out)
    }

    /// Conjugates every fiber by an invertible change of basis:
    /// edge maps become `P_{t+e} M(t) P_t^{-1}`.
    pub fn change_basis(&self, bases: &[Matrix]) -> Result<PersistenceModule> {
        if bases.len() != self.grid.len() {
            return Err(Error::Invalid("one basis change per grid point expected".into()));
        }
        let inverses = bases
            .iter()
            .enumerate()
            .map(|(lin, b)| {
                if b.shape() != (self.dims[lin], self.dims[lin]) {
                    return Err(Error::Shape {
                        location: format!("basis change at {}", self.grid.point(lin)),
                        expected: (self.dims[lin], self.dims[lin]),
                        found: b.shape(),
                    });
                }
                b.inverse()
                    .ok_or_else(|| Error::Invalid(format!("basis change at {} is singular", self.grid.point(lin))))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = self.clone();
        let n = self.nparams();
        for lin in 0..self.grid.len() {
            let p = self.grid.point(lin);
            for axis in 0..n {
                if let Some(q) = self.grid.step(&p, axis) {
                    let m = self.maps[lin * n + axis].as_ref().unwrap();
                    let conj = bases[self.grid.linear(&q)].multiply(m)?.multiply(&inverses[lin])?;
                    out.maps[lin * n + axis] = Some(conj);
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GF2: Field = Field::GF2;

    fn one_to_four_grid() -> GridPoset {
        GridPoset::integer(&[4, 4], 1).unwrap()
    }

    #[test]
    fn interval_on_coordinate_box() {
        // I_{[1,3)x[1,3)} on {1,2,3,4}^2: coordinates 1 and 2 are indices 0 and 1
        let g = one_to_four_grid();
        let b = GridBox::new([0, 0], [1, 1]).unwrap();
        let m = PersistenceModule::interval_on_box(g.clone(), GF2, &b).unwrap();
        for p in g.points() {
            let c = g.coords(&p);
            let inside = c.iter().all(|v| *v >= 1.0 && *v < 3.0);
            assert_eq!(m.dim(&p), usize::from(inside), "at {c:?}");
        }
        assert!(m.validate().is_empty());
    }

    #[test]
    fn interval_rejects_nonconvex() {
        let g = GridPoset::range(&[3]).unwrap();
        let s = Support::from_points(&g, &[GridPoint::from([0]), GridPoint::from([2])]).unwrap();
        assert!(matches!(
            PersistenceModule::interval(g, GF2, &s),
            Err(Error::NotConvex(_))
        ));
    }

    #[test]
    fn whole_grid_interval_is_constant() {
        let g = GridPoset::range(&[2, 3]).unwrap();
        let m = PersistenceModule::interval(g.clone(), GF2, &Support::full(&g)).unwrap();
        assert_eq!(m, PersistenceModule::constant(g.clone(), GF2, 1));
        let z = PersistenceModule::interval(g.clone(), GF2, &Support::empty(&g)).unwrap();
        assert_eq!(z, PersistenceModule::zero(g, GF2));
        assert!(z.validate().is_empty());
    }

    #[test]
    fn broken_face_is_reported() {
        // constant module on 2x2 with the (0,1)->(1,1) map zeroed:
        // path via axis 1 first gives 0, via axis 0 first gives 1
        let g = GridPoset::range(&[2, 2]).unwrap();
        let mut m = PersistenceModule::constant(g, GF2, 1);
        m.set_map(&GridPoint::from([0, 1]), 0, Matrix::zeros(GF2, 1, 1))
            .unwrap();
        assert_eq!(
            m.validate(),
            vec![Violation::Face {
                point: GridPoint::from([0, 0]),
                axes: (0, 1)
            }]
        );
    }

    #[test]
    fn shape_violation_is_reported() {
        let g = GridPoset::range(&[2]).unwrap();
        let mut m = PersistenceModule::constant(g, GF2, 1);
        assert!(m.set_map(&GridPoint::from([0]), 0, Matrix::zeros(GF2, 2, 1)).is_err());
        m.set_map_unchecked(&GridPoint::from([0]), 0, Matrix::zeros(GF2, 2, 1));
        assert!(matches!(m.validate()[0], Violation::EdgeShape { .. }));
    }

    #[test]
    fn transition_examples() {
        let g = GridPoset::range(&[3, 3]).unwrap();
        let m = PersistenceModule::interval_on_box(g, GF2, &GridBox::new([0, 1], [2, 2]).unwrap()).unwrap();
        let a = GridPoint::from([0, 1]);
        assert_eq!(m.transition(&a, &a).unwrap(), Matrix::identity(GF2, 1));
        assert_eq!(
            m.transition(&a, &GridPoint::from([2, 2])).unwrap(),
            Matrix::identity(GF2, 1)
        );
        assert_eq!(m.transition(&GridPoint::from([0, 0]), &a).unwrap().shape(), (1, 0));
        assert!(matches!(
            m.transition(&GridPoint::from([1, 0]), &a),
            Err(Error::NotComparable(..))
        ));
    }

    #[test]
    fn sums_and_tensors() {
        let g = GridPoset::range(&[2, 2]).unwrap();
        let a = PersistenceModule::interval_on_box(g.clone(), GF2, &GridBox::new([0, 0], [1, 0]).unwrap()).unwrap();
        let b = PersistenceModule::constant(g.clone(), GF2, 2);
        let s = a.direct_sum(&b).unwrap();
        assert!(s.validate().is_empty());
        for lin in 0..g.len() {
            assert_eq!(s.dims()[lin], a.dims()[lin] + b.dims()[lin]);
        }
        assert_eq!(a.direct_sum(&PersistenceModule::zero(g.clone(), GF2)).unwrap(), a);
        let t = b.tensor(&a).unwrap();
        assert!(t.validate().is_empty());
        for lin in 0..g.len() {
            assert_eq!(t.dims()[lin], a.dims()[lin] * b.dims()[lin]);
        }
        assert_eq!(a.tensor(&PersistenceModule::constant(g, GF2, 1)).unwrap(), a);
    }

    #[test]
    fn shift_moves_support_down() {
        let g = GridPoset::range(&[5, 5]).unwrap();
        let b = GridBox::new([2, 1], [4, 3]).unwrap();
        let m = PersistenceModule::interval_on_box(g.clone(), GF2, &b).unwrap();
        assert_eq!(m.shift(&[0, 0]).unwrap(), m);
        let s = m.shift(&[1, 1]).unwrap();
        assert!(s.validate().is_empty());
        for p in g.points() {
            let q = g.clamp_offset(&p, &[1, 1]);
            assert_eq!(s.dim(&p), usize::from(b.contains(&q)));
        }
        // away from the boundary, shifting twice is shifting by the sum
        let twice = s.shift(&[1, 1]).unwrap();
        let direct = m.shift(&[2, 2]).unwrap();
        for p in GridBox::new([0, 0], [2, 2]).unwrap().points() {
            assert_eq!(twice.dim(&p), direct.dim(&p));
        }
        assert_eq!(twice, direct);
    }

    #[test]
    fn shift_needs_uniform_axes() {
        let g = GridPoset::new(vec![vec![0.0, 1.0, 3.0]]).unwrap();
        let m = PersistenceModule::constant(g, GF2, 1);
        assert_eq!(m.shift(&[1]), Err(Error::NonUniformAxis(0)));
    }
}
