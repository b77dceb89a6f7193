//! Natural transformations between modules on the same grid.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::grid::GridPoint;
use crate::matrix::Matrix;
use crate::module::PersistenceModule;

/// A family of matrices `eta_t : M(t) -> N(t)`, one per grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct NatTransform {
    source: Arc<PersistenceModule>,
    target: Arc<PersistenceModule>,
    components: Vec<Matrix>,
}

/// A covering edge on which a naturality square fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NaturalityFailure {
    pub point: GridPoint,
    pub axis: usize,
}

impl NatTransform {
    /// Checks grid, field and component shapes; naturality is checked separately.
    pub fn new(
        source: Arc<PersistenceModule>,
        target: Arc<PersistenceModule>,
        components: Vec<Matrix>,
    ) -> Result<Self> {
        if source.grid() != target.grid() {
            return Err(Error::GridMismatch);
        }
        if source.field() != target.field() {
            return Err(Error::FieldMismatch(source.field(), target.field()));
        }
        let grid = source.grid();
        if components.len() != grid.len() {
            return Err(Error::Invalid(format!(
                "expected {} components, got {}",
                grid.len(),
                components.len()
            )));
        }
        for (lin, c) in components.iter().enumerate() {
            let expected = (target.dim_linear(lin), source.dim_linear(lin));
            if c.shape() != expected {
                return Err(Error::Shape {
                    location: format!("component at {}", grid.point(lin)),
                    expected,
                    found: c.shape(),
                });
            }
            if c.field() != source.field() {
                return Err(Error::FieldMismatch(source.field(), c.field()));
            }
        }
        Ok(NatTransform {
            source,
            target,
            components,
        })
    }

    pub fn zero(source: Arc<PersistenceModule>, target: Arc<PersistenceModule>) -> Result<Self> {
        let f = source.field();
        let components = (0..source.grid().len())
            .map(|l| Matrix::zeros(f, target.dim_linear(l), source.dim_linear(l)))
            .collect();
        Self::new(source, target, components)
    }

    pub fn identity(m: Arc<PersistenceModule>) -> Self {
        let f = m.field();
        let components = m.dims().iter().map(|d| Matrix::identity(f, *d)).collect();
        NatTransform {
            source: m.clone(),
            target: m,
            components,
        }
    }

    /// The internal transition `M -> M[delta]`, `t -> M(t <= min(t + delta, top))`.
    pub fn internal_transition(m: Arc<PersistenceModule>, delta: &[usize]) -> Result<Self> {
        let shifted = Arc::new(m.shift(delta)?);
        let grid = m.grid();
        let components = grid
            .points()
            .map(|p| m.transition(&p, &grid.clamp_offset(&p, delta)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(m, shifted, components)
    }

    pub fn source(&self) -> &Arc<PersistenceModule> {
        &self.source
    }

    pub fn target(&self) -> &Arc<PersistenceModule> {
        &self.target
    }

    pub fn components(&self) -> &[Matrix] {
        &self.components
    }

    pub fn component(&self, p: &GridPoint) -> &Matrix {
        &self.components[self.source.grid().linear(p)]
    }

    /// `other . self`.
    pub fn then(&self, other: &NatTransform) -> Result<NatTransform> {
        if self.target.dims() != other.source.dims() {
            return Err(Error::Invalid("composition: target and source differ".into()));
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| b.multiply(a).map_err(Error::from))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.source.clone(), other.target.clone(), components)
    }

    pub fn add(&self, other: &NatTransform) -> Result<NatTransform> {
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.add(b).map_err(Error::from))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.source.clone(), self.target.clone(), components)
    }

    pub fn scale(&self, s: &Scalar) -> Result<NatTransform> {
        let components = self
            .components
            .iter()
            .map(|a| a.scale(s).map_err(Error::from))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.source.clone(), self.target.clone(), components)
    }

    /// Edges on which `eta_{t+e} M(t) != N(t) eta_t`.
    pub fn naturality_failures(&self) -> Vec<NaturalityFailure> {
        self.naturality_failures_where(|_, _| true)
    }

    /// Like `naturality_failures`, restricted to edges accepted by `keep`.
    pub fn naturality_failures_where(&self, keep: impl Fn(&GridPoint, usize) -> bool) -> Vec<NaturalityFailure> {
        let grid = self.source.grid();
        let mut out = Vec::new();
        for lin in 0..grid.len() {
            let p = grid.point(lin);
            for axis in 0..grid.nparams() {
                let Some(q) = grid.step(&p, axis) else { continue };
                if !keep(&p, axis) {
                    continue;
                }
                let lq = grid.linear(&q);
                let m = self.source.map_linear(lin, axis).unwrap();
                let n = self.target.map_linear(lin, axis).unwrap();
                let left = self.components[lq].multiply(m);
                let right = n.multiply(&self.components[lin]);
                if left.ok() != right.ok() {
                    out.push(NaturalityFailure { point: p.clone(), axis });
                }
            }
        }
        out
    }

    pub fn is_natural(&self) -> bool {
        self.naturality_failures().is_empty()
    }

    /// Natural with every component invertible.
    pub fn is_isomorphism(&self) -> bool {
        self.is_natural() && self.components.iter().all(|c| c.is_invertible())
    }

    /// The image submodule of a natural transformation, with its inclusion
    /// into the target.
    pub fn image(&self) -> Result<(PersistenceModule, NatTransform)> {
        let grid = self.source.grid();
        let f = self.source.field();
        let bases: Vec<Matrix> = self.components.iter().map(|c| c.column_space_basis()).collect();
        let dims = bases.iter().map(|b| b.cols()).collect();
        let mut img = PersistenceModule::with_dims(grid.clone(), f, dims)?;
        for lin in 0..grid.len() {
            let p = grid.point(lin);
            for axis in 0..grid.nparams() {
                let Some(q) = grid.step(&p, axis) else { continue };
                let pushed = self.target.map_linear(lin, axis).unwrap().multiply(&bases[lin])?;
                let m = bases[grid.linear(&q)]
                    .solve(&pushed)?
                    .ok_or_else(|| Error::Invalid(format!("image is not closed along edge at {p}")))?;
                img.set_map(&p, axis, m)?;
            }
        }
        let img = Arc::new(img);
        let inclusion = NatTransform::new(img.clone(), self.target.clone(), bases)?;
        Ok(((*img).clone(), inclusion))
    }

    /// The same components viewed as `M[delta] -> N[delta]`, reindexed by the
    /// clamped shift.
    pub fn shifted(&self, delta: &[usize]) -> Result<NatTransform> {
        let grid = self.source.grid();
        let components = grid
            .points()
            .map(|p| self.component(&grid.clamp_offset(&p, delta)).clone())
            .collect();
        Self::new(
            Arc::new(self.source.shift(delta)?),
            Arc::new(self.target.shift(delta)?),
            components,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::grid::{GridBox, GridPoset};

    const GF2: Field = Field::GF2;

    fn bar(g: &GridPoset, lo: usize, hi: usize) -> Arc<PersistenceModule> {
        Arc::new(PersistenceModule::interval_on_box(g.clone(), GF2, &GridBox::new([lo], [hi]).unwrap()).unwrap())
    }

    #[test]
    fn bar_morphisms_follow_overlap() {
        // [1,2] -> [0,1] is natural; [0,1] -> [1,2] fails entering and leaving the overlap
        let g = GridPoset::range(&[3]).unwrap();
        let (a, b) = (bar(&g, 1, 2), bar(&g, 0, 1));
        let comps = |x: &PersistenceModule, y: &PersistenceModule| {
            (0..3)
                .map(|l| {
                    let (r, c) = (y.dim_linear(l), x.dim_linear(l));
                    if r == 1 && c == 1 {
                        Matrix::identity(GF2, 1)
                    } else {
                        Matrix::zeros(GF2, r, c)
                    }
                })
                .collect::<Vec<_>>()
        };
        let down = NatTransform::new(a.clone(), b.clone(), comps(&a, &b)).unwrap();
        assert!(down.is_natural());
        let up = NatTransform::new(b.clone(), a.clone(), comps(&b, &a)).unwrap();
        let failing: Vec<GridPoint> = up.naturality_failures().into_iter().map(|f| f.point).collect();
        assert_eq!(failing, vec![GridPoint::from([0]), GridPoint::from([1])]);
    }

    #[test]
    fn internal_transition_is_natural() {
        let g = GridPoset::range(&[3, 3]).unwrap();
        let m = Arc::new(PersistenceModule::interval_on_box(g, GF2, &GridBox::new([0, 0], [1, 2]).unwrap()).unwrap());
        for d in [[0, 0], [1, 0], [1, 1], [2, 2]] {
            let t = NatTransform::internal_transition(m.clone(), &d).unwrap();
            assert!(t.is_natural(), "delta {d:?}");
        }
        let id = NatTransform::internal_transition(m.clone(), &[0, 0]).unwrap();
        assert_eq!(id, NatTransform::identity(m));
    }

    #[test]
    fn composition_and_sums() {
        let g = GridPoset::range(&[2, 2]).unwrap();
        let m = Arc::new(PersistenceModule::constant(g, GF2, 2));
        let id = NatTransform::identity(m.clone());
        assert_eq!(id.then(&id).unwrap(), id);
        assert_eq!(id.add(&id).unwrap(), NatTransform::zero(m.clone(), m.clone()).unwrap());
        assert!(id.is_isomorphism());
        assert!(!NatTransform::zero(m.clone(), m).unwrap().is_isomorphism());
    }
}
