//! Dimensions and bases of spaces of natural transformations between
//! restricted modules.
//!
//! For a box `[a, b]`, the unknowns are the component matrices `eta_t`,
//! `t` in the box, stored row-major one block after another in lexicographic
//! point order. Every covering edge `t -> u` contributes the block equation
//! `eta_u M(t, u) - N(t, u) eta_t = 0`. The dimension is the nullity of that
//! sparse system.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{GridBox, GridPoint, GridPoset};
use crate::matrix::Matrix;
use crate::module::PersistenceModule;
use crate::natural::{NatTransform, NaturalityFailure};
use crate::sparse::{SparseEchelon, SparseRow};
use crate::table::InvariantTable;

/// Which comparable pairs contribute naturality equations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ConstraintScope {
    #[default]
    CoveringEdges,
    AllPairs,
}

/// The naturality system for `M|box -> N|box`.
#[derive(Clone, Debug)]
pub struct HomConstraintSystem {
    field: Field,
    region: GridBox,
    /// `(dims_N(t), dims_M(t))` for each point of the box in lexicographic order.
    blocks: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    variables: usize,
    equations: Vec<SparseRow>,
}

fn check_pair(m: &PersistenceModule, n: &PersistenceModule) -> Result<()> {
    if m.grid() != n.grid() {
        return Err(Error::GridMismatch);
    }
    if m.field() != n.field() {
        return Err(Error::FieldMismatch(m.field(), n.field()));
    }
    Ok(())
}

/// Block equation `eta_u Mtu - Ntu eta_t = 0` for the variable blocks at
/// offsets `ot` (shape `nt x mt`) and `ou` (shape `nu x mu`); one row per
/// entry of the `nu x mt` result.
fn edge_rows(mtu: &Matrix, ntu: &Matrix, ot: usize, ou: usize, out: &mut Vec<SparseRow>) {
    let (nu, nt) = ntu.shape();
    let (mu, mt) = mtu.shape();
    for r in 0..nu {
        for c in 0..mt {
            let mut row: SparseRow = Vec::new();
            for k in 0..mu {
                let v = mtu.get(k, c);
                if !v.is_zero() {
                    row.push((ou + r * mu + k, v.clone()));
                }
            }
            for k in 0..nt {
                let v = ntu.get(r, k);
                if !v.is_zero() {
                    row.push((ot + k * mt + c, -v));
                }
            }
            if !row.is_empty() {
                out.push(row);
            }
        }
    }
}

impl HomConstraintSystem {
    pub fn assemble(
        m: &PersistenceModule,
        n: &PersistenceModule,
        region: &GridBox,
        scope: ConstraintScope,
    ) -> Result<Self> {
        check_pair(m, n)?;
        let grid = m.grid();
        grid.check_box(region)?;
        let points: Vec<GridPoint> = region.points().collect();
        let blocks: Vec<(usize, usize)> = points.iter().map(|p| (n.dim(p), m.dim(p))).collect();
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut variables = 0;
        for (r, c) in &blocks {
            offsets.push(variables);
            variables += r * c;
        }
        let local = |p: &GridPoint| -> usize {
            let shape = region.shape();
            p.0.iter()
                .zip(&region.lower.0)
                .zip(&shape)
                .fold(0, |acc, ((x, lo), s)| acc * s + (x - lo))
        };
        let mut equations = Vec::new();
        match scope {
            ConstraintScope::CoveringEdges => {
                for (i, p) in points.iter().enumerate() {
                    for axis in 0..grid.nparams() {
                        if p.0[axis] >= region.upper.0[axis] {
                            continue;
                        }
                        let mut q = p.clone();
                        q.0[axis] += 1;
                        let j = local(&q);
                        edge_rows(
                            m.map(p, axis).unwrap(),
                            n.map(p, axis).unwrap(),
                            offsets[i],
                            offsets[j],
                            &mut equations,
                        );
                    }
                }
            }
            ConstraintScope::AllPairs => {
                for (s, t) in grid.comparable_pairs(Some(region)) {
                    if s == t {
                        continue;
                    }
                    edge_rows(
                        &m.transition(&s, &t)?,
                        &n.transition(&s, &t)?,
                        offsets[local(&s)],
                        offsets[local(&t)],
                        &mut equations,
                    );
                }
            }
        }
        Ok(HomConstraintSystem {
            field: m.field(),
            region: region.clone(),
            blocks,
            offsets,
            variables,
            equations,
        })
    }

    pub fn region(&self) -> &GridBox {
        &self.region
    }

    pub fn variable_count(&self) -> usize {
        self.variables
    }

    /// Number of scalar equations, counting ones that vanish identically.
    pub fn equation_count(&self) -> usize {
        self.equations.len()
    }

    pub fn equations(&self) -> &[SparseRow] {
        &self.equations
    }

    /// Dense coefficient matrix (equations x variables).
    pub fn to_matrix(&self) -> Matrix {
        let mut out = Matrix::zeros(self.field, self.equations.len(), self.variables);
        for (r, row) in self.equations.iter().enumerate() {
            for (c, v) in row {
                out.set(r, *c, v.clone());
            }
        }
        out
    }

    fn echelon(&self) -> SparseEchelon {
        let mut e = SparseEchelon::new(self.field);
        for row in &self.equations {
            e.push(row.clone());
        }
        e
    }

    pub fn kernel_dim(&self) -> usize {
        self.variables - self.echelon().rank()
    }

    /// Kernel vectors reshaped into component families on the box, one
    /// matrix per box point.
    pub fn kernel_families(&self) -> Vec<Vec<Matrix>> {
        self.echelon()
            .kernel_basis(self.variables)
            .into_iter()
            .map(|v| {
                let mut flat = vec![self.field.zero(); self.variables];
                for (c, x) in v {
                    flat[c] = x;
                }
                self.blocks
                    .iter()
                    .zip(&self.offsets)
                    .map(|(&(r, c), &o)| {
                        Matrix::from_scalars(self.field, r, c, flat[o..o + r * c].to_vec()).expect("block shape")
                    })
                    .collect()
            })
            .collect()
    }
}

/// `dim Nat(M|box, N|box)`.
pub fn hom_space_dim(m: &PersistenceModule, n: &PersistenceModule, region: &GridBox) -> Result<usize> {
    hom_space_dim_with(m, n, region, ConstraintScope::CoveringEdges)
}

pub fn hom_space_dim_with(
    m: &PersistenceModule,
    n: &PersistenceModule,
    region: &GridBox,
    scope: ConstraintScope,
) -> Result<usize> {
    Ok(HomConstraintSystem::assemble(m, n, region, scope)?.kernel_dim())
}

/// A basis of `Nat(M|box, N|box)` as transforms between the restricted
/// modules; with no box, between `M` and `N` themselves.
pub fn hom_basis(
    m: &Arc<PersistenceModule>,
    n: &Arc<PersistenceModule>,
    region: Option<&GridBox>,
) -> Result<Vec<NatTransform>> {
    check_pair(m, n)?;
    let full = m.grid().full_box();
    let region = region.unwrap_or(&full);
    let system = HomConstraintSystem::assemble(m, n, region, ConstraintScope::CoveringEdges)?;
    let (ms, ns) = if *region == full {
        (m.clone(), n.clone())
    } else {
        (Arc::new(m.restrict(region)?), Arc::new(n.restrict(region)?))
    };
    system
        .kernel_families()
        .into_iter()
        .map(|comps| NatTransform::new(ms.clone(), ns.clone(), comps))
        .collect()
}

/// `Nat(M|[a,b], N|[a,b])` dimensions for all comparable pairs in `within`.
///
/// For each lower corner `a` and each choice of the leading coordinates of
/// `b`, the box is grown one slab at a time along the last axis and the
/// constraint system is extended in place, so each `(a, b)` costs only the
/// new slab's variables and equations.
pub fn lnti_table(
    m: &PersistenceModule,
    n: &PersistenceModule,
    within: Option<&GridBox>,
) -> Result<InvariantTable<usize>> {
    check_pair(m, n)?;
    let grid = m.grid();
    let region = match within {
        Some(b) => {
            grid.check_box(b)?;
            b.clone()
        }
        None => grid.full_box(),
    };
    let lowers: Vec<GridPoint> = region.points().collect();
    let rows: Vec<Vec<((GridPoint, GridPoint), usize)>> = lowers
        .par_iter()
        .map(|a| sweep_from(m, n, grid, a, &region.upper))
        .collect();
    Ok(InvariantTable::from_entries(grid.clone(), rows.into_iter().flatten()))
}

fn sweep_from(
    m: &PersistenceModule,
    n: &PersistenceModule,
    grid: &GridPoset,
    a: &GridPoint,
    top: &GridPoint,
) -> Vec<((GridPoint, GridPoint), usize)> {
    let last = grid.nparams() - 1;
    let field = m.field();
    let prefix_box = GridBox {
        lower: GridPoint(a.0[..last].to_vec()),
        upper: GridPoint(top.0[..last].to_vec()),
    };
    let mut out = Vec::new();
    for prefix in prefix_box.points() {
        let mut echelon = SparseEchelon::new(field);
        let mut variables = 0usize;
        // variable offset of each point of the current slab, in slab order
        let mut prev_slab: Vec<usize> = Vec::new();
        let slab_box = GridBox {
            lower: GridPoint(a.0[..last].to_vec()),
            upper: prefix.clone(),
        };
        let slab_shape = slab_box.shape();
        let slab_local = |p: &[usize]| -> usize {
            p.iter()
                .zip(&slab_box.lower.0)
                .zip(&slab_shape)
                .fold(0, |acc, ((x, lo), s)| acc * s + (x - lo))
        };
        for z in a.0[last]..=top.0[last] {
            let slab: Vec<GridPoint> = slab_box
                .points()
                .map(|q| {
                    let mut v = q.0;
                    v.push(z);
                    GridPoint(v)
                })
                .collect();
            let mut offsets = Vec::with_capacity(slab.len());
            for p in &slab {
                offsets.push(variables);
                variables += n.dim(p) * m.dim(p);
            }
            let mut rows = Vec::new();
            for (i, p) in slab.iter().enumerate() {
                if z > a.0[last] {
                    let mut t = p.clone();
                    t.0[last] -= 1;
                    edge_rows(
                        m.map(&t, last).unwrap(),
                        n.map(&t, last).unwrap(),
                        prev_slab[i],
                        offsets[i],
                        &mut rows,
                    );
                }
                for axis in 0..last {
                    if p.0[axis] > a.0[axis] {
                        let mut t = p.clone();
                        t.0[axis] -= 1;
                        let j = slab_local(&t.0[..last]);
                        edge_rows(
                            m.map(&t, axis).unwrap(),
                            n.map(&t, axis).unwrap(),
                            offsets[j],
                            offsets[i],
                            &mut rows,
                        );
                    }
                }
            }
            for row in rows {
                echelon.push(row);
            }
            let mut b = prefix.0.clone();
            b.push(z);
            out.push(((a.clone(), GridPoint(b)), variables - echelon.rank()));
            prev_slab = offsets;
        }
    }
    out
}

/// `lnti_table(M, M)`.
pub fn lnti_self(m: &PersistenceModule, within: Option<&GridBox>) -> Result<InvariantTable<usize>> {
    lnti_table(m, m, within)
}

/// Covering edges `s -> t` on which
/// `alpha_t eta_t M(s, t) = N(s, t) alpha_s eta_s` fails.
pub fn modification_violations(
    eta: &NatTransform,
    gamma: &NatTransform,
    alpha: &[Matrix],
) -> Result<Vec<NaturalityFailure>> {
    let m = eta.source();
    let n = eta.target();
    if gamma.source().grid() != m.grid() || gamma.target().dims() != n.dims() || gamma.source().dims() != m.dims() {
        return Err(Error::Invalid(
            "modification: transforms have different endpoints".into(),
        ));
    }
    let grid = m.grid();
    if alpha.len() != grid.len() {
        return Err(Error::Invalid(format!(
            "expected {} modification components, got {}",
            grid.len(),
            alpha.len()
        )));
    }
    for (lin, a) in alpha.iter().enumerate() {
        let d = n.dim_linear(lin);
        if a.shape() != (d, d) {
            return Err(Error::Shape {
                location: format!("modification component at {}", grid.point(lin)),
                expected: (d, d),
                found: a.shape(),
            });
        }
    }
    let mut out = Vec::new();
    for lin in 0..grid.len() {
        let s = grid.point(lin);
        for axis in 0..grid.nparams() {
            let Some(t) = grid.step(&s, axis) else { continue };
            let lt = grid.linear(&t);
            let left = alpha[lt]
                .multiply(&eta.components()[lt])?
                .multiply(m.map_linear(lin, axis).unwrap())?;
            let right = n
                .map_linear(lin, axis)
                .unwrap()
                .multiply(&alpha[lin])?
                .multiply(&eta.components()[lin])?;
            if left != right {
                out.push(NaturalityFailure { point: s.clone(), axis });
            }
        }
    }
    Ok(out)
}

pub fn verify_modification(eta: &NatTransform, gamma: &NatTransform, alpha: &[Matrix]) -> Result<bool> {
    Ok(modification_violations(eta, gamma, alpha)?.is_empty())
}

/// Inserts extra axis values. A new point carries the fiber of the nearest
/// original point below it (zero if there is none) and identity maps
/// between copies of the same fiber.
pub fn refine_grid(m: &PersistenceModule, insertions: &[Vec<f64>]) -> Result<PersistenceModule> {
    let grid = m.grid();
    if insertions.len() != grid.nparams() {
        return Err(Error::Invalid(format!(
            "expected insertion lists for {} axes, got {}",
            grid.nparams(),
            insertions.len()
        )));
    }
    let mut axes = Vec::new();
    let mut floors: Vec<Vec<Option<usize>>> = Vec::new();
    for (axis, extra) in insertions.iter().enumerate() {
        let old = grid.axis(axis);
        let mut values: Vec<f64> = old.to_vec();
        for v in extra {
            if !v.is_finite() {
                return Err(Error::InvalidGrid(format!("non-finite insertion {v}")));
            }
            if grid.index_of(axis, *v).is_none() && !values.iter().any(|w| w == v) {
                values.push(*v);
            }
        }
        values.sort_by(f64::total_cmp);
        floors.push(
            values
                .iter()
                .map(|v| old.iter().rposition(|o| *o <= *v + 1e-9 * o.abs().max(1.0)))
                .collect(),
        );
        axes.push(values);
    }
    let fine = GridPoset::new(axes)?;
    let coarse = |p: &GridPoint| -> Option<GridPoint> {
        p.0.iter()
            .enumerate()
            .map(|(axis, i)| floors[axis][*i])
            .collect::<Option<Vec<_>>>()
            .map(GridPoint)
    };
    let dims = fine.points().map(|p| coarse(&p).map_or(0, |q| m.dim(&q))).collect();
    let mut out = PersistenceModule::with_dims(fine.clone(), m.field(), dims)?;
    for p in fine.points() {
        let Some(cp) = coarse(&p) else { continue };
        for axis in 0..fine.nparams() {
            let Some(q) = fine.step(&p, axis) else { continue };
            let cq = coarse(&q).expect("above a covered point");
            out.set_map(&p, axis, m.transition(&cp, &cq)?)?;
        }
    }
    Ok(out)
}
