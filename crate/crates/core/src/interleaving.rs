//! Interleaving certificates: verification, small exhaustive search, and
//! construction of interleaved pairs.
//!
//! With `top` the largest grid point, a certificate is checked only where no
//! clamping happens: naturality on edges `t -> u` with `u + eps <= top`, and
//! the triangles at `t` with `t + 2 eps <= top`. Components outside the box
//! `[0, top - eps]` never enter a check.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Field, Scalar};
use crate::grid::{GridBox, GridPoint, GridPoset};
use crate::lnti::{hom_basis, lnti_self};
use crate::matrix::Matrix;
use crate::module::PersistenceModule;
use crate::natural::NatTransform;

#[derive(Clone, Debug, PartialEq)]
pub struct InterleavingCertificate {
    /// Per-axis shift in grid steps.
    pub epsilon: Vec<usize>,
    /// `M -> N[eps]`.
    pub phi: NatTransform,
    /// `N -> M[eps]`.
    pub psi: NatTransform,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InterleavingFailure {
    WrongEndpoints(&'static str),
    PhiNaturality {
        point: GridPoint,
        axis: usize,
    },
    PsiNaturality {
        point: GridPoint,
        axis: usize,
    },
    /// `psi_{t+eps} phi_t != M(t, t + 2 eps)`.
    TriangleM {
        point: GridPoint,
    },
    /// `phi_{t+eps} psi_t != N(t, t + 2 eps)`.
    TriangleN {
        point: GridPoint,
    },
}

impl std::fmt::Display for InterleavingFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InterleavingFailure::WrongEndpoints(which) => write!(f, "{which} has the wrong source or target"),
            InterleavingFailure::PhiNaturality { point, axis } => {
                write!(f, "phi is not natural on the edge at {point} along axis {axis}")
            }
            InterleavingFailure::PsiNaturality { point, axis } => {
                write!(f, "psi is not natural on the edge at {point} along axis {axis}")
            }
            InterleavingFailure::TriangleM { point } => {
                write!(f, "psi[eps] phi differs from the 2eps transition of M at {point}")
            }
            InterleavingFailure::TriangleN { point } => {
                write!(f, "phi[eps] psi differs from the 2eps transition of N at {point}")
            }
        }
    }
}

fn check_epsilon(m: &PersistenceModule, n: &PersistenceModule, eps: &[usize]) -> Result<()> {
    if m.grid() != n.grid() {
        return Err(Error::GridMismatch);
    }
    if m.field() != n.field() {
        return Err(Error::FieldMismatch(m.field(), n.field()));
    }
    if eps.len() != m.nparams() {
        return Err(Error::Invalid(format!(
            "epsilon has {} entries for a {}-parameter grid",
            eps.len(),
            m.nparams()
        )));
    }
    for (axis, e) in eps.iter().enumerate() {
        if *e > 0 && !m.grid().is_uniform(axis) {
            return Err(Error::NonUniformAxis(axis));
        }
    }
    Ok(())
}

/// `t + k * eps` if it stays inside the grid.
fn unclamped(grid: &GridPoset, t: &GridPoint, eps: &[usize], k: usize) -> Option<GridPoint> {
    let v: Vec<usize> = t.0.iter().zip(eps).map(|(x, e)| x + k * e).collect();
    let p = GridPoint(v);
    grid.contains(&p).then_some(p)
}

/// All failing checks; empty iff the certificate verifies.
pub fn interleaving_failures(
    m: &PersistenceModule,
    n: &PersistenceModule,
    cert: &InterleavingCertificate,
) -> Result<Vec<InterleavingFailure>> {
    let eps = &cert.epsilon;
    check_epsilon(m, n, eps)?;
    let grid = m.grid();
    let mut out = Vec::new();
    let m_eps = m.shift(eps)?;
    let n_eps = n.shift(eps)?;
    if **cert.phi.source() != *m || **cert.phi.target() != n_eps {
        out.push(InterleavingFailure::WrongEndpoints("phi"));
    }
    if **cert.psi.source() != *n || **cert.psi.target() != m_eps {
        out.push(InterleavingFailure::WrongEndpoints("psi"));
    }
    if !out.is_empty() {
        return Ok(out);
    }
    let interior_edge = |p: &GridPoint, axis: usize| {
        let mut q = p.clone();
        q.0[axis] += 1;
        unclamped(grid, &q, eps, 1).is_some()
    };
    for f in cert.phi.naturality_failures_where(interior_edge) {
        out.push(InterleavingFailure::PhiNaturality {
            point: f.point,
            axis: f.axis,
        });
    }
    for f in cert.psi.naturality_failures_where(interior_edge) {
        out.push(InterleavingFailure::PsiNaturality {
            point: f.point,
            axis: f.axis,
        });
    }
    for t in grid.points() {
        let Some(far) = unclamped(grid, &t, eps, 2) else {
            continue;
        };
        let mid = unclamped(grid, &t, eps, 1).expect("between t and t + 2eps");
        let left = cert.psi.component(&mid).multiply(cert.phi.component(&t))?;
        if left != m.transition(&t, &far)? {
            out.push(InterleavingFailure::TriangleM { point: t.clone() });
        }
        let right = cert.phi.component(&mid).multiply(cert.psi.component(&t))?;
        if right != n.transition(&t, &far)? {
            out.push(InterleavingFailure::TriangleN { point: t.clone() });
        }
    }
    Ok(out)
}

pub fn verify_interleaving(
    m: &PersistenceModule,
    n: &PersistenceModule,
    cert: &InterleavingCertificate,
) -> Result<bool> {
    Ok(interleaving_failures(m, n, cert)?.is_empty())
}

#[derive(Clone, Debug)]
pub enum SearchOutcome {
    Found(Box<InterleavingCertificate>),
    /// The search was exhaustive and no certificate exists.
    NoneExists,
    /// Enumeration would need `required` candidates.
    BudgetExceeded {
        required: u128,
    },
}

/// The region `[0, top - eps]` where certificate components matter.
fn active_region(grid: &GridPoset, eps: &[usize]) -> Option<GridBox> {
    let top = grid.highest();
    let upper = top.checked_sub(eps)?;
    GridBox::new(grid.lowest(), upper).ok()
}

/// Embeds components defined on `region` into full-grid families, zero elsewhere.
fn extend(
    source: &Arc<PersistenceModule>,
    target: &Arc<PersistenceModule>,
    region: Option<&GridBox>,
    local: &[Matrix],
) -> Result<NatTransform> {
    let grid = source.grid();
    let f = source.field();
    let mut comps = Vec::with_capacity(grid.len());
    let mut k = 0;
    for (lin, p) in grid.points().enumerate() {
        if region.is_some_and(|r| r.contains(&p)) {
            comps.push(local[k].clone());
            k += 1;
        } else {
            comps.push(Matrix::zeros(f, target.dim_linear(lin), source.dim_linear(lin)));
        }
    }
    NatTransform::new(source.clone(), target.clone(), comps)
}

fn combine(basis: &[Vec<Matrix>], coeffs: &[Scalar], field: Field, shapes: &[(usize, usize)]) -> Vec<Matrix> {
    shapes
        .iter()
        .enumerate()
        .map(|(k, &(r, c))| {
            let mut acc = Matrix::zeros(field, r, c);
            for (b, x) in basis.iter().zip(coeffs) {
                if !x.is_zero() {
                    acc = acc.add(&b[k].scale(x).unwrap()).unwrap();
                }
            }
            acc
        })
        .collect()
}

/// Exhaustive search for an `eps`-interleaving over GF(p).
///
/// The maps in one direction are enumerated as combinations of a basis of
/// natural maps on the active region (the direction with fewer candidates);
/// for each, the triangle equations are linear in the other direction and
/// are solved exactly. At most `budget` candidates are tried.
pub fn search_interleaving(
    m: &PersistenceModule,
    n: &PersistenceModule,
    eps: &[usize],
    budget: u64,
) -> Result<SearchOutcome> {
    check_epsilon(m, n, eps)?;
    let Field::Prime(p) = m.field() else {
        return Err(Error::Invalid("interleaving search needs a prime field".into()));
    };
    let field = m.field();
    let grid = m.grid();
    let ma = Arc::new(m.clone());
    let na = Arc::new(n.clone());
    let m_eps = Arc::new(m.shift(eps)?);
    let n_eps = Arc::new(n.shift(eps)?);
    let Some(region) = active_region(grid, eps) else {
        // nothing is checked: the zero maps certify
        let cert = InterleavingCertificate {
            epsilon: eps.to_vec(),
            phi: NatTransform::zero(ma.clone(), n_eps)?,
            psi: NatTransform::zero(na.clone(), m_eps)?,
        };
        return Ok(SearchOutcome::Found(Box::new(cert)));
    };
    let phi_basis = hom_basis(&ma, &n_eps, Some(&region))?;
    let psi_basis = hom_basis(&na, &m_eps, Some(&region))?;
    let count = |d: usize| (p as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    let (c_phi, c_psi) = (count(phi_basis.len()), count(psi_basis.len()));
    // enumerate the smaller side; `swap` means psi is enumerated
    let swap = c_psi < c_phi;
    let required = c_phi.min(c_psi);
    if required > budget as u128 {
        return Ok(SearchOutcome::BudgetExceeded { required });
    }
    let (outer, inner, x, y) = if swap {
        (&psi_basis, &phi_basis, n, m)
    } else {
        (&phi_basis, &psi_basis, m, n)
    };
    let to_local =
        |basis: &[NatTransform]| -> Vec<Vec<Matrix>> { basis.iter().map(|b| b.components().to_vec()).collect() };
    let outer_local = to_local(outer);
    let inner_local = to_local(inner);
    let region_points: Vec<GridPoint> = region.points().collect();
    let local_index = |q: &GridPoint| region_points.iter().position(|r| r == q);
    let outer_shapes: Vec<(usize, usize)> = region_points
        .iter()
        .map(|q| (y.dim(&grid.clamp_offset(q, eps)), x.dim(q)))
        .collect();
    let inner_shapes: Vec<(usize, usize)> = region_points
        .iter()
        .map(|q| (x.dim(&grid.clamp_offset(q, eps)), y.dim(q)))
        .collect();
    // triangle points with their midpoints and the fixed right-hand sides
    let triangles: Vec<(usize, usize, Matrix, Matrix)> = grid
        .points()
        .filter_map(|t| {
            let far = unclamped(grid, &t, eps, 2)?;
            let mid = unclamped(grid, &t, eps, 1)?;
            Some((
                local_index(&t).unwrap(),
                local_index(&mid).unwrap(),
                x.transition(&t, &far).unwrap(),
                y.transition(&t, &far).unwrap(),
            ))
        })
        .collect();
    let d_outer = outer_local.len();
    let found = (0..required as u64).into_par_iter().find_map_first(|code| {
        let mut rest = code;
        let coeffs: Vec<Scalar> = (0..d_outer)
            .map(|_| {
                let c = (rest % p as u64) as u32;
                rest /= p as u64;
                field.element(c)
            })
            .collect();
        let f = combine(&outer_local, &coeffs, field, &outer_shapes);
        // unknown g = sum_j y_j G_j:  g_{mid} f_t = X(t, far),  f_{mid} g_t = Y(t, far)
        let mut columns: Vec<Vec<Scalar>> = vec![Vec::new(); inner_local.len()];
        let mut rhs: Vec<Scalar> = Vec::new();
        for (t, mid, xt, yt) in &triangles {
            for (j, g) in inner_local.iter().enumerate() {
                columns[j].extend(g[*mid].multiply(&f[*t]).unwrap().data().iter().cloned());
                columns[j].extend(f[*mid].multiply(&g[*t]).unwrap().data().iter().cloned());
            }
            rhs.extend(xt.data().iter().cloned());
            rhs.extend(yt.data().iter().cloned());
        }
        let rows = rhs.len();
        let mut a = Matrix::zeros(field, rows, inner_local.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                a.set(i, j, v.clone());
            }
        }
        let b = Matrix::column_vector(field, rhs);
        let sol = a.solve(&b).ok()??;
        let ycoeffs: Vec<Scalar> = (0..inner_local.len()).map(|j| sol.get(j, 0).clone()).collect();
        let g = combine(&inner_local, &ycoeffs, field, &inner_shapes);
        Some((f, g))
    });
    let Some((f, g)) = found else {
        return Ok(SearchOutcome::NoneExists);
    };
    let (phi_local, psi_local) = if swap { (g, f) } else { (f, g) };
    let cert = InterleavingCertificate {
        epsilon: eps.to_vec(),
        phi: extend(&ma, &n_eps, Some(&region), &phi_local)?,
        psi: extend(&na, &m_eps, Some(&region), &psi_local)?,
    };
    debug_assert!(verify_interleaving(m, n, &cert).unwrap_or(false));
    Ok(SearchOutcome::Found(Box::new(cert)))
}

/// Smallest uniform `eps` (in grid steps) found to admit a certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceBound {
    pub epsilon: Option<usize>,
    /// Every smaller `eps` was ruled out exhaustively.
    pub complete: bool,
}

pub fn interleaving_distance_upper(m: &PersistenceModule, n: &PersistenceModule, budget: u64) -> Result<DistanceBound> {
    let limit = m.grid().shape().into_iter().max().unwrap_or(0);
    let mut complete = true;
    for k in 0..=limit {
        let eps = vec![k; m.nparams()];
        match search_interleaving(m, n, &eps, budget)? {
            SearchOutcome::Found(_) => {
                return Ok(DistanceBound {
                    epsilon: Some(k),
                    complete,
                })
            }
            SearchOutcome::NoneExists => {}
            SearchOutcome::BudgetExceeded { .. } => complete = false,
        }
    }
    Ok(DistanceBound {
        epsilon: None,
        complete,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Perturbation {
    /// `N = M[delta]`.
    Shift,
    /// One summand box `[l, h]` becomes `[l, h - delta]`.
    Erode { summand: usize },
}

#[derive(Clone, Debug)]
pub struct PerturbedPair {
    pub m: PersistenceModule,
    pub n: PersistenceModule,
    pub certificate: InterleavingCertificate,
    pub perturbation: Perturbation,
}

/// Components equal to `1` wherever source and target fibers are both
/// nonzero: the only candidate natural maps between sums of intervals
/// that act diagonally on summands.
fn diagonal_interval_map(
    source: &Arc<PersistenceModule>,
    target: &Arc<PersistenceModule>,
    source_parts: &[PersistenceModule],
    target_parts: &[PersistenceModule],
) -> Result<NatTransform> {
    let grid = source.grid();
    let f = source.field();
    let comps = grid
        .points()
        .map(|t| {
            let blocks: Vec<Matrix> = source_parts
                .iter()
                .zip(target_parts)
                .map(|(s, u)| {
                    let (c, r) = (s.dim(&t), u.dim(&t));
                    if r == 1 && c == 1 {
                        Matrix::identity(f, 1)
                    } else {
                        Matrix::zeros(f, r, c)
                    }
                })
                .collect();
            Matrix::block_diagonal(f, &blocks).map_err(Error::from)
        })
        .collect::<Result<Vec<_>>>()?;
    NatTransform::new(source.clone(), target.clone(), comps)
}

/// Builds `(M, N, certificate)` from a direct sum of box intervals by
/// shifting or eroding; the seed picks the construction and the summand.
pub fn make_perturbed_pair(
    grid: &GridPoset,
    field: Field,
    boxes: &[GridBox],
    delta: usize,
    seed: u64,
) -> Result<PerturbedPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mode = if boxes.is_empty() || rng.gen_bool(0.5) {
        Perturbation::Shift
    } else {
        Perturbation::Erode {
            summand: rng.gen_range(0..boxes.len()),
        }
    };
    make_perturbed_pair_with(grid, field, boxes, delta, mode)
}

pub fn make_perturbed_pair_with(
    grid: &GridPoset,
    field: Field,
    boxes: &[GridBox],
    delta: usize,
    mode: Perturbation,
) -> Result<PerturbedPair> {
    let eps = vec![delta; grid.nparams()];
    let parts = boxes
        .iter()
        .map(|b| PersistenceModule::interval_on_box(grid.clone(), field, b))
        .collect::<Result<Vec<_>>>()?;
    let m = Arc::new(PersistenceModule::direct_sum_all(grid, field, &parts)?);
    let m_eps = Arc::new(m.shift(&eps)?);
    match mode {
        Perturbation::Shift => {
            let twice: Vec<usize> = eps.iter().map(|e| 2 * e).collect();
            let n = m_eps.clone();
            let phi = NatTransform::internal_transition(m.clone(), &twice)?;
            let phi = NatTransform::new(m.clone(), Arc::new(n.shift(&eps)?), phi.components().to_vec())?;
            let psi = NatTransform::identity(n.clone());
            Ok(PerturbedPair {
                m: (*m).clone(),
                n: (*n).clone(),
                certificate: InterleavingCertificate { epsilon: eps, phi, psi },
                perturbation: mode,
            })
        }
        Perturbation::Erode { summand } => {
            if summand >= boxes.len() {
                return Err(Error::Invalid(format!("no summand {summand}")));
            }
            let mut n_parts = parts.clone();
            let b = &boxes[summand];
            let eroded = b.upper.checked_sub(&eps).filter(|u| b.lower.le(u));
            n_parts[summand] = match eroded {
                Some(u) => PersistenceModule::interval_on_box(grid.clone(), field, &GridBox::new(b.lower.clone(), u)?)?,
                None => PersistenceModule::zero(grid.clone(), field),
            };
            let n = Arc::new(PersistenceModule::direct_sum_all(grid, field, &n_parts)?);
            let n_eps = Arc::new(n.shift(&eps)?);
            let shift_parts = |ps: &[PersistenceModule]| -> Result<Vec<PersistenceModule>> {
                ps.iter().map(|x| x.shift(&eps)).collect()
            };
            let phi = diagonal_interval_map(&m, &n_eps, &parts, &shift_parts(&n_parts)?)?;
            let psi = diagonal_interval_map(&n, &m_eps, &n_parts, &shift_parts(&parts)?)?;
            Ok(PerturbedPair {
                m: (*m).clone(),
                n: (*n).clone(),
                certificate: InterleavingCertificate { epsilon: eps, phi, psi },
                perturbation: mode,
            })
        }
    }
}

/// Largest entrywise difference of the self-LNTI tables.
pub fn lnti_drift(m: &PersistenceModule, n: &PersistenceModule) -> Result<usize> {
    Ok(lnti_self(m, None)?.max_count_diff(&lnti_self(n, None)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GF2: Field = Field::GF2;

    fn fixture() -> (GridPoset, Vec<GridBox>) {
        let g = GridPoset::range(&[5, 5]).unwrap();
        let boxes = vec![
            GridBox::new([0, 0], [3, 2]).unwrap(),
            GridBox::new([1, 2], [4, 4]).unwrap(),
        ];
        (g, boxes)
    }

    #[test]
    fn identity_is_zero_interleaving() {
        let (g, boxes) = fixture();
        let parts: Vec<_> = boxes
            .iter()
            .map(|b| PersistenceModule::interval_on_box(g.clone(), GF2, b).unwrap())
            .collect();
        let m = Arc::new(PersistenceModule::direct_sum_all(&g, GF2, &parts).unwrap());
        let id = NatTransform::identity(m.clone());
        let id0 = NatTransform::new(m.clone(), Arc::new(m.shift(&[0, 0]).unwrap()), id.components().to_vec()).unwrap();
        let cert = InterleavingCertificate {
            epsilon: vec![0, 0],
            phi: id0.clone(),
            psi: id0,
        };
        assert!(verify_interleaving(&m, &m, &cert).unwrap());
    }

    #[test]
    fn constructed_pairs_verify() {
        let (g, boxes) = fixture();
        for delta in 0..3 {
            for mode in [
                Perturbation::Shift,
                Perturbation::Erode { summand: 0 },
                Perturbation::Erode { summand: 1 },
            ] {
                let pair = make_perturbed_pair_with(&g, GF2, &boxes, delta, mode).unwrap();
                let f = interleaving_failures(&pair.m, &pair.n, &pair.certificate).unwrap();
                assert!(f.is_empty(), "delta {delta} {mode:?}: {f:?}");
            }
        }
    }

    #[test]
    fn broken_certificate_is_rejected() {
        let (g, boxes) = fixture();
        let pair = make_perturbed_pair_with(&g, GF2, &boxes, 1, Perturbation::Shift).unwrap();
        let mut cert = pair.certificate.clone();
        cert.phi = NatTransform::zero(cert.phi.source().clone(), cert.phi.target().clone()).unwrap();
        let f = interleaving_failures(&pair.m, &pair.n, &cert).unwrap();
        assert!(matches!(f[0], InterleavingFailure::TriangleM { .. }));
    }

    #[test]
    fn search_finds_shift_certificate() {
        let g = GridPoset::range(&[4, 4]).unwrap();
        let boxes = vec![GridBox::new([1, 1], [3, 3]).unwrap()];
        let pair = make_perturbed_pair_with(&g, GF2, &boxes, 1, Perturbation::Shift).unwrap();
        match search_interleaving(&pair.m, &pair.n, &[1, 1], 1 << 12).unwrap() {
            SearchOutcome::Found(c) => assert!(verify_interleaving(&pair.m, &pair.n, &c).unwrap()),
            other => panic!("expected a certificate, got {other:?}"),
        }
        assert!(matches!(
            search_interleaving(&pair.m, &pair.n, &[0, 0], 1 << 12).unwrap(),
            SearchOutcome::NoneExists
        ));
        let d = interleaving_distance_upper(&pair.m, &pair.n, 1 << 12).unwrap();
        assert_eq!(
            d,
            DistanceBound {
                epsilon: Some(1),
                complete: true
            }
        );
    }

    #[test]
    fn budget_is_reported() {
        let g = GridPoset::range(&[3, 3]).unwrap();
        let m = PersistenceModule::constant(g, GF2, 2);
        assert!(matches!(
            search_interleaving(&m, &m, &[0, 0], 1).unwrap(),
            SearchOutcome::BudgetExceeded { .. }
        ));
    }
}
