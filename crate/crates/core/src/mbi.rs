//! Endomorphism algebras, idempotents, splitting and decomposition.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Scalar};
use crate::grid::{GridBox, GridPoint};
use crate::lnti::hom_basis;
use crate::matrix::Matrix;
use crate::module::PersistenceModule;
use crate::natural::{NatTransform, NaturalityFailure};
use crate::polynomial::Polynomial;
use crate::random::random_scalar;
use crate::table::InvariantTable;

/// Largest algebra size searched exhaustively for idempotents.
pub const EXHAUSTIVE_LIMIT: u64 = 1 << 16;

/// Random combinations tried after the basis elements.
const RANDOM_CANDIDATES: usize = 24;

/// `End(M)` with a basis of natural self-maps.
#[derive(Clone, Debug)]
pub struct EndAlgebra {
    module: Arc<PersistenceModule>,
    basis: Vec<NatTransform>,
}

impl EndAlgebra {
    pub fn module(&self) -> &Arc<PersistenceModule> {
        &self.module
    }

    pub fn basis(&self) -> &[NatTransform] {
        &self.basis
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// `sum_i coeffs[i] * basis[i]`.
    pub fn combination(&self, coeffs: &[Scalar]) -> Result<NatTransform> {
        let mut acc = NatTransform::zero(self.module.clone(), self.module.clone())?;
        for (c, b) in coeffs.iter().zip(&self.basis) {
            if !c.is_zero() {
                acc = acc.add(&b.scale(c)?)?;
            }
        }
        Ok(acc)
    }
}

pub fn end_algebra(m: &Arc<PersistenceModule>) -> Result<EndAlgebra> {
    Ok(EndAlgebra {
        module: m.clone(),
        basis: hom_basis(m, m, None)?,
    })
}

/// Outcome of an idempotent search.
///
/// `complete` is true when the answer is certain: an idempotent was found,
/// or the whole algebra was enumerated.
#[derive(Clone, Debug)]
pub struct IdempotentSearch {
    pub idempotent: Option<NatTransform>,
    pub complete: bool,
}

/// Looks for an idempotent other than `0` and `1`, using seed 0.
pub fn find_idempotent(e: &EndAlgebra) -> Result<IdempotentSearch> {
    find_idempotent_seeded(e, 0)
}

/// Splits minimal polynomials of basis elements and of seeded random
/// combinations into coprime parts; falls back to enumerating the algebra
/// over GF(p) when it has at most `EXHAUSTIVE_LIMIT` elements.
pub fn find_idempotent_seeded(e: &EndAlgebra, seed: u64) -> Result<IdempotentSearch> {
    let field = e.module.field();
    let found = |idem| IdempotentSearch {
        idempotent: Some(idem),
        complete: true,
    };
    if e.dimension() <= 1 {
        return Ok(IdempotentSearch {
            idempotent: None,
            complete: true,
        });
    }
    for b in &e.basis {
        if let Some(idem) = split_by_minimal_polynomial(b)? {
            return Ok(found(idem));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_CANDIDATES {
        let coeffs: Vec<Scalar> = (0..e.dimension()).map(|_| random_scalar(field, &mut rng)).collect();
        let phi = e.combination(&coeffs)?;
        if let Some(idem) = split_by_minimal_polynomial(&phi)? {
            return Ok(found(idem));
        }
    }
    if let Field::Prime(p) = field {
        let size = (p as u64).checked_pow(e.dimension() as u32);
        if size.is_some_and(|s| s <= EXHAUSTIVE_LIMIT) {
            return Ok(IdempotentSearch {
                idempotent: exhaustive_idempotent(e, p)?,
                complete: true,
            });
        }
    }
    Ok(IdempotentSearch {
        idempotent: None,
        complete: false,
    })
}

fn lcm(a: &Polynomial, b: &Polynomial) -> Polynomial {
    a.mul(b).div_rem(&a.gcd(b)).0.monic()
}

/// Minimal polynomial of the fused map on the direct sum of all fibers,
/// i.e. the lcm of the componentwise minimal polynomials.
pub fn fused_minimal_polynomial(phi: &NatTransform) -> Result<Polynomial> {
    let mut acc = Polynomial::one(phi.source().field());
    for c in phi.components() {
        if c.rows() > 0 {
            acc = lcm(&acc, &c.minimal_polynomial()?);
        }
    }
    Ok(acc)
}

/// If the minimal polynomial `mu` of `phi` factors as `A * B` with coprime
/// non-constant `A`, `B`, returns `(v B)(phi)` where `u A + v B = 1`: the
/// projection onto the generalized eigencomponent of `B`'s complement.
fn split_by_minimal_polynomial(phi: &NatTransform) -> Result<Option<NatTransform>> {
    let mu = fused_minimal_polynomial(phi)?;
    let field = mu.field();
    let primary = match field {
        Field::Prime(_) => {
            let factors = mu.factor_squarefree_gfp()?;
            if factors.len() < 2 {
                return Ok(None);
            }
            factors[0].0.pow(factors[0].1)
        }
        Field::Rational => {
            let (roots, _) = mu.rational_roots()?;
            let Some((r, k)) = roots.first() else {
                return Ok(None);
            };
            let linear = Polynomial::new(field, vec![Scalar::Rational(Box::new(-r.clone())), field.one()]);
            let a = linear.pow(*k);
            if a.degree() == mu.degree() {
                return Ok(None);
            }
            a
        }
    };
    let (rest, rem) = mu.div_rem(&primary);
    debug_assert!(rem.is_zero());
    let (g, _, v) = primary.xgcd(&rest);
    debug_assert!(g.degree() == Some(0));
    let poly = v.mul(&rest);
    let components = phi
        .components()
        .iter()
        .map(|c| poly.eval_matrix(c).map_err(Error::from))
        .collect::<Result<Vec<_>>>()?;
    Ok(Some(NatTransform::new(
        phi.source().clone(),
        phi.target().clone(),
        components,
    )?))
}

fn exhaustive_idempotent(e: &EndAlgebra, p: u32) -> Result<Option<NatTransform>> {
    let p64 = p as u64;
    let d = e.dimension();
    // flattened fused blocks as residues
    let flat: Vec<Vec<Vec<u64>>> = e
        .basis
        .iter()
        .map(|b| {
            b.components()
                .iter()
                .map(|c| c.data().iter().map(|s| s.as_mod().unwrap() as u64).collect())
                .collect()
        })
        .collect();
    let dims = e.module.dims();
    let total = p64.pow(d as u32);
    let mut coeffs = vec![0u64; d];
    for code in 0..total {
        let mut x = code;
        for c in coeffs.iter_mut() {
            *c = x % p64;
            x /= p64;
        }
        let mut nonzero = false;
        let mut non_identity = false;
        let mut idempotent = true;
        for (lin, &n) in dims.iter().enumerate() {
            if n == 0 {
                continue;
            }
            let mut m = vec![0u64; n * n];
            for (k, c) in coeffs.iter().enumerate() {
                if *c != 0 {
                    for (slot, v) in m.iter_mut().zip(&flat[k][lin]) {
                        *slot = (*slot + c * v) % p64;
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0;
                    for k in 0..n {
                        s = (s + m[i * n + k] * m[k * n + j]) % p64;
                    }
                    if s != m[i * n + j] {
                        idempotent = false;
                    }
                    if m[i * n + j] != 0 {
                        nonzero = true;
                    }
                    if m[i * n + j] != u64::from(i == j) {
                        non_identity = true;
                    }
                }
            }
            if !idempotent {
                break;
            }
        }
        if idempotent && nonzero && non_identity {
            let field = e.module.field();
            let coeffs: Vec<Scalar> = coeffs.iter().map(|c| field.element(*c as u32)).collect();
            return Ok(Some(e.combination(&coeffs)?));
        }
    }
    Ok(None)
}

/// A comparable pair where an idempotent candidate fails to respect the
/// transition: the transition restricted to the image of `e_a` (or of
/// `1 - e_a`) loses rank once projected by `e_b` (or `1 - e_b`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankFailure {
    pub a: GridPoint,
    pub b: GridPoint,
    /// `true` for the complementary projection `1 - e`.
    pub complement: bool,
    /// `rank(M(a, b) e_a)`.
    pub transported_rank: usize,
    /// `rank(e_b M(a, b) e_a)`.
    pub projected_rank: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IdempotentReport {
    /// Points where `e_t e_t != e_t`.
    pub not_idempotent: Vec<GridPoint>,
    pub naturality: Vec<NaturalityFailure>,
    pub rank: Vec<RankFailure>,
}

impl IdempotentReport {
    pub fn is_valid(&self) -> bool {
        self.not_idempotent.is_empty() && self.naturality.is_empty() && self.rank.is_empty()
    }
}

/// Checks `e^2 = e`, naturality, and that for every comparable pair the
/// transition carries the image of `e_a` onto something of the same rank
/// inside the image of `e_b` (and likewise for `1 - e`).
pub fn verify_idempotent(m: &PersistenceModule, e: &NatTransform) -> Result<IdempotentReport> {
    if e.source().dims() != m.dims() || e.target().dims() != m.dims() || e.source().grid() != m.grid() {
        return Err(Error::InvalidIdempotent("not a self-map of the module".into()));
    }
    let grid = m.grid();
    let field = m.field();
    let mut report = IdempotentReport {
        naturality: e.naturality_failures(),
        ..Default::default()
    };
    for (lin, c) in e.components().iter().enumerate() {
        if c.multiply(c)? != *c {
            report.not_idempotent.push(grid.point(lin));
        }
    }
    if !report.not_idempotent.is_empty() {
        return Ok(report);
    }
    let complements: Vec<Matrix> = e
        .components()
        .iter()
        .map(|c| Matrix::identity(field, c.rows()).sub(c))
        .collect::<std::result::Result<_, _>>()?;
    for (a, b) in grid.comparable_pairs(None) {
        if a == b {
            continue;
        }
        let t = m.transition(&a, &b)?;
        let (la, lb) = (grid.linear(&a), grid.linear(&b));
        for (complement, proj) in [(false, e.components()), (true, &complements[..])] {
            let moved = t.multiply(&proj[la])?;
            let transported_rank = moved.rank();
            let projected_rank = proj[lb].multiply(&moved)?.rank();
            if projected_rank != transported_rank {
                report.rank.push(RankFailure {
                    a: a.clone(),
                    b: b.clone(),
                    complement,
                    transported_rank,
                    projected_rank,
                });
            }
        }
    }
    Ok(report)
}

/// The two pieces of a split module and the isomorphism
/// `image ⊕ kernel -> M`.
#[derive(Clone, Debug)]
pub struct Split {
    pub image: PersistenceModule,
    pub kernel: PersistenceModule,
    pub witness: NatTransform,
}

/// Splits `M` along a verified idempotent into `im(e) ⊕ ker(e)`.
pub fn split(m: &Arc<PersistenceModule>, e: &NatTransform) -> Result<Split> {
    let report = verify_idempotent(m, e)?;
    if !report.is_valid() {
        return Err(Error::InvalidIdempotent(describe_report(&report)));
    }
    let image_bases: Vec<Matrix> = e.components().iter().map(|c| c.column_space_basis()).collect();
    let kernel_bases: Vec<Matrix> = e.components().iter().map(|c| c.kernel_matrix()).collect();
    let image = submodule(m, &image_bases)?;
    let kernel = submodule(m, &kernel_bases)?;
    let components = image_bases
        .iter()
        .zip(&kernel_bases)
        .map(|(x, y)| x.hstack(y).map_err(Error::from))
        .collect::<Result<Vec<_>>>()?;
    let witness = NatTransform::new(Arc::new(image.direct_sum(&kernel)?), m.clone(), components)?;
    Ok(Split { image, kernel, witness })
}

fn describe_report(r: &IdempotentReport) -> String {
    if let Some(p) = r.not_idempotent.first() {
        return format!("e*e != e at {p}");
    }
    if let Some(f) = r.naturality.first() {
        return format!("not natural on the edge at {} along axis {}", f.point, f.axis);
    }
    if let Some(f) = r.rank.first() {
        return format!(
            "rank drops from {} to {} between {} and {}",
            f.transported_rank, f.projected_rank, f.a, f.b
        );
    }
    "ok".into()
}

/// The submodule spanned pointwise by the columns of `bases`, with edge
/// maps expressed in those bases.
fn submodule(m: &PersistenceModule, bases: &[Matrix]) -> Result<PersistenceModule> {
    let grid = m.grid();
    let dims = bases.iter().map(|b| b.cols()).collect();
    let mut out = PersistenceModule::with_dims(grid.clone(), m.field(), dims)?;
    for lin in 0..grid.len() {
        let p = grid.point(lin);
        for axis in 0..grid.nparams() {
            let Some(q) = grid.step(&p, axis) else { continue };
            let pushed = m.map_linear(lin, axis).unwrap().multiply(&bases[lin])?;
            let edge = bases[grid.linear(&q)]
                .solve(&pushed)?
                .ok_or_else(|| Error::InvalidIdempotent(format!("summand not closed along the edge at {p}")))?;
            out.set_map(&p, axis, edge)?;
        }
    }
    Ok(out)
}

/// Indecomposable summands, sorted by dimension vector, with the
/// isomorphism `⊕ summands -> M`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub summands: Vec<PersistenceModule>,
    pub witness: NatTransform,
    /// Every summand was certified indecomposable (no idempotent exists).
    pub complete: bool,
}

impl Decomposition {
    pub fn dimension_vectors(&self) -> Vec<Vec<usize>> {
        self.summands.iter().map(|s| s.dimension_vector()).collect()
    }
}

pub fn decompose(m: &Arc<PersistenceModule>) -> Result<Decomposition> {
    decompose_seeded(m, 0)
}

pub fn decompose_seeded(m: &Arc<PersistenceModule>, seed: u64) -> Result<Decomposition> {
    let field = m.field();
    let identity: Vec<Matrix> = m.dims().iter().map(|d| Matrix::identity(field, *d)).collect();
    // pending pieces with their inclusion into M
    let mut pending = vec![((**m).clone(), identity)];
    let mut done: Vec<(PersistenceModule, Vec<Matrix>)> = Vec::new();
    let mut complete = true;
    while let Some((piece, inclusion)) = pending.pop() {
        if piece.is_zero() {
            continue;
        }
        let piece = Arc::new(piece);
        let search = find_idempotent_seeded(&end_algebra(&piece)?, seed)?;
        match search.idempotent {
            None => {
                complete &= search.complete;
                done.push(((*piece).clone(), inclusion));
            }
            Some(e) => {
                let s = split(&piece, &e)?;
                let (d1, d2) = (s.image.dims().to_vec(), s.kernel.dims().to_vec());
                let mut inc1 = Vec::with_capacity(inclusion.len());
                let mut inc2 = Vec::with_capacity(inclusion.len());
                for (lin, (inc, w)) in inclusion.iter().zip(s.witness.components()).enumerate() {
                    let full = inc.multiply(w)?;
                    inc1.push(full.submatrix(0, 0, full.rows(), d1[lin]));
                    inc2.push(full.submatrix(0, d1[lin], full.rows(), d2[lin]));
                }
                pending.push((s.kernel, inc2));
                pending.push((s.image, inc1));
            }
        }
    }
    done.sort_by(|x, y| x.0.dims().cmp(y.0.dims()));
    let grid = m.grid();
    let summands: Vec<PersistenceModule> = done.iter().map(|(s, _)| s.clone()).collect();
    let sum = Arc::new(PersistenceModule::direct_sum_all(grid, field, &summands)?);
    let components = (0..grid.len())
        .map(|lin| {
            let blocks: Vec<Matrix> = done.iter().map(|(_, inc)| inc[lin].clone()).collect();
            Matrix::hconcat(field, m.dim_linear(lin), &blocks).map_err(Error::from)
        })
        .collect::<Result<Vec<_>>>()?;
    let witness = NatTransform::new(sum, m.clone(), components)?;
    Ok(Decomposition {
        summands,
        witness,
        complete,
    })
}

/// Per-box summary of a module.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MbiSignature {
    pub a: GridPoint,
    pub b: GridPoint,
    pub betti_a: usize,
    pub betti_b: usize,
    pub rank_ab: usize,
    /// Singular values of `M(a, b)`; `None` over GF(p), where no real
    /// embedding is canonical.
    pub svd: Option<Vec<f64>>,
    /// Dimensions at `a` of the indecomposable summands of `M|[a,b]`,
    /// ascending; summands vanishing at `a` contribute 0.
    pub idempotent_ranks: Vec<usize>,
    pub complete: bool,
}

pub fn mbi_signature(m: &PersistenceModule, a: &GridPoint, b: &GridPoint) -> Result<MbiSignature> {
    let t = m.transition(a, b)?;
    let svd = match m.field() {
        Field::Rational => Some(t.svd_real()?),
        Field::Prime(_) => None,
    };
    let region = GridBox::new(a.clone(), b.clone())?;
    let local = Arc::new(m.restrict(&region)?);
    let d = decompose(&local)?;
    let origin = local.grid().lowest();
    let mut ranks: Vec<usize> = d.summands.iter().map(|s| s.dim(&origin)).collect();
    ranks.sort_unstable();
    Ok(MbiSignature {
        a: a.clone(),
        b: b.clone(),
        betti_a: m.dim(a),
        betti_b: m.dim(b),
        rank_ab: t.rank(),
        svd,
        idempotent_ranks: ranks,
        complete: d.complete,
    })
}

pub fn mbi_table(m: &PersistenceModule, within: Option<&GridBox>) -> Result<InvariantTable<MbiSignature>> {
    if let Some(b) = within {
        m.grid().check_box(b)?;
    }
    let pairs = m.grid().comparable_pairs(within);
    let values = pairs
        .par_iter()
        .map(|(a, b)| mbi_signature(m, a, b))
        .collect::<Result<Vec<_>>>()?;
    Ok(InvariantTable::from_entries(
        m.grid().clone(),
        pairs.into_iter().zip(values),
    ))
}

/// Draws a uniformly random element of the algebra; used by tests.
pub fn random_endomorphism<R: Rng + ?Sized>(e: &EndAlgebra, rng: &mut R) -> Result<NatTransform> {
    let coeffs: Vec<Scalar> = (0..e.dimension())
        .map(|_| random_scalar(e.module.field(), rng))
        .collect();
    e.combination(&coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridPoset;

    const GF2: Field = Field::GF2;

    fn boxed(g: &GridPoset, lo: [usize; 2], hi: [usize; 2]) -> PersistenceModule {
        PersistenceModule::interval_on_box(g.clone(), GF2, &GridBox::new(lo, hi).unwrap()).unwrap()
    }

    #[test]
    fn interval_is_indecomposable() {
        let g = GridPoset::range(&[3, 3]).unwrap();
        let m = Arc::new(boxed(&g, [0, 0], [1, 2]));
        let e = end_algebra(&m).unwrap();
        assert_eq!(e.dimension(), 1);
        let s = find_idempotent(&e).unwrap();
        assert!(s.idempotent.is_none() && s.complete);
    }

    #[test]
    fn incomparable_sum_splits() {
        let g = GridPoset::range(&[3, 3]).unwrap();
        let a = boxed(&g, [0, 2], [0, 2]);
        let b = boxed(&g, [2, 0], [2, 0]);
        let m = Arc::new(a.direct_sum(&b).unwrap());
        let e = end_algebra(&m).unwrap();
        assert_eq!(e.dimension(), 2);
        let idem = find_idempotent(&e).unwrap().idempotent.unwrap();
        assert!(verify_idempotent(&m, &idem).unwrap().is_valid());
        let s = split(&m, &idem).unwrap();
        let mut dims = [s.image.dimension_vector(), s.kernel.dimension_vector()];
        dims.sort();
        let mut expected = [a.dimension_vector(), b.dimension_vector()];
        expected.sort();
        assert_eq!(dims, expected);
        assert!(s.witness.is_isomorphism());
    }

    #[test]
    fn repeated_summand_splits_in_halves() {
        let g = GridPoset::range(&[2, 2]).unwrap();
        let a = boxed(&g, [0, 0], [1, 1]);
        let m = Arc::new(a.direct_sum(&a).unwrap());
        let idem = find_idempotent(&end_algebra(&m).unwrap()).unwrap().idempotent.unwrap();
        for c in idem.components() {
            assert_eq!(c.rank(), 1);
        }
        let d = decompose(&m).unwrap();
        assert_eq!(d.summands.len(), 2);
        assert!(d.complete);
        assert!(d.witness.is_isomorphism());
    }

    #[test]
    fn trivial_idempotents_verify() {
        let g = GridPoset::range(&[2, 2]).unwrap();
        let m = Arc::new(
            boxed(&g, [0, 0], [1, 0])
                .direct_sum(&boxed(&g, [0, 0], [1, 1]))
                .unwrap(),
        );
        let id = NatTransform::identity(m.clone());
        assert!(verify_idempotent(&m, &id).unwrap().is_valid());
        let z = NatTransform::zero(m.clone(), m.clone()).unwrap();
        assert!(verify_idempotent(&m, &z).unwrap().is_valid());
    }

    #[test]
    fn zero_module_has_no_summands() {
        let g = GridPoset::range(&[2, 2]).unwrap();
        let d = decompose(&Arc::new(PersistenceModule::zero(g, GF2))).unwrap();
        assert!(d.summands.is_empty());
    }

    #[test]
    fn rational_module_splits_by_eigenvalues() {
        let g = GridPoset::range(&[2]).unwrap();
        let f = Field::Rational;
        let mut m = PersistenceModule::constant(g, f, 2);
        m.set_map(&GridPoint::from([0]), 0, Matrix::from_rows(f, &[[3, 0], [0, 1]]))
            .unwrap();
        let m = Arc::new(m);
        let d = decompose(&m).unwrap();
        assert_eq!(d.summands.len(), 2);
        assert!(d.witness.is_isomorphism());
        let sig = mbi_signature(&m, &GridPoint::from([0]), &GridPoint::from([1])).unwrap();
        let svd = sig.svd.unwrap();
        assert!((svd[0] - 3.0).abs() < 1e-10 && (svd[1] - 1.0).abs() < 1e-10);
        assert_eq!(sig.idempotent_ranks, vec![1, 1]);
    }

    #[test]
    fn signature_over_gf2_has_no_spectrum() {
        let g = GridPoset::range(&[3, 3]).unwrap();
        let m = boxed(&g, [0, 0], [2, 2])
            .direct_sum(&boxed(&g, [1, 1], [2, 2]))
            .unwrap();
        let sig = mbi_signature(&m, &GridPoint::from([0, 0]), &GridPoint::from([2, 2])).unwrap();
        assert_eq!(sig.svd, None);
        assert_eq!((sig.betti_a, sig.betti_b, sig.rank_ab), (1, 2, 1));
        assert_eq!(sig.idempotent_ranks, vec![0, 1]);
    }
}
