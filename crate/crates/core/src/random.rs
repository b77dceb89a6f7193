//! Seeded random modules for tests, benchmarks and the acceptance suite.

use std::sync::Arc;

use rand::Rng;

use crate::error::Result;
use crate::field::{Field, Scalar};
use crate::grid::{GridPoint, GridPoset};
use crate::lnti::hom_basis;
use crate::matrix::Matrix;
use crate::module::PersistenceModule;
use crate::natural::NatTransform;
use crate::support::Support;

pub fn random_scalar<R: Rng + ?Sized>(field: Field, rng: &mut R) -> Scalar {
    match field {
        Field::Prime(p) => field.element(rng.gen_range(0..p)),
        Field::Rational => Field::rational(rng.gen_range(-3..=3), rng.gen_range(1..=2)),
    }
}

pub fn random_matrix<R: Rng + ?Sized>(field: Field, rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let data = (0..rows * cols).map(|_| random_scalar(field, rng)).collect();
    Matrix::from_scalars(field, rows, cols, data).expect("consistent shape")
}

pub fn random_invertible<R: Rng + ?Sized>(field: Field, n: usize, rng: &mut R) -> Matrix {
    loop {
        let m = random_matrix(field, n, n, rng);
        if m.is_invertible() {
            return m;
        }
    }
}

/// A nonempty, order-convex, connected support.
///
/// Built as a component of `up(L) ∩ down(U)` for random generator sets,
/// which is convex because every monotone path between two of its points
/// stays inside.
pub fn random_support<R: Rng + ?Sized>(grid: &GridPoset, rng: &mut R) -> Support {
    let shape = grid.shape();
    let random_point = |rng: &mut R| GridPoint(shape.iter().map(|s| rng.gen_range(0..*s)).collect());
    loop {
        let lows: Vec<GridPoint> = (0..rng.gen_range(1..=2)).map(|_| random_point(rng)).collect();
        let highs: Vec<GridPoint> = (0..rng.gen_range(1..=2)).map(|_| random_point(rng)).collect();
        let s = Support::from_predicate(grid, |p| lows.iter().any(|l| l.le(p)) && highs.iter().any(|h| p.le(h)));
        let comps = s.components(grid);
        if !comps.is_empty() {
            let i = rng.gen_range(0..comps.len());
            return comps[i].clone();
        }
    }
}

/// A direct sum of random interval modules with pointwise dimension at most
/// `max_dim`, returned with the supports of its summands.
pub fn random_interval_decomposable<R: Rng + ?Sized>(
    grid: &GridPoset,
    field: Field,
    max_dim: usize,
    max_summands: usize,
    rng: &mut R,
) -> (PersistenceModule, Vec<Support>) {
    let target = rng.gen_range(1..=max_summands.max(1));
    let mut load = vec![0usize; grid.len()];
    let mut supports = Vec::new();
    let mut attempts = 0;
    while supports.len() < target && attempts < 20 * target {
        attempts += 1;
        let s = random_support(grid, rng);
        if (0..grid.len()).any(|l| s.contains_linear(l) && load[l] + 1 > max_dim) {
            continue;
        }
        for (l, v) in load.iter_mut().enumerate() {
            *v += usize::from(s.contains_linear(l));
        }
        supports.push(s);
    }
    let parts: Vec<PersistenceModule> = supports
        .iter()
        .map(|s| PersistenceModule::interval(grid.clone(), field, s).expect("convex support"))
        .collect();
    let m = PersistenceModule::direct_sum_all(grid, field, &parts).expect("compatible summands");
    (m, supports)
}

/// Applies a random change of basis at every point.
pub fn scramble<R: Rng + ?Sized>(m: &PersistenceModule, rng: &mut R) -> PersistenceModule {
    let bases: Vec<Matrix> = m.dims().iter().map(|d| random_invertible(m.field(), *d, rng)).collect();
    m.change_basis(&bases).expect("invertible bases")
}

/// A random valid module with pointwise dimension at most `max_dim`.
///
/// Half of the draws are scrambled interval-decomposable modules; the rest
/// are images of random morphisms between two such modules, which need not
/// decompose into intervals.
pub fn random_module<R: Rng + ?Sized>(
    grid: &GridPoset,
    field: Field,
    max_dim: usize,
    rng: &mut R,
) -> PersistenceModule {
    if rng.gen_bool(0.5) {
        let (m, _) = random_interval_decomposable(grid, field, max_dim, 2 * max_dim.max(1), rng);
        return scramble(&m, rng);
    }
    let (a, _) = random_interval_decomposable(grid, field, max_dim, 2 * max_dim.max(1), rng);
    let (b, _) = random_interval_decomposable(grid, field, max_dim + 1, 2 * max_dim.max(1) + 1, rng);
    match random_morphism(&Arc::new(a.clone()), &Arc::new(b), rng).and_then(|f| f.image()) {
        Ok((img, _)) => scramble(&img, rng),
        Err(_) => scramble(&a, rng),
    }
}

/// A uniformly weighted random combination of a basis of `Hom(M, N)`.
pub fn random_morphism<R: Rng + ?Sized>(
    source: &Arc<PersistenceModule>,
    target: &Arc<PersistenceModule>,
    rng: &mut R,
) -> Result<NatTransform> {
    let basis = hom_basis(source, target, None)?;
    let mut acc = NatTransform::zero(source.clone(), target.clone())?;
    for b in &basis {
        acc = acc.add(&b.scale(&random_scalar(source.field(), rng))?)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_modules_are_valid_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = GridPoset::range(&[3, 3]).unwrap();
        for _ in 0..30 {
            let m = random_module(&g, Field::GF2, 2, &mut rng);
            assert!(m.validate().is_empty());
            assert!(m.dims().iter().all(|d| *d <= 2));
        }
    }

    #[test]
    fn random_supports_are_convex_and_connected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = GridPoset::range(&[4, 3]).unwrap();
        for _ in 0..50 {
            let s = random_support(&g, &mut rng);
            assert!(s.check_convex(&g).is_ok());
            assert_eq!(s.components(&g).len(), 1);
        }
    }
}
