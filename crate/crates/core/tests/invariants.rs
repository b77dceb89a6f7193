use std::sync::Arc;

use mpers2::bifiltration::{build_bifiltration, homology_module, PointCloud};
use mpers2::entropy::spectrum;
use mpers2::lnti::{hom_space_dim, lnti_table, refine_grid};
use mpers2::mbi::{decompose, end_algebra, find_idempotent, split};
use mpers2::random::{random_interval_decomposable, random_module, scramble};
use mpers2::rank::rank_at;
use mpers2::{Field, GridBox, GridPoint, GridPoset, Matrix, PersistenceModule};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIELDS: [Field; 3] = [Field::GF2, Field::Prime(5), Field::Rational];

fn module(seed: u64, shape: &[usize], field_ix: usize) -> PersistenceModule {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_module(&GridPoset::range(shape).unwrap(), FIELDS[field_ix % 3], 2, &mut rng)
}

fn random_box(g: &GridPoset, rng: &mut impl Rng) -> GridBox {
    let shape = g.shape();
    let lo: Vec<usize> = shape.iter().map(|s| rng.gen_range(0..*s)).collect();
    let hi: Vec<usize> = lo.iter().zip(&shape).map(|(l, s)| rng.gen_range(*l..*s)).collect();
    GridBox::new(lo, hi).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transitions_are_path_independent(seed in any::<u64>(), f in 0usize..3) {
        let m = module(seed, &[3, 3], f);
        prop_assert!(m.validate().is_empty());
        for (a, b) in m.grid().comparable_pairs(None) {
            // the column-first path through (a0, b1)
            let mid = GridPoint::from([a.0[0], b.0[1]]);
            let other = m.transition(&a, &mid).unwrap();
            let other = m.transition(&mid, &b).unwrap().multiply(&other).unwrap();
            prop_assert_eq!(m.transition(&a, &b).unwrap(), other);
        }
    }

    #[test]
    fn restriction_commutes_with_transition(seed in any::<u64>(), f in 0usize..3) {
        let m = module(seed, &[3, 4], f);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let bx = random_box(m.grid(), &mut rng);
        let r = m.restrict(&bx).unwrap();
        for (a, b) in r.grid().comparable_pairs(None) {
            let shifted = m.transition(&a.offset(&bx.lower.0), &b.offset(&bx.lower.0)).unwrap();
            prop_assert_eq!(r.transition(&a, &b).unwrap(), shifted);
        }
    }

    #[test]
    fn hom_dimension_is_additive(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>(), f in 0usize..3) {
        let (m1, m2, n) = (module(s1, &[2, 3], f), module(s2, &[2, 3], f), module(s3, &[2, 3], f));
        let sum = m1.direct_sum(&m2).unwrap();
        let left = lnti_table(&sum, &n, None).unwrap();
        let a = lnti_table(&m1, &n, None).unwrap();
        let b = lnti_table(&m2, &n, None).unwrap();
        for (x, y, v) in left.iter() {
            prop_assert_eq!(*v, a.get(x, y).unwrap() + b.get(x, y).unwrap());
        }
        let right = lnti_table(&n, &sum, None).unwrap();
        let a = lnti_table(&n, &m1, None).unwrap();
        let b = lnti_table(&n, &m2, None).unwrap();
        for (x, y, v) in right.iter() {
            prop_assert_eq!(*v, a.get(x, y).unwrap() + b.get(x, y).unwrap());
        }
    }

    #[test]
    fn rank_is_monotone_and_bounded(seed in any::<u64>(), f in 0usize..3) {
        let m = module(seed, &[3, 3], f);
        let g = m.grid().clone();
        let selfs = lnti_table(&m, &m, None).unwrap();
        for (a, b) in g.comparable_pairs(None) {
            let r = rank_at(&m, &a, &b).unwrap();
            prop_assert!(r <= m.dim(&a).min(m.dim(&b)));
            for (a2, b2) in g.comparable_pairs(Some(&GridBox::new(a.clone(), b.clone()).unwrap())) {
                prop_assert!(rank_at(&m, &a2, &b2).unwrap() >= r);
            }
            let nonzero = GridBox::new(a.clone(), b.clone()).unwrap().points().any(|p| m.dim(&p) > 0);
            prop_assert!(!nonzero || *selfs.get(&a, &b).unwrap() >= 1);
        }
    }

    #[test]
    fn entropy_is_bounded_and_scale_free(seed in any::<u64>()) {
        let q = Field::Rational;
        let m = module(seed, &[3, 3], 2);
        let bases: Vec<Matrix> = (0..m.grid().len())
            .map(|l| Matrix::identity(q, m.dim_linear(l)).scale(&q.from_i64(1 + l as i64)).unwrap())
            .collect();
        let scaled = m.change_basis(&bases).unwrap();
        for (a, b) in m.grid().comparable_pairs(None) {
            let s = spectrum(&m, &a, &b).unwrap();
            let h = s.entropy();
            let cap = (s.values.len().max(1) as f64).ln();
            prop_assert!(h >= 0.0 && h <= cap + 1e-12);
            let t = spectrum(&scaled, &a, &b).unwrap();
            prop_assert_eq!(s.values.len(), t.values.len());
            prop_assert!((h - t.entropy()).abs() < 1e-9);
        }
    }

    #[test]
    fn split_witness_is_isomorphism(seed in any::<u64>(), f in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = GridPoset::range(&[3, 3]).unwrap();
        let (m, _) = random_interval_decomposable(&g, FIELDS[f], 2, 3, &mut rng);
        let m = Arc::new(scramble(&m, &mut rng));
        let search = find_idempotent(&end_algebra(&m).unwrap()).unwrap();
        if let Some(e) = search.idempotent {
            let s = split(&m, &e).unwrap();
            prop_assert!(s.witness.is_isomorphism());
            prop_assert_eq!(s.image.total_dim() + s.kernel.total_dim(), m.total_dim());
        }
        let d = decompose(&m).unwrap();
        prop_assert!(d.witness.is_isomorphism());
        for summand in &d.summands {
            prop_assert!(summand.validate().is_empty());
        }
    }

    #[test]
    fn refinement_preserves_hom_on_coarse_boxes(seed in any::<u64>(), f in 0usize..3) {
        let m = module(seed, &[3, 2], f);
        let fine = refine_grid(&m, &[vec![0.5, 1.5], vec![]]).unwrap();
        prop_assert!(fine.validate().is_empty());
        // coarse index i sits at fine index 2i on axis 0
        let lift = |p: &GridPoint| GridPoint::from([2 * p.0[0], p.0[1]]);
        for (a, b) in m.grid().comparable_pairs(None) {
            prop_assert_eq!(
                m.transition(&a, &b).unwrap(),
                fine.transition(&lift(&a), &lift(&b)).unwrap()
            );
        }
        let coarse = hom_space_dim(&m, &m, &m.grid().full_box()).unwrap();
        let refined = hom_space_dim(&fine, &fine, &fine.grid().full_box()).unwrap();
        prop_assert_eq!(coarse, refined);
    }

    #[test]
    fn euler_characteristic_matches_homology(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(3..7);
        let points: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0)]).collect();
        let cloud = PointCloud::new(points, None).unwrap();
        let bif = build_bifiltration(&cloud, &[0.3, 0.9, 1.6, 3.0], &[0.2, 1.0, 2.5], 2, 2).unwrap();
        let h0 = homology_module(&bif, 0).unwrap();
        let h1 = homology_module(&bif, 1).unwrap();
        for p in bif.grid().points() {
            let counts: Vec<i64> = (0..=2).map(|k| bif.simplices_at(&p, k).len() as i64).collect();
            let faces: Vec<&[usize]> = bif.simplices_at(&p, 1);
            let tris: Vec<&[usize]> = bif.simplices_at(&p, 2);
            let rank2 = mpers2::bifiltration::boundary_matrix(&faces, &tris).rank() as i64;
            let beta2 = counts[2] - rank2;
            let chi = counts[0] - counts[1] + counts[2];
            prop_assert_eq!(chi, h0.dim(&p) as i64 - h1.dim(&p) as i64 + beta2);
        }
    }
}
