//! Small named modules used by tests, benchmarks and the command line.

use crate::field::Field;
use crate::grid::{GridBox, GridPoint, GridPoset};
use crate::matrix::Matrix;
use crate::module::PersistenceModule;
use crate::support::Support;

const GF2: Field = Field::GF2;

/// The grid `{1, 2, 3, 4}^2`.
pub fn grid_one_to_four() -> GridPoset {
    GridPoset::integer(&[4, 4], 1).expect("valid grid")
}

/// `I_[1,3)^2 ⊕ I_[2,4)^2` on `{1, 2, 3, 4}^2`, i.e. boxes with index
/// corners `(0,0)-(1,1)` and `(1,1)-(2,2)`.
pub fn two_square_sum() -> PersistenceModule {
    let g = grid_one_to_four();
    let a = PersistenceModule::interval_on_box(g.clone(), GF2, &two_square_boxes()[0]).expect("box");
    let b = PersistenceModule::interval_on_box(g, GF2, &two_square_boxes()[1]).expect("box");
    a.direct_sum(&b).expect("same grid")
}

pub fn two_square_boxes() -> [GridBox; 2] {
    [
        GridBox::new([0, 0], [1, 1]).expect("box"),
        GridBox::new([1, 1], [2, 2]).expect("box"),
    ]
}

/// An indecomposable GF(2) module on `{1, 2, 3, 4}^2` with a 2-dimensional
/// fiber at `(2,2)`.
///
/// Fibers (in coordinates) are `F` at `(1,2), (1,3), (2,1), (3,1), (2,3),
/// (3,2), (3,3)` and `F^2` at `(2,2)`. The two lower arms enter `(2,2)` as
/// `e1` and `e2`, and both upper arms leave it by `[1 1]`, which is the
/// configuration of four lines through a plane in general position. Its
/// endomorphisms are the scalars.
pub fn four_arm_module() -> PersistenceModule {
    let g = grid_one_to_four();
    // coordinates c map to indices c - 1
    let at = |x: usize, y: usize| GridPoint::from([x - 1, y - 1]);
    let mut dims = vec![0; g.len()];
    for (x, y) in [(1, 2), (1, 3), (2, 1), (3, 1), (2, 3), (3, 2), (3, 3)] {
        dims[g.linear(&at(x, y))] = 1;
    }
    dims[g.linear(&at(2, 2))] = 2;
    let mut m = PersistenceModule::with_dims(g, GF2, dims).expect("dims");
    let one = Matrix::identity(GF2, 1);
    let set =
        |m: &mut PersistenceModule, x, y, axis, mat: &Matrix| m.set_map(&at(x, y), axis, mat.clone()).expect("shape");
    set(&mut m, 1, 2, 0, &Matrix::from_rows(GF2, &[[1], [0]]));
    set(&mut m, 2, 1, 1, &Matrix::from_rows(GF2, &[[0], [1]]));
    set(&mut m, 2, 2, 0, &Matrix::from_rows(GF2, &[[1, 1]]));
    set(&mut m, 2, 2, 1, &Matrix::from_rows(GF2, &[[1, 1]]));
    set(&mut m, 1, 2, 1, &one);
    set(&mut m, 1, 3, 0, &one);
    set(&mut m, 2, 1, 0, &one);
    set(&mut m, 3, 1, 1, &one);
    set(&mut m, 2, 3, 0, &one);
    set(&mut m, 3, 2, 1, &one);
    m
}

/// On `{0,1,2}^2`: the interval on the corner `{(1,1), (1,2), (2,1)}` and
/// the sum of the two points `(1,0)` and `(0,1)` on the axes.
pub fn diagonal_axis_pair() -> (PersistenceModule, PersistenceModule) {
    let g = GridPoset::range(&[3, 3]).expect("valid grid");
    let corner = Support::from_points(
        &g,
        &[
            GridPoint::from([1, 1]),
            GridPoint::from([1, 2]),
            GridPoint::from([2, 1]),
        ],
    )
    .expect("points");
    let m = PersistenceModule::interval(g.clone(), GF2, &corner).expect("convex");
    let x =
        PersistenceModule::interval_on_box(g.clone(), GF2, &GridBox::new([1, 0], [1, 0]).expect("box")).expect("box");
    let y = PersistenceModule::interval_on_box(g, GF2, &GridBox::new([0, 1], [0, 1]).expect("box")).expect("box");
    (m, x.direct_sum(&y).expect("same grid"))
}

/// Two GF(2) modules on the `2 x 2` grid with equal rank invariants but
/// different self-LNTI at the full box.
///
/// The first is `I{(0,1),(1,1)} ⊕ I{(1,0),(1,1)}`; the second is
/// `I{(0,1),(1,0),(1,1)} ⊕ I{(1,1)}`.
pub fn rank_twins() -> (PersistenceModule, PersistenceModule) {
    let g = GridPoset::range(&[2, 2]).expect("valid grid");
    let interval = |pts: &[[usize; 2]]| {
        let pts: Vec<GridPoint> = pts.iter().map(|p| GridPoint::from(*p)).collect();
        PersistenceModule::interval(g.clone(), GF2, &Support::from_points(&g, &pts).expect("points")).expect("convex")
    };
    let left = interval(&[[0, 1], [1, 1]])
        .direct_sum(&interval(&[[1, 0], [1, 1]]))
        .expect("same grid");
    let right = interval(&[[0, 1], [1, 0], [1, 1]])
        .direct_sum(&interval(&[[1, 1]]))
        .expect("same grid");
    (left, right)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_validate() {
        assert!(two_square_sum().validate().is_empty());
        assert!(four_arm_module().validate().is_empty());
        let (a, b) = diagonal_axis_pair();
        assert!(a.validate().is_empty() && b.validate().is_empty());
        let (a, b) = rank_twins();
        assert!(a.validate().is_empty() && b.validate().is_empty());
    }
}
