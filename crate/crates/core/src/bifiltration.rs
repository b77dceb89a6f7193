//! Point clouds to function-Rips bifiltrations and their GF(2) homology
//! modules.
//!
//! Axis 0 is the Rips radius. Axis 1 is a density threshold read as a
//! superlevel filtration: points with density at least `f` are present. To
//! keep inclusions increasing along the grid, axis 1 stores the thresholds
//! from largest to smallest with coordinate `-f`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{GridPoint, GridPoset};
use crate::matrix::Matrix;
use crate::module::PersistenceModule;

/// Default neighbour rank for density estimates.
pub const DEFAULT_KNN: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec<f64>>,
    density: Option<Vec<f64>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>, density: Option<Vec<f64>>) -> Result<Self> {
        if let Some(first) = points.first() {
            if let Some(i) = points.iter().position(|p| p.len() != first.len()) {
                return Err(Error::Invalid(format!(
                    "point {i} has {} coordinates, expected {}",
                    points[i].len(),
                    first.len()
                )));
            }
        }
        if let Some(d) = &density {
            if d.len() != points.len() {
                return Err(Error::Invalid(format!(
                    "{} density values for {} points",
                    d.len(),
                    points.len()
                )));
            }
        }
        if points
            .iter()
            .flatten()
            .chain(density.iter().flatten())
            .any(|v| !v.is_finite())
        {
            return Err(Error::Invalid("non-finite value in point cloud".into()));
        }
        Ok(PointCloud { points, density })
    }

    /// Whitespace-separated reals, one point per line; blank lines and lines
    /// starting with `#` are skipped. With `density_column`, the last value
    /// of each line is the point's density.
    pub fn parse(text: &str, density_column: bool) -> Result<Self> {
        let mut points = Vec::new();
        let mut density = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut values = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|_| Error::Invalid(format!("line {}: cannot parse {tok:?} as a number", lineno + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            if density_column {
                let d = values
                    .pop()
                    .ok_or_else(|| Error::Invalid(format!("line {}: missing density column", lineno + 1)))?;
                density.push(d);
            }
            if values.is_empty() {
                return Err(Error::Invalid(format!("line {}: no coordinates", lineno + 1)));
            }
            points.push(values);
        }
        Self::new(points, density_column.then_some(density))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.points[i]
            .iter()
            .zip(&self.points[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Given densities, or `1 / d_k` where `d_k` is the distance to the
    /// `k`-th nearest other point (the farthest one if there are fewer).
    /// A lone point, or one with `d_k = 0`, gets infinite density.
    pub fn densities(&self, k: usize) -> Vec<f64> {
        if let Some(d) = &self.density {
            return d.clone();
        }
        (0..self.len())
            .map(|i| {
                let mut ds: Vec<f64> = (0..self.len())
                    .filter(|&j| j != i)
                    .map(|j| self.distance(i, j))
                    .collect();
                ds.sort_by(f64::total_cmp);
                match ds.get(k.max(1) - 1).or(ds.last()) {
                    Some(d) if *d > 0.0 => 1.0 / d,
                    _ => f64::INFINITY,
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Simplex {
    /// Increasing vertex indices.
    pub vertices: Vec<usize>,
    /// Smallest grid point where the simplex is present.
    pub grade: GridPoint,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

#[derive(Clone, Debug)]
pub struct BifilteredComplex {
    grid: GridPoset,
    /// Density thresholds in grid order (decreasing).
    thresholds: Vec<f64>,
    max_dim: usize,
    /// Sorted by dimension, then lexicographically by vertices.
    simplices: Vec<Simplex>,
}

impl BifilteredComplex {
    pub fn grid(&self) -> &GridPoset {
        &self.grid
    }

    /// User-facing density threshold at each index of axis 1.
    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    /// Vertex lists of the `k`-simplices present at `t`, in complex order.
    pub fn simplices_at(&self, t: &GridPoint, k: usize) -> Vec<&[usize]> {
        self.simplices
            .iter()
            .filter(|s| s.dim() == k && s.grade.le(t))
            .map(|s| s.vertices.as_slice())
            .collect()
    }
}

fn check_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::InvalidGrid(format!("{name} axis is empty")));
    }
    if axis.windows(2).any(|w| w[0] >= w[1]) || axis.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidGrid(format!(
            "{name} axis must be finite and strictly increasing"
        )));
    }
    Ok(())
}

/// Rips complex filtered by radius and density superlevel sets.
pub fn build_bifiltration(
    cloud: &PointCloud,
    radii: &[f64],
    densities: &[f64],
    max_dim: usize,
    knn: usize,
) -> Result<BifilteredComplex> {
    check_axis("radius", radii)?;
    check_axis("density", densities)?;
    if max_dim > 2 {
        return Err(Error::Invalid(format!("simplex dimension cap {max_dim} exceeds 2")));
    }
    let thresholds: Vec<f64> = densities.iter().rev().copied().collect();
    let grid = GridPoset::new(vec![radii.to_vec(), thresholds.iter().map(|f| -f).collect()])?;
    let dens = cloud.densities(knn);
    let n = cloud.len();
    let mut candidates: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    if max_dim >= 1 {
        for i in 0..n {
            for j in i + 1..n {
                candidates.push(vec![i, j]);
            }
        }
    }
    if max_dim >= 2 {
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    candidates.push(vec![i, j, k]);
                }
            }
        }
    }
    let simplices = candidates
        .into_iter()
        .filter_map(|vs| {
            let mut diam: f64 = 0.0;
            for (x, &a) in vs.iter().enumerate() {
                for &b in &vs[x + 1..] {
                    diam = diam.max(cloud.distance(a, b));
                }
            }
            let weakest = vs.iter().map(|&v| dens[v]).fold(f64::INFINITY, f64::min);
            let r = radii.iter().position(|r| diam <= *r)?;
            let f = thresholds.iter().position(|f| weakest >= *f)?;
            Some(Simplex {
                vertices: vs,
                grade: GridPoint(vec![r, f]),
            })
        })
        .collect();
    Ok(BifilteredComplex {
        grid,
        thresholds,
        max_dim,
        simplices,
    })
}

/// GF(2) boundary matrix from `cofaces` (columns) to `faces` (rows).
pub fn boundary_matrix(faces: &[&[usize]], cofaces: &[&[usize]]) -> Matrix {
    let f = Field::GF2;
    let mut out = Matrix::zeros(f, faces.len(), cofaces.len());
    for (c, s) in cofaces.iter().enumerate() {
        for skip in 0..s.len() {
            let face: Vec<usize> = s
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, v)| *v)
                .collect();
            if let Some(r) = faces.iter().position(|x| *x == face.as_slice()) {
                out.set(r, c, f.one());
            }
        }
    }
    out
}

/// Cycle representatives of a homology basis at one grid point.
struct LocalHomology<'a> {
    chains: Vec<&'a [usize]>,
    /// Column basis of the boundaries.
    boundaries: Matrix,
    /// Cycles independent modulo boundaries, as columns.
    representatives: Matrix,
}

fn local_homology<'a>(bif: &'a BifilteredComplex, t: &GridPoint, k: usize) -> LocalHomology<'a> {
    let f = Field::GF2;
    let chains = bif.simplices_at(t, k);
    let cycles = if k == 0 {
        Matrix::identity(f, chains.len())
    } else {
        boundary_matrix(&bif.simplices_at(t, k - 1), &chains).kernel_matrix()
    };
    let boundaries = boundary_matrix(&chains, &bif.simplices_at(t, k + 1)).column_space_basis();
    let stacked = boundaries.hstack(&cycles).expect("same chain space");
    let (_, pivots) = stacked.rref();
    let picked: Vec<usize> = pivots
        .into_iter()
        .filter(|p| *p >= boundaries.cols())
        .map(|p| p - boundaries.cols())
        .collect();
    LocalHomology {
        chains,
        representatives: cycles.select_columns(&picked),
        boundaries,
    }
}

/// `H_k` of the bifiltration as a persistence module over GF(2).
pub fn homology_module(bif: &BifilteredComplex, k: usize) -> Result<PersistenceModule> {
    if k + 1 > bif.max_dim {
        return Err(Error::Invalid(format!(
            "degree {k} needs simplices up to dimension {}, but the complex stops at {}",
            k + 1,
            bif.max_dim
        )));
    }
    let grid = &bif.grid;
    let f = Field::GF2;
    let local: Vec<LocalHomology> = grid
        .points()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|t| local_homology(bif, t, k))
        .collect();
    let dims = local.iter().map(|h| h.representatives.cols()).collect();
    let mut m = PersistenceModule::with_dims(grid.clone(), f, dims)?;
    for lin in 0..grid.len() {
        let p = grid.point(lin);
        let src = &local[lin];
        for axis in 0..grid.nparams() {
            let Some(q) = grid.step(&p, axis) else { continue };
            let dst = &local[grid.linear(&q)];
            // re-index the source representatives in the larger complex
            let mut pushed = Matrix::zeros(f, dst.chains.len(), src.representatives.cols());
            for (r, s) in src.chains.iter().enumerate() {
                let target_row = dst.chains.iter().position(|x| x == s).expect("filtration is monotone");
                for c in 0..src.representatives.cols() {
                    pushed.set(target_row, c, src.representatives.get(r, c).clone());
                }
            }
            let system = dst.boundaries.hstack(&dst.representatives)?;
            let x = system
                .solve(&pushed)?
                .ok_or_else(|| Error::Invalid(format!("cycle at {p} is not a cycle at {q}")))?;
            let nb = dst.boundaries.cols();
            m.set_map(&p, axis, x.submatrix(nb, 0, dst.representatives.cols(), x.cols()))?;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(points: &[&[f64]]) -> PointCloud {
        PointCloud::new(points.iter().map(|p| p.to_vec()).collect(), None).unwrap()
    }

    #[test]
    fn edge_appears_at_its_length() {
        let c = cloud(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let b = build_bifiltration(&c, &[0.5, 1.5], &[0.0], 1, 1).unwrap();
        let edge = b.simplices().iter().find(|s| s.dim() == 1).unwrap();
        assert_eq!(edge.grade, GridPoint::from([1, 0]));
    }

    #[test]
    fn empty_cloud_gives_empty_complex() {
        let c = PointCloud::new(vec![], None).unwrap();
        let b = build_bifiltration(&c, &[1.0], &[0.0], 2, 2).unwrap();
        assert!(b.simplices().is_empty());
        assert!(homology_module(&b, 0).unwrap().is_zero());
    }

    #[test]
    fn triangle_fills_at_side_length() {
        let h = 3f64.sqrt() / 2.0;
        let c = cloud(&[&[0.0, 0.0], &[1.0, 0.0], &[0.5, h]]);
        let b = build_bifiltration(&c, &[1.0 + 1e-12], &[0.0], 2, 1).unwrap();
        assert_eq!(b.simplices().iter().filter(|s| s.dim() == 2).count(), 1);
        let h1 = homology_module(&b, 1).unwrap();
        assert!(h1.is_zero());
    }

    #[test]
    fn components_merge() {
        let c = cloud(&[&[0.0], &[1.0], &[5.0]]);
        let b = build_bifiltration(&c, &[0.1, 2.0, 10.0], &[0.0], 1, 1).unwrap();
        let h0 = homology_module(&b, 0).unwrap();
        assert!(h0.validate().is_empty());
        let dims: Vec<usize> = h0.dims().to_vec();
        assert_eq!(dims, vec![3, 2, 1]);
        let t = h0
            .transition(&GridPoint::from([0, 0]), &GridPoint::from([2, 0]))
            .unwrap();
        assert_eq!(t.rank(), 1);
    }

    #[test]
    fn density_axis_is_reversed() {
        let c = PointCloud::new(vec![vec![0.0], vec![1.0]], Some(vec![5.0, 1.0])).unwrap();
        let b = build_bifiltration(&c, &[2.0], &[1.0, 5.0], 1, 1).unwrap();
        assert_eq!(b.thresholds(), &[5.0, 1.0]);
        assert_eq!(b.grid().axis(1), &[-5.0, -1.0]);
        let h0 = homology_module(&b, 0).unwrap();
        assert_eq!(h0.dims(), &[1, 1]);
        let grades: Vec<_> = b.simplices().iter().map(|s| s.grade.clone()).collect();
        assert_eq!(
            grades,
            vec![
                GridPoint::from([0, 0]),
                GridPoint::from([0, 1]),
                GridPoint::from([0, 1])
            ]
        );
    }

    #[test]
    fn parse_reports_line() {
        let err = PointCloud::parse("0 0\n# c\n1 x\n", false).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let c = PointCloud::parse("0 0 2.5\n1 1 0.5\n", true).unwrap();
        assert_eq!(c.densities(1), vec![2.5, 0.5]);
        assert_eq!(c.points()[1], vec![1.0, 1.0]);
    }

    #[test]
    fn knn_density() {
        let c = cloud(&[&[0.0], &[1.0], &[3.0]]);
        assert_eq!(c.densities(1), vec![1.0, 1.0, 0.5]);
        assert_eq!(c.densities(2), vec![1.0 / 3.0, 0.5, 1.0 / 3.0]);
    }
}
