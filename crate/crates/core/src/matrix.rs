//! Dense matrices over an exact field.
//!
//! All eliminations pivot on the first nonzero entry in column order, so echelon
//! forms, kernel bases and particular solutions are reproducible.

use std::fmt;

use crate::error::MatrixError;
use crate::field::{Field, Scalar};
use crate::polynomial::Polynomial;

type MResult<T> = Result<T, MatrixError>;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix[{}; {}x{}](", self.field, self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(r, c))?;
            }
        }
        write!(f, ")")
    }
}

impl Matrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Self {
        Matrix {
            field,
            rows,
            cols,
            data: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = field.one();
        }
        m
    }

    /// Builds a matrix from integer rows, reducing into `field`.
    pub fn from_rows<R: AsRef<[i64]>>(field: Field, rows: &[R]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.as_ref().len(), c, "ragged rows");
            data.extend(row.as_ref().iter().map(|&v| field.from_i64(v)));
        }
        Matrix {
            field,
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn from_scalars(field: Field, rows: usize, cols: usize, data: Vec<Scalar>) -> MResult<Self> {
        if data.len() != rows * cols {
            return Err(MatrixError::ShapeMismatch {
                op: "from_scalars",
                left: (rows, cols),
                right: (data.len(), 1),
            });
        }
        if let Some(bad) = data.iter().find(|s| s.field() != field) {
            return Err(MatrixError::FieldMismatch(field, bad.field()));
        }
        Ok(Matrix {
            field,
            rows,
            cols,
            data,
        })
    }

    /// A single column built from `entries`.
    pub fn column_vector(field: Field, entries: Vec<Scalar>) -> Self {
        let n = entries.len();
        Matrix {
            field,
            rows: n,
            cols: 1,
            data: entries,
        }
    }

    pub fn diagonal(field: Field, diag: &[Scalar]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(field, n, n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = d.clone();
        }
        m
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> &Scalar {
        &self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        assert_eq!(v.field(), self.field, "field mismatch in set");
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Scalar] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Scalar> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn data(&self) -> &[Scalar] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|r| {
                (0..self.cols).all(|c| {
                    let v = self.get(r, c);
                    if r == c {
                        v.is_one()
                    } else {
                        v.is_zero()
                    }
                })
            })
    }

    fn check_field(&self, other: &Matrix) -> MResult<()> {
        if self.field != other.field {
            return Err(MatrixError::FieldMismatch(self.field, other.field));
        }
        Ok(())
    }

    /// `self * rhs`.
    pub fn multiply(&self, rhs: &Matrix) -> MResult<Matrix> {
        self.check_field(rhs)?;
        if self.cols != rhs.rows {
            return Err(MatrixError::ShapeMismatch {
                op: "multiply",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut out = Matrix::zeros(self.field, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * out.cols + j;
                    out.data[idx] = &out.data[idx] + &(a * b);
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Scalar]) -> MResult<Vec<Scalar>> {
        if v.len() != self.cols {
            return Err(MatrixError::ShapeMismatch {
                op: "apply",
                left: self.shape(),
                right: (v.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(self.field.zero(), |acc, (a, b)| &acc + &(a * b))
            })
            .collect())
    }

    fn zip_with(&self, rhs: &Matrix, op: &'static str, f: impl Fn(&Scalar, &Scalar) -> Scalar) -> MResult<Matrix> {
        self.check_field(rhs)?;
        if self.shape() != rhs.shape() {
            return Err(MatrixError::ShapeMismatch {
                op,
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        Ok(Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, rhs: &Matrix) -> MResult<Matrix> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Matrix) -> MResult<Matrix> {
        self.zip_with(rhs, "sub", |a, b| a - b)
    }

    pub fn scale(&self, s: &Scalar) -> MResult<Matrix> {
        if s.field() != self.field {
            return Err(MatrixError::FieldMismatch(self.field, s.field()));
        }
        Ok(Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        })
    }

    pub fn transpose(&self) -> Matrix {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.get(r, c).clone());
            }
        }
        Matrix {
            field: self.field,
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// Block-diagonal matrix `diag(self, rhs)`.
    pub fn direct_sum(&self, rhs: &Matrix) -> MResult<Matrix> {
        self.check_field(rhs)?;
        let mut out = Matrix::zeros(self.field, self.rows + rhs.rows, self.cols + rhs.cols);
        out.paste(0, 0, self);
        out.paste(self.rows, self.cols, rhs);
        Ok(out)
    }

    /// Block-diagonal matrix of a list; empty list gives the 0x0 matrix.
    pub fn block_diagonal(field: Field, blocks: &[Matrix]) -> MResult<Matrix> {
        let rows = blocks.iter().map(Matrix::rows).sum();
        let cols = blocks.iter().map(Matrix::cols).sum();
        let mut out = Matrix::zeros(field, rows, cols);
        let (mut r, mut c) = (0, 0);
        for b in blocks {
            if b.field != field {
                return Err(MatrixError::FieldMismatch(field, b.field));
            }
            out.paste(r, c, b);
            r += b.rows;
            c += b.cols;
        }
        Ok(out)
    }

    pub fn kronecker(&self, rhs: &Matrix) -> MResult<Matrix> {
        self.check_field(rhs)?;
        let mut out = Matrix::zeros(self.field, self.rows * rhs.rows, self.cols * rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        let v = a * rhs.get(k, l);
                        out.set(i * rhs.rows + k, j * rhs.cols + l, v);
                    }
                }
            }
        }
        Ok(out)
    }

    /// `[self | rhs]`.
    pub fn hstack(&self, rhs: &Matrix) -> MResult<Matrix> {
        self.check_field(rhs)?;
        if self.rows != rhs.rows {
            return Err(MatrixError::ShapeMismatch {
                op: "hstack",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut out = Matrix::zeros(self.field, self.rows, self.cols + rhs.cols);
        out.paste(0, 0, self);
        out.paste(0, self.cols, rhs);
        Ok(out)
    }

    /// Horizontal concatenation of blocks sharing a row count.
    pub fn hconcat(field: Field, rows: usize, blocks: &[Matrix]) -> MResult<Matrix> {
        let cols = blocks.iter().map(Matrix::cols).sum();
        let mut out = Matrix::zeros(field, rows, cols);
        let mut c = 0;
        for b in blocks {
            if b.rows != rows {
                return Err(MatrixError::ShapeMismatch {
                    op: "hconcat",
                    left: (rows, cols),
                    right: b.shape(),
                });
            }
            out.paste(0, c, b);
            c += b.cols;
        }
        Ok(out)
    }

    /// Copies `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn paste(&mut self, r0: usize, c0: usize, block: &Matrix) {
        for r in 0..block.rows {
            for c in 0..block.cols {
                self.data[(r0 + r) * self.cols + c0 + c] = block.get(r, c).clone();
            }
        }
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        let mut out = Matrix::zeros(self.field, rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                out.data[r * cols + c] = self.get(r0 + r, c0 + c).clone();
            }
        }
        out
    }

    /// Columns listed in `idx`, in that order.
    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.field, self.rows, idx.len());
        for r in 0..self.rows {
            for (k, &c) in idx.iter().enumerate() {
                out.data[r * idx.len() + k] = self.get(r, c).clone();
            }
        }
        out
    }

    /// In-place Gauss-Jordan elimination pivoting only in the first `limit`
    /// columns. Returns the pivot columns.
    fn gauss_jordan(&mut self, limit: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..limit.min(self.cols) {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self.get(r, col).is_zero()) else {
                continue;
            };
            if p != row {
                for c in 0..self.cols {
                    self.data.swap(p * self.cols + c, row * self.cols + c);
                }
            }
            let inv = self.get(row, col).inv().expect("nonzero pivot");
            for c in col..self.cols {
                let idx = row * self.cols + c;
                self.data[idx] = &self.data[idx] * &inv;
            }
            for r in 0..self.rows {
                if r == row {
                    continue;
                }
                let factor = self.get(r, col).clone();
                if factor.is_zero() {
                    continue;
                }
                for c in col..self.cols {
                    let pv = self.data[row * self.cols + c].clone();
                    if pv.is_zero() {
                        continue;
                    }
                    let idx = r * self.cols + c;
                    self.data[idx] = &self.data[idx] - &(&factor * &pv);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    /// Reduced row echelon form and its pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.gauss_jordan(self.cols);
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        if self.is_empty() {
            return 0;
        }
        self.rref().1.len()
    }

    /// Basis of `{x : self * x = 0}`, one vector per free column of the
    /// reduced echelon form, in free-column order.
    pub fn kernel_basis(&self) -> Vec<Vec<Scalar>> {
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![None; self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            is_pivot[p] = Some(i);
        }
        (0..self.cols)
            .filter(|&f| is_pivot[f].is_none())
            .map(|f| {
                let mut v = vec![self.field.zero(); self.cols];
                v[f] = self.field.one();
                for (i, &p) in pivots.iter().enumerate() {
                    v[p] = -r.get(i, f);
                }
                v
            })
            .collect()
    }

    /// Kernel basis vectors as the columns of a matrix.
    pub fn kernel_matrix(&self) -> Matrix {
        let basis = self.kernel_basis();
        let mut out = Matrix::zeros(self.field, self.cols, basis.len());
        for (j, v) in basis.into_iter().enumerate() {
            for (i, s) in v.into_iter().enumerate() {
                out.data[i * out.cols + j] = s;
            }
        }
        out
    }

    /// Pivot columns of `self`: a basis of the column space.
    pub fn column_space_basis(&self) -> Matrix {
        let (_, pivots) = self.rref();
        self.select_columns(&pivots)
    }

    /// A particular solution `X` of `self * X = rhs` with free variables set
    /// to zero, or `None` if the system is inconsistent.
    pub fn solve(&self, rhs: &Matrix) -> MResult<Option<Matrix>> {
        self.check_field(rhs)?;
        if self.rows != rhs.rows {
            return Err(MatrixError::ShapeMismatch {
                op: "solve",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut aug = self.hstack(rhs)?;
        let pivots = aug.gauss_jordan(self.cols);
        for r in pivots.len()..self.rows {
            if (0..rhs.cols).any(|c| !aug.get(r, self.cols + c).is_zero()) {
                return Ok(None);
            }
        }
        let mut x = Matrix::zeros(self.field, self.cols, rhs.cols);
        for (i, &p) in pivots.iter().enumerate() {
            for c in 0..rhs.cols {
                x.data[p * rhs.cols + c] = aug.get(i, self.cols + c).clone();
            }
        }
        Ok(Some(x))
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if !self.is_square() {
            return None;
        }
        let id = Matrix::identity(self.field, self.rows);
        let mut aug = self.hstack(&id).ok()?;
        let pivots = aug.gauss_jordan(self.cols);
        if pivots.len() != self.rows {
            return None;
        }
        Some(aug.submatrix(0, self.cols, self.rows, self.cols))
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    /// `self^k` for square matrices.
    pub fn pow(&self, mut k: u64) -> MResult<Matrix> {
        if !self.is_square() {
            return Err(MatrixError::NotSquare(self.rows, self.cols));
        }
        let mut acc = Matrix::identity(self.field, self.rows);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.multiply(&base)?;
            }
            base = base.multiply(&base)?;
            k >>= 1;
        }
        Ok(acc)
    }

    /// Monic least-degree `p` with `p(self) = 0`, found as the first linear
    /// dependency in the Krylov sequence `I, A, A^2, ...` of flattened powers.
    pub fn minimal_polynomial(&self) -> MResult<Polynomial> {
        if !self.is_square() {
            return Err(MatrixError::NotSquare(self.rows, self.cols));
        }
        let f = self.field;
        let n = self.rows;
        // Echelon basis of flattened powers; each reduced vector carries the
        // combination of powers it represents.
        let mut basis: Vec<(usize, Vec<Scalar>, Vec<Scalar>)> = Vec::new();
        let mut power = Matrix::identity(f, n);
        for k in 0..=n {
            let mut v = power.data.clone();
            let mut combo = vec![f.zero(); k + 1];
            combo[k] = f.one();
            for (pivot, bv, bc) in &basis {
                let factor = v[*pivot].clone();
                if factor.is_zero() {
                    continue;
                }
                for (x, y) in v.iter_mut().zip(bv) {
                    if !y.is_zero() {
                        *x = &*x - &(&factor * y);
                    }
                }
                for (x, y) in combo.iter_mut().zip(bc) {
                    *x = &*x - &(&factor * y);
                }
            }
            match v.iter().position(|s| !s.is_zero()) {
                None => return Ok(Polynomial::new(f, combo)),
                Some(pivot) => {
                    let inv = v[pivot].inv().expect("nonzero");
                    for x in v.iter_mut() {
                        *x = &*x * &inv;
                    }
                    for x in combo.iter_mut() {
                        *x = &*x * &inv;
                    }
                    basis.push((pivot, v, combo));
                }
            }
            power = power.multiply(self)?;
        }
        unreachable!("Cayley-Hamilton bounds the degree by n")
    }

    /// Singular values of the real embedding of a rational matrix, descending,
    /// of length `min(rows, cols)`. Computed in `f64`; agreement with exact
    /// values is to about `1e-10` relative.
    pub fn svd_real(&self) -> MResult<Vec<f64>> {
        if self.field != Field::Rational {
            return Err(MatrixError::UnsupportedField {
                op: "svd_real",
                field: self.field,
            });
        }
        if self.is_empty() {
            return Ok(Vec::new());
        }
        let dm = nalgebra::DMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c).to_f64());
        let mut values: Vec<f64> = dm.svd(false, false).singular_values.iter().copied().collect();
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(values)
    }
}
