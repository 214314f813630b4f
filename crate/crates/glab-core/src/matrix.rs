//! Dense exact matrices with Gauss-Jordan elimination.
//!
//! Rank, reduced row echelon form, and kernels are computed exactly, so they
//! are valid over any of the supported fields. The reduced echelon form is
//! used throughout the crate as the canonical representative of a row span.

use std::fmt;

use crate::error::{GlabError, Result};
use crate::scalar::{FieldTag, Scalar};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    field: FieldTag,
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    /// Build from rows, checking that every entry lives in the same field.
    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Matrix> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut field = None;
        let mut data = Vec::with_capacity(nrows * ncols);
        for row in &rows {
            if row.len() != ncols {
                return Err(GlabError::ShapeMismatch(format!(
                    "ragged rows: {} vs {}",
                    ncols,
                    row.len()
                )));
            }
            for x in row {
                match field {
                    None => field = Some(x.field()),
                    Some(f) if f != x.field() => return Err(GlabError::FieldMismatch),
                    _ => {}
                }
                data.push(x.clone());
            }
        }
        Ok(Matrix {
            field: field.unwrap_or(FieldTag::Rationals),
            rows: nrows,
            cols: ncols,
            data,
        })
    }

    /// Integer-entry convenience constructor.
    pub fn from_int_rows(field: FieldTag, rows: &[&[i64]]) -> Matrix {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&v| Scalar::from_int(field, v)).collect())
            .collect();
        let mut m = Matrix::from_rows(rows).expect("integer rows are always well formed");
        if m.rows == 0 || m.cols == 0 {
            m.field = field;
        }
        m
    }

    pub fn zero(field: FieldTag, rows: usize, cols: usize) -> Matrix {
        Matrix {
            field,
            rows,
            cols,
            data: vec![Scalar::zero(field); rows * cols],
        }
    }

    pub fn identity(field: FieldTag, n: usize) -> Matrix {
        let mut m = Matrix::zero(field, n, n);
        for i in 0..n {
            *m.at_mut(i, i) = Scalar::one(field);
        }
        m
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &Scalar {
        &self.data[r * self.cols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut Scalar {
        &mut self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Scalar] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn rows_vec(&self) -> Vec<Vec<Scalar>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zero(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                *out.at_mut(c, r) = self.at(r, c).clone();
            }
        }
        out
    }

    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.field != rhs.field {
            return Err(GlabError::FieldMismatch);
        }
        if self.cols != rhs.rows {
            return Err(GlabError::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Matrix::zero(self.field, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let term = a * rhs.at(k, j);
                    *out.at_mut(i, j) = &*out.at(i, j) + &term;
                }
            }
        }
        Ok(out)
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn stack(&self, other: &Matrix) -> Result<Matrix> {
        if self.field != other.field {
            return Err(GlabError::FieldMismatch);
        }
        if self.cols != other.cols && self.rows != 0 && other.rows != 0 {
            return Err(GlabError::ShapeMismatch(format!(
                "cannot stack width {} on width {}",
                other.cols, self.cols
            )));
        }
        let cols = if self.rows == 0 { other.cols } else { self.cols };
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Matrix {
            field: self.field,
            rows: self.rows + other.rows,
            cols,
            data,
        })
    }

    /// In-place Gauss-Jordan; returns pivot column indices.
    fn reduce(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self.at(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..self.cols {
                    self.data.swap(r * self.cols + j, p * self.cols + j);
                }
            }
            let inv = self.at(r, c).inverse().expect("pivot is nonzero");
            for j in c..self.cols {
                *self.at_mut(r, j) = &*self.at(r, j) * &inv;
            }
            for i in 0..self.rows {
                if i == r || self.at(i, c).is_zero() {
                    continue;
                }
                let factor = self.at(i, c).clone();
                for j in c..self.cols {
                    let t = &factor * self.at(r, j);
                    *self.at_mut(i, j) = &*self.at(i, j) - &t;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Reduced row echelon form together with the pivot columns.
    pub fn rref_with_pivots(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.reduce();
        (m, pivots)
    }

    pub fn rref(&self) -> Matrix {
        self.rref_with_pivots().0
    }

    /// Reduced echelon form with zero rows dropped: the canonical basis of
    /// the row span.
    pub fn row_space_basis(&self) -> Matrix {
        let (m, pivots) = self.rref_with_pivots();
        let mut data = m.data;
        data.truncate(pivots.len() * m.cols);
        Matrix {
            field: m.field,
            rows: pivots.len(),
            cols: m.cols,
            data,
        }
    }

    pub fn rank(&self) -> usize {
        self.rref_with_pivots().1.len()
    }

    /// Canonical basis (as rows, in reduced echelon form) of the right null
    /// space `{ v : self * v = 0 }`. A matrix with no rows has the full
    /// ambient space as kernel.
    pub fn kernel_basis(&self) -> Matrix {
        if self.rows == 0 {
            return Matrix::identity(self.field, self.cols);
        }
        let (m, pivots) = self.rref_with_pivots();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut rows = Vec::with_capacity(free.len());
        for &f in &free {
            let mut v = vec![Scalar::zero(self.field); self.cols];
            v[f] = Scalar::one(self.field);
            for (ri, &pc) in pivots.iter().enumerate() {
                v[pc] = -m.at(ri, f);
            }
            rows.push(v);
        }
        let raw = Matrix::from_rows(rows).expect("kernel rows share the field");
        if raw.rows == 0 {
            Matrix {
                field: self.field,
                rows: 0,
                cols: self.cols,
                data: Vec::new(),
            }
        } else {
            raw.row_space_basis()
        }
    }

    pub fn scale_row(&mut self, r: usize, by: &Scalar) {
        for c in 0..self.cols {
            *self.at_mut(r, c) = &*self.at(r, c) * by;
        }
    }

    /// Determinant by elimination; exact, square only.
    pub fn det(&self) -> Result<Scalar> {
        if self.rows != self.cols {
            return Err(GlabError::ShapeMismatch(format!(
                "determinant of {}x{}",
                self.rows, self.cols
            )));
        }
        let mut m = self.clone();
        let mut det = Scalar::one(self.field);
        for c in 0..m.cols {
            let Some(p) = (c..m.rows).find(|&i| !m.at(i, c).is_zero()) else {
                return Ok(Scalar::zero(self.field));
            };
            if p != c {
                for j in 0..m.cols {
                    m.data.swap(c * m.cols + j, p * m.cols + j);
                }
                det = -&det;
            }
            det = &det * m.at(c, c);
            let inv = m.at(c, c).inverse().expect("pivot is nonzero");
            for i in (c + 1)..m.rows {
                if m.at(i, c).is_zero() {
                    continue;
                }
                let factor = &*m.at(i, c) * &inv;
                for j in c..m.cols {
                    let t = &factor * m.at(c, j);
                    *m.at_mut(i, j) = &*m.at(i, j) - &t;
                }
            }
        }
        Ok(det)
    }

    /// Solve `x * self = rhs` for a single row vector `rhs` in the row span.
    pub fn solve_left(&self, rhs: &[Scalar]) -> Option<Vec<Scalar>> {
        // Transposed system: self^T * x^T = rhs^T, solved by eliminating the
        // augmented matrix [self^T | rhs^T].
        let t = self.transpose();
        let mut aug_rows = Vec::with_capacity(t.rows);
        for r in 0..t.rows {
            let mut row = t.row(r).to_vec();
            row.push(rhs[r].clone());
            aug_rows.push(row);
        }
        let aug = Matrix::from_rows(aug_rows).ok()?;
        let (m, pivots) = aug.rref_with_pivots();
        if pivots.contains(&self.rows) {
            return None; // inconsistent
        }
        let mut x = vec![Scalar::zero(self.field); self.rows];
        for (ri, &pc) in pivots.iter().enumerate() {
            x[pc] = m.at(ri, self.rows).clone();
        }
        Some(x)
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            write!(f, "[")?;
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.at(r, c))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}
