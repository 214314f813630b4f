//! Linear subspaces of projective space.
//!
//! A subspace of P^N is stored as the reduced row echelon basis of the
//! underlying linear subspace of k^{N+1}, so equal subspaces compare equal
//! structurally. The empty subspace (no points, dimension -1) is the zero-row
//! basis. Dual equations are computed on demand and cached.

use std::sync::OnceLock;

use crate::error::{GlabError, Result};
use crate::matrix::Matrix;
use crate::scalar::{FieldTag, Scalar};

#[derive(Debug)]
pub struct ProjSubspace {
    basis: Matrix,
    dual: OnceLock<Matrix>,
}

impl Clone for ProjSubspace {
    fn clone(&self) -> Self {
        let dual = OnceLock::new();
        if let Some(d) = self.dual.get() {
            let _ = dual.set(d.clone());
        }
        ProjSubspace {
            basis: self.basis.clone(),
            dual,
        }
    }
}

impl PartialEq for ProjSubspace {
    fn eq(&self, other: &Self) -> bool {
        self.basis == other.basis
    }
}
impl Eq for ProjSubspace {}

impl ProjSubspace {
    /// Span of the rows of `m`, viewed inside P^{cols-1}.
    pub fn from_spanning_rows(m: &Matrix) -> Result<ProjSubspace> {
        if m.ncols() == 0 {
            return Err(GlabError::ShapeMismatch(
                "projective subspace needs at least one coordinate".into(),
            ));
        }
        Ok(ProjSubspace {
            basis: m.row_space_basis(),
            dual: OnceLock::new(),
        })
    }

    pub fn from_points(field: FieldTag, points: &[Vec<Scalar>]) -> Result<ProjSubspace> {
        let m = if points.is_empty() {
            return Err(GlabError::ShapeMismatch(
                "ambient dimension unknown for empty point list".into(),
            ));
        } else {
            let _ = field;
            Matrix::from_rows(points.to_vec())?
        };
        ProjSubspace::from_spanning_rows(&m)
    }

    pub fn empty(field: FieldTag, ambient: usize) -> ProjSubspace {
        ProjSubspace {
            basis: Matrix::zero(field, 0, ambient + 1),
            dual: OnceLock::new(),
        }
    }

    pub fn whole(field: FieldTag, ambient: usize) -> ProjSubspace {
        ProjSubspace {
            basis: Matrix::identity(field, ambient + 1),
            dual: OnceLock::new(),
        }
    }

    pub fn line_through(p: &[Scalar], q: &[Scalar]) -> Result<ProjSubspace> {
        let m = Matrix::from_rows(vec![p.to_vec(), q.to_vec()])?;
        let s = ProjSubspace::from_spanning_rows(&m)?;
        if s.dim() != 1 {
            return Err(GlabError::ShapeMismatch(
                "points coincide or vanish: no unique line".into(),
            ));
        }
        Ok(s)
    }

    pub fn field(&self) -> FieldTag {
        self.basis.field()
    }

    /// Dimension of the ambient projective space.
    pub fn ambient(&self) -> usize {
        self.basis.ncols() - 1
    }

    /// Projective dimension; -1 for the empty subspace.
    pub fn dim(&self) -> i64 {
        self.basis.nrows() as i64 - 1
    }

    pub fn codim(&self) -> i64 {
        self.ambient() as i64 - self.dim()
    }

    /// Canonical (reduced echelon) spanning rows.
    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// Canonical basis of linear forms vanishing on the subspace.
    pub fn dual_forms(&self) -> &Matrix {
        self.dual.get_or_init(|| self.basis.kernel_basis())
    }

    fn check_ambient(&self, other: &ProjSubspace) -> Result<()> {
        if self.field() != other.field() {
            return Err(GlabError::FieldMismatch);
        }
        if self.ambient() != other.ambient() {
            return Err(GlabError::AmbientMismatch {
                expected: self.ambient(),
                got: other.ambient(),
            });
        }
        Ok(())
    }

    pub fn contains_point(&self, p: &[Scalar]) -> Result<bool> {
        if p.len() != self.basis.ncols() {
            return Err(GlabError::LengthMismatch {
                expected: self.basis.ncols(),
                got: p.len(),
            });
        }
        if p.iter().all(Scalar::is_zero) {
            return Err(GlabError::ZeroParameter);
        }
        let stacked = self
            .basis
            .stack(&Matrix::from_rows(vec![p.to_vec()])?)?;
        Ok(stacked.rank() == self.basis.nrows())
    }

    /// Does `self` contain `other` as a subspace?
    pub fn contains(&self, other: &ProjSubspace) -> Result<bool> {
        self.check_ambient(other)?;
        let stacked = self.basis.stack(&other.basis)?;
        Ok(stacked.rank() == self.basis.nrows())
    }

    /// Smallest subspace containing both.
    pub fn span(&self, other: &ProjSubspace) -> Result<ProjSubspace> {
        self.check_ambient(other)?;
        ProjSubspace::from_spanning_rows(&self.basis.stack(&other.basis)?)
    }

    /// Intersection as a subspace.
    pub fn meet(&self, other: &ProjSubspace) -> Result<ProjSubspace> {
        self.check_ambient(other)?;
        let eqs = self.dual_forms().stack(other.dual_forms())?;
        Ok(ProjSubspace {
            basis: eqs.kernel_basis(),
            dual: OnceLock::new(),
        })
    }

    /// Nonempty intersection, decided by rank without building the meet.
    pub fn meets(&self, other: &ProjSubspace) -> Result<bool> {
        self.check_ambient(other)?;
        let joint = self.basis.stack(&other.basis)?.rank() as i64;
        Ok(joint < (self.dim() + 1) + (other.dim() + 1))
    }
}

/// dim(span) + dim(meet) = dim A + dim B, with the empty subspace counted
/// as dimension -1. Used as a cross-check after span/meet computations.
pub fn modular_law_holds(a: &ProjSubspace, b: &ProjSubspace) -> Result<bool> {
    let s = a.span(b)?;
    let m = a.meet(b)?;
    Ok(s.dim() + m.dim() == a.dim() + b.dim())
}
