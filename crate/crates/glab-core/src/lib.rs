//! Exact computational geometry for lines in projective space.
//!
//! Everything runs over an exact coefficient field — arbitrary-precision
//! rationals or a runtime-chosen odd prime field — so ranks, dimensions and
//! tangency computations are decided by exact linear algebra, never by
//! floating-point thresholds.

pub mod error;
pub mod families;
pub mod grassmann;
pub mod jet;
pub mod matrix;
pub mod poly;
pub mod projspace;
pub mod sample;
pub mod scalar;
pub mod secant;

pub use error::{GlabError, Result};
pub use matrix::Matrix;
pub use projspace::ProjSubspace;
pub use scalar::{FieldTag, Scalar};
