//! Exact invariants of multiparameter persistence modules on finite grids.
//!
//! Modules live on finite grids with exact coefficients (GF(p) or the
//! rationals). The crate computes rank invariants, dimensions of spaces of
//! natural transformations between restricted modules, decompositions into
//! indecomposables via idempotents, persistent entropy, interleaving
//! certificates, and homology modules of point-cloud bifiltrations.

pub mod bifiltration;
pub mod entropy;
pub mod error;
pub mod field;
pub mod fixtures;
pub mod grid;
pub mod interleaving;
pub mod io;
pub mod lnti;
pub mod matrix;
pub mod mbi;
pub mod module;
pub mod natural;
pub mod polynomial;
pub mod random;
pub mod rank;
pub mod sparse;
pub mod support;
pub mod table;

pub use error::{Error, MatrixError, Result};
pub use field::{Field, Scalar};
pub use grid::{GridBox, GridPoint, GridPoset};
pub use matrix::Matrix;
pub use module::{PersistenceModule, Violation};
pub use natural::NatTransform;
pub use polynomial::Polynomial;
pub use support::Support;
pub use table::InvariantTable;
