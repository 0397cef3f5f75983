//! Exact tooling for nodal hypersurfaces: singular loci over `F_p`, the
//! defect of a point set with respect to forms of a given degree, separator
//! certificates, incidence bounds, factoriality criteria and generators for
//! extremal non-factorial families.

pub mod criteria;
pub mod error;
pub mod families;
pub mod field;
pub mod linalg;
pub mod lincond;
pub mod poly;
pub mod projgeom;
pub mod sing;

pub use error::{Error, Result};
pub use field::{FieldSpec, Scalar};
pub use poly::{monomial_basis, parse_poly, HomoPoly, Monomial};
pub use projgeom::{PointSet, ProjPoint};
