//! 2D unfitted finite element toolkit built on cell aggregation.
//!
//! The crate discretises elliptic problems on a uniform Cartesian background
//! grid cut by an implicit level-set geometry. Ill-posed degrees of freedom on
//! badly cut cells are constrained to well-posed interior ones through a
//! discrete extension operator, with two interchangeable local bases:
//! extrapolation-based Lagrangian and interpolation-based generalised modal
//! C⁰. Cut-cell integrals use moment-fitted quadratures cross-checked against
//! subtriangulation rules.

pub mod aggregation;
pub mod analysis;
pub mod assembly;
pub mod bases;
pub mod cutquad;
pub mod experiments;
pub mod geometry;
pub mod mesh;
pub mod oned;
pub mod space;
