//! Dynamics of order-preserving subhomogeneous maps on polyhedral cones:
//! exact and floating-point orbit iteration with periodic-orbit detection,
//! the Thompson part metric, a min-max expression language whose every map is
//! order preserving and subhomogeneous by construction, combinatorial period
//! bounds, and a builder that realizes any feasible period lcm(p, q) on the
//! standard cone.
//!
//! Exact rational arithmetic is the oracle throughout: float-mode results are
//! convenient approximations, never the ground truth.

pub mod bounds;
pub mod cone;
pub mod construct;
pub mod dsl;
pub mod dynamics;
pub mod error;
pub mod map;
pub mod metric;
pub mod point;
pub mod scalar;

pub use cone::{ConeSpec, PartIndex, MAX_FACETS};
pub use dsl::{parse_map, MinMaxMap};
pub use dynamics::{iterate_orbit, omega_limit_estimate, OrbitOptions, OrbitReport, Outcome};
pub use error::{Error, Result};
pub use map::ConeMap;
pub use point::Point;
pub use scalar::Scalar;
