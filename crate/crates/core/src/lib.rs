//! Numerical laboratory for maximum-displacement bounds of nonvanishing
//! vector fields.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: compact convex bodies (balls, H-polytopes, ellipsoids) with
//!   membership, Euclidean projection, inradius and circumradius.
//! - [`norms`]: norm descriptors, dual norms and the Euclidean equivalence
//!   constants `θ*₁`, `θ*₂`, `ν`.
//! - [`fields`]: the vector-field families used by the bounds (rotations,
//!   translations, the Kakutani shift and its radial extensions, ...).
//! - [`vi`]: a projection-based variational-inequality solver with the
//!   interior-zero / inward-normal classification.
//! - [`displacement`]: multistart sup/inf estimators and bound reports.
//! - [`harness`]: JSON campaigns, theorem presets, CSV tables and SVG plots.

pub mod displacement;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod harness;
pub mod linalg;
mod lp;
pub mod norms;
pub mod optim;
pub mod sampling;
pub mod vi;

pub use displacement::{
    BoundKind, BoundReport, DisplacementEstimate, EstimateMode, EstimatorConfig, Verdict,
};
pub use error::{json_location, Error, Result};
pub use fields::VectorField;
pub use geometry::ConvexBody;
pub use norms::Norm;
pub use vi::{Classification, SolverConfig, VIProblem, VISolution};

/// Library version string, embedded in campaign reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
