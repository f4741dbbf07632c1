//! A-priori graded remeshing of closed triangle meshes and a Burton-Miller
//! collocation boundary element solver for exterior acoustic scattering,
//! with an analytic rigid-sphere reference and relative error metrics.
//!
//! Units: positions and distances in meters, user-facing edge lengths in
//! millimeters, frequencies in hertz. The time convention is `e^{+iωt}`
//! throughout, so outgoing waves are `e^{-ikr}` (see [`physics`]).

pub mod analytic;
pub mod bem;
pub mod error;
pub mod field;
pub mod geometry;
pub mod grading;
pub mod grids;
pub mod mesh;
pub mod metrics;
pub mod physics;

pub use error::{Error, Result};
pub use geometry::Vec3;
