//! Non-local reflection of harmonic and Helmholtz fields across impedance
//! (Robin) lines, the Robin half-plane Green's function, the iterated
//! reflection walk between two polygonal obstacles, and a boundary integral
//! solver for impedance scattering with far-field output.

pub mod error;
pub mod field;
pub mod geometry;
pub mod harmonic_reflection;
pub mod helmholtz_extension;
pub mod kernels;
pub mod path_planner;
pub mod quadrature;
pub mod scattering;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{pt, Point};
