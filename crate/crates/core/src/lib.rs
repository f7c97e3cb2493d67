//! Ray chaos in a composite open optical cavity.
//!
//! Two concave end mirrors face each other across a central biconvex element.
//! A ray is treated as a unit-speed point particle that reflects specularly
//! off the four mirror arcs and escapes when it misses them all.
//!
//! - [`geometry`]: cavity construction and paraxial (ABCD) stability.
//! - [`dynamics`]: event-driven bounce map and its exact tangent map.
//! - [`analysis`]: surfaces of section, escape-time scans, repeller search,
//!   Lyapunov exponents.
//! - [`cli_io`]: configuration, presets and CSV output behind the
//!   `cavity-chaos` binary.

pub mod analysis;
pub mod cli_io;
pub mod dynamics;
pub mod error;
pub mod geometry;

pub use error::{Error, Result};
