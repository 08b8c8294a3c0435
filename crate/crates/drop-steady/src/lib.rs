//! Spectral solver for the steady falling drop.
//!
//! A drop of one viscous fluid falls steadily through another under
//! gravity and surface tension. The free boundary is pulled back to the
//! unit sphere and the resulting two-phase Navier–Stokes system is solved
//! by a fixed-point iteration around a linearised Stokes–Oseen operator.

pub mod cli;
pub mod driver;
pub mod error;
pub mod field;
pub mod geometry;
pub mod halfspace;
pub mod operators;
pub mod oracle;
pub mod radial;
pub mod sphere;
pub mod twophase;
pub mod validate;

pub use error::{Error, Result};
