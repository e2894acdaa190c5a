//! Physics core for charged, NV-hosting diamonds levitated in a needle Paul trap.
//!
//! The crate is `no_std` (with `alloc`) and contains only pure numerics:
//!
//! * [`model`]: constants, particle geometry, NV crystal axes
//! * [`trap`]: secular motion, Mathieu stability, trajectories, drive ramps, laser forces
//! * [`rotation`]: surface shape factor and angular confinement
//! * [`esr`]: forward model for static and rotation-broadened ESR spectra
//! * [`solver`]: dip detection and inversion of spectra into field orientation
//!
//! Units are SI throughout, except that magnetic fields are in gauss and
//! spectroscopic frequencies (ESR lines, spectra) are ordinary frequencies
//! in Hz. Mechanical frequencies (drive, secular, libration) are angular, in
//! rad/s.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod esr;
mod math;
pub mod model;
pub mod numeric;
pub mod rotation;
pub mod solver;
pub mod trap;

pub use error::{Error, ErrorKind, Result};
pub use model::{AxisConvention, NvAxes, Particle, PhysicalConstants, Shape};
