//! Trajectory representation of the two-point-source (Young's) interference
//! experiment in prolate spheroidal coordinates.
//!
//! The crate is `no_std` and uses `alloc` for owned polylines. All quantities
//! are plain `f64` in the unit system fixed by [`coords::PhysicalParams`].
//!
//! Modules, bottom-up:
//!
//! * [`coords`]: prolate/cylindrical conversions and the wave-vector split.
//! * [`wavefield`]: point-source and superposed wave functions.
//! * [`action`]: reduced action, its contours and their wrinkles.
//! * [`trajectory`]: the trajectory equation, tracer and turning points.
//! * [`kinematics`]: transit times and time loci.
//!
//! ```
//! use dispherical_core::coords::{PhysicalParams, ProlatePoint};
//! use dispherical_core::action::reduced_action_unwrapped;
//!
//! let params = PhysicalParams::default();
//! let origin = ProlatePoint::new(1.0, 0.0);
//! let w = reduced_action_unwrapped(&origin, &params).unwrap();
//! assert!((w.unwrapped - 1.316815).abs() < 1e-6);
//! ```
#![no_std]
#![forbid(unsafe_code)]
#![warn(missing_docs)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod action;
pub mod coords;
mod error;
pub mod kinematics;
mod math;
mod roots;
pub mod trajectory;
pub mod wavefield;

pub use error::{Error, Result};
