//! Parameter-space design of digital PID controllers in the z-domain.
//!
//! The crate maps absolute stability, phase margin, gain margin and a
//! mixed-sensitivity bound into regions of a two-gain plane, intersects them
//! into a multi-objective solution region, and checks individual gain points
//! with an independent frequency-response and pole-location oracle.
//!
//! Module map:
//!
//! - [`poly`], [`tf`]: polynomials, rational transfer functions, unit-circle
//!   evaluation, zero-order-hold discretization, digital PID controllers.
//! - [`boundary`]: boundary curves in a gain plane (complex and real root
//!   boundaries, phase/gain margin curves, mixed-sensitivity curves).
//! - [`analyzer`]: the oracle. Closed-loop poles, margins, robust performance
//!   and time-domain simulation for one gain point.
//! - [`region`]: grid classification of a gain plane, constraint intersection
//!   and sweeps over sample time or the third gain.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analyzer;
pub mod boundary;
mod error;
pub mod grid;
mod linalg;
pub mod poly;
pub mod region;
pub mod tf;

pub use error::{Error, Result};
pub use num_complex::Complex64 as Complex;
pub use poly::Polynomial;
pub use tf::{GainScaling, PidGains, Structure, TimeDomain, TransferFunction};
