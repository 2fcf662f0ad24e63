//! Time-harmonic scattering off structures that are periodic in x1 and
//! invariant in x3, under conical (fully oblique) plane-wave incidence.
//!
//! Units: lengths in one arbitrary unit, `omega` is the vacuum wavenumber
//! 2π/λ (c = 1), fields carry the e^{i k3 x3} dependence implicitly.

pub mod error;
pub mod numerics;

pub use error::{Error, Result};
pub use numerics::C64;
pub mod geometry;
pub mod modes;
pub mod multilayer;
pub mod pml;
pub mod postproc;
pub mod fem;
pub mod scenarios;
pub mod schwarz;
pub mod cli;
