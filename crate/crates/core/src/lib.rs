//! Möbius deconvolution on the hyperbolic upper half plane.
//!
//! Observations Y = M_ε(X) are points of ℍ moved by random Möbius maps ε
//! drawn from an SO(2) bi-invariant law. The density of X is recovered by
//! dividing the empirical Helgason–Fourier transform of the Y-sample by the
//! transform of the error law and inverting on a truncated band |t| < T.

pub mod deconv;
pub mod distributions;
pub mod error;
pub mod geometry;
pub mod hft;
pub mod impedance;
pub mod interp;
mod par;
pub mod quad;
pub mod rng;
pub mod specfun;
pub mod stats;

pub use error::{Error, Result};
pub use geometry::SL2 as SL2Element;
