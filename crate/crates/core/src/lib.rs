//! Simulation toolkit for position measurements of a single trapped atom by
//! photodetection through an engineered imaging aperture.
//!
//! The library covers four layers:
//!
//! * [`levy`] — symmetric alpha-stable densities, samplers, paths, and
//!   Poisson-subordinated jump processes;
//! * [`optics`] — collapse kernels built from aperture transmission masks via
//!   the diffraction integral, inverse aperture design, and capture fractions;
//! * [`state`] — grid wavefunctions, collapse application, photon detection
//!   sampling, exact quarter-period harmonic evolution, and Wigner functions;
//! * [`experiments`] — drivers that assemble the above into full studies
//!   (superposition preparation, |z| measurement, measurement-noise scaling,
//!   collapse-to-Gaussian traces, and anomalous diffusion of the conditioned
//!   mean position).
//!
//! All numerics are generic over the floating scalar via [`scalar::Scalar`]
//! (`f32` or `f64`); the `*64` aliases at the crate root pin the default
//! double-precision instantiations.

// `!(x > 0)` rather than `x <= 0`: parameter checks must also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod density;
pub mod error;
pub mod experiments;
pub mod fftutil;
pub mod grid;
pub mod io;
pub mod levy;
pub mod optics;
pub mod rng;
pub mod scalar;
pub mod state;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default double-precision instantiations.
pub type Grid64 = grid::Grid<f64>;
pub type GridDensity64 = density::GridDensity<f64>;
pub type StableParams64 = levy::StableParams<f64>;
pub type ApertureProfile64 = optics::ApertureProfile<f64>;
pub type CollapseKernel64 = optics::CollapseKernel<f64>;
pub type WaveFunction64 = state::WaveFunction<f64>;
pub type HarmonicTrap64 = state::HarmonicTrap<f64>;
