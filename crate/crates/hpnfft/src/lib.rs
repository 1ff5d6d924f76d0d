//! Nonequispaced discrete Fourier transforms on the d-dimensional torus.
//!
//! The crate is organized in layers:
//!
//! * [`domain`] — index sets, point sets, and value containers shared by all
//!   transforms;
//! * [`direct`] — O(M·|I_N|) reference transforms and the relative l2 error
//!   metric used to validate everything else;
//! * [`window`] — truncated window kernels (Gaussian, B-spline, sinc-power,
//!   Kaiser-Bessel) and their Fourier-domain weights;
//! * [`engine`] — the fast gridding transform: spread → FFT → scale, and the
//!   adjoint subdivide → inverse FFT → interpolate;
//! * [`decomp`] — spatial decomposition of a point set into subcells, with
//!   per-rank transforms combined by a tree reduction over a pluggable
//!   [`transport`];
//! * [`ewald`] — Ewald summation whose reciprocal-space structure factor is
//!   evaluated through the fast transform, validated by the Madelung constant
//!   of the fluorite structure.

pub mod decomp;
pub mod direct;
pub mod domain;
pub mod engine;
mod error;
pub mod ewald;
pub mod fft;
pub mod grid;
mod parallel;
pub mod transport;
pub mod window;

pub use domain::{CoefficientArray, FrequencyIndexSet, PointSet, SampleValues};
pub use engine::NfftConfig;
pub use error::{Error, Result};
pub use fft::Direction;
pub use grid::{GridLayout, OversampledGrid};
pub use window::{WindowKind, WindowSpec};
