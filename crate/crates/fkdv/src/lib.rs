//! Spectral solver and numerical-continuation toolkit for even, periodic
//! traveling waves of the fractional Korteweg–de Vries equation
//!
//! ```text
//! u_t + L u_x + u u_x = 0,
//! ```
//!
//! where `L` is the Fourier multiplier with Bessel-potential symbol
//! `m(ξ) = (1 + ξ²)^(−α/2)`, α > 1.  Steady waves of speed μ satisfy
//!
//! ```text
//! −μφ + Lφ + ½φ² = 0,
//! ```
//!
//! and come in branches that bifurcate from constant states and terminate at
//! a highest, peaked wave with φ(0) = μ and a Lipschitz crest.
//!
//! The crate is organized around that picture:
//!
//! * [`kernel`] — the symbol `m`, the periodized convolution kernel `K_P`
//!   with rigorous truncation-error bounds, and its certified properties;
//! * [`spectral`] — even cosine series, the action of `L`, dealiased
//!   products, steady-equation residuals, and dense Jacobians;
//! * [`branch`] — bifurcation points, second-order asymptotic branches,
//!   amplitude-constrained Newton correction, adaptive continuation, and
//!   extrapolation to the highest wave;
//! * [`diagnostics`] — per-solution verification of the theory's
//!   quantitative statements (bounds, monotonicity, trough gap, decay rates,
//!   crest regularity);
//! * [`io`] — the CSV/JSON interchange formats;
//! * [`config`] — the flat key = value run-configuration format.

pub mod branch;
pub mod config;
pub mod diagnostics;
pub mod io;
pub mod kernel;
pub mod spectral;
