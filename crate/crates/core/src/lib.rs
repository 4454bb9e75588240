//! Negative-eigenvalue counting for Schrödinger operators `−Δ + ηW` whose
//! potential is an oscillating factor `η` times a slowly, regularly decaying
//! factor `W`.
//!
//! The crate is organized along the computation:
//!
//! * [`potentials`]: trigonometric oscillating factors, closed-form decaying
//!   factors and the evaluable potentials built from them;
//! * [`gauge`]: the Poisson solution `Δφ = η̃`, `ψ = |∇φ|²`, `ψ₀` and the
//!   gauge-transformed effective potential;
//! * [`semiclassical`]: the phase-space counting function `N_cl(E; V)`;
//! * [`sphere`]: spectra of `−Δ_{S^{d−1}} + L` and the log-law constant `C_d(L)`;
//! * [`counting`]: exact negative-eigenvalue counts of discretized
//!   Hamiltonians via matrix inertia, with box/mesh convergence scans;
//! * [`scenarios`]: end-to-end asymptotic-law reproductions, fits and reports.

pub mod config;
pub mod counting;
pub mod error;
pub mod gauge;
pub mod inertia;
pub mod potentials;
pub mod quadrature;
pub mod scenarios;
pub mod semiclassical;
pub mod sphere;

pub use error::{Error, Result};
