// SPDX-License-Identifier: Apache-2.0

//! Polarization entanglement of photon pairs emitted by a two-branch
//! radiative cascade, its recovery by spectral filtering, and averaging over
//! slow spectral drift.
//!
//! Energies are in µeV throughout. Start from [`spectral::CascadeSpec`],
//! pick an overlap [`spectral::Engine`], then use [`distill`] for a single
//! realization or [`ensemble`] for a drifting emitter.

pub mod density;
pub mod distill;
pub mod ensemble;
pub mod error;
pub mod quadrature;
pub mod scenario;
pub mod spectral;
pub mod units;

pub use error::{Error, Result};
