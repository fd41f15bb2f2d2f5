// Copyright 2026 The nla Authors
// SPDX-License-Identifier: Apache-2.0

//! Truncated Fock-space simulator for probabilistic noiseless amplification
//! of coherent states by photon addition followed by photon subtraction.
//!
//! - [`fock`]: states, ladder operators, expectations, fidelities and the
//!   quadrature convention (vacuum variance = 1 shot-noise unit).
//! - [`amplifiers`]: the ideal operator Ĝ = (g−1)n̂ + 1, quantum scissors and
//!   all figures of merit.
//! - [`physical`]: heralded addition (two-mode squeezer + click) and
//!   subtraction (beam-splitter tap + click).
//! - [`homodyne`]: loss channel, quadrature densities, seeded sampling.
//! - [`tomography`]: iterative maximum-likelihood reconstruction.
//! - [`wigner`]: Wigner functions, phase shifts and mixtures.
//!
//! Everything is generic over the scalar type ([`Real`]: `f32` or `f64`);
//! the aliases below fix it to `f64`, which is what the quoted tolerances
//! assume.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amplifiers;
pub mod error;
pub mod fock;
pub mod homodyne;
mod linalg;
pub mod physical;
pub mod scalar;
pub mod tomography;
pub mod wigner;

pub use error::{Error, Result};
pub use fock::{FockCutoff, FockState, Ladder, Observable};
pub use scalar::Real;

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Complex = num_complex::Complex64;
pub type PureState = fock::PureState<f64>;
pub type DensityMatrix = fock::DensityMatrix<f64>;
pub type AmplifierSpec = amplifiers::AmplifierSpec<f64>;
pub type AmplifierReport = amplifiers::AmplifierReport<f64>;
pub type TwoModeState = physical::TwoModeState<f64>;
pub type HeraldedResult = physical::HeraldedResult<f64>;
pub type QuadratureDataset = homodyne::QuadratureDataset<f64>;
pub type QuadratureRecord = homodyne::QuadratureRecord<f64>;
pub type TomographySettings = tomography::TomographySettings<f64>;
pub type ReconstructionResult = tomography::ReconstructionResult<f64>;
pub type WignerGrid = wigner::WignerGrid<f64>;

pub type PureStateF32 = fock::PureState<f32>;
pub type DensityMatrixF32 = fock::DensityMatrix<f32>;
pub type WignerGridF32 = wigner::WignerGrid<f32>;
