// Copyright 2026 The nla Authors
// SPDX-License-Identifier: Apache-2.0

//! Iterative maximum-likelihood (RρR) reconstruction from homodyne samples.
//!
//! Each sample contributes its own POVM element Π(x, θ; η), the loss-adjoint
//! image of the projector onto the quadrature eigenstate, so no binning is
//! involved. The completeness correction for the continuous measure is
//! omitted, as is conventional for homodyne data. With η < 1 inside the POVM
//! the estimate is the efficiency-corrected state; `TomographySettings::raw`
//! gives the uncorrected one.

use std::io::{Read, Write};

use ndarray::{Array2, Axis};
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    beam_splitter_branches, coherent_state, loss_adjoint, state_fidelity, DensityMatrix,
    FockCutoff,
};
use crate::homodyne::{check_eta, fill_wavefunctions, rotated_real_part, QuadratureDataset};
use crate::linalg;
use crate::scalar::{phase, Real, C};

/// Samples per work unit; the reduction runs over units in a fixed order.
const BLOCK: usize = 2048;

/// Halvings of the step mixing parameter tried when a plain RρR step lowers
/// the likelihood.
const DILUTION_STEPS: usize = 40;

/// Most negative eigenvalue tolerated in an iterate.
pub const PSD_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TomographySettings<T> {
    pub cutoff: FockCutoff,
    pub eta: T,
    pub max_iters: usize,
    /// Threshold on the per-sample log-likelihood gain of one iteration.
    pub ll_tol: T,
    /// Threshold on the largest change of a diagonal element.
    pub diag_tol: T,
}

impl<T: Real> TomographySettings<T> {
    pub const DEFAULT_MAX_ITERS: usize = 2000;
    pub const DEFAULT_LL_TOL: f64 = 1e-10;
    pub const DEFAULT_DIAG_TOL: f64 = 1e-8;

    /// Defaults with efficiency correction for `eta`.
    pub fn new(cutoff: FockCutoff, eta: T) -> Result<Self> {
        let s = Self {
            cutoff,
            eta,
            max_iters: Self::DEFAULT_MAX_ITERS,
            ll_tol: T::of(Self::DEFAULT_LL_TOL),
            diag_tol: T::of(Self::DEFAULT_DIAG_TOL),
        };
        s.validate()?;
        Ok(s)
    }

    /// No efficiency correction: the estimate is the state seen by the
    /// detector.
    pub fn raw(cutoff: FockCutoff) -> Self {
        Self::new(cutoff, T::one()).expect("unit efficiency is valid")
    }

    pub fn validate(&self) -> Result<()> {
        check_eta(self.eta)?;
        if self.max_iters < 1 {
            return Err(Error::param("max_iters", 0.0, ">= 1"));
        }
        if !(self.ll_tol > T::zero()) {
            return Err(Error::param("ll_tol", self.ll_tol.as_f64(), "> 0"));
        }
        if !(self.diag_tol > T::zero()) {
            return Err(Error::param("diag_tol", self.diag_tol.as_f64(), "> 0"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionResult<T> {
    pub rho: DensityMatrix<T>,
    /// Mean log-likelihood per sample, starting with the initial state.
    pub log_likelihood_trace: Vec<T>,
    pub iterations_used: usize,
    pub converged: bool,
    pub warnings: Vec<String>,
}

/// Π(x, θ; η) = L_η†(|x_θ⟩⟨x_θ|), so that Tr[Π ρ] is the density of x_θ
/// after loss η.
pub fn measurement_operator<T: Real>(
    theta: T,
    x: T,
    eta: T,
    cutoff: FockCutoff,
) -> Result<Array2<C<T>>> {
    check_eta(eta)?;
    let mut psi = vec![T::zero(); cutoff.dim()];
    fill_wavefunctions(x, &mut psi);
    let d = cutoff.dim();
    let projector = Array2::from_shape_fn((d, d), |(a, b)| {
        phase(T::of(a as f64 - b as f64) * theta).scale(psi[a] * psi[b])
    });
    Ok(loss_adjoint(&projector, eta))
}

struct Block<T> {
    theta: T,
    /// One row of ψ_0..ψ_{n_max} per sample.
    psi: Array2<T>,
}

fn prepare<T: Real>(data: &QuadratureDataset<T>, cutoff: FockCutoff) -> Vec<Block<T>> {
    let d = cutoff.dim();
    let mut blocks = Vec::new();
    for &theta in &data.metadata().phases {
        let xs = data.values_at(theta, None);
        for chunk in xs.chunks(BLOCK) {
            let mut psi = Array2::zeros((chunk.len(), d));
            for (row, &x) in psi.axis_iter_mut(Axis(0)).zip(chunk) {
                fill_wavefunctions(x, row.into_slice().expect("row-major"));
            }
            blocks.push(Block { theta, psi });
        }
    }
    blocks
}

struct Evaluation<T> {
    mean_ll: T,
    r: Array2<C<T>>,
}

fn evaluate<T: Real>(
    rho: &DensityMatrix<T>,
    eta: T,
    blocks: &[Block<T>],
    n_samples: usize,
) -> Result<Evaluation<T>> {
    let lossy = if eta == T::one() {
        rho.elements().clone()
    } else {
        beam_splitter_branches(rho.elements(), eta, T::one() - eta, 0..)
    };
    let partial: Vec<Result<(T, Array2<T>)>> = blocks
        .par_iter()
        .map(|b| {
            let m = rotated_real_part(&lossy, b.theta);
            let pm = b.psi.dot(&m);
            let mut weighted = b.psi.clone();
            let mut ll = T::zero();
            for ((mut w, pm_row), psi_row) in weighted
                .axis_iter_mut(Axis(0))
                .zip(pm.axis_iter(Axis(0)))
                .zip(b.psi.axis_iter(Axis(0)))
            {
                let p: T = pm_row.iter().zip(psi_row).map(|(&u, &v)| u * v).sum();
                if !(p > T::zero()) {
                    return Err(Error::NonPhysical(format!(
                        "non-positive outcome probability {p} at theta {}",
                        b.theta
                    )));
                }
                ll += p.ln();
                w.mapv_inplace(|v| v / p);
            }
            Ok((ll, weighted.t().dot(&b.psi)))
        })
        .collect();

    let d = rho.cutoff().dim();
    let mut acc = Array2::<C<T>>::zeros((d, d));
    let mut ll = T::zero();
    for (b, part) in blocks.iter().zip(partial) {
        let (block_ll, s) = part?;
        ll += block_ll;
        for ((i, j), z) in acc.indexed_iter_mut() {
            *z = *z + phase(T::of(i as f64 - j as f64) * b.theta).scale(s[[i, j]]);
        }
    }
    let n = T::of_usize(n_samples);
    let mut r = if eta == T::one() { acc } else { loss_adjoint(&acc, eta) };
    r.mapv_inplace(|z| z.unscale(n));
    Ok(Evaluation {
        mean_ll: ll / n,
        r,
    })
}

/// N[A ρ A†] for Hermitian A.
fn conjugate_step<T: Real>(rho: &DensityMatrix<T>, a: &Array2<C<T>>) -> Result<DensityMatrix<T>> {
    let mut out = a.dot(rho.elements()).dot(a);
    linalg::hermitize(&mut out);
    DensityMatrix::from_matrix_unchecked(rho.cutoff(), out).normalized()
}

fn diluted<T: Real>(r: &Array2<C<T>>, eps: T) -> Array2<C<T>> {
    let mut a = r.mapv(|z| z.scale(eps));
    for i in 0..a.nrows() {
        a[[i, i]] = a[[i, i]] + C::one();
    }
    a
}

fn max_diagonal_change<T: Real>(a: &DensityMatrix<T>, b: &DensityMatrix<T>) -> T {
    a.diagonal()
        .into_iter()
        .zip(b.diagonal())
        .map(|(u, v)| (u - v).abs())
        .fold(T::zero(), T::max)
}

/// Fixed-point iteration ρ ← N[R(ρ) ρ R(ρ)] from the maximally mixed state,
/// with R(ρ) = (1/N_s) Σ_j Π_j / Tr(Π_j ρ).
///
/// A step that would lower the likelihood is replaced by
/// N[(1 + εR) ρ (1 + εR)] with ε halved until the likelihood does not
/// decrease, so the returned trace is monotone.
pub fn maxlik_reconstruct<T: Real>(
    data: &QuadratureDataset<T>,
    settings: &TomographySettings<T>,
) -> Result<ReconstructionResult<T>> {
    settings.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyData("quadrature dataset"));
    }
    let tags: std::collections::BTreeSet<_> = data.records().iter().map(|r| r.tag).collect();
    if tags.len() > 1 {
        return Err(Error::Format(format!("dataset mixes tags {tags:?}")));
    }
    let mut warnings = Vec::new();
    let populated = data
        .metadata()
        .phases
        .iter()
        .filter(|&&t| !data.values_at(t, None).is_empty())
        .count();
    if populated < 2 {
        let msg = "single local-oscillator phase: only phase-averaged information is recoverable";
        log::warn!("{msg}");
        warnings.push(msg.to_string());
    }

    let blocks = prepare(data, settings.cutoff);
    let n_samples = data.len();
    let eta = settings.eta;
    let mut rho = DensityMatrix::maximally_mixed(settings.cutoff);
    let mut current = evaluate(&rho, eta, &blocks, n_samples)?;
    let mut trace = vec![current.mean_ll];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < settings.max_iters {
        iterations += 1;
        let mut step = None;
        let candidate = conjugate_step(&rho, &current.r)?;
        let eval = evaluate(&candidate, eta, &blocks, n_samples)?;
        if eval.mean_ll >= current.mean_ll {
            step = Some((candidate, eval));
        } else {
            let mut eps = T::one();
            for _ in 0..DILUTION_STEPS {
                eps *= T::of(0.5);
                let candidate = conjugate_step(&rho, &diluted(&current.r, eps))?;
                let eval = evaluate(&candidate, eta, &blocks, n_samples)?;
                if eval.mean_ll >= current.mean_ll {
                    step = Some((candidate, eval));
                    break;
                }
            }
        }
        let Some((next, eval)) = step else {
            log::debug!("no likelihood-increasing step at iteration {iterations}");
            converged = true;
            break;
        };
        let min_eig = next.min_eigenvalue();
        if min_eig < -PSD_TOLERANCE {
            return Err(Error::NonPhysical(format!(
                "iterate {iterations} has eigenvalue {min_eig:e}"
            )));
        }
        let gain = eval.mean_ll - current.mean_ll;
        let diag = max_diagonal_change(&next, &rho);
        rho = next;
        current = eval;
        trace.push(current.mean_ll);
        if gain < settings.ll_tol || diag < settings.diag_tol {
            converged = true;
            break;
        }
    }

    let top = rho.diagonal()[settings.cutoff.n_max()];
    if top > T::of(1e-3) {
        let msg = format!("population {top} in the top Fock level; cutoff may be too small");
        log::warn!("{msg}");
        warnings.push(msg);
    }
    Ok(ReconstructionResult {
        rho,
        log_likelihood_trace: trace,
        iterations_used: iterations,
        converged,
        warnings,
    })
}

/// Fidelity of a reconstruction to the coherent state |2α⟩.
pub fn amplified_fidelity_diagnostic<T: Real>(rho: &DensityMatrix<T>, alpha: C<T>) -> Result<T> {
    let target = T::of(2.0) * alpha.norm();
    let cutoff = FockCutoff::covering(target.as_f64());
    let cutoff = if cutoff.n_max() > rho.cutoff().n_max() {
        cutoff
    } else {
        rho.cutoff()
    };
    let reference = coherent_state(alpha.scale(T::of(2.0)), cutoff)?;
    state_fidelity(&rho.embedded(cutoff)?, &reference)
}

#[derive(Serialize, Deserialize)]
struct DensityJson<T> {
    n_max: usize,
    re: Vec<Vec<T>>,
    im: Vec<Vec<T>>,
}

/// `{"n_max": .., "re": [[..]], "im": [[..]]}` with rows indexed by m.
pub fn write_density_json<T: Real, W: Write>(rho: &DensityMatrix<T>, writer: W) -> Result<()> {
    let rows = |f: fn(&C<T>) -> T| {
        rho.elements()
            .rows()
            .into_iter()
            .map(|r| r.iter().map(f).collect())
            .collect()
    };
    let doc = DensityJson {
        n_max: rho.cutoff().n_max(),
        re: rows(|z| z.re),
        im: rows(|z| z.im),
    };
    serde_json::to_writer_pretty(writer, &doc)?;
    Ok(())
}

pub fn read_density_json<T: Real, R: Read>(reader: R) -> Result<DensityMatrix<T>> {
    let doc: DensityJson<T> = serde_json::from_reader(reader)?;
    let cutoff = FockCutoff::new(doc.n_max)?;
    let d = cutoff.dim();
    let square = |m: &Vec<Vec<T>>| m.len() == d && m.iter().all(|r| r.len() == d);
    if !square(&doc.re) || !square(&doc.im) {
        return Err(Error::Format(format!("density matrix is not {d}x{d}")));
    }
    let elements = Array2::from_shape_fn((d, d), |(i, j)| C::new(doc.re[i][j], doc.im[i][j]));
    DensityMatrix::from_matrix(cutoff, elements)
}

/// Real and imaginary parts as two headerless CSV matrices.
pub fn write_density_csv<T: Real, W1: Write, W2: Write>(
    rho: &DensityMatrix<T>,
    real: W1,
    imag: W2,
) -> Result<()> {
    fn put<T: Real, W: Write>(rho: &DensityMatrix<T>, w: W, f: fn(&C<T>) -> T) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        for row in rho.elements().rows() {
            w.serialize(row.iter().map(f).collect::<Vec<_>>())?;
        }
        w.flush()?;
        Ok(())
    }
    put(rho, real, |z| z.re)?;
    put(rho, imag, |z| z.im)
}

/// `iteration,log_likelihood` rows.
pub fn write_log_likelihood_csv<T: Real, W: Write>(trace: &[T], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["iteration", "log_likelihood"])?;
    for (i, ll) in trace.iter().enumerate() {
        w.serialize((i, ll))?;
    }
    w.flush()?;
    Ok(())
}
