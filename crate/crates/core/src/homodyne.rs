// Copyright 2026 The nla Authors
// SPDX-License-Identifier: Apache-2.0

//! Lossy balanced homodyne detection.
//!
//! Detector inefficiency is modelled as a pure-loss channel applied before an
//! ideal quadrature measurement. Quadrature densities are evaluated exactly
//! from the oscillator wavefunctions and sampled by inverse CDF on a dense
//! grid, one independent random stream per local-oscillator phase.

use std::io::{Read, Write};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{beam_splitter_branches, expectation, DensityMatrix, FockState, Observable};
use crate::scalar::{phase, Real, C};

/// Largest grid spacing accepted by [`quadrature_pdf`].
pub const MAX_PDF_SPACING: f64 = 0.02;

/// Grid spacing of the cached inverse-CDF table.
pub const SAMPLING_SPACING: f64 = 0.01;

/// Pure-loss channel of transmissivity `eta` (beam splitter with vacuum,
/// reflected mode traced out).
///
/// ρ'_{mn} = Σ_k √(C(m+k,k) C(n+k,k)) η^{(m+n)/2} (1−η)^k ρ_{m+k,n+k}
pub fn loss_channel<T: Real, S: FockState<T> + ?Sized>(state: &S, eta: T) -> Result<DensityMatrix<T>> {
    check_eta(eta)?;
    let rho = state.to_density();
    if eta == T::one() {
        return Ok(rho);
    }
    let out = beam_splitter_branches(rho.elements(), eta, T::one() - eta, 0..);
    Ok(DensityMatrix::from_matrix_unchecked(rho.cutoff(), out))
}

pub(crate) fn check_eta<T: Real>(eta: T) -> Result<()> {
    if !(eta > T::zero() && eta <= T::one()) {
        return Err(Error::param("eta", eta.as_f64(), "in (0, 1]"));
    }
    Ok(())
}

/// Oscillator wavefunctions ψ_0(x)..ψ_{n_max}(x) in the shot-noise scaling
/// (ψ_0² is the standard normal density), via the three-term recurrence
/// x ψ_n = √(n+1) ψ_{n+1} + √n ψ_{n−1}.
pub fn oscillator_wavefunctions<T: Real>(x: T, n_max: usize) -> Vec<T> {
    let mut out = vec![T::zero(); n_max + 1];
    fill_wavefunctions(x, &mut out);
    out
}

pub(crate) fn fill_wavefunctions<T: Real>(x: T, out: &mut [T]) {
    let two_pi = T::of(2.0) * T::PI();
    out[0] = two_pi.powf(T::of(-0.25)) * (-x * x / T::of(4.0)).exp();
    if out.len() > 1 {
        out[1] = x * out[0];
    }
    for n in 1..out.len().saturating_sub(1) {
        let nn = T::of_usize(n);
        out[n + 1] = (x * out[n] - nn.sqrt() * out[n - 1]) / (nn + T::one()).sqrt();
    }
}

/// Re(ρ_{mn} e^{i(n−m)θ}); the quadrature density is ψᵀ M ψ for real ψ.
pub(crate) fn rotated_real_part<T: Real>(rho: &Array2<C<T>>, theta: T) -> Array2<T> {
    let d = rho.nrows();
    Array2::from_shape_fn((d, d), |(m, n)| {
        let shift = T::of(n as f64 - m as f64) * theta;
        (rho[[m, n]] * phase(shift)).re
    })
}

#[inline]
pub(crate) fn quadratic_form<T: Real>(m: &Array2<T>, psi: &[T]) -> T {
    let d = psi.len();
    let mut acc = T::zero();
    for i in 0..d {
        let row = m.row(i);
        let mut s = T::zero();
        for j in 0..d {
            s += row[j] * psi[j];
        }
        acc += psi[i] * s;
    }
    acc
}

/// Half-width a quadrature grid must cover: twice the coherent-equivalent
/// displacement plus eight shot-noise units.
pub fn required_half_width<T: Real, S: FockState<T> + ?Sized>(state: &S) -> Result<T> {
    let n = expectation(state, Observable::Number)?.re.max(T::zero());
    Ok(T::of(2.0) * n.sqrt() + T::of(8.0))
}

fn check_grid<T: Real>(x_grid: &[T], required: T) -> Result<()> {
    let (Some(&lo), Some(&hi)) = (x_grid.first(), x_grid.last()) else {
        return Err(Error::EmptyData("quadrature grid"));
    };
    let mut worst = T::zero();
    for w in x_grid.windows(2) {
        let step = w[1] - w[0];
        if !(step > T::zero()) {
            return Err(Error::Format("quadrature grid must be strictly increasing".into()));
        }
        worst = worst.max(step);
    }
    if worst > T::of(MAX_PDF_SPACING) * (T::one() + T::of(1e-9)) {
        return Err(Error::GridTooCoarse {
            spacing: worst.as_f64(),
            limit: MAX_PDF_SPACING,
        });
    }
    if lo > -required || hi < required {
        return Err(Error::GridTooNarrow {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
            required: required.as_f64(),
        });
    }
    Ok(())
}

/// p(x|θ) = Σ_{mn} ρ_{mn} e^{i(n−m)θ} ψ_m(x) ψ_n(x) for the normalized state.
pub fn quadrature_pdf<T: Real, S: FockState<T> + ?Sized>(
    state: &S,
    theta: T,
    x_grid: &[T],
) -> Result<Vec<T>> {
    let rho = state.to_density().normalized()?;
    check_grid(x_grid, required_half_width(&rho)?)?;
    Ok(pdf_unchecked(&rho, theta, x_grid))
}

fn pdf_unchecked<T: Real>(rho: &DensityMatrix<T>, theta: T, x_grid: &[T]) -> Vec<T> {
    let m = rotated_real_part(rho.elements(), theta);
    let mut psi = vec![T::zero(); rho.cutoff().dim()];
    x_grid
        .iter()
        .map(|&x| {
            fill_wavefunctions(x, &mut psi);
            quadratic_form(&m, &psi).max(T::zero())
        })
        .collect()
}

/// Uniform grid `[-half_width, half_width]` with the given spacing.
pub fn symmetric_grid<T: Real>(half_width: T, spacing: T) -> Vec<T> {
    let steps = (half_width / spacing).ceil().to_usize().unwrap_or(0);
    let h = spacing * T::of_usize(steps);
    (0..=2 * steps)
        .map(|i| -h + spacing * T::of_usize(i))
        .collect()
}

/// `count` local-oscillator phases k·π/count, uniform on [0, π).
pub fn phase_grid<T: Real>(count: usize) -> Vec<T> {
    (0..count)
        .map(|k| T::PI() * T::of_usize(k) / T::of_usize(count))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureTag {
    Amplified,
    Input,
    Vacuum,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRecord<T> {
    pub theta: T,
    pub x: T,
    pub tag: QuadratureTag,
}

/// Sidecar metadata for a quadrature CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMetadata<T> {
    pub eta: T,
    pub seed: u64,
    pub counts_per_phase: usize,
    pub phases: Vec<T>,
    pub description: String,
}

/// Phase-tagged quadrature samples plus acquisition metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureDataset<T> {
    records: Vec<QuadratureRecord<T>>,
    meta: DatasetMetadata<T>,
}

impl<T: Real> QuadratureDataset<T> {
    /// Assembles a dataset, checking that every θ is on the declared phase
    /// grid and that each (tag, phase) pair has exactly `counts_per_phase`
    /// records.
    pub fn new(records: Vec<QuadratureRecord<T>>, meta: DatasetMetadata<T>) -> Result<Self> {
        let ds = Self { records, meta };
        ds.validate()?;
        Ok(ds)
    }

    fn validate(&self) -> Result<()> {
        check_eta(self.meta.eta)?;
        let mut counts = std::collections::BTreeMap::<(QuadratureTag, usize), usize>::new();
        for r in &self.records {
            let Some(k) = self.meta.phases.iter().position(|&p| p == r.theta) else {
                return Err(Error::Format(format!("theta {} not on the declared phase grid", r.theta)));
            };
            *counts.entry((r.tag, k)).or_default() += 1;
        }
        let tags: std::collections::BTreeSet<_> = counts.keys().map(|(t, _)| *t).collect();
        for tag in tags {
            for k in 0..self.meta.phases.len() {
                let got = counts.get(&(tag, k)).copied().unwrap_or(0);
                if got != self.meta.counts_per_phase {
                    return Err(Error::Format(format!(
                        "{tag:?} phase #{k}: {got} records, expected {}",
                        self.meta.counts_per_phase
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn records(&self) -> &[QuadratureRecord<T>] {
        &self.records
    }

    pub fn metadata(&self) -> &DatasetMetadata<T> {
        &self.meta
    }

    pub fn eta(&self) -> T {
        self.meta.eta
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Quadrature values recorded at phase `theta` (optionally for one tag).
    pub fn values_at(&self, theta: T, tag: Option<QuadratureTag>) -> Vec<T> {
        self.records
            .iter()
            .filter(|r| r.theta == theta && tag.is_none_or(|t| r.tag == t))
            .map(|r| r.x)
            .collect()
    }

    /// Writes `theta,x,tag` rows; floats use shortest round-trip formatting.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_metadata<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, &self.meta)?;
        Ok(())
    }

    /// Reads a CSV (lines starting with `#` are skipped) and its sidecar.
    pub fn read<R1: Read, R2: Read>(csv_reader: R1, metadata_reader: R2) -> Result<Self> {
        let meta: DatasetMetadata<T> = serde_json::from_reader(metadata_reader)?;
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(csv_reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["theta", "x", "tag"] {
            return Err(Error::Format(format!("unexpected CSV header {headers:?}")));
        }
        let records = rdr
            .deserialize()
            .collect::<std::result::Result<Vec<QuadratureRecord<T>>, _>>()?;
        Self::new(records, meta)
    }
}

/// Applies loss `eta`, then draws `counts_per_phase` samples of x_θ for every
/// phase by inverse-CDF lookup on a grid of spacing [`SAMPLING_SPACING`].
///
/// Phase `k` uses ChaCha stream `k` under `seed`, so the result is identical
/// whatever the thread count.
pub fn sample_quadratures<T: Real, S: FockState<T> + ?Sized>(
    state: &S,
    phases: &[T],
    counts_per_phase: usize,
    eta: T,
    seed: u64,
    tag: QuadratureTag,
) -> Result<QuadratureDataset<T>> {
    if counts_per_phase < 1 {
        return Err(Error::param("counts_per_phase", 0.0, ">= 1"));
    }
    if phases.is_empty() {
        return Err(Error::EmptyData("phase list"));
    }
    let lossy = loss_channel(state, eta)?.normalized()?;
    let half = required_half_width(&lossy)?.max(T::of(10.0));
    let grid = symmetric_grid(half, T::of(SAMPLING_SPACING));

    let per_phase: Vec<Vec<QuadratureRecord<T>>> = phases
        .par_iter()
        .enumerate()
        .map(|(k, &theta)| {
            let sampler = InverseCdf::new(&grid, &pdf_unchecked(&lossy, theta, &grid))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            Ok((0..counts_per_phase)
                .map(|_| QuadratureRecord {
                    theta,
                    x: sampler.sample(T::of(rng.random::<f64>())),
                    tag,
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let meta = DatasetMetadata {
        eta,
        seed,
        counts_per_phase,
        phases: phases.to_vec(),
        description: format!("{tag:?}").to_lowercase(),
    };
    Ok(QuadratureDataset {
        records: per_phase.into_iter().flatten().collect(),
        meta,
    })
}

/// Piecewise-linear CDF over a tabulated density.
struct InverseCdf<T> {
    grid: Vec<T>,
    cdf: Vec<T>,
}

impl<T: Real> InverseCdf<T> {
    fn new(grid: &[T], pdf: &[T]) -> Result<Self> {
        let mut cdf = Vec::with_capacity(grid.len());
        let mut acc = T::zero();
        cdf.push(acc);
        for i in 1..grid.len() {
            acc += (pdf[i] + pdf[i - 1]) * (grid[i] - grid[i - 1]) / T::of(2.0);
            cdf.push(acc);
        }
        if !(acc > T::zero()) {
            return Err(Error::ZeroNorm);
        }
        for c in cdf.iter_mut() {
            *c /= acc;
        }
        Ok(Self {
            grid: grid.to_vec(),
            cdf,
        })
    }

    fn sample(&self, u: T) -> T {
        let i = self.cdf.partition_point(|&c| c <= u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let (x0, x1) = (self.grid[i - 1], self.grid[i]);
        if c1 > c0 {
            x0 + (u - c0) / (c1 - c0) * (x1 - x0)
        } else {
            x0
        }
    }
}

/// Ratio of quadrature means with its propagated standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainEstimate<T> {
    pub gain: T,
    pub std_error: T,
}

fn mean_and_var<T: Real>(xs: &[T]) -> (T, T) {
    let n = T::of_usize(xs.len());
    let mean = xs.iter().copied().sum::<T>() / n;
    if xs.len() < 2 {
        return (mean, T::zero());
    }
    let ss: T = xs.iter().map(|&x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - T::one()))
}

/// mean(amplified)/mean(input) for samples taken at the same phase and
/// efficiency, so the efficiency cancels in the ratio.
pub fn gain_from_samples<T: Real>(amplified: &[T], input: &[T]) -> Result<GainEstimate<T>> {
    if amplified.is_empty() || input.is_empty() {
        return Err(Error::EmptyData("gain samples"));
    }
    let (ma, va) = mean_and_var(amplified);
    let (mb, vb) = mean_and_var(input);
    let na = T::of_usize(amplified.len());
    let nb = T::of_usize(input.len());
    let se_b = (vb / nb).sqrt();
    let sigmas = T::of(3.0);
    if mb == T::zero() || mb.abs() < sigmas * se_b {
        return Err(Error::UnstableRatio {
            mean: mb.as_f64(),
            sigmas: sigmas.as_f64(),
        });
    }
    let gain = ma / mb;
    let rel2 = va / (na * ma * ma) + vb / (nb * mb * mb);
    Ok(GainEstimate {
        gain,
        std_error: gain.abs() * rel2.sqrt(),
    })
}
