// Copyright 2026 The nla Authors
// SPDX-License-Identifier: Apache-2.0

//! Truncated Fock-space states and operators.
//!
//! A single-mode field is represented on the basis |0⟩..|n_max⟩. States are
//! plain values: every operation returns a new state and nothing is
//! normalized behind the caller's back. Unnormalized kets are first class
//! because the squared norm after a conditional operation is the (relative)
//! success weight of that operation.
//!
//! # Quadrature convention
//!
//! Every phase-space number in this crate uses
//!
//! ```text
//! x_θ = â e^{−iθ} + â† e^{iθ}
//! ```
//!
//! so the vacuum has Var(x_θ) = 1 (one shot-noise unit), a coherent state
//! |α⟩ has ⟨x_θ⟩ = 2|α| cos(arg α − θ), and the phase quadrature is
//! p = x_{π/2}.

use ndarray::{Array1, Array2};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{creal, phase, Real, C};

/// Largest tail probability tolerated beyond the cutoff.
pub const TAIL_TOLERANCE: f64 = 1e-12;

/// Smallest cutoff picked by [`FockCutoff::covering`].
pub const CUTOFF_FLOOR: usize = 20;

/// Highest retained Fock number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct FockCutoff {
    n_max: usize,
}

impl FockCutoff {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::param("n_max", n_max as f64, ">= 1"));
        }
        Ok(Self { n_max })
    }

    #[inline]
    pub fn n_max(self) -> usize {
        self.n_max
    }

    /// Hilbert-space dimension, `n_max + 1`.
    #[inline]
    pub fn dim(self) -> usize {
        self.n_max + 1
    }

    /// Smallest cutoff whose Poisson tail for a coherent amplitude of modulus
    /// `amplitude` is below [`TAIL_TOLERANCE`], but never below [`CUTOFF_FLOOR`].
    pub fn covering(amplitude: f64) -> Self {
        let mean = amplitude * amplitude;
        let mut n_max = CUTOFF_FLOOR;
        while poisson_tail(mean, n_max) >= TAIL_TOLERANCE {
            n_max += 1;
        }
        Self { n_max }
    }

    /// Default cutoff for amplifying |α⟩: wide enough for the target |2α⟩.
    pub fn for_amplification(alpha_abs: f64) -> Self {
        Self::covering(2.0 * alpha_abs)
    }

    /// This cutoff raised by `extra` levels.
    pub fn raised(self, extra: usize) -> Self {
        Self {
            n_max: self.n_max + extra,
        }
    }
}

impl TryFrom<usize> for FockCutoff {
    type Error = Error;
    fn try_from(n_max: usize) -> Result<Self> {
        Self::new(n_max)
    }
}

impl From<FockCutoff> for usize {
    fn from(c: FockCutoff) -> usize {
        c.n_max
    }
}

/// P(n > n_max) for a Poisson distribution of the given mean, summed from the
/// tail side to avoid cancellation.
pub fn poisson_tail<T: Real>(mean: T, n_max: usize) -> T {
    if mean <= T::zero() {
        return T::zero();
    }
    let first = n_max + 1;
    let ln_fact: T = (1..=first).map(|k| T::of_usize(k).ln()).sum();
    let mut term = (-mean + T::of_usize(first) * mean.ln() - ln_fact).exp();
    let mut total = T::zero();
    let mut k = first;
    loop {
        total += term;
        k += 1;
        term = term * mean / T::of_usize(k);
        if term <= total * T::epsilon() || k > first + 10_000 {
            break;
        }
    }
    total
}

/// A ket over |0⟩..|n_max⟩, possibly unnormalized.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState<T> {
    amplitudes: Array1<C<T>>,
    cutoff: FockCutoff,
}

impl<T: Real> PureState<T> {
    pub fn from_amplitudes(cutoff: FockCutoff, amplitudes: Vec<C<T>>) -> Result<Self> {
        if amplitudes.len() != cutoff.dim() {
            return Err(Error::CutoffMismatch {
                left: amplitudes.len().saturating_sub(1),
                right: cutoff.n_max(),
            });
        }
        Ok(Self {
            amplitudes: Array1::from(amplitudes),
            cutoff,
        })
    }

    pub(crate) fn from_array(cutoff: FockCutoff, amplitudes: Array1<C<T>>) -> Self {
        debug_assert_eq!(amplitudes.len(), cutoff.dim());
        Self { amplitudes, cutoff }
    }

    pub fn vacuum(cutoff: FockCutoff) -> Self {
        let mut amplitudes = Array1::zeros(cutoff.dim());
        amplitudes[0] = C::one();
        Self { amplitudes, cutoff }
    }

    /// Number state |n⟩.
    pub fn fock(n: usize, cutoff: FockCutoff) -> Result<Self> {
        if n > cutoff.n_max() {
            return Err(Error::TruncationOverflow {
                n_max: cutoff.n_max(),
                weight: 1.0,
            });
        }
        let mut amplitudes = Array1::zeros(cutoff.dim());
        amplitudes[n] = C::one();
        Ok(Self { amplitudes, cutoff })
    }

    #[inline]
    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    #[inline]
    pub fn amplitudes(&self) -> &Array1<C<T>> {
        &self.amplitudes
    }

    #[inline]
    pub fn amplitude(&self, n: usize) -> C<T> {
        self.amplitudes.get(n).copied().unwrap_or_else(C::zero)
    }

    /// ⟨ψ|ψ⟩
    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if !(norm > T::zero()) {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(creal(norm.recip())))
    }

    pub fn scaled(&self, factor: C<T>) -> Self {
        Self {
            amplitudes: self.amplitudes.mapv(|z| z * factor),
            cutoff: self.cutoff,
        }
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &Self) -> Result<C<T>> {
        same_cutoff(self.cutoff, other.cutoff)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .fold(C::zero(), |acc, (a, b)| acc + a.conj() * b))
    }

    /// Applies a diagonal operator Σ d_n |n⟩⟨n|.
    pub fn apply_diagonal(&self, diagonal: &Array1<T>) -> Result<Self> {
        if diagonal.len() != self.cutoff.dim() {
            return Err(Error::CutoffMismatch {
                left: diagonal.len().saturating_sub(1),
                right: self.cutoff.n_max(),
            });
        }
        Ok(Self {
            amplitudes: &self.amplitudes * &diagonal.mapv(creal),
            cutoff: self.cutoff,
        })
    }

    /// Fraction of the squared norm carried by levels `n >= from`.
    pub fn weight_from(&self, from: usize) -> T {
        let total = self.norm_sqr();
        if total <= T::zero() {
            return T::zero();
        }
        let upper: T = self.amplitudes.iter().skip(from).map(|z| z.norm_sqr()).sum();
        upper / total
    }

    /// The same ket embedded at a larger cutoff.
    pub fn embedded(&self, cutoff: FockCutoff) -> Result<Self> {
        if cutoff.n_max() < self.cutoff.n_max() {
            return Err(Error::CutoffMismatch {
                left: self.cutoff.n_max(),
                right: cutoff.n_max(),
            });
        }
        let mut amplitudes = Array1::zeros(cutoff.dim());
        amplitudes
            .slice_mut(ndarray::s![..self.cutoff.dim()])
            .assign(&self.amplitudes);
        Ok(Self { amplitudes, cutoff })
    }
}

/// A density operator over |0⟩..|n_max⟩.
///
/// The trace is tracked rather than forced to one; conditional (heralded)
/// branches are carried with their probability as trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T> {
    elements: Array2<C<T>>,
    cutoff: FockCutoff,
}

impl<T: Real> DensityMatrix<T> {
    /// Wraps a matrix after checking shape and Hermiticity.
    pub fn from_matrix(cutoff: FockCutoff, elements: Array2<C<T>>) -> Result<Self> {
        if elements.nrows() != cutoff.dim() || elements.ncols() != cutoff.dim() {
            return Err(Error::CutoffMismatch {
                left: elements.nrows().saturating_sub(1),
                right: cutoff.n_max(),
            });
        }
        let defect = linalg::hermiticity_defect(&elements);
        if defect > hermitian_tolerance::<T>() {
            return Err(Error::NonPhysical(format!(
                "not Hermitian (defect {:e})",
                defect.as_f64()
            )));
        }
        Ok(Self { elements, cutoff })
    }

    pub(crate) fn from_matrix_unchecked(cutoff: FockCutoff, elements: Array2<C<T>>) -> Self {
        debug_assert_eq!(elements.nrows(), cutoff.dim());
        Self { elements, cutoff }
    }

    /// |ψ⟩⟨ψ| with the ket's own norm.
    pub fn from_pure(state: &PureState<T>) -> Self {
        let a = state.amplitudes();
        let n = a.len();
        let elements = Array2::from_shape_fn((n, n), |(i, j)| a[i] * a[j].conj());
        Self {
            elements,
            cutoff: state.cutoff(),
        }
    }

    pub fn maximally_mixed(cutoff: FockCutoff) -> Self {
        let d = cutoff.dim();
        let w = creal(T::of_usize(d).recip());
        Self {
            elements: Array2::from_diag_elem(d, w),
            cutoff,
        }
    }

    #[inline]
    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    #[inline]
    pub fn elements(&self) -> &Array2<C<T>> {
        &self.elements
    }

    pub fn into_elements(self) -> Array2<C<T>> {
        self.elements
    }

    pub fn trace(&self) -> T {
        linalg::trace(&self.elements).re
    }

    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace();
        if !(tr > T::zero()) {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(tr.recip()))
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            elements: self.elements.mapv(|z| z.scale(factor)),
            cutoff: self.cutoff,
        }
    }

    /// Elementwise sum of two operators on the same cutoff.
    pub fn plus(&self, other: &Self) -> Result<Self> {
        same_cutoff(self.cutoff, other.cutoff)?;
        Ok(Self {
            elements: &self.elements + &other.elements,
            cutoff: self.cutoff,
        })
    }

    /// Photon-number distribution ρ_nn.
    pub fn diagonal(&self) -> Vec<T> {
        self.elements.diag().iter().map(|z| z.re).collect()
    }

    /// Tr ρ² / (Tr ρ)².
    pub fn purity(&self) -> T {
        let tr = self.trace();
        linalg::trace_product(&self.elements, &self.elements).re / (tr * tr)
    }

    /// Eigenvalues in ascending order (computed in double precision).
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.elements)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Checks Hermiticity, positivity (λ_min ≥ −1e−10) and 0 < Tr ρ ≤ 1 + 1e−12.
    pub fn check_physical(&self) -> Result<()> {
        let defect = linalg::hermiticity_defect(&self.elements);
        if defect > hermitian_tolerance::<T>() {
            return Err(Error::NonPhysical(format!(
                "not Hermitian (defect {:e})",
                defect.as_f64()
            )));
        }
        let min = self.min_eigenvalue();
        if min < -1e-10 {
            return Err(Error::NonPhysical(format!("eigenvalue {min:e} below -1e-10")));
        }
        let tr = self.trace().as_f64();
        if !(tr > 0.0 && tr <= 1.0 + 1e-12 + 8.0 * T::epsilon().as_f64()) {
            return Err(Error::NonPhysical(format!("trace {tr} outside (0, 1]")));
        }
        Ok(())
    }

    /// The same operator embedded at a larger cutoff.
    pub fn embedded(&self, cutoff: FockCutoff) -> Result<Self> {
        if cutoff.n_max() < self.cutoff.n_max() {
            return Err(Error::CutoffMismatch {
                left: self.cutoff.n_max(),
                right: cutoff.n_max(),
            });
        }
        let d = self.cutoff.dim();
        let mut elements = Array2::zeros((cutoff.dim(), cutoff.dim()));
        elements
            .slice_mut(ndarray::s![..d, ..d])
            .assign(&self.elements);
        Ok(Self { elements, cutoff })
    }
}

fn hermitian_tolerance<T: Real>() -> T {
    T::of(1e-12).max(T::epsilon() * T::of(64.0))
}

pub(crate) fn same_cutoff(a: FockCutoff, b: FockCutoff) -> Result<()> {
    if a != b {
        return Err(Error::CutoffMismatch {
            left: a.n_max(),
            right: b.n_max(),
        });
    }
    Ok(())
}

/// Common view of kets and density operators.
pub trait FockState<T: Real> {
    fn cutoff(&self) -> FockCutoff;

    /// ⟨ψ|ψ⟩ or Tr ρ.
    fn weight(&self) -> T;

    /// Unnormalized ⟨ψ|O|ψ⟩ or Tr(ρO).
    fn raw_expectation(&self, op: &Array2<C<T>>) -> C<T>;

    /// Unnormalized ⟨b|ρ|b⟩ (or |⟨b|ψ⟩|²).
    fn projection_onto(&self, b: &PureState<T>) -> T;

    fn to_density(&self) -> DensityMatrix<T>;
}

impl<T: Real> FockState<T> for PureState<T> {
    fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    fn weight(&self) -> T {
        self.norm_sqr()
    }

    fn raw_expectation(&self, op: &Array2<C<T>>) -> C<T> {
        let a = &self.amplitudes;
        let mut acc = C::zero();
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            let row: C<T> = op
                .row(i)
                .iter()
                .zip(a.iter())
                .fold(C::zero(), |s, (o, aj)| s + o * aj);
            acc = acc + ai.conj() * row;
        }
        acc
    }

    fn projection_onto(&self, b: &PureState<T>) -> T {
        b.amplitudes
            .iter()
            .zip(self.amplitudes.iter())
            .fold(C::zero(), |acc, (x, y)| acc + x.conj() * y)
            .norm_sqr()
    }

    fn to_density(&self) -> DensityMatrix<T> {
        DensityMatrix::from_pure(self)
    }
}

impl<T: Real> FockState<T> for DensityMatrix<T> {
    fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    fn weight(&self) -> T {
        self.trace()
    }

    fn raw_expectation(&self, op: &Array2<C<T>>) -> C<T> {
        linalg::trace_product(&self.elements, op)
    }

    fn projection_onto(&self, b: &PureState<T>) -> T {
        let v = b.amplitudes();
        let rv = self.elements.dot(v);
        v.iter()
            .zip(rv.iter())
            .fold(C::zero(), |acc, (x, y)| acc + x.conj() * y)
            .re
    }

    fn to_density(&self) -> DensityMatrix<T> {
        self.clone()
    }
}

/// Coherent state |α⟩ with amplitudes e^{−|α|²/2} αⁿ/√n!.
///
/// Fails if the Poisson tail beyond the cutoff is not below [`TAIL_TOLERANCE`].
pub fn coherent_state<T: Real>(alpha: C<T>, cutoff: FockCutoff) -> Result<PureState<T>> {
    let mean = alpha.norm_sqr();
    let tail = poisson_tail(mean, cutoff.n_max());
    if tail >= T::of(TAIL_TOLERANCE) {
        return Err(Error::CutoffTooSmall {
            n_max: cutoff.n_max(),
            tail: tail.as_f64(),
        });
    }
    let mut amplitudes = Array1::zeros(cutoff.dim());
    let mut c = creal((-mean / T::of(2.0)).exp());
    amplitudes[0] = c;
    for n in 1..cutoff.dim() {
        c = c * alpha / T::of_usize(n).sqrt();
        amplitudes[n] = c;
    }
    Ok(PureState::from_array(cutoff, amplitudes))
}

/// Which ladder operator to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    Creation,
    Annihilation,
}

/// â†|ψ⟩ or â|ψ⟩, unnormalized.
///
/// Creation refuses to act on a ket whose relative weight at n_max is not
/// below [`TAIL_TOLERANCE`], since that weight would be pushed out of the
/// truncated space.
pub fn apply_ladder<T: Real>(state: &PureState<T>, which: Ladder) -> Result<PureState<T>> {
    let cutoff = state.cutoff();
    let n_max = cutoff.n_max();
    let a = state.amplitudes();
    let mut out = Array1::zeros(cutoff.dim());
    match which {
        Ladder::Creation => {
            let top = state.weight_from(n_max);
            if top >= T::of(TAIL_TOLERANCE) {
                return Err(Error::TruncationOverflow {
                    n_max,
                    weight: top.as_f64(),
                });
            }
            for n in 0..n_max {
                out[n + 1] = a[n] * T::of_usize(n + 1).sqrt();
            }
        }
        Ladder::Annihilation => {
            for n in 1..=n_max {
                out[n - 1] = a[n] * T::of_usize(n).sqrt();
            }
        }
    }
    Ok(PureState::from_array(cutoff, out))
}

/// Observables with closed-form truncated matrices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Observable<T> {
    /// n̂ = â†â
    Number,
    /// â
    Annihilation,
    /// x_θ
    Quadrature(T),
    /// x_θ², built exactly as â²e^{−2iθ} + â†²e^{2iθ} + 2n̂ + 1
    QuadratureSquared(T),
}

impl<T: Real> Observable<T> {
    pub fn matrix(&self, cutoff: FockCutoff) -> Array2<C<T>> {
        let d = cutoff.dim();
        let mut m = Array2::zeros((d, d));
        let sq = |n: usize| T::of_usize(n).sqrt();
        match *self {
            Observable::Number => {
                for n in 0..d {
                    m[[n, n]] = creal(T::of_usize(n));
                }
            }
            Observable::Annihilation => {
                for n in 1..d {
                    m[[n - 1, n]] = creal(sq(n));
                }
            }
            Observable::Quadrature(theta) => {
                let down = phase(-theta);
                for n in 1..d {
                    m[[n - 1, n]] = down * sq(n);
                    m[[n, n - 1]] = down.conj() * sq(n);
                }
            }
            Observable::QuadratureSquared(theta) => {
                let down2 = phase(-(theta + theta));
                for n in 0..d {
                    m[[n, n]] = creal(T::of_usize(2 * n + 1));
                }
                for n in 2..d {
                    let amp = sq(n) * sq(n - 1);
                    m[[n - 2, n]] = down2 * amp;
                    m[[n, n - 2]] = down2.conj() * amp;
                }
            }
        }
        m
    }
}

/// Normalized expectation ⟨O⟩ = ⟨ψ|O|ψ⟩/⟨ψ|ψ⟩ or Tr(ρO)/Tr ρ.
pub fn expectation<T: Real, S: FockState<T> + ?Sized>(
    state: &S,
    observable: Observable<T>,
) -> Result<C<T>> {
    let w = state.weight();
    if !(w > T::zero()) {
        return Err(Error::ZeroNorm);
    }
    let op = observable.matrix(state.cutoff());
    Ok(state.raw_expectation(&op) / w)
}

/// Var(x_θ) in shot-noise units.
pub fn quadrature_variance<T: Real, S: FockState<T> + ?Sized>(state: &S, theta: T) -> Result<T> {
    let mean = expectation(state, Observable::Quadrature(theta))?.re;
    let second = expectation(state, Observable::QuadratureSquared(theta))?.re;
    Ok(second - mean * mean)
}

/// Normalized overlap |⟨b|a⟩|²/(⟨a|a⟩⟨b|b⟩), or ⟨b|ρ|b⟩/(Tr ρ ⟨b|b⟩) for mixed `a`.
pub fn state_fidelity<T: Real, S: FockState<T> + ?Sized>(a: &S, b: &PureState<T>) -> Result<T> {
    same_cutoff(a.cutoff(), b.cutoff())?;
    let wa = a.weight();
    let wb = b.norm_sqr();
    if !(wa > T::zero()) || !(wb > T::zero()) {
        return Err(Error::ZeroNorm);
    }
    let f = a.projection_onto(b) / (wa * wb);
    Ok(f.max(T::zero()).min(T::one()))
}

/// Σ_{k ∈ reflected} M_k ρ M_k† for a beam splitter with intensity
/// coefficients `transmissivity` + `reflectivity` = 1 mixing the mode with
/// vacuum, where M_k is the Kraus operator for k photons leaving through the
/// other port:
/// (M_k)_{m,m+k} = √C(m+k,k) t^m r^k.
///
/// With `reflected = 0..` this is the pure-loss channel; with `1..` it is the
/// branch heralded by a click on the reflected port.
pub(crate) fn beam_splitter_branches<T: Real>(
    rho: &Array2<C<T>>,
    transmissivity: T,
    reflectivity: T,
    reflected: std::ops::RangeFrom<usize>,
) -> Array2<C<T>> {
    let d = rho.nrows();
    let t2 = transmissivity;
    let r2 = reflectivity;
    let ln_fact = linalg::ln_factorials(2 * d);
    let sqrt_binom = |n: usize, k: usize| -> T {
        T::of((0.5 * (ln_fact[n] - ln_fact[k] - ln_fact[n - k])).exp())
    };
    let sqrt_t2 = t2.sqrt();
    let t_pow = |e: usize| -> T {
        // t^{e} with t² given, exact when t² = 1
        let half = t2.powi((e / 2) as i32);
        if e.is_multiple_of(2) {
            half
        } else {
            half * sqrt_t2
        }
    };
    let mut out = Array2::zeros((d, d));
    for k in reflected.start..d {
        let rk = r2.powi(k as i32);
        if rk.is_zero() {
            break;
        }
        for m in 0..(d - k) {
            let cm = sqrt_binom(m + k, k);
            for n in 0..(d - k) {
                let src = rho[[m + k, n + k]];
                if src.is_zero() {
                    continue;
                }
                let coef = cm * sqrt_binom(n + k, k) * t_pow(m + n) * rk;
                out[[m, n]] = out[[m, n]] + src.scale(coef);
            }
        }
    }
    out
}

/// Adjoint of the pure-loss channel: Tr[L(ρ) A] = Tr[ρ L†(A)].
pub(crate) fn loss_adjoint<T: Real>(op: &Array2<C<T>>, transmissivity: T) -> Array2<C<T>> {
    let d = op.nrows();
    let t2 = transmissivity;
    let r2 = T::one() - transmissivity;
    let ln_fact = linalg::ln_factorials(2 * d);
    let sqrt_binom = |n: usize, k: usize| -> T {
        T::of((0.5 * (ln_fact[n] - ln_fact[k] - ln_fact[n - k])).exp())
    };
    let sqrt_t2 = t2.sqrt();
    let t_pow = |e: usize| -> T {
        let half = t2.powi((e / 2) as i32);
        if e.is_multiple_of(2) {
            half
        } else {
            half * sqrt_t2
        }
    };
    let mut out = Array2::zeros((d, d));
    for k in 0..d {
        let rk = r2.powi(k as i32);
        if rk.is_zero() {
            break;
        }
        for m in 0..(d - k) {
            let cm = sqrt_binom(m + k, k);
            for n in 0..(d - k) {
                let src = op[[m, n]];
                if src.is_zero() {
                    continue;
                }
                let coef = cm * sqrt_binom(n + k, k) * t_pow(m + n) * rk;
                out[[m + k, n + k]] = out[[m + k, n + k]] + src.scale(coef);
            }
        }
    }
    out
}
