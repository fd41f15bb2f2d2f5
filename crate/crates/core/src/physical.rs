// Copyright 2026 The nla Authors
// SPDX-License-Identifier: Apache-2.0

//! Heralded implementation of ââ†.
//!
//! Photon addition: the signal meets a vacuum idler in a weak two-mode
//! squeezer exp[λ(â†b̂† − âb̂)] and an on/off detector clicks on the idler.
//! Photon subtraction: a beam splitter of reflectivity R taps the signal and an
//! on/off detector clicks on the reflected mode. Detectors are ideal
//! (unit efficiency, no dark counts), so a click is the projector 1 − |0⟩⟨0|.

use ndarray::Array2;
use num_traits::Zero;

use crate::amplifiers::amplify_ideal;
use crate::error::{Error, Result};
use crate::fock::{
    beam_splitter_branches, coherent_state, state_fidelity, DensityMatrix, FockCutoff, FockState,
    PureState,
};
use crate::scalar::{Real, C};

/// Largest squeezing parameter accepted by [`heralded_addition`].
pub const MAX_SQUEEZING: f64 = 0.3;

/// Series terms with norm below this are dropped.
const SERIES_TOLERANCE: f64 = 1e-14;
const SERIES_MAX_TERMS: usize = 500;

/// Required emptiness of the top two signal levels before addition.
const HEADROOM_TOLERANCE: f64 = 1e-10;

/// Joint signal ⊗ ancilla ket, indexed `[n_signal, n_ancilla]`; both modes
/// share the same cutoff.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoModeState<T> {
    amplitudes: Array2<C<T>>,
    cutoff: FockCutoff,
}

impl<T: Real> TwoModeState<T> {
    /// |ψ⟩ ⊗ |0⟩.
    pub fn with_vacuum_ancilla(signal: &PureState<T>) -> Self {
        let d = signal.cutoff().dim();
        let mut amplitudes = Array2::zeros((d, d));
        for (n, &a) in signal.amplitudes().iter().enumerate() {
            amplitudes[[n, 0]] = a;
        }
        Self {
            amplitudes,
            cutoff: signal.cutoff(),
        }
    }

    pub fn amplitudes(&self) -> &Array2<C<T>> {
        &self.amplitudes
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// (â†b̂† − âb̂)|Ψ⟩ on the truncated product space.
    fn apply_generator(&self) -> Array2<C<T>> {
        let d = self.cutoff.dim();
        let psi = &self.amplitudes;
        let mut out = Array2::zeros((d, d));
        for n in 0..d {
            for m in 0..d {
                let mut acc = C::zero();
                if n >= 1 && m >= 1 {
                    acc = acc + psi[[n - 1, m - 1]].scale(T::of_usize(n * m).sqrt());
                }
                if n + 1 < d && m + 1 < d {
                    acc = acc - psi[[n + 1, m + 1]].scale(T::of_usize((n + 1) * (m + 1)).sqrt());
                }
                out[[n, m]] = acc;
            }
        }
        out
    }

    /// exp[λ(â†b̂† − âb̂)]|Ψ⟩ by summing the Taylor series term by term.
    pub fn apply_two_mode_squeezer(&self, lambda: T) -> Result<Self> {
        let mut total = self.amplitudes.clone();
        let mut term = Self {
            amplitudes: self.amplitudes.clone(),
            cutoff: self.cutoff,
        };
        for k in 1..=SERIES_MAX_TERMS {
            let factor = lambda / T::of_usize(k);
            term.amplitudes = term.apply_generator().mapv(|z| z.scale(factor));
            total = total + &term.amplitudes;
            if term.norm_sqr().sqrt() < T::of(SERIES_TOLERANCE) {
                return Ok(Self {
                    amplitudes: total,
                    cutoff: self.cutoff,
                });
            }
        }
        Err(Error::NonConvergent {
            what: "two-mode squeezer series",
            iterations: SERIES_MAX_TERMS,
        })
    }

    /// Σ_{k ∈ ancilla} ⟨k|_b |Ψ⟩⟨Ψ| |k⟩_b, unnormalized.
    pub fn signal_branch(&self, ancilla: std::ops::RangeFrom<usize>) -> DensityMatrix<T> {
        let d = self.cutoff.dim();
        let psi = &self.amplitudes;
        let mut rho = Array2::zeros((d, d));
        for k in ancilla.start..d {
            let col = psi.column(k);
            if col.iter().all(|z| z.is_zero()) {
                continue;
            }
            for i in 0..d {
                if col[i].is_zero() {
                    continue;
                }
                for j in 0..d {
                    rho[[i, j]] = rho[[i, j]] + col[i] * col[j].conj();
                }
            }
        }
        DensityMatrix::from_matrix_unchecked(self.cutoff, rho)
    }
}

/// Unnormalized conditional signal states for the two detector outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct HeraldBranches<T> {
    pub click: DensityMatrix<T>,
    pub no_click: DensityMatrix<T>,
}

/// Normalized conditional state and the probability of its herald.
#[derive(Clone, Debug, PartialEq)]
pub struct HeraldedResult<T> {
    pub state: DensityMatrix<T>,
    pub success_prob: T,
}

impl<T: Real> HeraldBranches<T> {
    fn into_click_result(self) -> Result<HeraldedResult<T>> {
        let p = self.click.trace();
        if !(p > T::zero()) {
            return Err(Error::ZeroNorm);
        }
        Ok(HeraldedResult {
            state: self.click.scaled(p.recip()),
            success_prob: p.min(T::one()),
        })
    }
}

fn check_squeezing<T: Real>(lambda: T) -> Result<()> {
    if !(lambda > T::zero() && lambda <= T::of(MAX_SQUEEZING)) {
        return Err(Error::param("lambda", lambda.as_f64(), "in (0, 0.3]"));
    }
    Ok(())
}

fn check_reflectivity<T: Real>(r: T) -> Result<()> {
    if !(r > T::zero() && r < T::of(0.5)) {
        return Err(Error::param("reflectivity", r.as_f64(), "in (0, 0.5)"));
    }
    Ok(())
}

/// Both herald outcomes of photon addition on a normalized copy of `state`.
pub fn addition_branches<T: Real>(state: &PureState<T>, lambda: T) -> Result<HeraldBranches<T>> {
    check_squeezing(lambda)?;
    let input = state.normalized()?;
    let n_max = input.cutoff().n_max();
    let edge = input.weight_from(n_max.saturating_sub(2));
    if edge >= T::of(HEADROOM_TOLERANCE) {
        return Err(Error::TruncationOverflow {
            n_max,
            weight: edge.as_f64(),
        });
    }
    let joint = TwoModeState::with_vacuum_ancilla(&input).apply_two_mode_squeezer(lambda)?;
    Ok(HeraldBranches {
        click: joint.signal_branch(1..),
        no_click: joint.signal_branch(0..).plus(&joint.signal_branch(1..).scaled(-T::one()))?,
    })
}

/// Conditional state after an idler click in the two-mode squeezer.
pub fn heralded_addition<T: Real>(state: &PureState<T>, lambda: T) -> Result<HeraldedResult<T>> {
    addition_branches(state, lambda)?.into_click_result()
}

/// Both herald outcomes of photon subtraction on a normalized copy of `state`.
pub fn subtraction_branches<T: Real, S: FockState<T> + ?Sized>(
    state: &S,
    reflectivity: T,
) -> Result<HeraldBranches<T>> {
    check_reflectivity(reflectivity)?;
    let rho = state.to_density().normalized()?;
    let transmissivity = T::one() - reflectivity;
    let cutoff = rho.cutoff();
    Ok(HeraldBranches {
        click: DensityMatrix::from_matrix_unchecked(
            cutoff,
            beam_splitter_branches(rho.elements(), transmissivity, reflectivity, 1..),
        ),
        no_click: DensityMatrix::from_matrix_unchecked(
            cutoff,
            beam_splitter_branches(rho.elements(), transmissivity, reflectivity, 0..)
                - beam_splitter_branches(rho.elements(), transmissivity, reflectivity, 1..),
        ),
    })
}

/// Conditional state after a click on the reflected port of the tap.
pub fn heralded_subtraction<T: Real, S: FockState<T> + ?Sized>(
    state: &S,
    reflectivity: T,
) -> Result<HeraldedResult<T>> {
    subtraction_branches(state, reflectivity)?.into_click_result()
}

/// Coincidence-heralded addition then subtraction acting on |α⟩.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalAmplifierOutput<T> {
    /// Normalized conditional state and the coincidence probability.
    pub heralded: HeraldedResult<T>,
    pub addition_prob: T,
    pub subtraction_prob: T,
    /// Fidelity of the conditional state to the normalized ââ†|α⟩.
    pub ideal_fidelity: T,
}

/// [`physical_amplifier_at`] with the default cutoff for a target |2α⟩.
pub fn physical_amplifier<T: Real>(
    alpha: C<T>,
    lambda: T,
    reflectivity: T,
) -> Result<PhysicalAmplifierOutput<T>> {
    physical_amplifier_at(
        alpha,
        lambda,
        reflectivity,
        FockCutoff::for_amplification(alpha.norm().as_f64()),
    )
}

pub fn physical_amplifier_at<T: Real>(
    alpha: C<T>,
    lambda: T,
    reflectivity: T,
    cutoff: FockCutoff,
) -> Result<PhysicalAmplifierOutput<T>> {
    let input = coherent_state(alpha, cutoff)?;
    let added = heralded_addition(&input, lambda)?;
    let subtracted = heralded_subtraction(&added.state, reflectivity)?;
    let ideal = amplify_ideal(&input, T::of(2.0))?.state;
    let ideal_fidelity = state_fidelity(&subtracted.state, &ideal)?;
    Ok(PhysicalAmplifierOutput {
        heralded: HeraldedResult {
            state: subtracted.state,
            success_prob: added.success_prob * subtracted.success_prob,
        },
        addition_prob: added.success_prob,
        subtraction_prob: subtracted.success_prob,
        ideal_fidelity,
    })
}

/// Output of the addition and subtraction stages when no herald is selected:
/// the input reference recorded from untriggered pulses, which cross the same
/// down-converter and tap as the heralded ones.
pub fn unheralded_output<T: Real>(
    alpha: C<T>,
    lambda: T,
    reflectivity: T,
    cutoff: FockCutoff,
) -> Result<DensityMatrix<T>> {
    let input = coherent_state(alpha, cutoff)?;
    let added = addition_branches(&input, lambda)?;
    let traced = added.click.plus(&added.no_click)?;
    let tapped = subtraction_branches(&traced, reflectivity)?;
    tapped.click.plus(&tapped.no_click)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{apply_ladder, Ladder};
    use crate::homodyne::loss_channel;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn cut(n: usize) -> FockCutoff {
        FockCutoff::new(n).unwrap()
    }

    fn max_diff(a: &DensityMatrix<f64>, b: &DensityMatrix<f64>) -> f64 {
        (a.elements() - b.elements())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn squeezer_preserves_norm() {
        let s = coherent_state(Complex64::new(0.5, 0.2), cut(20)).unwrap();
        let joint = TwoModeState::with_vacuum_ancilla(&s).apply_two_mode_squeezer(0.3).unwrap();
        assert_abs_diff_eq!(joint.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn addition_on_vacuum_weak_limit() {
        let lambda = 1e-3;
        let r = heralded_addition(&PureState::<f64>::vacuum(cut(20)), lambda).unwrap();
        let one = PureState::fock(1, cut(20)).unwrap();
        assert!(state_fidelity(&r.state, &one).unwrap() > 1.0 - 4.0 * lambda * lambda);
        // exact click probability is tanh²λ = λ² − (2/3)λ⁴ + ...
        assert!((r.success_prob - lambda * lambda).abs() < lambda.powi(4));
        assert_abs_diff_eq!(r.success_prob, lambda.tanh().powi(2), epsilon = 1e-15);
    }

    #[test]
    fn addition_approaches_creation_operator() {
        let s = coherent_state(Complex64::new(0.5, 0.0), cut(20)).unwrap();
        let r = heralded_addition(&s, 0.01).unwrap();
        let ideal = apply_ladder(&s, Ladder::Creation).unwrap();
        assert!(state_fidelity(&r.state, &ideal).unwrap() >= 0.9999);
        assert!(r.state.purity() >= 1.0 - 0.01);
    }

    #[test]
    fn addition_parameter_checks() {
        let s = PureState::<f64>::vacuum(cut(20));
        assert!(heralded_addition(&s, 0.0).is_err());
        assert!(heralded_addition(&s, 0.31).is_err());
        let top = PureState::<f64>::fock(19, cut(20)).unwrap();
        assert!(matches!(heralded_addition(&top, 0.05), Err(Error::TruncationOverflow { .. })));
    }

    #[test]
    fn addition_branches_are_complete() {
        let s = coherent_state(Complex64::new(0.6, -0.1), cut(20)).unwrap();
        let b = addition_branches(&s, 0.2).unwrap();
        let joint = TwoModeState::with_vacuum_ancilla(&s).apply_two_mode_squeezer(0.2).unwrap();
        let traced = joint.signal_branch(0..);
        assert!(max_diff(&b.click.plus(&b.no_click).unwrap(), &traced) < 1e-10);
    }

    #[test]
    fn subtraction_on_single_photon() {
        let one = PureState::<f64>::fock(1, cut(10)).unwrap();
        for r in [0.01, 0.05, 0.3, 0.49] {
            let out = heralded_subtraction(&one, r).unwrap();
            assert_eq!(out.success_prob, r);
            assert_eq!(out.state, PureState::vacuum(cut(10)).to_density());
        }
    }

    #[test]
    fn subtraction_keeps_coherent_states_coherent() {
        let c = cut(25);
        let s = coherent_state(Complex64::new(0.5, 0.0), c).unwrap();
        let out = heralded_subtraction(&s, 0.05).unwrap();
        let target = coherent_state(Complex64::new(0.95f64.sqrt() * 0.5, 0.0), c).unwrap();
        assert_abs_diff_eq!(state_fidelity(&out.state, &target).unwrap(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(out.state.purity(), 1.0, epsilon = 1e-10);
        // click probability 1 − e^{−R|α|²}
        assert_abs_diff_eq!(out.success_prob, 1.0 - (-0.05f64 * 0.25).exp(), epsilon = 1e-12);
        let weak = heralded_subtraction(&s, 1e-6).unwrap();
        assert!(state_fidelity(&weak.state, &s).unwrap() > 1.0 - 1e-6);
    }

    #[test]
    fn subtraction_parameter_checks() {
        let s = PureState::<f64>::vacuum(cut(5));
        assert!(heralded_subtraction(&s, 0.0).is_err());
        assert!(heralded_subtraction(&s, 0.5).is_err());
        // vacuum never clicks
        assert!(matches!(heralded_subtraction(&s, 0.1), Err(Error::ZeroNorm)));
    }

    #[test]
    fn subtraction_branches_recombine_to_loss() {
        let c = cut(20);
        let rho = coherent_state(Complex64::new(0.7, 0.3), c)
            .unwrap()
            .to_density()
            .plus(&PureState::fock(3, c).unwrap().to_density())
            .unwrap()
            .scaled(0.5);
        let b = subtraction_branches(&rho, 0.2).unwrap();
        let lossy = loss_channel(&rho, 0.8).unwrap();
        assert!(max_diff(&b.click.plus(&b.no_click).unwrap(), &lossy) < 1e-10);
    }

    #[test]
    fn amplifier_on_vacuum() {
        let out = physical_amplifier(Complex64::new(0.0, 0.0), 0.01, 0.05).unwrap();
        let vac = PureState::vacuum(out.heralded.state.cutoff());
        assert!(state_fidelity(&out.heralded.state, &vac).unwrap() >= 0.99);
    }

    #[test]
    fn amplifier_converges_to_ideal() {
        let out = physical_amplifier(Complex64::new(0.5, 0.0), 0.01, 0.01).unwrap();
        assert!(out.ideal_fidelity >= 0.999, "fidelity {}", out.ideal_fidelity);
        assert_abs_diff_eq!(
            out.heralded.success_prob,
            out.addition_prob * out.subtraction_prob,
            epsilon = 1e-12
        );
        assert!(out.heralded.success_prob > 0.0 && out.heralded.success_prob <= 1.0);
        out.heralded.state.check_physical().unwrap();
    }

    #[test]
    fn tap_cancels_in_the_gain_ratio() {
        use crate::amplifiers::effective_gain_analytic;
        use crate::fock::{expectation, Observable};
        let alpha = Complex64::new(0.65, 0.0);
        let out = physical_amplifier(alpha, 0.05, 0.05).unwrap();
        let c = out.heralded.state.cutoff();
        let reference = unheralded_output(alpha, 0.05, 0.05, c).unwrap();
        assert_abs_diff_eq!(reference.trace(), 1.0, epsilon = 1e-12);
        let x = |r: &DensityMatrix<f64>| expectation(r, Observable::Quadrature(0.0)).unwrap().re;
        // ⟨x⟩ of the traced reference is 2α cosh λ √(1 − R)
        assert_abs_diff_eq!(x(&reference), 1.3 * 0.05f64.cosh() * 0.95f64.sqrt(), epsilon = 1e-10);
        let gain = x(&out.heralded.state) / x(&reference);
        assert!((gain - effective_gain_analytic(2.0, 0.65)).abs() < 0.01, "gain {gain}");
    }

    #[test]
    fn success_grows_with_squeezing() {
        let probs: Vec<f64> = [0.01, 0.02, 0.05]
            .iter()
            .map(|&l| physical_amplifier(Complex64::new(0.5, 0.0), l, 0.05).unwrap().heralded.success_prob)
            .collect();
        assert!(probs.windows(2).all(|w| w[1] > w[0]), "{probs:?}");
    }
}
