// Copyright 2026 The nla Authors
// SPDX-License-Identifier: Apache-2.0

//! Ideal amplifier operator Ĝ = (g−1)n̂ + 1, the quantum-scissors rival and
//! the figures of merit used to compare them.
//!
//! Closed forms take |α| only; the Fock-space routes take a complex α and a
//! cutoff and are used to cross-check the closed forms.

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    coherent_state, expectation, quadrature_variance, state_fidelity, FockCutoff, FockState,
    Observable, PureState,
};
use crate::homodyne::loss_channel;
use crate::scalar::{creal, Real, C};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmplifierScheme {
    /// Ĝ = (g−2)â†â + ââ†
    IdealG,
    /// Truncation to span{|0⟩, |1⟩} with the |1⟩ weight boosted by g.
    QuantumScissors,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplifierSpec<T> {
    scheme: AmplifierScheme,
    gain: T,
}

impl<T: Real> AmplifierSpec<T> {
    pub fn new(scheme: AmplifierScheme, gain: T) -> Result<Self> {
        if !(gain > T::one()) {
            return Err(Error::param("g", gain.as_f64(), "> 1"));
        }
        Ok(Self { scheme, gain })
    }

    pub fn scheme(&self) -> AmplifierScheme {
        self.scheme
    }

    pub fn gain(&self) -> T {
        self.gain
    }

    /// Unnormalized conditional output for input |α⟩.
    pub fn output(&self, alpha: C<T>, cutoff: FockCutoff) -> Result<PureState<T>> {
        match self.scheme {
            AmplifierScheme::IdealG => {
                Ok(amplify_ideal(&coherent_state(alpha, cutoff)?, self.gain)?.state)
            }
            AmplifierScheme::QuantumScissors => {
                let psi = scissors_output(alpha, self.gain, cutoff)?;
                let weight = scissors_success_weight(self.gain, alpha.norm());
                Ok(psi.scaled(creal(weight.sqrt())))
            }
        }
    }
}

/// Figures of merit of one amplifier acting on one coherent input.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplifierReport<T> {
    pub g_eff: T,
    pub fidelity: T,
    /// Equivalent input noise in shot-noise units.
    pub n_eq: T,
    /// Squared norm of the conditional output for a normalized input.
    pub success_weight: T,
    /// Variance along the input amplitude direction.
    pub var_x_amp: T,
    /// Variance along the conjugate (phase) direction.
    pub var_p_amp: T,
}

/// Diagonal of Ĝ: (g−1)n + 1 for n = 0..=n_max.
pub fn g_operator<T: Real>(g: T, cutoff: FockCutoff) -> Result<Array1<T>> {
    if !(g >= T::one()) {
        return Err(Error::param("g", g.as_f64(), ">= 1"));
    }
    Ok(Array1::from_shape_fn(cutoff.dim(), |n| {
        (g - T::one()) * T::of_usize(n) + T::one()
    }))
}

/// Ĝ|ψ⟩ together with its relative success weight.
#[derive(Clone, Debug, PartialEq)]
pub struct Amplified<T> {
    pub state: PureState<T>,
    /// ⟨ψ|Ĝ²|ψ⟩/⟨ψ|ψ⟩
    pub success_weight: T,
}

pub fn amplify_ideal<T: Real>(state: &PureState<T>, g: T) -> Result<Amplified<T>> {
    let input_weight = state.norm_sqr();
    if !(input_weight > T::zero()) {
        return Err(Error::ZeroNorm);
    }
    let out = state.apply_diagonal(&g_operator(g, state.cutoff())?)?;
    let success_weight = out.norm_sqr() / input_weight;
    Ok(Amplified {
        state: out,
        success_weight,
    })
}

fn check_gain<T: Real>(g: T, strict: bool) -> Result<()> {
    let ok = if strict { g > T::one() } else { g >= T::one() };
    if !ok {
        return Err(Error::param(
            "g",
            g.as_f64(),
            if strict { "> 1" } else { ">= 1" },
        ));
    }
    Ok(())
}

/// Closed-form effective gain of Ĝ on |α⟩.
pub fn effective_gain_analytic<T: Real>(g: T, alpha_abs: T) -> T {
    let one = T::one();
    let a2 = alpha_abs * alpha_abs;
    let gm1 = g - one;
    let num = gm1 * (one + gm1 * a2);
    let den = one + (g * g - one) * a2 + gm1 * gm1 * a2 * a2;
    one + num / den
}

/// Closed-form fidelity of Ĝ|α⟩ (normalized) to |gα⟩.
pub fn fidelity_analytic<T: Real>(g: T, alpha_abs: T) -> T {
    let one = T::one();
    let a2 = alpha_abs * alpha_abs;
    let gm1 = g - one;
    let lead = one + g * gm1 * a2;
    let den = one + (g * g - one) * a2 + gm1 * gm1 * a2 * a2;
    lead * lead * (-gm1 * gm1 * a2).exp() / den
}

/// ⟨α|Ĝ â Ĝ|α⟩ / (α ⟨α|Ĝ²|α⟩) evaluated in Fock space.
///
/// At α = 0 the ratio is taken in the limit, which only involves the
/// |0⟩,|1⟩ entries of Ĝ.
pub fn effective_gain_numeric<T: Real>(g: T, alpha: C<T>, cutoff: FockCutoff) -> Result<T> {
    let diag = g_operator(g, cutoff)?;
    if alpha.norm() == T::zero() {
        return Ok(diag[1] / diag[0]);
    }
    let out = coherent_state(alpha, cutoff)?.apply_diagonal(&diag)?;
    let mean_a = expectation(&out, Observable::Annihilation)?;
    Ok((mean_a / alpha).re)
}

/// state_fidelity(Ĝ|α⟩, |gα⟩) in Fock space.
pub fn fidelity_numeric<T: Real>(g: T, alpha: C<T>, cutoff: FockCutoff) -> Result<T> {
    let out = amplify_ideal(&coherent_state(alpha, cutoff)?, g)?.state;
    let target = coherent_state(alpha.scale(g), cutoff)?;
    state_fidelity(&out, &target)
}

/// (|0⟩ + gα|1⟩)/√(1+g²|α|²)
pub fn scissors_output<T: Real>(alpha: C<T>, g: T, cutoff: FockCutoff) -> Result<PureState<T>> {
    check_gain(g, false)?;
    let mut amps = vec![C::new(T::zero(), T::zero()); cutoff.dim()];
    let norm = (T::one() + g * g * alpha.norm_sqr()).sqrt().recip();
    amps[0] = creal(norm);
    amps[1] = alpha.scale(g * norm);
    PureState::from_amplitudes(cutoff, amps)
}

/// ‖(|0⟩⟨0| + g|1⟩⟨1|)|α⟩‖² = e^{−|α|²}(1 + g²|α|²).
pub fn scissors_success_weight<T: Real>(g: T, alpha_abs: T) -> T {
    let a2 = alpha_abs * alpha_abs;
    (-a2).exp() * (T::one() + g * g * a2)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScissorsMetrics<T> {
    pub g_eff: T,
    pub fidelity: T,
}

pub fn scissors_metrics<T: Real>(g: T, alpha_abs: T) -> Result<ScissorsMetrics<T>> {
    check_gain(g, false)?;
    let x = g * g * alpha_abs * alpha_abs;
    Ok(ScissorsMetrics {
        g_eff: g / (T::one() + x),
        fidelity: (T::one() + x) * (-x).exp(),
    })
}

/// N_eq = Var(x_amp)/g_eff² − Var(x_in).
pub fn equivalent_input_noise<T: Real>(var_x_amp: T, g_eff: T, var_x_in: T) -> Result<T> {
    if !(g_eff > T::zero()) {
        return Err(Error::param("g_eff", g_eff.as_f64(), "> 0"));
    }
    if !(var_x_amp > T::zero()) || !(var_x_in > T::zero()) {
        return Err(Error::param(
            "variance",
            var_x_amp.min(var_x_in).as_f64(),
            "> 0",
        ));
    }
    Ok(var_x_amp / (g_eff * g_eff) - var_x_in)
}

/// Noise figures of deterministic linear amplifiers, in shot-noise units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseBounds<T> {
    /// Minimum added noise of a phase-insensitive quantum-limited amplifier, 2(g²−1).
    pub quantum_limited_added: T,
    /// Minimum added noise of measure-and-prepare amplification, 2g².
    pub classical_added: T,
    /// Output quadrature variance of the best deterministic amplifier, 2g²−1.
    pub best_deterministic_variance: T,
}

pub fn deterministic_noise_bounds<T: Real>(g: T) -> Result<NoiseBounds<T>> {
    check_gain(g, false)?;
    let two = T::of(2.0);
    let g2 = g * g;
    Ok(NoiseBounds {
        quantum_limited_added: two * (g2 - T::one()),
        classical_added: two * g2,
        best_deterministic_variance: two * g2 - T::one(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseEstimation<T> {
    /// Standard-quantum-limit variance 1/(4|α|²) of θ_est = p/(2|α|).
    pub sql_variance: T,
    /// Conditional variance reduction R_V = g_eff⁻² Var(p_amp)/Var(p_in).
    pub variance_ratio: T,
}

/// Lossless R_V for an amplified output of a real-positive input |α⟩.
/// The input phase-quadrature variance is one shot-noise unit.
pub fn phase_estimation_metrics<T: Real, S: FockState<T> + ?Sized>(
    rho_out: &S,
    alpha_abs: T,
    g_eff: T,
) -> Result<PhaseEstimation<T>> {
    if !(alpha_abs > T::zero()) {
        return Err(Error::param("alpha_abs", alpha_abs.as_f64(), "> 0"));
    }
    if !(g_eff > T::zero()) {
        return Err(Error::param("g_eff", g_eff.as_f64(), "> 0"));
    }
    let var_p = quadrature_variance(rho_out, T::FRAC_PI_2())?;
    Ok(PhaseEstimation {
        sql_variance: (T::of(4.0) * alpha_abs * alpha_abs).recip(),
        variance_ratio: var_p / (g_eff * g_eff),
    })
}

/// R_V with both output and input seen through a detector of efficiency η.
///
/// The gain is unaffected by η (it cancels in the quadrature-mean ratio); the
/// variances are those of the η-degraded states. A lossy coherent input keeps
/// unit variance.
pub fn phase_estimation_metrics_lossy<T: Real, S: FockState<T> + ?Sized>(
    rho_out: &S,
    alpha_abs: T,
    g_eff: T,
    eta: T,
) -> Result<PhaseEstimation<T>> {
    let degraded = loss_channel(rho_out, eta)?;
    phase_estimation_metrics(&degraded, alpha_abs, g_eff)
}

/// Gain, fidelity, noise and variances of `spec` acting on |α⟩.
pub fn amplifier_report<T: Real>(
    spec: &AmplifierSpec<T>,
    alpha: C<T>,
    cutoff: FockCutoff,
) -> Result<AmplifierReport<T>> {
    let g = spec.gain();
    let out = spec.output(alpha, cutoff)?;
    let success_weight = out.norm_sqr();
    let target = coherent_state(alpha.scale(g), cutoff)?;
    let fidelity = state_fidelity(&out, &target)?;
    let g_eff = match spec.scheme() {
        AmplifierScheme::IdealG => effective_gain_numeric(g, alpha, cutoff)?,
        AmplifierScheme::QuantumScissors => scissors_metrics(g, alpha.norm())?.g_eff,
    };
    let direction = if alpha.norm() > T::zero() {
        alpha.arg()
    } else {
        T::zero()
    };
    let var_x_amp = quadrature_variance(&out, direction)?;
    let var_p_amp = quadrature_variance(&out, direction + T::FRAC_PI_2())?;
    Ok(AmplifierReport {
        g_eff,
        fidelity,
        n_eq: equivalent_input_noise(var_x_amp, g_eff, T::one())?,
        success_weight,
        var_x_amp,
        var_p_amp,
    })
}
