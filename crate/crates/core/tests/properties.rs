// Copyright 2026 The nla Authors
// SPDX-License-Identifier: Apache-2.0

use nla_core::amplifiers::{
    amplify_ideal, deterministic_noise_bounds, effective_gain_analytic, effective_gain_numeric,
    equivalent_input_noise, fidelity_analytic, fidelity_numeric, scissors_metrics,
};
use nla_core::fock::{apply_ladder, coherent_state, expectation, quadrature_variance, state_fidelity};
use nla_core::homodyne::{loss_channel, phase_grid, sample_quadratures, QuadratureTag};
use nla_core::physical::{addition_branches, heralded_addition, heralded_subtraction, physical_amplifier};
use nla_core::{Complex, FockCutoff, FockState, Ladder, Observable, PureState};
use proptest::prelude::*;

fn cut(n: usize) -> FockCutoff {
    FockCutoff::new(n).unwrap()
}

fn amplitude() -> impl Strategy<Value = Complex> {
    (0.0f64..1.5, 0.0f64..std::f64::consts::TAU).prop_map(|(r, phi)| Complex::from_polar(r, phi))
}

fn amplified(alpha: f64) -> PureState {
    let c = FockCutoff::for_amplification(alpha);
    amplify_ideal(&coherent_state(Complex::new(alpha, 0.0), c).unwrap(), 2.0)
        .unwrap()
        .state
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn raising_the_cutoff_changes_nothing(alpha in amplitude(), theta in 0.0f64..3.2) {
        let c = FockCutoff::for_amplification(alpha.norm());
        let lo = amplify_ideal(&coherent_state(alpha, c).unwrap(), 2.0).unwrap().state;
        let hi = lo.embedded(c.raised(10)).unwrap();
        for obs in [Observable::Number, Observable::Annihilation, Observable::Quadrature(theta), Observable::QuadratureSquared(theta)] {
            let a = expectation(&lo, obs).unwrap();
            let b = expectation(&hi, obs).unwrap();
            prop_assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn canonical_commutator(alpha in amplitude()) {
        let c = FockCutoff::for_amplification(alpha.norm());
        let s = coherent_state(alpha, c).unwrap();
        let up = apply_ladder(&s, Ladder::Creation).unwrap();
        let down = apply_ladder(&s, Ladder::Annihilation).unwrap();
        prop_assert!((up.norm_sqr() - down.norm_sqr() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn coherent_quadrature_mean(alpha in amplitude(), theta in -3.2f64..3.2) {
        let s = coherent_state(alpha, FockCutoff::covering(alpha.norm())).unwrap();
        let mean = expectation(&s, Observable::Quadrature(theta)).unwrap().re;
        prop_assert!((mean - 2.0 * alpha.norm() * (alpha.arg() - theta).cos()).abs() < 1e-10);
    }

    #[test]
    fn fidelity_symmetric_and_phase_blind(a in amplitude(), b in amplitude(), phi in 0.0f64..6.3) {
        let c = cut(30);
        let sa = coherent_state(a, c).unwrap();
        let sb = coherent_state(b, c).unwrap();
        let f = state_fidelity(&sa, &sb).unwrap();
        prop_assert!((f - state_fidelity(&sb, &sa).unwrap()).abs() < 1e-12);
        let rotated = sa.scaled(Complex::from_polar(1.0, phi));
        prop_assert!((f - state_fidelity(&rotated, &sb).unwrap()).abs() < 1e-12);
        prop_assert!((f - (-(a - b).norm_sqr()).exp()).abs() < 1e-10);
    }

    #[test]
    fn closed_forms_match_fock_space(g in prop::sample::select(vec![1.5, 2.0, 3.0]), a in 0.0f64..1.5, phi in 0.0f64..6.3) {
        let alpha = Complex::from_polar(a, phi);
        let c = FockCutoff::covering(g * a).raised(10).max(cut(40));
        let gn = effective_gain_numeric(g, alpha, c).unwrap();
        let fnum = fidelity_numeric(g, alpha, c).unwrap();
        prop_assert!((gn - effective_gain_analytic(g, a)).abs() < 1e-9);
        prop_assert!((fnum - fidelity_analytic(g, a)).abs() < 1e-9);
    }

    #[test]
    fn scissors_threshold(g in 1.2f64..4.0, a in 0.01f64..1.5) {
        let qs = scissors_metrics(g, a).unwrap();
        prop_assert_eq!(qs.g_eff < 1.0, g * g * a * a > g - 1.0);
    }

    #[test]
    fn loss_is_trace_and_positivity_preserving(alpha in amplitude(), eta in 0.01f64..1.0) {
        let s = amplified(alpha.norm().min(1.2));
        let rho = s.to_density().normalized().unwrap();
        let out = loss_channel(&rho, eta).unwrap();
        prop_assert!((out.trace() - 1.0).abs() < 1e-12);
        prop_assert!(out.min_eigenvalue() > -1e-12);
    }

    #[test]
    fn heralds_are_probabilities(a in 0.0f64..1.0, lambda in 0.005f64..0.3, r in 0.005f64..0.45) {
        let out = physical_amplifier(Complex::new(a, 0.0), lambda, r).unwrap();
        let p = out.heralded.success_prob;
        prop_assert!(p > 0.0 && p <= 1.0);
        prop_assert!((p - out.addition_prob * out.subtraction_prob).abs() < 1e-12);
        out.heralded.state.check_physical().unwrap();
    }

    #[test]
    fn subtraction_keeps_coherent_states_pure(alpha in amplitude(), r in 0.01f64..0.49) {
        prop_assume!(alpha.norm() > 0.05);
        let s = coherent_state(alpha, FockCutoff::covering(alpha.norm())).unwrap();
        let out = heralded_subtraction(&s, r).unwrap();
        prop_assert!((out.state.purity() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn addition_purity_degrades_quadratically() {
    let s = coherent_state(Complex::new(0.5, 0.0), cut(20)).unwrap();
    for lambda in [0.01, 0.03, 0.1, 0.3] {
        let out = heralded_addition(&s, lambda).unwrap();
        let loss = 1.0 - out.state.purity();
        assert!(loss >= -1e-12 && loss <= 2.0 * lambda * lambda, "lambda {lambda}: {loss}");
    }
}

#[test]
fn addition_outcomes_are_complete_for_fock_input() {
    let s = PureState::fock(2, cut(20)).unwrap();
    let b = addition_branches(&s, 0.25).unwrap();
    let total = b.click.trace() + b.no_click.trace();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn monotone_decrease_of_gain_and_fidelity() {
    let grid: Vec<f64> = (1..=150).map(|k| 0.01 * k as f64).collect();
    for w in grid.windows(2) {
        assert!(effective_gain_analytic(2.0, w[1]) < effective_gain_analytic(2.0, w[0]));
        assert!(fidelity_analytic(2.0, w[1]) < fidelity_analytic(2.0, w[0]));
    }
}

#[test]
fn dominates_scissors() {
    for k in 1..=150 {
        let a = 0.01 * k as f64;
        let qs = scissors_metrics(2.0, a).unwrap();
        assert!(effective_gain_analytic(2.0, a) > qs.g_eff);
        assert!(fidelity_analytic(2.0, a) > qs.fidelity);
    }
}

#[test]
fn noise_is_below_deterministic_limit() {
    for k in 0..=40 {
        let a = 0.05 * k as f64;
        let s = amplified(a);
        let g_eff = effective_gain_analytic(2.0, a);
        let var_x = quadrature_variance(&s, 0.0).unwrap();
        let var_p = quadrature_variance(&s, std::f64::consts::FRAC_PI_2).unwrap();
        let n_eq = equivalent_input_noise(var_x, g_eff, 1.0).unwrap();
        assert!(n_eq < 0.0, "alpha {a}: N_eq {n_eq}");
        if a <= 1.5 {
            let bound = 2.0 * g_eff * g_eff - 1.0;
            assert!(var_x < bound && var_p < bound);
        }
    }
    let b = deterministic_noise_bounds(2.0).unwrap();
    assert_eq!(
        (b.quantum_limited_added, b.classical_added, b.best_deterministic_variance),
        (6.0, 8.0, 7.0)
    );
}

#[test]
fn sample_moments_converge() {
    let s = amplified(0.5);
    let eta = 0.7;
    let lossy = loss_channel(&s, eta).unwrap().normalized().unwrap();
    let phases = phase_grid::<f64>(3);
    let n = 20_000;
    let data = sample_quadratures(&s, &phases, n, eta, 99, QuadratureTag::Amplified).unwrap();
    for &theta in &phases {
        let xs = data.values_at(theta, None);
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let true_mean = expectation(&lossy, Observable::Quadrature(theta)).unwrap().re;
        let true_var = quadrature_variance(&lossy, theta).unwrap();
        let x4 = xs.iter().map(|x| (x - true_mean).powi(4)).sum::<f64>() / n as f64;
        assert!((mean - true_mean).abs() < 3.0 * (true_var / n as f64).sqrt());
        assert!((var - true_var).abs() < 3.0 * ((x4 - true_var * true_var) / n as f64).sqrt());
    }
}
