// Copyright 2026 The nla Authors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs with `cargo test -p nla-cli --test acceptance`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::process::{Command, ExitCode};
use std::time::Instant;

use nla_core::amplifiers::{
    amplify_ideal, effective_gain_analytic, effective_gain_numeric, fidelity_analytic,
    fidelity_numeric, phase_estimation_metrics, scissors_metrics,
};
use nla_core::fock::{coherent_state, quadrature_variance, state_fidelity};
use nla_core::homodyne::{
    gain_from_samples, loss_channel, phase_grid, quadrature_pdf, required_half_width,
    sample_quadratures, symmetric_grid, QuadratureTag,
};
use nla_core::physical::{heralded_subtraction, physical_amplifier};
use nla_core::tomography::{amplified_fidelity_diagnostic, maxlik_reconstruct};
use nla_core::wigner::{marginal, overlap, phase_shift, wigner_default};
use nla_core::{Complex, DensityMatrix, FockCutoff, FockState, PureState, TomographySettings};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn c(a: f64) -> Complex {
    Complex::new(a, 0.0)
}

/// Normalized ââ†|α⟩, the g = 2 output.
fn amplified(alpha: f64) -> PureState {
    let input = coherent_state(c(alpha), FockCutoff::for_amplification(alpha)).unwrap();
    amplify_ideal(&input, 2.0).unwrap().state.normalized().unwrap()
}

fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step).round() as usize;
    (0..=n).map(|i| start + step * i as f64).collect()
}

fn ensure(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn curve_anchors() -> Outcome {
    let f = |a: f64| fidelity_analytic(2.0, a) - 0.9;
    let (mut lo, mut hi) = (0.0, 1.5);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid
        } else {
            hi = mid
        }
    }
    let root = 0.5 * (lo + hi);
    let g_root = effective_gain_analytic(2.0, root);
    let g0 = effective_gain_analytic(2.0, 0.0);
    ensure(
        g0 == 2.0 && (0.60..=0.70).contains(&root) && (1.55..=1.65).contains(&g_root),
        format!("g_eff(0) = {g0}, F = 0.9 at |α| = {root:.4}, g_eff there = {g_root:.4}"),
    )
}

fn analytic_matches_fock() -> Outcome {
    let mut worst: f64 = 0.0;
    for g in [1.5, 2.0, 3.0] {
        for a in grid(0.0, 1.5, 0.1) {
            let cutoff = FockCutoff::new(40).unwrap().max(FockCutoff::covering(g * a).raised(10));
            let dg = (effective_gain_numeric(g, c(a), cutoff).map_err(|e| e.to_string())?
                - effective_gain_analytic(g, a))
            .abs();
            let df = (fidelity_numeric(g, c(a), cutoff).map_err(|e| e.to_string())?
                - fidelity_analytic(g, a))
            .abs();
            worst = worst.max(dg).max(df);
        }
    }
    ensure(worst <= 1e-9, format!("max |closed form - Fock| = {worst:.2e}"))
}

fn scissors_dominance() -> Outcome {
    for a in grid(0.01, 1.5, 0.01) {
        let qs = scissors_metrics(2.0, a).map_err(|e| e.to_string())?;
        let (g, f) = (effective_gain_analytic(2.0, a), fidelity_analytic(2.0, a));
        if g < qs.g_eff || f < qs.fidelity {
            return Err(format!("dominance fails at |α| = {a}"));
        }
        if a > 0.5 && qs.g_eff >= 1.0 {
            return Err(format!("g_eff_QS = {} at |α| = {a}", qs.g_eff));
        }
    }
    let qs = scissors_metrics(2.0, 0.51).map_err(|e| e.to_string())?;
    Ok(format!("150 amplitudes in (0, 1.5]; g_eff_QS(0.51) = {:.4}", qs.g_eff))
}

fn noise_claims() -> Outcome {
    let (mut worst_neq, mut worst_margin) = (f64::MIN, f64::MAX);
    for a in grid(0.0, 1.4, 0.05) {
        let state = amplified(a);
        let g_eff = effective_gain_analytic(2.0, a);
        let var_x = quadrature_variance(&state, 0.0).map_err(|e| e.to_string())?;
        let var_p = quadrature_variance(&state, FRAC_PI_2).map_err(|e| e.to_string())?;
        let bound = 2.0 * g_eff * g_eff - 1.0;
        worst_neq = worst_neq.max(var_x / (g_eff * g_eff) - 1.0);
        worst_margin = worst_margin.min(bound - var_x.max(var_p));
    }
    ensure(
        worst_neq < -0.48 && worst_margin > 0.0,
        format!("max N_eq = {worst_neq:.4}, min (2g_eff²-1) - Var = {worst_margin:.4}"),
    )
}

fn physical_convergence() -> Outcome {
    let out = physical_amplifier(c(0.5), 0.01, 0.01).map_err(|e| e.to_string())?;
    let one = PureState::fock(1, FockCutoff::new(20).unwrap()).unwrap();
    let sub = heralded_subtraction(&one, 0.01).map_err(|e| e.to_string())?;
    let vacuum_pop = sub.state.elements()[[0, 0]].re;
    ensure(
        out.ideal_fidelity >= 0.999 && sub.success_prob == 0.01 && (vacuum_pop - 1.0).abs() < 1e-12,
        format!(
            "fidelity {:.6}, |1> subtraction success {} with <0|ρ|0> = {vacuum_pop}",
            out.ideal_fidelity, sub.success_prob
        ),
    )
}

fn tomography_round_trip() -> Outcome {
    let truth = amplified(0.65);
    let per_phase = 100_000usize.div_ceil(11);
    let data = sample_quadratures(&truth, &phase_grid(11), per_phase, 0.6, 20_260_417, QuadratureTag::Amplified)
        .map_err(|e| e.to_string())?;
    let settings = TomographySettings::new(FockCutoff::new(20).unwrap(), 0.6).map_err(|e| e.to_string())?;
    let rec = maxlik_reconstruct(&data, &settings).map_err(|e| e.to_string())?;
    let common = rec.rho.cutoff().max(truth.cutoff());
    let fid = state_fidelity(&rec.rho.embedded(common).unwrap(), &truth.embedded(common).unwrap())
        .map_err(|e| e.to_string())?;
    let monotone = rec.log_likelihood_trace.windows(2).all(|w| w[1] >= w[0]);
    let diag = amplified_fidelity_diagnostic(&rec.rho, c(0.65)).map_err(|e| e.to_string())?;
    let target = fidelity_analytic(2.0, 0.65);
    ensure(
        fid >= 0.98 && monotone && (diag - target).abs() <= 0.02,
        format!(
            "{} samples, {} iterations, fidelity {fid:.4}, monotone {monotone}, diagnostic {diag:.4} vs {target:.4}",
            data.len(),
            rec.iterations_used
        ),
    )
}

fn gain_cancels_efficiency() -> Outcome {
    let alpha = 0.3;
    let input = coherent_state(c(alpha), FockCutoff::for_amplification(alpha)).unwrap();
    let out = amplified(alpha);
    let expected = effective_gain_analytic(2.0, alpha);
    let mut parts = Vec::new();
    let mut ok = true;
    for (k, eta) in [0.3, 0.6, 0.9].into_iter().enumerate() {
        let seed = 700 + 2 * k as u64;
        let sample = |s: &PureState, seed: u64, tag| {
            sample_quadratures(s, &[0.0], 100_000, eta, seed, tag).map(|d| d.values_at(0.0, None))
        };
        let amp = sample(&out, seed, QuadratureTag::Amplified).map_err(|e| e.to_string())?;
        let inp = sample(&input, seed + 1, QuadratureTag::Input).map_err(|e| e.to_string())?;
        let est = gain_from_samples(&amp, &inp).map_err(|e| e.to_string())?;
        let z = (est.gain - expected) / est.std_error;
        ok &= z.abs() <= 3.0;
        parts.push(format!("η={eta}: {:.4}±{:.4} (z={z:+.2})", est.gain, est.std_error));
    }
    ensure(ok, format!("analytic {expected:.4}; {}", parts.join(", ")))
}

fn phase_estimation() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (a, experiment) in [(0.4, 0.45), (0.7, 0.64), (1.0, 0.76)] {
        let m = phase_estimation_metrics(&amplified(a), a, effective_gain_analytic(2.0, a))
            .map_err(|e| e.to_string())?;
        ok &= m.variance_ratio < 1.0 && m.variance_ratio <= experiment;
        parts.push(format!("R_V({a}) = {:.4} <= {experiment}", m.variance_ratio));
    }
    let sql = phase_estimation_metrics(&amplified(1.0), 1.0, 1.0).unwrap().sql_variance;
    ensure(ok && sql == 0.25, format!("{}; V_SQL(1) = {sql}", parts.join(", ")))
}

fn discrimination_improves() -> Outcome {
    let input = coherent_state(c(1.0), FockCutoff::for_amplification(1.0)).unwrap().to_density();
    let amp = amplified(1.0).to_density();
    let pair_overlap = |rho: &DensityMatrix| -> Result<f64, String> {
        let a = wigner_default(rho).map_err(|e| e.to_string())?;
        let b = wigner_default(&phase_shift(rho, FRAC_PI_2)).map_err(|e| e.to_string())?;
        overlap(&a, &b).map_err(|e| e.to_string())
    };
    let (before, after) = (pair_overlap(&input)?, pair_overlap(&amp)?);
    ensure(after < before, format!("overlap before {before:.6}, after {after:.6}"))
}

fn cross_module() -> Outcome {
    let states = [
        amplified(0.65).to_density(),
        PureState::fock(1, FockCutoff::new(20).unwrap()).unwrap().to_density(),
        coherent_state(Complex::new(0.5, 0.7), FockCutoff::new(20).unwrap()).unwrap().to_density(),
    ];
    let mut worst_marginal: f64 = 0.0;
    for rho in &states {
        let half = required_half_width(rho).map_err(|e| e.to_string())?;
        let xs = symmetric_grid(half, 0.01);
        for theta in [0.0, PI / 3.0, 2.0] {
            let pdf = quadrature_pdf(rho, theta, &xs).map_err(|e| e.to_string())?;
            let picks: Vec<usize> = (0..xs.len()).step_by(25).collect();
            let q: Vec<f64> = picks.iter().map(|&i| xs[i]).collect();
            let m = marginal(rho, theta, &q, 0.02).map_err(|e| e.to_string())?;
            for (k, &i) in picks.iter().enumerate() {
                worst_marginal = worst_marginal.max((m[k] - pdf[i]).abs());
            }
        }
    }

    let rho = amplified(0.65).to_density();
    let twice = loss_channel(&loss_channel(&rho, 0.8).unwrap(), 0.75).unwrap();
    let once = loss_channel(&rho, 0.6).unwrap();
    let loss_err = (twice.elements() - once.elements()).iter().map(|z| z.norm()).fold(0.0, f64::max);

    let identical = same_seed_runs_identical()?;
    ensure(
        worst_marginal <= 1e-4 && loss_err <= 1e-10 && identical.is_empty(),
        format!(
            "marginal error {worst_marginal:.2e}, loss composition error {loss_err:.2e}, differing files {identical:?}"
        ),
    )
}

/// Runs a reduced `simulate` twice with the same seed and returns the files
/// whose bytes differ.
fn same_seed_runs_identical() -> Result<Vec<String>, String> {
    let tmp = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let cfg = tmp.path().join("config.json");
    fs::write(
        &cfg,
        r#"{"alphas": [0.5], "samples": 5500, "seed": 11, "cutoff": 20,
            "tomography": {"max_iters": 100}, "wigner": {"points": 61}}"#,
    )
    .map_err(|e| e.to_string())?;
    let mut dirs = Vec::new();
    for run in ["first", "second"] {
        let dir = tmp.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_nla"))
            .args(["simulate", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&dir)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(String::from_utf8_lossy(&status.stderr).into_owned());
        }
        dirs.push(dir);
    }
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(dirs[0].join("manifest.json")).unwrap()).unwrap();
    let mut files: Vec<String> = manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f.as_str().unwrap().to_string())
        .collect();
    files.push("manifest.json".into());
    Ok(files
        .into_iter()
        .filter(|f| fs::read(dirs[0].join(f)).ok() != fs::read(dirs[1].join(f)).ok())
        .collect())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("analytic curve anchors", curve_anchors),
        ("closed forms match Fock space", analytic_matches_fock),
        ("scissors dominance", scissors_dominance),
        ("equivalent input noise and variances", noise_claims),
        ("physical model convergence", physical_convergence),
        ("tomography round trip", tomography_round_trip),
        ("gain estimate cancels efficiency", gain_cancels_efficiency),
        ("phase estimation improvement", phase_estimation),
        ("discrimination improves", discrimination_improves),
        ("cross-module consistency", cross_module),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        failed += usize::from(outcome.is_err());
        println!("{tag} criterion {:>2} {name} [{secs:.1}s]: {detail}", i + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
