// Copyright 2026 The nla Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::FRAC_PI_2;
use std::fs::File;
use std::path::{Path, PathBuf};

use nla_core::amplifiers::{
    amplifier_report, amplify_ideal, effective_gain_analytic, fidelity_analytic,
    phase_estimation_metrics, phase_estimation_metrics_lossy, scissors_metrics, AmplifierScheme,
};
use nla_core::fock::{coherent_state, expectation, quadrature_variance, state_fidelity};
use nla_core::homodyne::{gain_from_samples, phase_grid, sample_quadratures, QuadratureTag};
use nla_core::physical::{physical_amplifier, unheralded_output};
use nla_core::tomography::{
    amplified_fidelity_diagnostic, maxlik_reconstruct, write_density_csv, write_density_json,
    write_log_likelihood_csv,
};
use nla_core::wigner::{mixture, overlap, phase_shift, required_half_width, uniform_axis, wigner_function};
use nla_core::{
    AmplifierSpec, Complex, DensityMatrix, FockCutoff, FockState, Observable, PureState,
    QuadratureDataset, ReconstructionResult, TomographySettings, WignerGrid,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{Pipeline, Resolved};
use crate::error::{CliError, Stage};
use crate::output::Outputs;

/// Largest |z| of a vacuum-variance estimate accepted by the self-check.
pub const VACUUM_SIGMAS: f64 = 4.0;

#[derive(Debug)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub files: Vec<String>,
    pub lines: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    crate_name: &'static str,
    crate_version: &'static str,
    core_version: &'static str,
    pipeline: Pipeline,
    config: &'a crate::config::ExperimentConfig,
    files: &'a [String],
}

pub fn run(resolved: &Resolved) -> Result<RunSummary, CliError> {
    let mut out = Outputs::create(&resolved.output_dir, &resolved.hash, resolved.seed())?;
    let lines = match resolved.pipeline {
        Pipeline::Curves => curves(resolved, &mut out)?,
        Pipeline::Simulate => simulate(resolved, &mut out)?,
        Pipeline::Reconstruct => reconstruct(resolved, &mut out)?,
        Pipeline::WignerDemo => wigner_demo(resolved, &mut out)?,
    };
    let files = out.files().to_vec();
    out.json(
        "manifest.json",
        &Manifest {
            crate_name: env!("CARGO_PKG_NAME"),
            crate_version: env!("CARGO_PKG_VERSION"),
            core_version: nla_core::VERSION,
            pipeline: resolved.pipeline,
            config: &resolved.config,
            files: &files,
        },
    )?;
    Ok(RunSummary {
        output_dir: out.root().to_path_buf(),
        files: out.files().to_vec(),
        lines,
    })
}

fn curves(r: &Resolved, out: &mut Outputs) -> Result<Vec<String>, CliError> {
    let g = r.config.g;
    let spec = AmplifierSpec::new(AmplifierScheme::IdealG, g).stage("amplifiers")?;
    let mut rows = Vec::new();
    let mut phase_rows = Vec::new();
    for &a in &r.alphas {
        let cutoff = FockCutoff::covering(g * a).max(FockCutoff::for_amplification(a));
        let alpha = Complex::new(a, 0.0);
        let rep = amplifier_report(&spec, alpha, cutoff).stage("amplifiers")?;
        let qs = scissors_metrics(g, a).stage("amplifiers")?;
        let g_eff = effective_gain_analytic(g, a);
        rows.push((
            a,
            g_eff,
            qs.g_eff,
            fidelity_analytic(g, a),
            qs.fidelity,
            rep.n_eq,
            rep.var_x_amp,
            rep.var_p_amp,
            2.0 * g_eff * g_eff - 1.0,
        ));
        if a > 0.0 {
            let state = spec.output(alpha, cutoff).stage("amplifiers")?.normalized().stage("amplifiers")?;
            let lossless = phase_estimation_metrics(&state, a, g_eff).stage("amplifiers")?;
            let lossy = phase_estimation_metrics_lossy(&state, a, g_eff, r.config.eta).stage("amplifiers")?;
            phase_rows.push((a, lossless.sql_variance, lossless.variance_ratio, lossy.variance_ratio));
        }
    }
    out.csv("curves.csv", |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record([
            "alpha", "g_eff_addsub", "g_eff_qs", "F_addsub", "F_qs", "n_eq", "var_x", "var_p", "det_bound",
        ])?;
        for row in &rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    })?;
    out.csv("phase_estimation.csv", |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["alpha", "v_sql", "r_v", "r_v_eta"])?;
        for row in &phase_rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    })?;
    Ok(vec![format!("{} curve points at g = {g}", rows.len())])
}

/// Independent seed for one named random stream of a run.
fn derived_seed(seed: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

#[derive(Serialize)]
struct VacuumCheck {
    max_abs_z: f64,
    limit_sigmas: f64,
    variances: Vec<f64>,
}

/// Unit variance of the vacuum samples at every phase, within
/// [`VACUUM_SIGMAS`] standard errors.
fn vacuum_self_check(data: &QuadratureDataset) -> Result<VacuumCheck, CliError> {
    let mut variances = Vec::new();
    let mut worst: f64 = 0.0;
    for &theta in &data.metadata().phases {
        let xs = data.values_at(theta, None);
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let z = (var - 1.0) / (2.0 / (n - 1.0)).sqrt();
        worst = worst.max(z.abs());
        variances.push(var);
    }
    if !(worst <= VACUUM_SIGMAS) {
        return Err(CliError::SelfCheck {
            stage: "homodyne",
            message: format!("vacuum variance off by {worst:.2} sigma"),
        });
    }
    Ok(VacuumCheck {
        max_abs_z: worst,
        limit_sigmas: VACUUM_SIGMAS,
        variances,
    })
}

fn tomography_settings(r: &Resolved, cutoff: FockCutoff, eta: f64) -> Result<TomographySettings, CliError> {
    let t = &r.config.tomography;
    let eta = if t.correct_efficiency { eta } else { 1.0 };
    let mut s = TomographySettings::new(cutoff, eta).stage("tomography")?;
    s.max_iters = t.max_iters;
    s.ll_tol = t.ll_tol;
    s.diag_tol = t.diag_tol;
    Ok(s)
}

fn grid_for(r: &Resolved, states: &[&DensityMatrix]) -> Result<Vec<f64>, CliError> {
    let mut half = r.config.wigner.half_width;
    for s in states {
        half = half.max(required_half_width(*s).stage("wigner")?);
    }
    Ok(uniform_axis(half, r.config.wigner.points))
}

fn write_grid(out: &mut Outputs, stem: &str, grid: &WignerGrid) -> Result<(), CliError> {
    out.csv(&format!("{stem}.csv"), |w| grid.write_csv(w))?;
    out.json_from(&format!("{stem}.json"), |w| grid.write_json(w))
}

fn write_reconstruction(
    out: &mut Outputs,
    dir: &str,
    rec: &ReconstructionResult,
) -> Result<(), CliError> {
    out.json_from(&format!("{dir}rho.json"), |w| write_density_json(&rec.rho, w))?;
    let mut imag = Vec::new();
    out.csv(&format!("{dir}rho_re.csv"), |w| write_density_csv(&rec.rho, w, &mut imag))?;
    out.csv(&format!("{dir}rho_im.csv"), |w| {
        use std::io::Write;
        w.write_all(&imag).map_err(nla_core::Error::from)
    })?;
    out.csv(&format!("{dir}log_likelihood.csv"), |w| {
        write_log_likelihood_csv(&rec.log_likelihood_trace, w)
    })
}

#[derive(Serialize)]
struct TomographySummary {
    cutoff: usize,
    eta_corrected: f64,
    iterations: usize,
    converged: bool,
    final_log_likelihood: f64,
    warnings: Vec<String>,
}

impl TomographySummary {
    fn new(rec: &ReconstructionResult, settings: &TomographySettings) -> Self {
        Self {
            cutoff: settings.cutoff.n_max(),
            eta_corrected: settings.eta,
            iterations: rec.iterations_used,
            converged: rec.converged,
            final_log_likelihood: *rec.log_likelihood_trace.last().expect("non-empty trace"),
            warnings: rec.warnings.clone(),
        }
    }
}

#[derive(Serialize)]
struct SimulationReport {
    alpha: f64,
    lambda: f64,
    reflectivity: f64,
    eta: f64,
    phases: usize,
    counts_per_phase: usize,
    gain_samples: usize,
    addition_probability: f64,
    subtraction_probability: f64,
    herald_probability: f64,
    model_fidelity_to_ideal: f64,
    vacuum_check: VacuumCheck,
    gain: f64,
    gain_std_error: f64,
    gain_analytic: f64,
    gain_model: f64,
    gain_z_analytic: f64,
    tomography: TomographySummary,
    fidelity_to_ideal: f64,
    diagnostic_fidelity: f64,
    fidelity_analytic: f64,
    n_eq: f64,
    n_eq_model: f64,
    r_v: f64,
    r_v_model: f64,
    v_sql: f64,
    wigner_half_width: f64,
}

fn simulate(r: &Resolved, out: &mut Outputs) -> Result<Vec<String>, CliError> {
    let cfg = &r.config;
    let seed = cfg.seed.expect("validated");
    let phases = phase_grid::<f64>(cfg.phases);
    let per_phase = cfg.samples.div_ceil(cfg.phases);
    let x = |rho: &DensityMatrix| -> Result<f64, CliError> {
        Ok(expectation(rho, Observable::Quadrature(0.0)).stage("report")?.re)
    };
    let mut lines = Vec::new();

    for &a in &r.alphas {
        let alpha = Complex::new(a, 0.0);
        let dir = format!("alpha_{a}/");
        let tag = |name: &str| derived_seed(seed, &format!("{a}/{name}"));

        let phys = physical_amplifier(alpha, cfg.lambda, cfg.reflectivity).stage("physical_model")?;
        let state = &phys.heralded.state;
        let cutoff = state.cutoff();
        let reference = unheralded_output(alpha, cfg.lambda, cfg.reflectivity, cutoff).stage("physical_model")?;
        let vacuum = PureState::vacuum(cutoff);

        let sample = |s: &dyn FockState<f64>, ph: &[f64], n: usize, name: &str, t: QuadratureTag| {
            sample_quadratures(s, ph, n, cfg.eta, tag(name), t).stage("homodyne")
        };
        let amplified = sample(state, &phases, per_phase, "amplified", QuadratureTag::Amplified)?;
        let input = sample(&reference, &phases, per_phase, "input", QuadratureTag::Input)?;
        let vac = sample(&vacuum, &phases, per_phase, "vacuum", QuadratureTag::Vacuum)?;
        let gain_amp = sample(state, &[0.0], cfg.samples, "gain_amplified", QuadratureTag::Amplified)?;
        let gain_in = sample(&reference, &[0.0], cfg.samples, "gain_input", QuadratureTag::Input)?;

        let vacuum_check = vacuum_self_check(&vac)?;
        let gain = gain_from_samples(&gain_amp.values_at(0.0, None), &gain_in.values_at(0.0, None))
            .stage("homodyne")?;

        let settings = tomography_settings(r, FockCutoff::new(cfg.cutoff.unwrap_or(cutoff.n_max())).stage("tomography")?, cfg.eta)?;
        let rec = maxlik_reconstruct(&amplified, &settings).stage("tomography")?;

        let common = rec.rho.cutoff().max(cutoff);
        let input_state = coherent_state(alpha, common).stage("report")?;
        let ideal = amplify_ideal(&input_state, 2.0).stage("report")?.state;
        let rho_rec = rec.rho.embedded(common).stage("report")?;
        let g_analytic = effective_gain_analytic(2.0, a);
        let var_x_rec = quadrature_variance(&rec.rho, 0.0).stage("report")?;
        let var_x_model = quadrature_variance(state, 0.0).stage("report")?;
        let gain_model = x(state)? / x(&reference)?;
        let pe_rec = phase_estimation_metrics(&rec.rho, a, gain.gain).stage("report")?;
        let pe_model = phase_estimation_metrics(state, a, gain_model).stage("report")?;
        let axis = grid_for(r, &[&rec.rho])?;
        let grid = wigner_function(&rec.rho, &axis, &axis).stage("wigner")?;

        let report = SimulationReport {
            alpha: a,
            lambda: cfg.lambda,
            reflectivity: cfg.reflectivity,
            eta: cfg.eta,
            phases: cfg.phases,
            counts_per_phase: per_phase,
            gain_samples: cfg.samples,
            addition_probability: phys.addition_prob,
            subtraction_probability: phys.subtraction_prob,
            herald_probability: phys.heralded.success_prob,
            model_fidelity_to_ideal: phys.ideal_fidelity,
            vacuum_check,
            gain: gain.gain,
            gain_std_error: gain.std_error,
            gain_analytic: g_analytic,
            gain_model,
            gain_z_analytic: (gain.gain - g_analytic) / gain.std_error,
            tomography: TomographySummary::new(&rec, &settings),
            fidelity_to_ideal: state_fidelity(&rho_rec, &ideal).stage("report")?,
            diagnostic_fidelity: amplified_fidelity_diagnostic(&rec.rho, alpha).stage("report")?,
            fidelity_analytic: fidelity_analytic(2.0, a),
            n_eq: var_x_rec / (gain.gain * gain.gain) - 1.0,
            n_eq_model: var_x_model / (gain_model * gain_model) - 1.0,
            r_v: pe_rec.variance_ratio,
            r_v_model: pe_model.variance_ratio,
            v_sql: pe_rec.sql_variance,
            wigner_half_width: axis[axis.len() - 1],
        };

        for (stem, data) in [
            ("amplified", &amplified),
            ("input", &input),
            ("vacuum", &vac),
            ("gain_amplified", &gain_amp),
            ("gain_input", &gain_in),
        ] {
            out.dataset(&format!("{dir}{stem}"), data)?;
        }
        write_reconstruction(out, &dir, &rec)?;
        write_grid(out, &format!("{dir}wigner"), &grid)?;
        out.json(&format!("{dir}report.json"), &report)?;
        lines.push(format!(
            "alpha {a}: gain {:.4} ± {:.4} (analytic {:.4}), diagnostic fidelity {:.4}, N_eq {:.3}, R_V {:.3}",
            report.gain, report.gain_std_error, g_analytic, report.diagnostic_fidelity, report.n_eq, report.r_v
        ));
    }
    Ok(lines)
}

fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

#[derive(Serialize)]
struct ReconstructionReport {
    dataset: String,
    samples: usize,
    tomography: TomographySummary,
    mean_photon_number: f64,
    purity: f64,
    diagnostic: Option<(f64, f64)>,
}

fn reconstruct(r: &Resolved, out: &mut Outputs) -> Result<Vec<String>, CliError> {
    let path = r.config.dataset.as_ref().expect("validated");
    let meta_path = sidecar(path);
    let csv_file = File::open(path).map_err(CliError::io(path))?;
    let meta_file = File::open(&meta_path).map_err(CliError::io(&meta_path))?;
    let data = QuadratureDataset::read(csv_file, meta_file).stage("dataset")?;
    let cutoff = FockCutoff::new(r.config.cutoff.unwrap_or(nla_core::fock::CUTOFF_FLOOR)).stage("tomography")?;
    let settings = tomography_settings(r, cutoff, data.eta())?;
    let rec = maxlik_reconstruct(&data, &settings).stage("tomography")?;
    let diagnostic = match r.alphas.first() {
        Some(&a) => Some((a, amplified_fidelity_diagnostic(&rec.rho, Complex::new(a, 0.0)).stage("report")?)),
        None => None,
    };
    let axis = grid_for(r, &[&rec.rho])?;
    let grid = wigner_function(&rec.rho, &axis, &axis).stage("wigner")?;
    let report = ReconstructionReport {
        dataset: path.display().to_string(),
        samples: data.len(),
        tomography: TomographySummary::new(&rec, &settings),
        mean_photon_number: expectation(&rec.rho, Observable::Number).stage("report")?.re,
        purity: rec.rho.purity(),
        diagnostic,
    };
    write_reconstruction(out, "", &rec)?;
    write_grid(out, "wigner", &grid)?;
    out.json("report.json", &report)?;
    Ok(vec![format!(
        "{} samples, {} iterations, converged {}",
        report.samples, report.tomography.iterations, report.tomography.converged
    )])
}

#[derive(Serialize)]
struct DemoReport {
    alpha: f64,
    g: f64,
    g_eff: f64,
    overlap_before: f64,
    overlap_after: f64,
    separation_before: f64,
    separation_after: f64,
    separation_ratio: f64,
}

fn wigner_demo(r: &Resolved, out: &mut Outputs) -> Result<Vec<String>, CliError> {
    let g = r.config.g;
    let mut lines = Vec::new();
    for &a in &r.alphas {
        let cutoff = FockCutoff::covering(g * a).max(FockCutoff::for_amplification(a));
        let input = coherent_state(Complex::new(a, 0.0), cutoff).stage("fock")?;
        let a0 = input.to_density();
        let amp = amplify_ideal(&input, g).stage("amplifiers")?.state.to_density().normalized().stage("amplifiers")?;
        let a1 = phase_shift(&a0, FRAC_PI_2);
        let amp1 = phase_shift(&amp, FRAC_PI_2);
        let before = mixture(&[a0.clone(), a1.clone()], &[0.5, 0.5]).stage("wigner")?;
        let after = mixture(&[amp.clone(), amp1.clone()], &[0.5, 0.5]).stage("wigner")?;

        let axis = grid_for(r, &[&a0, &amp])?;
        let w = |rho: &DensityMatrix| wigner_function(rho, &axis, &axis).stage("wigner");
        let overlap_before = overlap(&w(&a0)?, &w(&a1)?).stage("wigner")?;
        let overlap_after = overlap(&w(&amp)?, &w(&amp1)?).stage("wigner")?;
        let centre = |rho: &DensityMatrix| -> Result<(f64, f64), CliError> {
            Ok((
                expectation(rho, Observable::Quadrature(0.0)).stage("fock")?.re,
                expectation(rho, Observable::Quadrature(FRAC_PI_2)).stage("fock")?.re,
            ))
        };
        let dist = |u: (f64, f64), v: (f64, f64)| (u.0 - v.0).hypot(u.1 - v.1);
        let separation_before = dist(centre(&a0)?, centre(&a1)?);
        let separation_after = dist(centre(&amp)?, centre(&amp1)?);
        let report = DemoReport {
            alpha: a,
            g,
            g_eff: effective_gain_analytic(g, a),
            overlap_before,
            overlap_after,
            separation_before,
            separation_after,
            separation_ratio: separation_after / separation_before,
        };
        let dir = format!("alpha_{a}/");
        write_grid(out, &format!("{dir}mixture_before"), &w(&before)?)?;
        write_grid(out, &format!("{dir}mixture_after"), &w(&after)?)?;
        out.json(&format!("{dir}demo.json"), &report)?;
        lines.push(format!(
            "alpha {a}: overlap {overlap_before:.5} -> {overlap_after:.5}, separation x{:.4}",
            report.separation_ratio
        ));
    }
    Ok(lines)
}
