//! Motion-error spectrum, filter function and the leading-order prediction.

use motionpulse_core::evolution::ensemble_fidelity;
use motionpulse_core::exec::Executor;
use motionpulse_core::motion::sample_thermal;
use motionpulse_core::spectral::{
    displacement, epsilon_realizations, filter_amplitude, frame_signal, leading_order_infidelity, power_spectrum,
    residual_bias, spectral_bins, ErrorSpectrum, FilterFunction,
};
use serde::Serialize;

use super::evaluate::TargetEcho;
use super::{stream_rng, Source, STREAM_SPECTRUM};
use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::provenance::{num, CsvTable, Provenance};

pub const SCHEMA: &str = "motionpulse.spectrum/1";
pub const BIAS_SCHEMA: &str = "motionpulse.bias/1";
pub const SUMMARY_SCHEMA: &str = "motionpulse.spectrum-summary/1";

/// Samples of the control-frame signal per pulse sequence.
const FRAME_SAMPLES: f64 = 2000.0;
/// Peaks listed in the summary.
const REPORTED_PEAKS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Peak {
    pub omega_rad_per_s: f64,
    pub frequency_hz: f64,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSummary {
    pub family: String,
    pub target: TargetEcho,
    pub realizations: usize,
    pub window_s: f64,
    pub step_s: f64,
    pub bin_spacing_rad_per_s: f64,
    pub mean_eps: f64,
    /// `G(⟨ε⟩)`.
    pub residual_bias: f64,
    /// `(1/2π) ∫ |r|² S dω`.
    pub fluctuation_term: f64,
    pub predicted_infidelity: f64,
    /// Direct simulation on the same atoms.
    pub simulated_infidelity: f64,
    pub relative_gap: f64,
    pub peaks: Vec<Peak>,
}

pub struct SpectrumRun {
    pub spectrum: ErrorSpectrum,
    pub filter: FilterFunction,
    /// `(⟨ε⟩, G)` across the configured span.
    pub bias_curve: Vec<(f64, f64)>,
    pub summary: SpectrumSummary,
}

/// Positive-frequency local maxima of `S`, largest first. DC is excluded.
pub fn peaks(spec: &ErrorSpectrum) -> Vec<Peak> {
    let s = &spec.density;
    let mut found: Vec<Peak> = (1..s.len().saturating_sub(1))
        .filter(|&j| spec.omega[j] > 0.0 && s[j] > s[j - 1] && s[j] >= s[j + 1])
        .map(|j| Peak {
            omega_rad_per_s: spec.omega[j],
            frequency_hz: spec.omega[j] / core::f64::consts::TAU,
            density: s[j],
        })
        .collect();
    found.sort_by(|a, b| b.density.total_cmp(&a.density).then(a.omega_rad_per_s.total_cmp(&b.omega_rad_per_s)));
    found
}

pub fn spectrum<X: Executor>(cfg: &ExperimentConfig, source: Source, exec: &X) -> Result<SpectrumRun> {
    let sp = &cfg.spectrum;
    let target = cfg.target()?;
    let cp = source.compile(&target, &cfg.limits())?;
    let ctx = cfg.motion();
    let atoms = sample_thermal(&ctx.trap, &mut stream_rng(cfg.seed, STREAM_SPECTRUM), sp.realizations);

    let window = sp.window_us * 1e-6;
    let dt = sp.step_ns * 1e-9;
    let steps = (window / dt).round() as usize;
    if steps < 2 {
        return Err(CliError::Config("spectrum.window_us must span at least two steps".into()));
    }
    let omega = spectral_bins(steps as f64 * dt, core::f64::consts::TAU * sp.omega_max_2pi_mhz * 1e6);
    let eps = epsilon_realizations(&ctx, &atoms, dt, steps, exec);
    let spec = power_spectrum(&eps, dt, &omega, exec)?;

    let sig = frame_signal(&cp, cp.total_duration() / FRAME_SAMPLES);
    let filter = filter_amplitude(&sig, &omega);
    let d = displacement(&target.unitary(), &cp)?;
    let r0 = sig.dc_response();
    let bias = residual_bias(spec.mean_eps, &r0, &d);
    let predicted = leading_order_infidelity(bias, &filter, &spec)?;
    let simulated = 1.0 - ensemble_fidelity(&cp, &target.unitary(), &atoms, &ctx, cfg.report.segments, exec)?;

    let bias_curve = (0..sp.bias_points)
        .map(|i| {
            let e = -sp.bias_span + 2.0 * sp.bias_span * i as f64 / (sp.bias_points - 1) as f64;
            (e, residual_bias(e, &r0, &d))
        })
        .collect();

    let mut top = peaks(&spec);
    top.truncate(REPORTED_PEAKS);
    let summary = SpectrumSummary {
        family: source.name(),
        target: TargetEcho { area_rad: target.area, polar_rad: target.polar, azimuth_rad: target.azimuth },
        realizations: atoms.len(),
        window_s: spec.window,
        step_s: dt,
        bin_spacing_rad_per_s: core::f64::consts::TAU / spec.window,
        mean_eps: spec.mean_eps,
        residual_bias: bias,
        fluctuation_term: predicted - bias,
        predicted_infidelity: predicted,
        simulated_infidelity: simulated,
        relative_gap: (predicted - simulated) / simulated,
        peaks: top,
    };
    Ok(SpectrumRun { spectrum: spec, filter, bias_curve, summary })
}

pub fn spectrum_csv(run: &SpectrumRun, prov: &Provenance) -> String {
    let notes = [("family", run.summary.family.clone())];
    let mut t =
        CsvTable::with_notes(SCHEMA, prov, &notes, &["omega_rad_per_s", "r2_x", "r2_y", "r2_z", "r2_total", "S"]);
    for ((w, p), s) in run.spectrum.omega.iter().zip(run.filter.power_per_axis()).zip(&run.spectrum.density) {
        t.row(&[num(*w), num(p[0]), num(p[1]), num(p[2]), num(p[0] + p[1] + p[2]), num(*s)]);
    }
    t.into_string()
}

pub fn bias_csv(run: &SpectrumRun, prov: &Provenance) -> String {
    let notes = [("family", run.summary.family.clone())];
    let mut t = CsvTable::with_notes(BIAS_SCHEMA, prov, &notes, &["mean_eps", "G"]);
    for (e, g) in &run.bias_curve {
        t.row(&[num(*e), num(*g)]);
    }
    t.into_string()
}
