use motionpulse_core::evolution::{mean_and_stderr, sample_fidelities};
use motionpulse_core::exec::{ordered_sum, Executor};
use motionpulse_core::motion::{sample_thermal, AtomSample, MotionContext};
use motionpulse_core::pulses::CompositePulse;
use motionpulse_core::su2::TargetRotation;
use motionpulse_core::trainer::Checkpoint;
use serde::Serialize;

use super::{report_sources, stream_rng, Source, STREAM_EVALUATION};
use crate::config::ExperimentConfig;
use crate::error::Result;

pub const SCHEMA: &str = "motionpulse.evaluate/1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityRow {
    pub family: String,
    pub mean_fidelity: f64,
    pub infidelity: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetEcho {
    pub area_rad: f64,
    pub polar_rad: f64,
    pub azimuth_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub target: TargetEcho,
    pub atoms: usize,
    pub segments: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoint_sha256: Option<String>,
    pub rows: Vec<FidelityRow>,
}

impl EvaluationReport {
    pub fn row(&self, family: &str) -> Option<&FidelityRow> {
        self.rows.iter().find(|r| r.family == family)
    }
}

/// The atoms every report-style command averages over.
pub fn report_atoms(cfg: &ExperimentConfig, ctx: &MotionContext) -> Vec<AtomSample> {
    sample_thermal(&ctx.trap, &mut stream_rng(cfg.seed, STREAM_EVALUATION), cfg.report.atoms)
}

pub fn fidelity_row<X: Executor>(
    family: String,
    cp: &CompositePulse,
    target: &TargetRotation,
    atoms: &[AtomSample],
    ctx: &MotionContext,
    segments: usize,
    exec: &X,
) -> Result<FidelityRow> {
    let f = sample_fidelities(cp, &target.unitary(), atoms, ctx, segments, exec)?;
    let (mean, stderr) = mean_and_stderr(&f);
    let losses: Vec<f64> = f.iter().map(|v| 1.0 - v).collect();
    Ok(FidelityRow { family, mean_fidelity: mean, infidelity: ordered_sum(&losses) / losses.len() as f64, stderr })
}

pub fn evaluate<X: Executor>(
    cfg: &ExperimentConfig,
    checkpoint: Option<&Checkpoint>,
    checkpoint_sha256: Option<String>,
    exec: &X,
) -> Result<EvaluationReport> {
    let target = cfg.target()?;
    if let Some(ck) = checkpoint {
        if !ck.net.target_box.contains(target.area, target.polar) {
            log::warn!("target lies outside the network's training box; the trained row is an extrapolation");
        }
    }
    let ctx = cfg.motion();
    let atoms = report_atoms(cfg, &ctx);
    let lim = cfg.limits();
    let rows = report_sources(checkpoint)
        .into_iter()
        .map(|src: Source| {
            let cp = src.compile(&target, &lim)?;
            fidelity_row(src.name(), &cp, &target, &atoms, &ctx, cfg.report.segments, exec)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvaluationReport {
        target: TargetEcho { area_rad: target.area, polar_rad: target.polar, azimuth_rad: target.azimuth },
        atoms: atoms.len(),
        segments: cfg.report.segments,
        checkpoint_sha256,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use motionpulse_core::exec::Sequential;

    #[test]
    fn zero_temperature_baselines_are_exact() {
        let mut cfg = ExperimentConfig::default();
        cfg.trap.temperature_uk = 0.0;
        cfg.report.atoms = 1;
        let report = evaluate(&cfg.resolved().unwrap(), None, None, &Sequential).unwrap();
        assert_eq!(report.rows.len(), 3);
        for r in &report.rows {
            assert!(r.infidelity < 1e-12, "{}: {}", r.family, r.infidelity);
        }
    }

    #[test]
    fn rows_cover_every_family() {
        let mut cfg = ExperimentConfig::default();
        cfg.report.atoms = 50;
        let report = evaluate(&cfg.resolved().unwrap(), None, None, &Sequential).unwrap();
        let names: Vec<&str> = report.rows.iter().map(|r| r.family.as_str()).collect();
        assert_eq!(names, ["rect", "sk1", "bb1"]);
        for r in &report.rows {
            assert!((r.mean_fidelity + r.infidelity - 1.0).abs() < 1e-12);
            assert!(r.stderr > 0.0);
        }
    }
}
