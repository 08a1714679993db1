//! Network training with its checkpoint, curve and summary.

use std::path::{Path, PathBuf};
use std::time::Instant;

use motionpulse_core::exec::Executor;
use motionpulse_core::trainer::{make_datasets, train as core_train, TrainOutcome, AUDIT_TOLERANCE};
use serde::Serialize;

use super::{stream_rng, trained_name, STREAM_DATASET};
use crate::checkpoint;
use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::provenance::{echo_config, json_document, num, write_file, CsvTable, Provenance};

pub const CURVE_SCHEMA: &str = "motionpulse.train-curve/1";
pub const SUMMARY_SCHEMA: &str = "motionpulse.train-summary/1";

pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const CURVE_FILE: &str = "train_curve.csv";
pub const SUMMARY_FILE: &str = "train_summary.json";

/// Trains on datasets drawn from the run seed. A gradient that disagrees with
/// finite differences is fatal: the resulting network cannot be trusted.
pub fn train<X: Executor>(cfg: &ExperimentConfig, exec: &X) -> Result<TrainOutcome> {
    let tc = cfg.train_config()?;
    let ctx = cfg.motion();
    let (train_set, val_set) = make_datasets(&tc, &ctx.trap, &mut stream_rng(cfg.seed, STREAM_DATASET));
    log::info!(
        "training {} on {} targets x {} atoms for up to {} epochs",
        tc.baseline.name(),
        train_set.targets.len(),
        train_set.atoms.len(),
        tc.epochs
    );
    let started = Instant::now();
    let outcome = core_train(&tc, &train_set, &val_set, &ctx, exec, |r| {
        log::debug!("epoch {:>5}  lr {:.3e}  loss {:.4e}  val {:.6}", r.epoch, r.lr, r.train_loss, r.val_fidelity);
        if (r.epoch + 1) % 50 == 0 {
            log::info!("epoch {} val fidelity {:.6} ({:.0?})", r.epoch + 1, r.val_fidelity, started.elapsed());
        }
    })?;
    if let Some(a) = &outcome.audit {
        if !a.passed(AUDIT_TOLERANCE) {
            return Err(CliError::NumericCheck(format!(
                "gradient audit failed: relative error {:.3e} exceeds {AUDIT_TOLERANCE:e}",
                a.relative_error
            )));
        }
    }
    log::info!(
        "{}; best validation fidelity {:.6} at epoch {}",
        outcome.stop_reason,
        outcome.checkpoint.best_validation_fidelity,
        outcome.checkpoint.epoch
    );
    Ok(outcome)
}

#[derive(Serialize)]
struct AuditEcho {
    weights: usize,
    relative_error: f64,
    max_component_error: f64,
    tolerance: f64,
}

#[derive(Serialize)]
struct Summary {
    family: String,
    baseline: &'static str,
    epochs_run: usize,
    best_epoch: usize,
    initial_validation_fidelity: f64,
    best_validation_fidelity: f64,
    stop_reason: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    gradient_audit: Option<AuditEcho>,
}

pub fn curve_csv(outcome: &TrainOutcome, prov: &Provenance) -> String {
    let mut t = CsvTable::new(CURVE_SCHEMA, prov, &["epoch", "lr", "train_loss", "val_fidelity"]);
    for r in &outcome.history {
        t.row(&[(r.epoch + 1).to_string(), num(r.lr), num(r.train_loss), num(r.val_fidelity)]);
    }
    t.into_string()
}

/// Writes checkpoint, curve, summary and resolved config into `dir`.
pub fn write_outputs(outcome: &TrainOutcome, cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let prov = Provenance::of(cfg);
    let ck = &outcome.checkpoint;
    let summary = Summary {
        family: trained_name(ck),
        baseline: ck.config.baseline.name(),
        epochs_run: outcome.history.len(),
        best_epoch: ck.epoch,
        initial_validation_fidelity: outcome.initial_val_fidelity,
        best_validation_fidelity: ck.best_validation_fidelity,
        stop_reason: outcome.stop_reason.clone(),
        gradient_audit: outcome.audit.as_ref().map(|a| AuditEcho {
            weights: a.indices.len(),
            relative_error: a.relative_error,
            max_component_error: a.max_component_error,
            tolerance: AUDIT_TOLERANCE,
        }),
    };
    let files = [
        (CHECKPOINT_FILE, checkpoint::to_string(ck, &prov)),
        (CURVE_FILE, curve_csv(outcome, &prov)),
        (SUMMARY_FILE, json_document(SUMMARY_SCHEMA, &prov, &summary)),
    ];
    let mut written = Vec::new();
    for (name, text) in files {
        let path = dir.join(name);
        write_file(&path, &text)?;
        written.push(path);
    }
    echo_config(dir, "train", cfg)?;
    written.push(dir.join("train.config.toml"));
    Ok(written)
}
