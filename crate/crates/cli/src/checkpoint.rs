//! Checkpoint files.
//!
//! JSON with every float stored as the hexadecimal bit pattern of its `f64`
//! (`"0x3fe0000000000000"`), so a save/load cycle is bit-exact. The file
//! names its own format and version, the layer sizes, activation, range-map
//! constants, training settings, seed and best validation metric.

use std::path::Path;

use motionpulse_core::pulses::{Baseline, HardwareLimits};
use motionpulse_core::trainer::mlp::Mlp;
use motionpulse_core::trainer::network::{PulseNet, TargetBox, LOGIT_MARGIN, RESIDUAL_SCALE};
use motionpulse_core::trainer::{Checkpoint, TrainConfig, CHECKPOINT_VERSION};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::provenance::Provenance;

pub const FORMAT: &str = "motionpulse-checkpoint";

/// An `f64` written as its bit pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hex(pub f64);

impl Serialize for Hex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{:#018x}", self.0.to_bits()))
    }
}

impl<'de> Deserialize<'de> for Hex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let digits =
            s.strip_prefix("0x").ok_or_else(|| D::Error::custom(format!("expected 0x-prefixed bits, got {s:?}")))?;
        u64::from_str_radix(digits, 16).map(|b| Hex(f64::from_bits(b))).map_err(D::Error::custom)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct File {
    format: String,
    format_version: u32,
    tool_version: String,
    config_hash: String,
    seed: u64,
    epoch: usize,
    best_validation_fidelity: Hex,
    network: Network,
    limits: Limits,
    training: Training,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Network {
    activation: String,
    baseline: String,
    layers: Vec<usize>,
    residual_scale: Hex,
    logit_margin: Hex,
    /// Input normalization box, radians.
    area_range: [Hex; 2],
    polar_range: [Hex; 2],
    /// Per layer: weights row-major `[out][in]`, then biases.
    params: Vec<Hex>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Limits {
    omega_max_rad_per_s: Hex,
    delta_max_rad_per_s: Hex,
    chi_min: Hex,
    chi_max: Hex,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Training {
    epochs: usize,
    batch_size: usize,
    lr0: Hex,
    decay_every: usize,
    cosine_period: usize,
    patience: usize,
    segments: usize,
    area_points: usize,
    polar_points: usize,
    train_atoms: usize,
    val_targets: usize,
    val_atoms: usize,
    hidden_layers: usize,
    hidden_width: usize,
    audit_weights: usize,
}

pub fn to_string(ck: &Checkpoint, prov: &Provenance) -> String {
    let net = &ck.net;
    let c = &ck.config;
    let file = File {
        format: FORMAT.into(),
        format_version: ck.version,
        tool_version: prov.tool_version.into(),
        config_hash: prov.config_hash.clone(),
        seed: ck.seed,
        epoch: ck.epoch,
        best_validation_fidelity: Hex(ck.best_validation_fidelity),
        network: Network {
            activation: "elu".into(),
            baseline: net.baseline.name().into(),
            layers: net.mlp.sizes().to_vec(),
            residual_scale: Hex(RESIDUAL_SCALE),
            logit_margin: Hex(LOGIT_MARGIN),
            area_range: net.target_box.area.map(Hex),
            polar_range: net.target_box.polar.map(Hex),
            params: net.mlp.params().iter().map(|&v| Hex(v)).collect(),
        },
        limits: Limits {
            omega_max_rad_per_s: Hex(net.limits.omega_max),
            delta_max_rad_per_s: Hex(net.limits.delta_max),
            chi_min: Hex(net.limits.chi_min),
            chi_max: Hex(net.limits.chi_max),
        },
        training: Training {
            epochs: c.epochs,
            batch_size: c.batch_size,
            lr0: Hex(c.lr0),
            decay_every: c.decay_every,
            cosine_period: c.cosine_period,
            patience: c.patience,
            segments: c.segments,
            area_points: c.area_points,
            polar_points: c.polar_points,
            train_atoms: c.train_atoms,
            val_targets: c.val_targets,
            val_atoms: c.val_atoms,
            hidden_layers: c.hidden_layers,
            hidden_width: c.hidden_width,
            audit_weights: c.audit_weights,
        },
    };
    let mut s = serde_json::to_string_pretty(&file).expect("checkpoint serializes");
    s.push('\n');
    s
}

pub fn from_str(text: &str) -> std::result::Result<Checkpoint, String> {
    let f: File = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if f.format != FORMAT {
        return Err(format!("not a checkpoint (format {:?})", f.format));
    }
    if f.format_version != CHECKPOINT_VERSION {
        return Err(format!("format version {} is not supported (expected {CHECKPOINT_VERSION})", f.format_version));
    }
    let n = &f.network;
    if n.activation != "elu" {
        return Err(format!("unsupported activation {:?}", n.activation));
    }
    if n.residual_scale.0 != RESIDUAL_SCALE || n.logit_margin.0 != LOGIT_MARGIN {
        return Err("range-map constants differ from this build".into());
    }
    let baseline = Baseline::from_name(&n.baseline).ok_or_else(|| format!("unknown baseline {:?}", n.baseline))?;
    let limits = HardwareLimits {
        omega_max: f.limits.omega_max_rad_per_s.0,
        delta_max: f.limits.delta_max_rad_per_s.0,
        chi_min: f.limits.chi_min.0,
        chi_max: f.limits.chi_max.0,
    };
    let target_box = TargetBox { area: n.area_range.map(|h| h.0), polar: n.polar_range.map(|h| h.0) };
    let params = n.params.iter().map(|h| h.0).collect();
    let mlp = Mlp::from_params(&n.layers, params).map_err(|e| e.to_string())?;
    let net = PulseNet::from_mlp(mlp, baseline, limits, target_box).map_err(|e| e.to_string())?;
    let t = &f.training;
    let config = TrainConfig {
        baseline,
        epochs: t.epochs,
        batch_size: t.batch_size,
        lr0: t.lr0.0,
        decay_every: t.decay_every,
        cosine_period: t.cosine_period,
        patience: t.patience,
        segments: t.segments,
        seed: f.seed,
        area_points: t.area_points,
        polar_points: t.polar_points,
        train_atoms: t.train_atoms,
        val_targets: t.val_targets,
        val_atoms: t.val_atoms,
        hidden_layers: t.hidden_layers,
        hidden_width: t.hidden_width,
        audit_weights: t.audit_weights,
        limits,
        target_box,
    };
    Ok(Checkpoint {
        version: f.format_version,
        net,
        config,
        best_validation_fidelity: f.best_validation_fidelity.0,
        epoch: f.epoch,
        seed: f.seed,
    })
}

pub fn load(path: &Path) -> Result<Checkpoint> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    from_str(&text).map_err(|reason| CliError::Checkpoint { path: path.into(), reason })
}

/// SHA-256 of the checkpoint file, for reports that depend on it.
pub fn file_hash(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}
