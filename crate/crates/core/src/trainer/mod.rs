//! Training the pulse-compiling network.
//!
//! Training is plain gradient descent on the ensemble infidelity: the loss of
//! a mini-batch is `1 − ⟨F⟩` over every (target, atom) pair, and its exact
//! gradient is assembled from [`adjoint::fidelity_gradient`], the pulse
//! mapping Jacobian, the range maps and the network's own backward pass.

pub mod adjoint;
pub mod mlp;
pub mod network;
pub mod optim;

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::evolution::{evolve, gate_fidelity, resolved_grid};
use crate::exec::{ordered_sum, Executor};
use crate::motion::{sample_thermal, AtomSample, MotionContext, TrapParams};
use crate::pulses::{Baseline, CompositePulse, HardwareLimits};
use crate::su2::{su2_from_rotation, TargetRotation};
use crate::{Error, Result};

use network::{PulseNet, TargetBox};
use optim::{learning_rate, Adam};

pub use network::{HeadParams, NetPass};

/// Checkpoint format version written by this crate.
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// SK1 for three pulses, BB1 for four.
    pub baseline: Baseline,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr0: f64,
    pub decay_every: usize,
    pub cosine_period: usize,
    pub patience: usize,
    /// Segments per sequence during training.
    pub segments: usize,
    pub seed: u64,
    /// Training grid: `area_points × polar_points` targets.
    pub area_points: usize,
    pub polar_points: usize,
    pub train_atoms: usize,
    pub val_targets: usize,
    pub val_atoms: usize,
    pub hidden_layers: usize,
    pub hidden_width: usize,
    /// Weights checked against finite differences on the first batch.
    pub audit_weights: usize,
    pub limits: HardwareLimits,
    pub target_box: TargetBox,
}

impl TrainConfig {
    /// Full-scale settings: 48×32 targets, 128 atoms, validation on 128
    /// targets × 64 atoms, 8000 epochs.
    pub fn full(baseline: Baseline, seed: u64) -> Self {
        TrainConfig {
            baseline,
            epochs: 8000,
            batch_size: 32,
            lr0: 0.002,
            decay_every: 2000,
            cosine_period: 200,
            patience: 1000,
            segments: 20,
            seed,
            area_points: 48,
            polar_points: 32,
            train_atoms: 128,
            val_targets: 128,
            val_atoms: 64,
            hidden_layers: network::HIDDEN_LAYERS,
            hidden_width: network::HIDDEN_WIDTH,
            audit_weights: 20,
            limits: HardwareLimits::default(),
            target_box: TargetBox::default(),
        }
    }

    /// Workstation-sized run: 8×4 targets, 32 training atoms, 16 validation
    /// targets × 16 atoms, 500 epochs, patience 200, mini-batches of 8.
    pub fn desk(baseline: Baseline, seed: u64) -> Self {
        TrainConfig {
            epochs: 500,
            batch_size: 8,
            patience: 200,
            area_points: 8,
            polar_points: 4,
            train_atoms: 32,
            val_targets: 16,
            val_atoms: 16,
            ..Self::full(baseline, seed)
        }
    }

    pub fn n_pulses(&self) -> usize {
        self.baseline.pulse_count()
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = alloc::vec![2];
        sizes.extend(core::iter::repeat_n(self.hidden_width, self.hidden_layers));
        sizes.push(4 * self.n_pulses());
        sizes
    }

    pub fn validated(self) -> Result<Self> {
        let counts = [
            self.epochs,
            self.batch_size,
            self.decay_every,
            self.cosine_period,
            self.patience,
            self.segments,
            self.area_points,
            self.polar_points,
            self.train_atoms,
            self.val_targets,
            self.val_atoms,
            self.hidden_width,
        ];
        if counts.contains(&0) || !(self.lr0 > 0.0) {
            return Err(Error::Invalid("training settings must be positive".into()));
        }
        if self.area_points < 2 || self.polar_points < 2 {
            return Err(Error::Invalid("training grid needs at least two points per axis".into()));
        }
        if self.patience > self.epochs {
            return Err(Error::Invalid("patience cannot exceed the epoch budget".into()));
        }
        if self.baseline == Baseline::Rect {
            return Err(Error::Invalid("n_pulses must be 3 (SK1) or 4 (BB1)".into()));
        }
        self.limits.validated()?;
        Ok(self)
    }

    pub fn learning_rate(&self, epoch: usize) -> f64 {
        learning_rate(self.lr0, epoch, self.decay_every, self.cosine_period)
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

const STREAM_INIT: u64 = 1;
const STREAM_SHUFFLE: u64 = 2;
const STREAM_AUDIT: u64 = 3;

/// Targets `(A_tg, θ_tg)` with the atoms they are averaged over.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub targets: Vec<(f64, f64)>,
    pub atoms: Vec<AtomSample>,
}

fn linspace(range: [f64; 2], n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| range[0] + (range[1] - range[0]) * i as f64 / (n - 1) as f64)
}

/// Training grid plus a validation set drawn uniformly from the same box, at
/// least half a grid step (in normalized coordinates) from every grid point.
pub fn make_datasets<R: Rng + ?Sized>(cfg: &TrainConfig, trap: &TrapParams, rng: &mut R) -> (Dataset, Dataset) {
    let b = &cfg.target_box;
    let grid: Vec<(f64, f64)> = linspace(b.area, cfg.area_points)
        .flat_map(|a| linspace(b.polar, cfg.polar_points).map(move |t| (a, t)))
        .collect();
    let step = 2.0 / ((cfg.area_points.max(cfg.polar_points) - 1) as f64);
    let min_dist = 0.5 * step;
    let normalized: Vec<[f64; 2]> = grid.iter().map(|&(a, t)| b.normalize(a, t)).collect();
    let mut val_targets = Vec::with_capacity(cfg.val_targets);
    while val_targets.len() < cfg.val_targets {
        let a = rng.random_range(b.area[0]..=b.area[1]);
        let t = rng.random_range(b.polar[0]..=b.polar[1]);
        let x = b.normalize(a, t);
        let far = normalized.iter().all(|g| (g[0] - x[0]).hypot(g[1] - x[1]) >= min_dist);
        if far {
            val_targets.push((a, t));
        }
    }
    let train_atoms = sample_thermal(trap, rng, cfg.train_atoms);
    let val_atoms = sample_thermal(trap, rng, cfg.val_atoms);
    (Dataset { targets: grid, atoms: train_atoms }, Dataset { targets: val_targets, atoms: val_atoms })
}

/// Network initialised around the rotated baseline, from the config's seed.
pub fn init_network(cfg: &TrainConfig) -> Result<PulseNet> {
    let mut rng = cfg.rng(STREAM_INIT);
    PulseNet::with_sizes(&cfg.layer_sizes(), cfg.baseline, cfg.limits, cfg.target_box, &mut rng)
}

fn equatorial_target(area: f64, polar: f64) -> TargetRotation {
    TargetRotation::new(area, polar, 0.0)
}

/// Mean fidelity over every (target, atom) pair, on `segments` segments per
/// sequence (refined if a pulse is too short to get its own boundary).
pub fn mean_fidelity<X: Executor>(
    net: &PulseNet,
    targets: &[(f64, f64)],
    atoms: &[AtomSample],
    motion: &MotionContext,
    segments: usize,
    exec: &X,
) -> Result<f64> {
    if targets.is_empty() || atoms.is_empty() {
        return Err(Error::Invalid("batch needs at least one target and one atom".into()));
    }
    let per_target = exec.map(targets.len(), |i| -> Result<f64> {
        let (a, t) = targets[i];
        let target = equatorial_target(a, t);
        let cp = net.compile(&target)?;
        let grid = resolved_grid(&cp, segments)?;
        let v = su2_from_rotation(&target);
        let mut sum = 0.0;
        for atom in atoms {
            sum += gate_fidelity(&v, &evolve(&cp, |s| motion.epsilon(atom, s), &grid)?);
        }
        Ok(sum)
    });
    let sums = per_target.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(ordered_sum(&sums) / (targets.len() * atoms.len()) as f64)
}

/// `1 − ⟨F⟩` over the batch.
pub fn batch_loss<X: Executor>(
    net: &PulseNet,
    targets: &[(f64, f64)],
    atoms: &[AtomSample],
    motion: &MotionContext,
    segments: usize,
    exec: &X,
) -> Result<f64> {
    Ok(1.0 - mean_fidelity(net, targets, atoms, motion, segments, exec)?)
}

/// Batch loss and its gradient with respect to the flat network parameters.
pub fn batch_gradient<X: Executor>(
    net: &PulseNet,
    targets: &[(f64, f64)],
    atoms: &[AtomSample],
    motion: &MotionContext,
    segments: usize,
    exec: &X,
) -> Result<(f64, Vec<f64>)> {
    if targets.is_empty() || atoms.is_empty() {
        return Err(Error::Invalid("batch needs at least one target and one atom".into()));
    }
    let lim = net.limits;
    let pairs = (targets.len() * atoms.len()) as f64;
    let per_target = exec.map(targets.len(), |i| -> Result<(f64, Vec<f64>)> {
        let (a, t) = targets[i];
        let pass = net.forward_tape(a, t)?;
        let cp = CompositePulse::new(pass.params.iter().map(|p| p.to_pulse(&lim)).collect())?;
        let grid = resolved_grid(&cp, segments)?;
        let target = su2_from_rotation(&equatorial_target(a, t));
        let mut fid_sum = 0.0;
        let mut pulse_grad = alloc::vec![[0.0; 4]; cp.len()];
        for atom in atoms {
            let (f, g) = adjoint::fidelity_gradient(
                &cp,
                &grid,
                &target,
                |s| motion.epsilon(atom, s),
                |s| motion.epsilon_rate(atom, s),
            )?;
            fid_sum += f;
            for (acc, row) in pulse_grad.iter_mut().zip(g.iter()) {
                for j in 0..4 {
                    acc[j] += row[j];
                }
            }
        }
        // ∂L/∂(A, χ, θ, φ) with L = 1 − ΣF/pairs
        let head_grad: Vec<[f64; 4]> = pass
            .params
            .iter()
            .zip(pulse_grad.iter())
            .map(|(p, g)| {
                let jac = p.pulse_jacobian(&lim);
                core::array::from_fn(|c| -(0..4).map(|r| g[r] * jac[r][c]).sum::<f64>() / pairs)
            })
            .collect();
        let mut grad = alloc::vec![0.0; net.mlp.params().len()];
        net.backward(&pass, &head_grad, &mut grad);
        Ok((fid_sum, grad))
    });
    let mut total = alloc::vec![0.0; net.mlp.params().len()];
    let mut fid = 0.0;
    for r in per_target {
        let (f, g) = r?;
        fid += f;
        for (t, v) in total.iter_mut().zip(g.iter()) {
            *t += v;
        }
    }
    Ok((1.0 - fid / pairs, total))
}

/// Outcome of comparing the analytic gradient with central differences.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientAudit {
    pub indices: Vec<usize>,
    pub analytic: Vec<f64>,
    pub numeric: Vec<f64>,
    /// `‖g − g_fd‖ / ‖g_fd‖` over the checked weights.
    pub relative_error: f64,
    /// Worst single-weight `|g − g_fd| / max(|g|, |g_fd|)`; dominated by
    /// difference noise on weights whose gradient is near zero.
    pub max_component_error: f64,
}

impl GradientAudit {
    pub fn passed(&self, tolerance: f64) -> bool {
        self.relative_error <= tolerance
    }
}

/// Relative gradient tolerance of the audit.
pub const AUDIT_TOLERANCE: f64 = 1e-4;
/// Central-difference step on a network weight.
pub const AUDIT_STEP: f64 = 1e-6;

fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < 1e-13 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Checks `gradient` on the given weights against central differences of the
/// batch loss.
#[allow(clippy::too_many_arguments)]
pub fn audit_gradient<X: Executor>(
    net: &PulseNet,
    gradient: &[f64],
    indices: &[usize],
    targets: &[(f64, f64)],
    atoms: &[AtomSample],
    motion: &MotionContext,
    segments: usize,
    exec: &X,
) -> Result<GradientAudit> {
    let mut numeric = Vec::with_capacity(indices.len());
    for &i in indices {
        let mut probe = net.clone();
        let w = probe.mlp.params()[i];
        probe.mlp.params_mut()[i] = w + AUDIT_STEP;
        let up = batch_loss(&probe, targets, atoms, motion, segments, exec)?;
        probe.mlp.params_mut()[i] = w - AUDIT_STEP;
        let down = batch_loss(&probe, targets, atoms, motion, segments, exec)?;
        numeric.push((up - down) / (2.0 * AUDIT_STEP));
    }
    let analytic: Vec<f64> = indices.iter().map(|&i| gradient[i]).collect();
    let max_component_error =
        analytic.iter().zip(numeric.iter()).map(|(a, n)| relative_error(*a, *n)).fold(0.0, f64::max);
    let diff = analytic.iter().zip(numeric.iter()).map(|(a, n)| (a - n) * (a - n)).sum::<f64>().sqrt();
    let norm = numeric.iter().map(|n| n * n).sum::<f64>().sqrt();
    let relative_error = if norm == 0.0 { diff } else { diff / norm };
    Ok(GradientAudit { indices: indices.to_vec(), analytic, numeric, relative_error, max_component_error })
}

/// A trained network with the settings that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub version: u32,
    pub net: PulseNet,
    pub config: TrainConfig,
    pub best_validation_fidelity: f64,
    /// Completed epochs when this network was captured; 0 is the initialisation.
    pub epoch: usize,
    pub seed: u64,
}

impl Checkpoint {
    pub fn compile(&self, target: &TargetRotation) -> Result<CompositePulse> {
        self.net.compile(target)
    }
}

/// One row of the training curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub val_fidelity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub checkpoint: Checkpoint,
    pub history: Vec<EpochRecord>,
    pub initial_val_fidelity: f64,
    pub audit: Option<GradientAudit>,
    /// Why training ended.
    pub stop_reason: String,
}

/// Trains from the seeded initialisation and returns the best network seen on
/// the validation set.
pub fn train<X: Executor>(
    cfg: &TrainConfig,
    train_set: &Dataset,
    val_set: &Dataset,
    motion: &MotionContext,
    exec: &X,
    mut progress: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome> {
    let cfg = cfg.clone().validated()?;
    if train_set.targets.is_empty() || val_set.targets.is_empty() {
        return Err(Error::Invalid("datasets must not be empty".into()));
    }
    let mut net = init_network(&cfg)?;
    let m = cfg.segments;
    let validate = |n: &PulseNet| mean_fidelity(n, &val_set.targets, &val_set.atoms, motion, m, exec);
    let initial = validate(&net)?;
    let mut best = (initial, net.clone(), 0usize);
    let mut opt = Adam::new(net.mlp.params().len());
    let mut shuffle_rng = cfg.rng(STREAM_SHUFFLE);
    let mut audit_rng = cfg.rng(STREAM_AUDIT);
    let mut order: Vec<usize> = (0..train_set.targets.len()).collect();
    let mut history = Vec::new();
    let mut audit = None;
    let mut stop_reason = String::from("epoch budget exhausted");
    for epoch in 0..cfg.epochs {
        let lr = cfg.learning_rate(epoch);
        order.shuffle(&mut shuffle_rng);
        let mut losses = Vec::new();
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<(f64, f64)> = chunk.iter().map(|&i| train_set.targets[i]).collect();
            let (loss, grad) = batch_gradient(&net, &batch, &train_set.atoms, motion, m, exec)?;
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Diverged { epoch, loss });
            }
            if audit.is_none() && cfg.audit_weights > 0 {
                let n = net.mlp.params().len();
                let idx: Vec<usize> = (0..cfg.audit_weights).map(|_| audit_rng.random_range(0..n)).collect();
                let report = audit_gradient(&net, &grad, &idx, &batch, &train_set.atoms, motion, m, exec)?;
                if !report.passed(AUDIT_TOLERANCE) {
                    log::warn!("gradient audit: relative error {:.3e}", report.relative_error);
                }
                audit = Some(report);
            }
            opt.step(net.mlp.params_mut(), &grad, lr);
            losses.push(loss);
        }
        let val = validate(&net)?;
        if !val.is_finite() {
            return Err(Error::Diverged { epoch, loss: 1.0 - val });
        }
        let record =
            EpochRecord { epoch, lr, train_loss: ordered_sum(&losses) / losses.len() as f64, val_fidelity: val };
        progress(&record);
        history.push(record);
        let completed = epoch + 1;
        if val > best.0 {
            best = (val, net.clone(), completed);
        } else if completed - best.2 >= cfg.patience {
            stop_reason = alloc::format!("no validation improvement for {} epochs", cfg.patience);
            break;
        }
    }
    let (best_val, best_net, best_epoch) = best;
    Ok(TrainOutcome {
        checkpoint: Checkpoint {
            version: CHECKPOINT_VERSION,
            net: best_net,
            seed: cfg.seed,
            config: cfg,
            best_validation_fidelity: best_val,
            epoch: best_epoch,
        },
        history,
        initial_val_fidelity: initial,
        audit,
        stop_reason,
    })
}

/// Pulse table for `target` from a trained network.
pub fn compile(net: &PulseNet, target: &TargetRotation) -> Result<CompositePulse> {
    net.compile(target)
}

#[cfg(test)]
mod tests;
