use super::*;
use crate::consts::{K_B, RB87_MASS, TWO_PI};
use crate::evolution::{evolve, gate_fidelity, grid_for, sample_fidelities};
use crate::exec::Sequential;
use crate::motion::BeamGeometry;
use core::f64::consts::PI;

fn trap(temperature: f64) -> TrapParams {
    TrapParams {
        depth: K_B * 0.8e-3,
        omega: [TWO_PI * 155e3, TWO_PI * 155e3, TWO_PI * 42e3],
        mass: RB87_MASS,
        temperature,
    }
}

fn motion(temperature: f64) -> MotionContext {
    MotionContext { trap: trap(temperature), control: BeamGeometry::symmetric(1e-6, 795e-9) }
}

/// Small network so the tests stay fast; the physics path is unchanged.
fn tiny(baseline: Baseline, seed: u64) -> TrainConfig {
    TrainConfig {
        epochs: 30,
        batch_size: 4,
        patience: 10,
        area_points: 4,
        polar_points: 2,
        train_atoms: 6,
        val_targets: 4,
        val_atoms: 6,
        hidden_layers: 2,
        hidden_width: 12,
        audit_weights: 6,
        ..TrainConfig::desk(baseline, seed)
    }
}

/// Runs the map back to front, as a differently scheduled pool might.
struct Reversed;

impl Executor for Reversed {
    fn map<T: Send, F: Fn(usize) -> T + Sync + Send>(&self, n: usize, f: F) -> Vec<T> {
        let mut out: Vec<T> = (0..n).rev().map(f).collect();
        out.reverse();
        out
    }
}

#[test]
fn dataset_sizes_and_separation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let full = TrainConfig::full(Baseline::Sk1, 1);
    let (train, val) = make_datasets(&full, &trap(30e-6), &mut rng);
    assert_eq!((train.targets.len(), val.targets.len()), (1536, 128));
    assert_eq!((train.atoms.len(), val.atoms.len()), (128, 64));
    let desk = TrainConfig::desk(Baseline::Sk1, 1);
    let (train, val) = make_datasets(&desk, &trap(30e-6), &mut rng);
    assert_eq!((train.targets.len(), val.targets.len()), (32, 16));
    let b = desk.target_box;
    let min = val
        .targets
        .iter()
        .flat_map(|v| train.targets.iter().map(move |t| (v, t)))
        .map(|(v, t)| {
            let (x, y) = (b.normalize(v.0, v.1), b.normalize(t.0, t.1));
            (x[0] - y[0]).hypot(x[1] - y[1])
        })
        .fold(f64::INFINITY, f64::min);
    assert!(min > 0.0);
    assert!(val.targets.iter().all(|&(a, t)| b.contains(a, t)));
}

#[test]
fn config_validation() {
    assert!(TrainConfig::desk(Baseline::Bb1, 0).validated().is_ok());
    let bad = TrainConfig { patience: 600, ..TrainConfig::desk(Baseline::Sk1, 0) };
    assert!(bad.validated().is_err());
    let bad = TrainConfig { batch_size: 0, ..TrainConfig::desk(Baseline::Sk1, 0) };
    assert!(bad.validated().is_err());
    assert!(TrainConfig::desk(Baseline::Rect, 0).validated().is_err());
    let cfg = TrainConfig::full(Baseline::Sk1, 0);
    assert_eq!(cfg.learning_rate(2000), 0.0002);
}

#[test]
fn init_is_deterministic() {
    let cfg = tiny(Baseline::Sk1, 5);
    assert_eq!(init_network(&cfg).unwrap(), init_network(&cfg).unwrap());
    let other = tiny(Baseline::Sk1, 6);
    assert_ne!(init_network(&cfg).unwrap(), init_network(&other).unwrap());
}

#[test]
fn exact_baseline_has_zero_loss_and_gradient() {
    let mut net = init_network(&tiny(Baseline::Sk1, 1)).unwrap();
    net.mlp.zero_head();
    let targets = [(PI, PI / 2.0), (PI / 2.0, PI / 2.0), (2.0, PI / 2.0)];
    let atoms = [AtomSample::AT_REST; 3];
    let ctx = motion(30e-6);
    let loss = batch_loss(&net, &targets, &atoms, &ctx, 20, &Sequential).unwrap();
    assert!(loss <= 1e-8, "{loss}");
    let (l, g) = batch_gradient(&net, &targets, &atoms, &ctx, 20, &Sequential).unwrap();
    assert!((l - loss).abs() < 1e-14);
    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(norm <= 1e-6, "{norm}");
}

/// Second evaluation path: forward → explicit pulse list → own segment loop.
fn reference_loss(net: &PulseNet, targets: &[(f64, f64)], atoms: &[AtomSample], ctx: &MotionContext, m: usize) -> f64 {
    let mut total = 0.0;
    for &(a, t) in targets {
        let pulses: Vec<_> = net.forward(a, t).unwrap().iter().map(|p| p.to_pulse(&net.limits)).collect();
        let cp = CompositePulse::new(pulses).unwrap();
        let grid = grid_for(&cp, m).unwrap();
        let v = TargetRotation::new(a, t, 0.0).unitary();
        for atom in atoms {
            let u = evolve(&cp, |s| ctx.epsilon(atom, s), &grid).unwrap();
            total += gate_fidelity(&v, &u);
        }
    }
    1.0 - total / (targets.len() * atoms.len()) as f64
}

#[test]
fn batch_loss_matches_reference_and_bounds() {
    let cfg = tiny(Baseline::Bb1, 2);
    let net = init_network(&cfg).unwrap();
    let ctx = motion(30e-6);
    let (train, _) = make_datasets(&cfg, &ctx.trap, &mut ChaCha8Rng::seed_from_u64(4));
    let loss = batch_loss(&net, &train.targets, &train.atoms, &ctx, 20, &Sequential).unwrap();
    let reference = reference_loss(&net, &train.targets, &train.atoms, &ctx, 20);
    assert!((loss - reference).abs() < 1e-12);
    assert!((0.0..=1.0).contains(&loss));
    assert!(batch_loss(&net, &[], &train.atoms, &ctx, 20, &Sequential).is_err());
}

#[test]
fn gradient_matches_finite_differences() {
    for baseline in [Baseline::Sk1, Baseline::Bb1] {
        let cfg = tiny(baseline, 7);
        let net = init_network(&cfg).unwrap();
        let ctx = motion(30e-6);
        let (train, _) = make_datasets(&cfg, &ctx.trap, &mut ChaCha8Rng::seed_from_u64(8));
        let batch = &train.targets[..4];
        let (_, grad) = batch_gradient(&net, batch, &train.atoms, &ctx, 20, &Sequential).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = net.mlp.params().len();
        let idx: Vec<usize> = (0..24).map(|_| rng.random_range(0..n)).collect();
        let audit = audit_gradient(&net, &grad, &idx, batch, &train.atoms, &ctx, 20, &Sequential).unwrap();
        assert!(audit.passed(AUDIT_TOLERANCE), "{baseline:?}: {:?}", audit);
    }
}

#[test]
fn gradient_is_schedule_independent() {
    let cfg = tiny(Baseline::Sk1, 3);
    let net = init_network(&cfg).unwrap();
    let ctx = motion(30e-6);
    let (train, _) = make_datasets(&cfg, &ctx.trap, &mut ChaCha8Rng::seed_from_u64(1));
    let a = batch_gradient(&net, &train.targets, &train.atoms, &ctx, 20, &Sequential).unwrap();
    let b = batch_gradient(&net, &train.targets, &train.atoms, &ctx, 20, &Reversed).unwrap();
    assert_eq!(a, b);
}

#[test]
fn small_step_decreases_loss() {
    let cfg = tiny(Baseline::Sk1, 11);
    let net = init_network(&cfg).unwrap();
    let ctx = motion(30e-6);
    let (train, _) = make_datasets(&cfg, &ctx.trap, &mut ChaCha8Rng::seed_from_u64(12));
    let (loss, grad) = batch_gradient(&net, &train.targets, &train.atoms, &ctx, 20, &Sequential).unwrap();
    let norm2: f64 = grad.iter().map(|g| g * g).sum();
    let mut stepped = net.clone();
    let lr = 1e-3 * loss / norm2;
    for (p, g) in stepped.mlp.params_mut().iter_mut().zip(grad.iter()) {
        *p -= lr * g;
    }
    let after = batch_loss(&stepped, &train.targets, &train.atoms, &ctx, 20, &Sequential).unwrap();
    assert!(after < loss, "{after} vs {loss}");
}

#[test]
fn untrained_net_is_close_to_rotated_baseline() {
    let ctx = motion(30e-6);
    for seed in [21, 4] {
        for baseline in [Baseline::Sk1, Baseline::Bb1] {
            let cfg = TrainConfig::desk(baseline, seed);
            let net = init_network(&cfg).unwrap();
            let (_, val) = make_datasets(&cfg, &ctx.trap, &mut ChaCha8Rng::seed_from_u64(22));
            let net_loss = batch_loss(&net, &val.targets, &val.atoms, &ctx, 20, &Sequential).unwrap();
            let mut base = 0.0;
            for &(a, t) in &val.targets {
                let target = TargetRotation::new(a, t, 0.0);
                let cp = baseline.for_target(&target, &cfg.limits).unwrap();
                let f = sample_fidelities(&cp, &target.unitary(), &val.atoms, &ctx, 20, &Sequential).unwrap();
                base += ordered_sum(&f);
            }
            let base_loss = 1.0 - base / (val.targets.len() * val.atoms.len()) as f64;
            assert!(
                net_loss <= 2.0 * base_loss && net_loss >= 0.5 * base_loss,
                "{baseline:?}: {net_loss} vs {base_loss}"
            );
        }
    }
}

#[test]
fn training_contract() {
    let cfg = tiny(Baseline::Sk1, 13);
    let ctx = motion(30e-6);
    let (train_set, val_set) = make_datasets(&cfg, &ctx.trap, &mut ChaCha8Rng::seed_from_u64(14));
    let mut seen = 0;
    let out = train(&cfg, &train_set, &val_set, &ctx, &Sequential, |_| seen += 1).unwrap();
    assert_eq!(seen, out.history.len());
    let best = out.checkpoint.best_validation_fidelity;
    assert!(best >= out.initial_val_fidelity);
    assert!(out.history.iter().all(|r| r.val_fidelity <= best));
    // patience: nothing runs past best epoch + patience
    assert!(out.history.len() <= out.checkpoint.epoch + cfg.patience);
    for r in &out.history {
        assert_eq!(r.lr, cfg.learning_rate(r.epoch));
    }
    let audit = out.audit.as_ref().unwrap();
    assert!(audit.passed(AUDIT_TOLERANCE), "{audit:?}");
    let again = train(&cfg, &train_set, &val_set, &ctx, &Sequential, |_| {}).unwrap();
    assert_eq!(out, again);
    let reval =
        mean_fidelity(&out.checkpoint.net, &val_set.targets, &val_set.atoms, &ctx, cfg.segments, &Sequential).unwrap();
    assert_eq!(reval, best);
}

#[test]
fn training_improves_on_initialisation() {
    let cfg = TrainConfig { epochs: 60, patience: 60, ..tiny(Baseline::Sk1, 17) };
    let ctx = motion(30e-6);
    let (train_set, val_set) = make_datasets(&cfg, &ctx.trap, &mut ChaCha8Rng::seed_from_u64(18));
    let out = train(&cfg, &train_set, &val_set, &ctx, &Sequential, |_| {}).unwrap();
    assert!(out.checkpoint.best_validation_fidelity > out.initial_val_fidelity);
    assert!(out.checkpoint.epoch > 0);
}

#[test]
fn compiled_pulses_are_covariant_and_bounded() {
    let cfg = tiny(Baseline::Bb1, 19);
    let net = init_network(&cfg).unwrap();
    let ctx = motion(30e-6);
    let atoms = sample_thermal(&ctx.trap, &mut ChaCha8Rng::seed_from_u64(20), 16);
    let mut values = Vec::new();
    for phi in [0.0, 0.7, 2.5, -1.9] {
        let target = TargetRotation::new(2.0, 1.1, phi);
        let cp = compile(&net, &target).unwrap();
        let f = sample_fidelities(&cp, &target.unitary(), &atoms, &ctx, 20, &Sequential).unwrap();
        values.push(ordered_sum(&f) / f.len() as f64);
        let total_area: f64 = cp.pulses().iter().map(|p| p.area()).sum();
        let bound = total_area / (cfg.limits.chi_min * cfg.limits.omega_max);
        assert!(cp.total_duration().is_finite() && cp.total_duration() <= bound * (1.0 + 1e-12));
    }
    for v in &values {
        assert!((v - values[0]).abs() < 1e-12, "{values:?}");
    }
}
