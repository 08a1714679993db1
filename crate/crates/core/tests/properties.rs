use motionpulse_core::budget::{detuning_budget, polarization_budget, scattering_budget};
use motionpulse_core::consts::{K_B, RB87_MASS, TWO_PI};
use motionpulse_core::evolution::{evolve, gate_fidelity, resolved_grid};
use motionpulse_core::motion::{AtomSample, BeamGeometry, MotionContext, TrapParams};
use motionpulse_core::pulses::{Baseline, HardwareLimits};
use motionpulse_core::spectral::{filter_amplitude, frame_signal, residual_bias};
use motionpulse_core::su2::{RotationVector, TargetRotation};
use motionpulse_core::trainer::network::{PulseNet, TargetBox};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn trap() -> TrapParams {
    TrapParams {
        depth: K_B * 0.8e-3,
        omega: [TWO_PI * 155e3, TWO_PI * 155e3, TWO_PI * 42e3],
        mass: RB87_MASS,
        temperature: 30e-6,
    }
}

fn atom() -> impl Strategy<Value = AtomSample> {
    (prop::array::uniform3(0.0..400e-9f64), prop::array::uniform3(-PI..PI))
        .prop_map(|(amplitude, phase)| AtomSample { amplitude, phase })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn aligned_error_never_exceeds_peak(a in atom(), t in 0.0..50e-6f64) {
        let ctx = MotionContext { trap: trap(), control: BeamGeometry::symmetric(1e-6, 795e-9) };
        let e = ctx.epsilon(&a, t);
        prop_assert!(e <= 0.0 && e > -1.0);
    }

    #[test]
    fn fidelity_lies_in_unit_interval(a in atom(), area in 0.2..3.1f64, polar in 0.7..2.4f64) {
        let ctx = MotionContext { trap: trap(), control: BeamGeometry::symmetric(1e-6, 795e-9) };
        let target = TargetRotation::new(area, polar, 0.3);
        for b in [Baseline::Rect, Baseline::Sk1, Baseline::Bb1] {
            let cp = b.for_target(&target, &HardwareLimits::default()).unwrap();
            let grid = resolved_grid(&cp, 20).unwrap();
            let u = evolve(&cp, |t| ctx.epsilon(&a, t), &grid).unwrap();
            prop_assert!((0.0..=1.0).contains(&gate_fidelity(&target.unitary(), &u)));
        }
    }

    #[test]
    fn filter_power_is_even_and_nonnegative(area in 0.3..3.1f64, polar in 0.7..2.4f64, w in 0.0..2e7f64) {
        let target = TargetRotation::new(area, polar, 0.0);
        let cp = Baseline::Sk1.for_target(&target, &HardwareLimits::default()).unwrap();
        let sig = frame_signal(&cp, cp.total_duration() / 400.0);
        let ff = filter_amplitude(&sig, &[-w, w]);
        let p = ff.power();
        prop_assert!(p[0] >= 0.0);
        prop_assert!((p[0] - p[1]).abs() <= 1e-12 * p[0].max(1e-30));
    }

    #[test]
    fn residual_bias_is_nonnegative(m in -0.1..0.1f64, r in prop::array::uniform3(-2.0..2.0f64), d in prop::array::uniform3(-0.1..0.1f64)) {
        prop_assert!(residual_bias(m, &RotationVector(r), &RotationVector(d)) >= 0.0);
    }

    #[test]
    fn network_outputs_respect_ranges(area in 0.05..5.0f64, polar in -0.5..3.6f64, seed in 0u64..8) {
        let lim = HardwareLimits::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = PulseNet::with_sizes(&[2, 16, 16, 12], Baseline::Sk1, lim, TargetBox::default(), &mut rng).unwrap();
        for p in net.forward(area, polar).unwrap() {
            prop_assert!(p.chi >= lim.chi_min && p.chi <= lim.chi_max);
            prop_assert!(p.area > 0.0 && p.area <= 4.0 * PI);
            prop_assert!(p.polar > 0.0 && p.polar < PI);
            prop_assert!(p.azimuth.is_finite());
        }
    }

    #[test]
    fn budgets_are_nonnegative(eps in -0.1..0.1f64, area in 0.0..7.0f64, xi in 0.0..0.1f64, b in 0.0..100.0f64) {
        prop_assert!(detuning_budget(eps, area) >= 0.0);
        let pol = polarization_budget(xi, b, TWO_PI * 1e6, 0.7);
        prop_assert!(pol.approximate >= 0.0 && pol.exact >= 0.0);
        prop_assert!(scattering_budget(TWO_PI * 5.746e6, TWO_PI * 1e6, TWO_PI * 100e9, area / (TWO_PI * 1e6)) >= 0.0);
    }

    #[test]
    fn static_error_free_baselines_are_exact(area in 0.2..3.1f64, polar in 0.7..2.4f64, phase in -PI..PI) {
        let target = TargetRotation::new(area, polar, phase);
        for b in [Baseline::Rect, Baseline::Sk1, Baseline::Bb1] {
            let cp = b.for_target(&target, &HardwareLimits::default()).unwrap();
            let u = evolve(&cp, |_| 0.0, &resolved_grid(&cp, 20).unwrap()).unwrap();
            prop_assert!(1.0 - gate_fidelity(&target.unitary(), &u) < 1e-12);
        }
    }
}
