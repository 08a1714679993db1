//! Rectangular pulses, composite pulses, the bounded rotation-parameter →
//! pulse mapping, and the conventional baselines (rectangular, SK1, BB1 and
//! their axis-rotated variants).

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::consts::TWO_PI;
use crate::evolution::segment_propagator;
use crate::su2::{TargetRotation, Unitary2};
use crate::{Error, Result, C64};

/// One rectangular pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    /// Complex Rabi frequency `Ω_c`, rad/s. Its phase sets the drive azimuth.
    pub omega: C64,
    /// Detuning `Δ`, rad/s.
    pub detuning: f64,
    /// Duration `τ`, s.
    pub duration: f64,
}

impl Pulse {
    pub fn new(omega: C64, detuning: f64, duration: f64) -> Self {
        Pulse { omega, detuning, duration }
    }

    /// `√(|Ω|² + Δ²)`.
    pub fn generalized_rabi(&self) -> f64 {
        (self.omega.norm_sqr() + self.detuning * self.detuning).sqrt()
    }

    /// Rotation angle produced by the pulse, `√(|Ω|²+Δ²)·τ`.
    pub fn area(&self) -> f64 {
        self.generalized_rabi() * self.duration
    }

    /// Ideal propagator over `dt` seconds of this pulse.
    pub fn propagator(&self, dt: f64) -> Unitary2 {
        segment_propagator(self.omega, self.detuning, dt)
    }
}

/// Ordered pulse sequence; index 0 acts first.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositePulse {
    pulses: Vec<Pulse>,
}

impl CompositePulse {
    pub fn new(pulses: Vec<Pulse>) -> Result<Self> {
        if pulses.is_empty() {
            return Err(Error::Invalid("composite pulse needs at least one pulse".into()));
        }
        for p in &pulses {
            if !(p.duration > 0.0 && p.duration.is_finite()) {
                return Err(Error::OutOfRange { what: "pulse duration", value: p.duration });
            }
            if !(p.omega.re.is_finite() && p.omega.im.is_finite() && p.detuning.is_finite()) {
                return Err(Error::Invalid("non-finite pulse amplitude".into()));
            }
        }
        Ok(CompositePulse { pulses })
    }

    pub fn pulses(&self) -> &[Pulse] {
        &self.pulses
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    /// Start times `T_k = Σ_{l<k} τ_l`; the first entry is 0.
    pub fn start_times(&self) -> Vec<f64> {
        let mut t = 0.0;
        self.pulses
            .iter()
            .map(|p| {
                let start = t;
                t += p.duration;
                start
            })
            .collect()
    }

    pub fn total_duration(&self) -> f64 {
        self.pulses.iter().map(|p| p.duration).sum()
    }

    /// Index of the pulse active at `t` (windows are `[T_k, T_{k+1})`, the
    /// last one closed).
    pub fn active_pulse(&self, t: f64) -> usize {
        let mut end = 0.0;
        for (k, p) in self.pulses.iter().enumerate() {
            end += p.duration;
            if t < end {
                return k;
            }
        }
        self.pulses.len() - 1
    }

    /// Error-free propagator `U_c(T)`.
    pub fn ideal_unitary(&self) -> Unitary2 {
        self.pulses.iter().fold(Unitary2::IDENTITY, |acc, p| p.propagator(p.duration) * acc)
    }

    /// Error-free propagator `U_c(t)` for `t ∈ [0, T]`.
    pub fn ideal_unitary_at(&self, t: f64) -> Unitary2 {
        let mut acc = Unitary2::IDENTITY;
        let mut start = 0.0;
        for p in &self.pulses {
            let end = start + p.duration;
            if t >= end {
                acc = p.propagator(p.duration) * acc;
            } else {
                if t > start {
                    acc = p.propagator(t - start) * acc;
                }
                break;
            }
            start = end;
        }
        acc
    }
}

/// Per-pulse rotation parameters `{A, Ȧ, θ, φ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationParams {
    /// Rotation angle `A`, rad.
    pub area: f64,
    /// Rotation rate `Ȧ`, rad/s.
    pub rate: f64,
    /// Polar angle of the rotation axis, rad.
    pub polar: f64,
    /// Azimuth of the rotation axis, rad.
    pub azimuth: f64,
}

/// Drive limits. `χ` is the fraction of the available rotation rate used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardwareLimits {
    pub omega_max: f64,
    pub delta_max: f64,
    pub chi_min: f64,
    pub chi_max: f64,
}

impl Default for HardwareLimits {
    fn default() -> Self {
        HardwareLimits { omega_max: TWO_PI * 1e6, delta_max: TWO_PI * 1e6, chi_min: 0.1, chi_max: 1.0 }
    }
}

impl HardwareLimits {
    pub fn validated(self) -> Result<Self> {
        if !(self.omega_max > 0.0 && self.delta_max > 0.0 && self.chi_min > 0.0) {
            return Err(Error::Invalid("hardware limits must be positive".into()));
        }
        if !(self.chi_min < self.chi_max && self.chi_max <= 1.0) {
            return Err(Error::Invalid("need chi_min < chi_max <= 1".into()));
        }
        Ok(self)
    }

    /// Seam angle `Θ = arctan(Ω_max / Δ_max)` between the detuning-limited
    /// and Rabi-limited branches.
    pub fn seam_angle(&self) -> f64 {
        (self.omega_max / self.delta_max).atan()
    }

    /// Largest transverse and longitudinal drive `(Ω_θ, Δ_θ)` along an axis
    /// with polar angle `θ`, together with their `θ`-derivatives.
    ///
    /// Near the poles the detuning saturates, in between the Rabi frequency
    /// does. `Ω_θ ≥ 0` on every branch so the axis azimuth is carried only by
    /// the drive phase.
    pub fn axis_capacity(&self, polar: f64) -> AxisCapacity {
        let seam = self.seam_angle();
        if polar <= seam {
            let c = polar.cos();
            AxisCapacity {
                omega: self.delta_max * polar.tan(),
                delta: self.delta_max,
                d_omega: self.delta_max / (c * c),
                d_delta: 0.0,
            }
        } else if polar <= PI - seam {
            let (s, c) = polar.sin_cos();
            AxisCapacity {
                omega: self.omega_max,
                delta: self.omega_max * c / s,
                d_omega: 0.0,
                d_delta: -self.omega_max / (s * s),
            }
        } else {
            let c = polar.cos();
            AxisCapacity {
                omega: -self.delta_max * polar.tan(),
                delta: -self.delta_max,
                d_omega: -self.delta_max / (c * c),
                d_delta: 0.0,
            }
        }
    }
}

/// Output of [`HardwareLimits::axis_capacity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisCapacity {
    pub omega: f64,
    pub delta: f64,
    pub d_omega: f64,
    pub d_delta: f64,
}

impl AxisCapacity {
    /// Maximum rotation rate `√(Ω_θ² + Δ_θ²)` along the axis.
    pub fn max_rate(&self) -> f64 {
        (self.omega * self.omega + self.delta * self.delta).sqrt()
    }
}

/// Maps rotation parameters onto a pulse, clamping `χ = Ȧ/√(Ω_θ²+Δ_θ²)` into
/// `[χ_min, χ_max]` (with a warning) when the requested rate is infeasible.
pub fn rotation_to_pulse(p: &RotationParams, lim: &HardwareLimits) -> Pulse {
    let cap = lim.axis_capacity(p.polar);
    let chi = p.rate / cap.max_rate();
    let clamped = chi.clamp(lim.chi_min, lim.chi_max);
    if clamped != chi {
        log::warn!("chi = {chi} clamped to {clamped}");
    }
    pulse_from_chi(p.area, clamped, p.polar, p.azimuth, lim)
}

/// `Ω_c = χΩ_θ e^{iφ}`, `Δ = χΔ_θ`, `τ = A/(χ√(Ω_θ²+Δ_θ²))`.
pub fn pulse_from_chi(area: f64, chi: f64, polar: f64, azimuth: f64, lim: &HardwareLimits) -> Pulse {
    let cap = lim.axis_capacity(polar);
    let rate = chi * cap.max_rate();
    Pulse { omega: C64::from_polar(chi * cap.omega, azimuth), detuning: chi * cap.delta, duration: area / rate }
}

/// Inverse of [`rotation_to_pulse`]: `A = Ω̃τ`, `Ȧ = Ω̃`, `θ = atan2(|Ω|, Δ)`,
/// `φ = arg Ω` (0 when `Ω = 0`).
pub fn pulse_to_rotation(pulse: &Pulse) -> RotationParams {
    let rate = pulse.generalized_rabi();
    let polar = pulse.omega.norm().atan2(pulse.detuning);
    let azimuth = if pulse.omega.norm() == 0.0 { 0.0 } else { pulse.omega.arg() };
    RotationParams { area: rate * pulse.duration, rate, polar, azimuth }
}

/// `χ` a pulse uses relative to the capacity of its own axis.
pub fn chi_of(pulse: &Pulse, lim: &HardwareLimits) -> f64 {
    let p = pulse_to_rotation(pulse);
    p.rate / lim.axis_capacity(p.polar).max_rate()
}

fn resonant(area: f64, phase: f64, lim: &HardwareLimits) -> Pulse {
    Pulse { omega: C64::from_polar(lim.omega_max, phase), detuning: 0.0, duration: area / lim.omega_max }
}

fn correction_phase(area: f64) -> Result<f64> {
    let x = -area / (4.0 * PI);
    if !(area > 0.0) || x.abs() > 1.0 {
        return Err(Error::OutOfRange { what: "composite pulse area", value: area });
    }
    Ok(x.acos())
}

/// Single resonant pulse at full Rabi frequency.
pub fn rect(area: f64, phase: f64, lim: &HardwareLimits) -> Result<CompositePulse> {
    if !(area > 0.0) {
        return Err(Error::OutOfRange { what: "pulse area", value: area });
    }
    CompositePulse::new(alloc::vec![resonant(area, phase, lim)])
}

/// SK1: `A_φ`, then `2π_{φ+φ₁}`, then `2π_{φ−φ₁}` with `φ₁ = arccos(−A/4π)`.
pub fn sk1(area: f64, phase: f64, lim: &HardwareLimits) -> Result<CompositePulse> {
    let phi1 = correction_phase(area)?;
    CompositePulse::new(alloc::vec![
        resonant(area, phase, lim),
        resonant(TWO_PI, phase + phi1, lim),
        resonant(TWO_PI, phase - phi1, lim),
    ])
}

/// BB1: `π_{φ+φ₁}`, `2π_{φ+3φ₁}`, `π_{φ+φ₁}`, then `A_φ`, with
/// `φ₁ = arccos(−A/4π)`.
pub fn bb1(area: f64, phase: f64, lim: &HardwareLimits) -> Result<CompositePulse> {
    let phi1 = correction_phase(area)?;
    CompositePulse::new(alloc::vec![
        resonant(PI, phase + phi1, lim),
        resonant(TWO_PI, phase + 3.0 * phi1, lim),
        resonant(PI, phase + phi1, lim),
        resonant(area, phase, lim),
    ])
}

fn rotate_about_y(v: [f64; 3], angle: f64) -> [f64; 3] {
    let (s, c) = angle.sin_cos();
    [c * v[0] + s * v[2], v[1], -s * v[0] + c * v[2]]
}

/// Tilts every pulse axis by `R_y(θ_tg − π/2)`, keeping each pulse's area and
/// rate. A sequence built for an equatorial axis then targets polar angle
/// `θ_tg`.
pub fn rotate_cp(cp: &CompositePulse, target_polar: f64, lim: &HardwareLimits) -> Result<CompositePulse> {
    let tilt = target_polar - PI / 2.0;
    let pulses = cp
        .pulses()
        .iter()
        .enumerate()
        .map(|(index, pulse)| {
            let p = pulse_to_rotation(pulse);
            let (st, ct) = p.polar.sin_cos();
            let (sp, cp_) = p.azimuth.sin_cos();
            let n = rotate_about_y([st * cp_, st * sp, ct], tilt);
            let polar = n[2].clamp(-1.0, 1.0).acos();
            let azimuth = n[1].atan2(n[0]);
            let chi = p.rate / lim.axis_capacity(polar).max_rate();
            if chi < lim.chi_min - 1e-12 || chi > lim.chi_max + 1e-12 {
                return Err(Error::Unencodable { index, chi, chi_min: lim.chi_min, chi_max: lim.chi_max });
            }
            let chi = chi.clamp(lim.chi_min, lim.chi_max);
            Ok(pulse_from_chi(p.area, chi, polar, azimuth, lim))
        })
        .collect::<Result<Vec<_>>>()?;
    CompositePulse::new(pulses)
}

/// Multiplies every `Ω_c,k` by `e^{iφ}`, which conjugates the gate by a
/// z-rotation and shifts the axis azimuth by `φ`.
pub fn apply_global_phase(cp: &CompositePulse, phase: f64) -> CompositePulse {
    let factor = C64::from_polar(1.0, phase);
    CompositePulse { pulses: cp.pulses.iter().map(|p| Pulse { omega: p.omega * factor, ..*p }).collect() }
}

/// The conventional sequences used as baselines and as the network's
/// starting point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Baseline {
    Rect,
    Sk1,
    Bb1,
}

impl Baseline {
    pub fn name(&self) -> &'static str {
        match self {
            Baseline::Rect => "rect",
            Baseline::Sk1 => "sk1",
            Baseline::Bb1 => "bb1",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "rect" => Some(Baseline::Rect),
            "sk1" => Some(Baseline::Sk1),
            "bb1" => Some(Baseline::Bb1),
            _ => None,
        }
    }

    pub fn pulse_count(&self) -> usize {
        match self {
            Baseline::Rect => 1,
            Baseline::Sk1 => 3,
            Baseline::Bb1 => 4,
        }
    }

    /// The equatorial (`θ = π/2`, `φ = 0`) sequence for rotation angle `area`.
    pub fn equatorial(&self, area: f64, lim: &HardwareLimits) -> Result<CompositePulse> {
        match self {
            Baseline::Rect => rect(area, 0.0, lim),
            Baseline::Sk1 => sk1(area, 0.0, lim),
            Baseline::Bb1 => bb1(area, 0.0, lim),
        }
    }

    /// Sequence for an arbitrary target: tilt to `θ_tg`, then add `φ_tg`.
    pub fn for_target(&self, target: &TargetRotation, lim: &HardwareLimits) -> Result<CompositePulse> {
        let cp = rotate_cp(&self.equatorial(target.area, lim)?, target.polar, lim)?;
        Ok(apply_global_phase(&cp, target.azimuth))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::gate_infidelity;
    use crate::su2::{su2_from_rotation, RotationVector};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn lim() -> HardwareLimits {
        HardwareLimits::default()
    }

    /// Ideal gate with every Rabi frequency scaled by `1 + eps`.
    fn static_error_gate(cp: &CompositePulse, eps: f64) -> Unitary2 {
        cp.pulses()
            .iter()
            .fold(Unitary2::IDENTITY, |acc, p| segment_propagator(p.omega * (1.0 + eps), p.detuning, p.duration) * acc)
    }

    fn infidelity(cp: &CompositePulse, target: &TargetRotation, eps: f64) -> f64 {
        gate_infidelity(&su2_from_rotation(target), &static_error_gate(cp, eps))
    }

    fn loglog_slope(cp: &CompositePulse, target: &TargetRotation, lo: f64, hi: f64) -> f64 {
        let n = 9;
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let eps = lo * (hi / lo).powf(i as f64 / (n - 1) as f64);
                (eps.ln(), infidelity(cp, target, eps).ln())
            })
            .collect();
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n as f64;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n as f64;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        sxy / sxx
    }

    #[test]
    fn resonant_branch_mapping() {
        let p = RotationParams { area: PI, rate: TWO_PI * 1e6, polar: PI / 2.0, azimuth: 0.3 };
        let pulse = rotation_to_pulse(&p, &lim());
        assert_abs_diff_eq!(pulse.omega.norm(), TWO_PI * 1e6, epsilon = 1e-6);
        assert_abs_diff_eq!(pulse.omega.arg(), 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(pulse.detuning, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(pulse.duration, 0.5e-6, epsilon = 1e-18);
    }

    #[test]
    fn branches_agree_at_the_seam() {
        let l = lim();
        let seam = l.seam_angle();
        for polar in [seam, PI - seam] {
            let below = l.axis_capacity(polar - 1e-12);
            let at = l.axis_capacity(polar);
            let above = l.axis_capacity(polar + 1e-12);
            assert_abs_diff_eq!(at.omega, l.omega_max, epsilon = 1e-3);
            assert_abs_diff_eq!(at.delta.abs(), l.delta_max, epsilon = 1e-3);
            assert_abs_diff_eq!(below.omega, above.omega, epsilon = 1e-3);
            assert_abs_diff_eq!(below.delta, above.delta, epsilon = 1e-3);
        }
    }

    #[test]
    fn obtuse_axis_maps_to_negative_detuning() {
        let l = lim();
        let cap = l.axis_capacity(3.0 * PI / 4.0);
        assert_abs_diff_eq!(cap.delta, -l.omega_max, epsilon = 1e-6);
        let p = RotationParams { area: 1.0, rate: 0.5 * cap.max_rate(), polar: 3.0 * PI / 4.0, azimuth: 1.0 };
        let back = pulse_to_rotation(&rotation_to_pulse(&p, &l));
        assert_abs_diff_eq!(back.polar, 3.0 * PI / 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(back.azimuth, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(back.area, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn chi_is_clamped() {
        let l = lim();
        let p = RotationParams { area: 1.0, rate: 10.0 * l.omega_max, polar: PI / 2.0, azimuth: 0.0 };
        assert_abs_diff_eq!(chi_of(&rotation_to_pulse(&p, &l), &l), 1.0, epsilon = 1e-12);
        let p = RotationParams { rate: 1e-3 * l.omega_max, ..p };
        assert_abs_diff_eq!(chi_of(&rotation_to_pulse(&p, &l), &l), 0.1, epsilon = 1e-12);
    }

    #[test]
    fn rect_pulses() {
        let cp = rect(PI / 2.0, 0.0, &lim()).unwrap();
        assert_abs_diff_eq!(cp.total_duration(), 0.25e-6, epsilon = 1e-18);
        let cp = rect(PI, 0.0, &lim()).unwrap();
        let x = Unitary2::pauli_x().scale(C64::new(0.0, -1.0));
        assert!(cp.ideal_unitary().max_abs_diff(&x) < 1e-12);
        assert!(rect(-1.0, 0.0, &lim()).is_err());
    }

    #[test]
    fn rect_static_error_is_quadratic() {
        let t = TargetRotation::new(PI, PI / 2.0, 0.0);
        let cp = rect(PI, 0.0, &lim()).unwrap();
        for eps in [1e-3, 1e-2] {
            let exact = infidelity(&cp, &t, eps);
            assert!((exact / (0.25 * (eps * PI).powi(2)) - 1.0).abs() < 1e-3);
        }
        assert!((loglog_slope(&cp, &t, 1e-3, 1e-2) - 2.0).abs() < 0.1);
    }

    #[test]
    fn sk1_and_bb1_scaling_exponents() {
        let t = TargetRotation::new(PI, PI / 2.0, 0.0);
        let s = loglog_slope(&sk1(PI, 0.0, &lim()).unwrap(), &t, 1e-3, 1e-2);
        assert!((s - 4.0).abs() < 0.1, "sk1 slope {s}");
        let b = loglog_slope(&bb1(PI, 0.0, &lim()).unwrap(), &t, 3e-3, 3e-2);
        assert!((b - 6.0).abs() < 0.2, "bb1 slope {b}");
    }

    #[test]
    fn bb1_duration() {
        let l = lim();
        let cp = bb1(PI / 2.0, 0.0, &l).unwrap();
        assert_abs_diff_eq!(cp.total_duration(), (PI / 2.0 + 4.0 * PI) / l.omega_max, epsilon = 1e-18);
        assert!(sk1(13.0, 0.0, &l).is_err());
    }

    #[test]
    fn conventional_sequences_are_exact_without_error() {
        let mut a = 0.137;
        for _ in 0..20 {
            let t = TargetRotation::new(a, PI / 2.0, 0.0);
            for cp in [sk1(a, 0.0, &lim()).unwrap(), bb1(a, 0.0, &lim()).unwrap()] {
                assert!(infidelity(&cp, &t, 0.0) < 1e-10);
            }
            a = (a + 0.71) % TWO_PI;
        }
    }

    #[test]
    fn rotate_at_equator_is_identity() {
        let cp = bb1(PI, 0.0, &lim()).unwrap();
        let r = rotate_cp(&cp, PI / 2.0, &lim()).unwrap();
        for (a, b) in cp.pulses().iter().zip(r.pulses()) {
            assert!((a.omega - b.omega).norm() < 1e-6);
            assert!((a.detuning - b.detuning).abs() < 1e-6);
            assert!((a.duration - b.duration).abs() < 1e-20);
        }
    }

    #[test]
    fn rotated_trajectory_is_conjugated_original() {
        let l = lim();
        let cp = bb1(PI, 0.0, &l).unwrap();
        let polar = 0.3 * PI;
        let r = rotate_cp(&cp, polar, &l).unwrap();
        // SU(2) image of R_y(θ_tg − π/2)
        let tilt = Unitary2::from_rotation_vector(RotationVector::new(0.0, 0.5 * (polar - PI / 2.0), 0.0));
        let total = cp.total_duration();
        for i in 0..=40 {
            let t = total * i as f64 / 40.0;
            let expected = tilt * cp.ideal_unitary_at(t) * tilt.adjoint();
            assert!(r.ideal_unitary_at(t).max_abs_diff(&expected) < 1e-10);
        }
    }

    #[test]
    fn rotated_sequences_lose_robustness_away_from_equator() {
        let l = lim();
        for base in [Baseline::Sk1, Baseline::Bb1] {
            let mut last = 0.0;
            for i in 0..=6 {
                let polar = PI / 2.0 + 0.05 * PI * i as f64;
                let t = TargetRotation::new(PI, polar, 0.0);
                let cp = base.for_target(&t, &l).unwrap();
                let inf = infidelity(&cp, &t, 0.01);
                assert!(inf > last, "{base:?} at {polar}: {inf} <= {last}");
                last = inf;
            }
        }
    }

    #[test]
    fn global_phase_rotates_axis() {
        let l = lim();
        let cp = rect(PI, 0.0, &l).unwrap();
        assert_eq!(apply_global_phase(&cp, 0.0), cp);
        let flipped = apply_global_phase(&cp, PI);
        let minus_x = TargetRotation::new(PI, PI / 2.0, PI);
        assert!(gate_infidelity(&su2_from_rotation(&minus_x), &flipped.ideal_unitary()) < 1e-12);
    }

    proptest! {
        #[test]
        fn mapping_round_trip(area in 0.1..10.0f64, polar in 0.05..(PI - 0.05), azimuth in -3.0..3.0f64,
                              chi in 0.1..1.0f64) {
            let l = lim();
            let seam = l.seam_angle();
            prop_assume!((polar - seam).abs() > 1e-6 && (polar - PI + seam).abs() > 1e-6);
            let rate = chi * l.axis_capacity(polar).max_rate();
            let p = RotationParams { area, rate, polar, azimuth };
            let pulse = rotation_to_pulse(&p, &l);
            prop_assert!(pulse.omega.norm() <= l.omega_max * (1.0 + 1e-12));
            prop_assert!(pulse.detuning.abs() <= l.delta_max * (1.0 + 1e-12));
            let back = pulse_to_rotation(&pulse);
            prop_assert!((back.area - area).abs() < 1e-10 * area.max(1.0));
            prop_assert!((back.polar - polar).abs() < 1e-10);
            prop_assert!((back.azimuth - azimuth).abs() < 1e-10);
            prop_assert!((chi_of(&pulse, &l) - chi).abs() < 1e-10);
        }
    }
}
