//! Closed-form estimates of the error channels competing with motion.
//!
//! All atomic constants come in through the arguments; nothing here assumes a
//! particular species.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::consts::TWO_PI;
use crate::motion::{AtomSample, MotionContext, TrapParams};

/// Default `|F=2⟩` Zeeman coefficient, MHz/G.
pub const DEFAULT_MAGNETIC_MOMENT_MHZ_PER_G: f64 = 0.7;

/// Simpson intervals used for per-sample time averages.
const AVERAGE_INTERVALS: usize = 256;

fn time_average<F: Fn(f64) -> f64>(f: F, duration: f64) -> f64 {
    if duration <= 0.0 {
        return f(0.0);
    }
    let n = AVERAGE_INTERVALS;
    let h = duration / n as f64;
    let mut acc = f(0.0) + f(duration);
    for j in 1..n {
        let w = if j % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(j as f64 * h);
    }
    acc * h / 3.0 / duration
}

/// `¼ A² ⟨ε̄²⟩` for a resonant rectangular pulse of area `area` at Rabi
/// frequency `omega_c`, with `ε̄` the time average of `ε` over the pulse.
pub fn motion_amplitude_budget(ctx: &MotionContext, samples: &[AtomSample], area: f64, omega_c: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let duration = area / omega_c;
    let sum: f64 = samples
        .iter()
        .map(|atom| {
            let mean = time_average(|t| ctx.epsilon(atom, t), duration);
            mean * mean
        })
        .fold(0.0, |a, b| a + b);
    0.25 * area * area * sum / samples.len() as f64
}

/// `(ε_d sin(A/2))²` for a fractional detuning error `ε_d = Δ/Ω_c`.
pub fn detuning_budget(eps_d: f64, area: f64) -> f64 {
    let v = eps_d * (0.5 * area).sin();
    v * v
}

/// Leakage to the `m_F = ±1` states through the unwanted polarization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationEstimate {
    /// `2 (2ξ / (1 + 2μB/Ω_c))²`.
    pub approximate: f64,
    /// `Σ Ω_i² / (Ω_i² + Δ_i²)` over the two off-resonant channels.
    pub exact: f64,
    /// `ξ ≤ 0.1` and `μB/Ω_c > 10`.
    pub within_validity: bool,
}

/// Polarization-mixing loss for amplitude ratio `xi`, field `b_gauss` (G),
/// Rabi frequency `omega_c` (rad/s) and moment `mu_mhz_per_gauss`.
pub fn polarization_budget(xi: f64, b_gauss: f64, omega_c: f64, mu_mhz_per_gauss: f64) -> PolarizationEstimate {
    let zeeman = TWO_PI * mu_mhz_per_gauss * 1e6 * b_gauss;
    let approx = {
        let v = 2.0 * xi / (1.0 + 2.0 * zeeman / omega_c);
        2.0 * v * v
    };
    let coupling = xi * omega_c;
    let detunings = [(1.0 - xi * xi) * 0.5 * omega_c + zeeman, (xi * xi - 1.0) * 0.5 * omega_c - zeeman];
    let exact = if coupling == 0.0 {
        0.0
    } else {
        detunings.iter().map(|d| coupling * coupling / (coupling * coupling + d * d)).sum()
    };
    let within_validity = (0.0..=0.1).contains(&xi) && zeeman / omega_c > 10.0;
    if !within_validity {
        log::warn!(
            "polarization estimate outside its validity window (xi = {xi}, muB/Omega_c = {:.2})",
            zeeman / omega_c
        );
    }
    PolarizationEstimate { approximate: approx, exact, within_validity }
}

/// Spontaneous-scattering loss `Γ Ω_c T / (2Δ_γ)` for a pulse of length `duration`.
pub fn scattering_budget(gamma: f64, omega_c: f64, delta_gamma: f64, duration: f64) -> f64 {
    gamma * omega_c * duration / (2.0 * delta_gamma)
}

/// Differential light shift `Δ_LS = c₀ + c_r (x² + y²) + c_z z²` around the
/// trap centre, rad/s with lengths in metres.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LightShiftModel {
    pub offset: f64,
    pub radial: f64,
    pub axial: f64,
}

impl LightShiftModel {
    pub fn scaled(&self, k: f64) -> Self {
        LightShiftModel { offset: self.offset * k, radial: self.radial * k, axial: self.axial * k }
    }
}

/// Mean of `sin²(ωt + Φ)` over `[0, T]`.
fn mean_sin_sq(omega: f64, phase: f64, duration: f64) -> f64 {
    let wt = omega * duration;
    if wt.abs() < 1e-9 {
        let s = phase.sin();
        return s * s;
    }
    0.5 - ((2.0 * (wt + phase)).sin() - (2.0 * phase).sin()) / (4.0 * wt)
}

/// Per-sample fractional detuning `ε_d = ⟨Δ_LS⟩_T / Ω_c`, the light shift
/// averaged along the trajectory over the pulse.
pub fn light_shift_detuning(
    model: &LightShiftModel,
    trap: &TrapParams,
    samples: &[AtomSample],
    omega_c: f64,
    duration: f64,
) -> Vec<f64> {
    samples
        .iter()
        .map(|atom| {
            let sq: [f64; 3] = core::array::from_fn(|i| {
                atom.amplitude[i] * atom.amplitude[i] * mean_sin_sq(trap.omega[i], atom.phase[i], duration)
            });
            (model.offset + model.radial * (sq[0] + sq[1]) + model.axial * sq[2]) / omega_c
        })
        .collect()
}

/// Ensemble mean of [`detuning_budget`] over per-sample detuning errors.
pub fn light_shift_budget(eps_d: &[f64], area: f64) -> f64 {
    if eps_d.is_empty() {
        return 0.0;
    }
    eps_d.iter().map(|e| detuning_budget(*e, area)).fold(0.0, |a, b| a + b) / eps_d.len() as f64
}

/// Inputs shared by every channel of the budget table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetInputs {
    /// Rabi frequency, rad/s.
    pub omega_c: f64,
    /// Pulse area, rad.
    pub area: f64,
    /// Polarization amplitude ratio.
    pub xi: f64,
    /// Magnetic field, G.
    pub b_gauss: f64,
    /// MHz/G.
    pub mu_mhz_per_gauss: f64,
    /// Excited-state decay rate, rad/s.
    pub gamma: f64,
    /// Raman detuning from the excited manifold, rad/s.
    pub delta_gamma: f64,
    pub light_shift: LightShiftModel,
}

impl BudgetInputs {
    pub fn duration(&self) -> f64 {
        self.area / self.omega_c
    }

    pub fn is_valid(&self) -> bool {
        [self.omega_c, self.area, self.gamma, self.delta_gamma].iter().all(|v| v.is_finite() && *v > 0.0)
            && self.xi >= 0.0
            && self.b_gauss >= 0.0
    }
}

/// One row of the budget table.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetEntry {
    pub channel: &'static str,
    pub error_type: &'static str,
    pub value: f64,
    /// Second estimate where the channel has one (exact polarization form).
    pub alternate: Option<f64>,
    pub within_validity: bool,
}

/// Motion, light shift, polarization and scattering estimates, in that order.
pub fn budget_table(inputs: &BudgetInputs, ctx: &MotionContext, samples: &[AtomSample]) -> Vec<BudgetEntry> {
    let t = inputs.duration();
    let eps_d = light_shift_detuning(&inputs.light_shift, &ctx.trap, samples, inputs.omega_c, t);
    let pol = polarization_budget(inputs.xi, inputs.b_gauss, inputs.omega_c, inputs.mu_mhz_per_gauss);
    let detuning_ok = eps_d.iter().all(|e| e.abs() < 0.1);
    alloc::vec![
        BudgetEntry {
            channel: "atom_motion",
            error_type: "amplitude",
            value: motion_amplitude_budget(ctx, samples, inputs.area, inputs.omega_c),
            alternate: None,
            within_validity: true,
        },
        BudgetEntry {
            channel: "differential_light_shift",
            error_type: "detuning",
            value: light_shift_budget(&eps_d, inputs.area),
            alternate: None,
            within_validity: detuning_ok,
        },
        BudgetEntry {
            channel: "polarization_mixing",
            error_type: "leakage",
            value: pol.approximate,
            alternate: Some(pol.exact),
            within_validity: pol.within_validity,
        },
        BudgetEntry {
            channel: "incoherent_scattering",
            error_type: "leakage",
            value: scattering_budget(inputs.gamma, inputs.omega_c, inputs.delta_gamma, t),
            alternate: None,
            within_validity: inputs.delta_gamma > 100.0 * inputs.omega_c,
        },
    ]
}

/// `round(log₁₀ v)`, the decade a budget value falls in.
pub fn decade(value: f64) -> i32 {
    value.log10().round() as i32
}

/// Area of a π pulse, for readability at call sites.
pub const PI_AREA: f64 = PI;
