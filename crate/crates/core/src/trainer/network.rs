//! The pulse-compiling network: target `(A_tg, θ_tg)` in, `n` sets of pulse
//! parameters `(A_k, χ_k, θ_k, φ_k)` out.
//!
//! The network's raw output is a residual on top of the axis-rotated SK1
//! (`n = 3`) or BB1 (`n = 4`) sequence for the same target. It is scaled by ¼
//! and divided by the range-map slope at the baseline, so to first order it
//! shifts `A`, `θ` and `φ` by ¼ of the raw output; `χ`, whose baseline sits at
//! the saturated end of its logistic, uses the mid-range slope instead. The
//! result is added to the baseline's latent coordinates and pushed through
//! fixed range maps:
//!
//! * `A = 4π σ(u)`
//! * `χ = χ_min + (χ_max − χ_min) σ(u)`
//! * `θ = π σ(u)`
//! * `φ = u`
//!
//! so every output is feasible by construction and differentiable.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use super::mlp::{Mlp, Tape};
use crate::pulses::{
    apply_global_phase, chi_of, pulse_from_chi, pulse_to_rotation, rotate_cp, Baseline, CompositePulse, HardwareLimits,
    Pulse, RotationParams,
};
use crate::su2::TargetRotation;
use crate::{Error, Result};

/// Hidden layer width and depth of the shipped architecture.
pub const HIDDEN_WIDTH: usize = 128;
pub const HIDDEN_LAYERS: usize = 6;

/// Scale applied to the raw head before it is added to the baseline.
pub const RESIDUAL_SCALE: f64 = 0.25;

/// Baseline fractions are kept this far inside the open logistic range.
pub const LOGIT_MARGIN: f64 = 0.01;

/// Box of target rotations the network is trained on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetBox {
    pub area: [f64; 2],
    pub polar: [f64; 2],
}

impl Default for TargetBox {
    fn default() -> Self {
        TargetBox { area: [PI / 4.0, PI], polar: [PI / 5.0, 4.0 * PI / 5.0] }
    }
}

impl TargetBox {
    /// Affine map of the box onto `[−1, 1]²`.
    pub fn normalize(&self, area: f64, polar: f64) -> [f64; 2] {
        let f = |v: f64, r: [f64; 2]| 2.0 * (v - r[0]) / (r[1] - r[0]) - 1.0;
        [f(area, self.area), f(polar, self.polar)]
    }

    pub fn contains(&self, area: f64, polar: f64) -> bool {
        (self.area[0]..=self.area[1]).contains(&area) && (self.polar[0]..=self.polar[1]).contains(&polar)
    }
}

/// Pulse parameters with the rate expressed through `χ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadParams {
    pub area: f64,
    pub chi: f64,
    pub polar: f64,
    pub azimuth: f64,
}

impl HeadParams {
    pub fn to_pulse(&self, lim: &HardwareLimits) -> Pulse {
        pulse_from_chi(self.area, self.chi, self.polar, self.azimuth, lim)
    }

    pub fn to_rotation(&self, lim: &HardwareLimits) -> RotationParams {
        let rate = self.chi * lim.axis_capacity(self.polar).max_rate();
        RotationParams { area: self.area, rate, polar: self.polar, azimuth: self.azimuth }
    }

    /// `∂(Re Ω, Im Ω, Δ, τ)/∂(A, χ, θ, φ)`, row per pulse quantity.
    pub fn pulse_jacobian(&self, lim: &HardwareLimits) -> [[f64; 4]; 4] {
        let cap = lim.axis_capacity(self.polar);
        let m = cap.max_rate();
        let dm = (cap.omega * cap.d_omega + cap.delta * cap.d_delta) / m;
        let (s, c) = self.azimuth.sin_cos();
        let chi = self.chi;
        let tau = self.area / (chi * m);
        [
            [0.0, cap.omega * c, chi * cap.d_omega * c, -chi * cap.omega * s],
            [0.0, cap.omega * s, chi * cap.d_omega * s, chi * cap.omega * c],
            [0.0, cap.delta, chi * cap.d_delta, 0.0],
            [1.0 / (chi * m), -tau / chi, -tau * dm / m, 0.0],
        ]
    }
}

fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

fn logit(p: f64) -> f64 {
    let p = p.clamp(LOGIT_MARGIN, 1.0 - LOGIT_MARGIN);
    (p / (1.0 - p)).ln()
}

/// Latent → parameters, with the diagonal derivative `d param / d latent`.
pub fn range_map(latent: &[f64], lim: &HardwareLimits) -> (Vec<HeadParams>, Vec<[f64; 4]>) {
    let span = lim.chi_max - lim.chi_min;
    latent
        .chunks_exact(4)
        .map(|u| {
            let (sa, sc, st) = (sigmoid(u[0]), sigmoid(u[1]), sigmoid(u[2]));
            let p = HeadParams { area: 4.0 * PI * sa, chi: lim.chi_min + span * sc, polar: PI * st, azimuth: u[3] };
            let d = [4.0 * PI * sa * (1.0 - sa), span * sc * (1.0 - sc), PI * st * (1.0 - st), 1.0];
            (p, d)
        })
        .unzip()
}

/// Inverse of [`range_map`], with fractions kept at least 1% inside the
/// open interval. An area-preserving `χ` change does not alter the ideal gate.
pub fn range_preimage(params: &[HeadParams], lim: &HardwareLimits) -> Vec<f64> {
    params
        .iter()
        .flat_map(|p| {
            [
                logit(p.area / (4.0 * PI)),
                logit((p.chi - lim.chi_min) / (lim.chi_max - lim.chi_min)),
                logit(p.polar / PI),
                p.azimuth,
            ]
        })
        .collect()
}

/// Parameters of the axis-rotated baseline for `(A_tg, θ_tg)` at `φ_tg = 0`.
pub fn baseline_params(baseline: Baseline, area: f64, polar: f64, lim: &HardwareLimits) -> Result<Vec<HeadParams>> {
    let cp = rotate_cp(&baseline.equatorial(area, lim)?, polar, lim)?;
    Ok(cp
        .pulses()
        .iter()
        .map(|p| {
            let r = pulse_to_rotation(p);
            HeadParams { area: r.area, chi: chi_of(p, lim), polar: r.polar, azimuth: r.azimuth }
        })
        .collect())
}

/// Network plus the fixed pieces needed to turn its output into pulses.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseNet {
    pub mlp: Mlp,
    pub baseline: Baseline,
    pub limits: HardwareLimits,
    pub target_box: TargetBox,
}

/// Everything [`PulseNet::forward_tape`] produces for one target.
#[derive(Debug, Clone)]
pub struct NetPass {
    pub tape: Tape,
    pub params: Vec<HeadParams>,
    /// `d param / d latent` per pulse.
    pub range_slope: Vec<[f64; 4]>,
    /// `d latent / d raw` per output.
    pub residual_gain: Vec<f64>,
}

impl PulseNet {
    /// Six ELU layers of 128 on top of the 2-dimensional input, `4n` outputs.
    pub fn layer_sizes(n_pulses: usize) -> Vec<usize> {
        let mut sizes = alloc::vec![2];
        sizes.extend(core::iter::repeat_n(HIDDEN_WIDTH, HIDDEN_LAYERS));
        sizes.push(4 * n_pulses);
        sizes
    }

    pub fn new<R: Rng + ?Sized>(
        baseline: Baseline,
        limits: HardwareLimits,
        target_box: TargetBox,
        rng: &mut R,
    ) -> Result<Self> {
        Self::with_sizes(&Self::layer_sizes(baseline.pulse_count()), baseline, limits, target_box, rng)
    }

    /// Network with custom hidden layers; the input and output widths must
    /// still be 2 and `4n`.
    pub fn with_sizes<R: Rng + ?Sized>(
        sizes: &[usize],
        baseline: Baseline,
        limits: HardwareLimits,
        target_box: TargetBox,
        rng: &mut R,
    ) -> Result<Self> {
        let mlp = Mlp::init(sizes, rng)?;
        Self::from_mlp(mlp, baseline, limits, target_box)
    }

    pub fn from_mlp(mlp: Mlp, baseline: Baseline, limits: HardwareLimits, target_box: TargetBox) -> Result<Self> {
        if baseline == Baseline::Rect {
            return Err(Error::Invalid("the network starts from SK1 or BB1".into()));
        }
        if mlp.input_dim() != 2 || mlp.output_dim() != 4 * baseline.pulse_count() {
            return Err(Error::Invalid(alloc::format!(
                "network shape {:?} does not fit {} pulses",
                mlp.sizes(),
                baseline.pulse_count()
            )));
        }
        Ok(PulseNet { mlp, baseline, limits: limits.validated()?, target_box })
    }

    pub fn pulse_count(&self) -> usize {
        self.baseline.pulse_count()
    }

    pub fn forward_tape(&self, area: f64, polar: f64) -> Result<NetPass> {
        let base = range_preimage(&baseline_params(self.baseline, area, polar, &self.limits)?, &self.limits);
        let (_, base_slope) = range_map(&base, &self.limits);
        let chi_mid_slope = 0.25 * (self.limits.chi_max - self.limits.chi_min);
        let residual_gain: Vec<f64> =
            base_slope.iter().flat_map(|d| [d[0], chi_mid_slope, d[2], d[3]].map(|v| RESIDUAL_SCALE / v)).collect();
        let tape = self.mlp.forward_tape(&self.target_box.normalize(area, polar));
        let latent: Vec<f64> =
            base.iter().zip(tape.output()).zip(residual_gain.iter()).map(|((b, r), k)| b + k * r).collect();
        let (params, range_slope) = range_map(&latent, &self.limits);
        Ok(NetPass { tape, params, range_slope, residual_gain })
    }

    pub fn forward(&self, area: f64, polar: f64) -> Result<Vec<HeadParams>> {
        Ok(self.forward_tape(area, polar)?.params)
    }

    /// Composite pulse for a full target, including its azimuth.
    pub fn compile(&self, target: &TargetRotation) -> Result<CompositePulse> {
        let target = target.validated()?;
        if !self.target_box.contains(target.area, target.polar) {
            log::warn!(
                "target (A = {}, theta = {}) lies outside the training box; extrapolating",
                target.area,
                target.polar
            );
        }
        let pulses = self.forward(target.area, target.polar)?.iter().map(|p| p.to_pulse(&self.limits)).collect();
        Ok(apply_global_phase(&CompositePulse::new(pulses)?, target.azimuth))
    }

    /// `∂L/∂raw` from `∂L/∂params`, then through the network into `grad`.
    pub fn backward(&self, pass: &NetPass, grad_params: &[[f64; 4]], grad: &mut [f64]) {
        let upstream: Vec<f64> = grad_params
            .iter()
            .zip(pass.range_slope.iter())
            .flat_map(|(g, d)| (0..4).map(move |i| g[i] * d[i]))
            .zip(pass.residual_gain.iter())
            .map(|(v, k)| v * k)
            .collect();
        self.mlp.backward(&pass.tape, &upstream, grad);
    }
}
