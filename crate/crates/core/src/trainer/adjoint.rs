//! Reverse-mode derivative of the segmented gate fidelity with respect to the
//! pulse table.
//!
//! With `U = U_m ⋯ U_1` and `z = Tr(V† U)`, `F = ¼|z|²` and
//! `dF = ½ Re(z* Tr(M_l dU_l))`, `M_l = R_l V† L_l`, where `R_l` is the
//! product of the segments before `l` and `L_l` of those after it.
//!
//! Each segment depends on its pulse's `(Re Ω, Im Ω, Δ)`, on its length and,
//! through `ε(t_mid)`, on its midpoint. Boundaries move with the pulse
//! durations: a boundary pinned to the start of pulse `k` moves with every
//! `τ_j`, `j < k`; a free boundary `l` sits at `l·T/m` and moves with every
//! `τ_j` at rate `l/m`. The pinning pattern itself is piecewise constant and
//! is held fixed.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::evolution::{segment_propagator, SegmentGrid};
use crate::pulses::CompositePulse;
use crate::su2::Unitary2;
use crate::{Error, Result, C64};

/// Derivatives of a scalar with respect to `(Re Ω, Im Ω, Δ, τ)` of each pulse.
pub type PulseGradient = Vec<[f64; 4]>;

/// `(φ cos φ − sin φ)/φ³`, regular at 0.
fn q(phi: f64) -> f64 {
    if phi.abs() < 1e-3 {
        let p2 = phi * phi;
        -1.0 / 3.0 + p2 / 30.0 - p2 * p2 / 840.0
    } else {
        (phi * phi.cos() - phi.sin()) / (phi * phi * phi)
    }
}

/// `Σ_ij M_ji dU_ij` for `dU` built from `(dc, dg, dΩ, dΔ)`.
fn contract(m: &Unitary2, g: f64, omega: C64, delta: f64, dc: f64, dg: f64, d_omega: C64, d_delta: f64) -> C64 {
    let mi = C64::new(0.0, -1.0);
    let d00 = C64::new(dc, -(dg * delta + g * d_delta));
    let d11 = C64::new(dc, dg * delta + g * d_delta);
    let d01 = mi * (omega.conj() * dg + d_omega.conj() * g);
    let d10 = mi * (omega * dg + d_omega * g);
    let [m00, m01, m10, m11] = m.0;
    m00 * d00 + m10 * d01 + m01 * d10 + m11 * d11
}

/// Segment-wise derivatives of `Tr(M dU)` with respect to
/// `(Re Ω, Im Ω, Δ, dt)` at `(omega, delta, dt)`.
fn segment_sensitivity(m: &Unitary2, omega: C64, delta: f64, dt: f64) -> [C64; 4] {
    let rabi2 = omega.norm_sqr() + delta * delta;
    let rabi = rabi2.sqrt();
    let phi = 0.5 * rabi * dt;
    let (s, c) = phi.sin_cos();
    let g = if rabi * dt < 1e-6 { 0.5 * dt * (1.0 - phi * phi / 6.0) } else { s / rabi };
    let h3 = 0.125 * dt * dt * dt * q(phi);
    let x = [omega.re, omega.im, delta];
    let dirs = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)];
    let mut out = [C64::new(0.0, 0.0); 4];
    for j in 0..3 {
        let dc = -0.5 * dt * g * x[j];
        let dg = x[j] * h3;
        let d_delta = if j == 2 { 1.0 } else { 0.0 };
        out[j] = contract(m, g, omega, delta, dc, dg, dirs[j], d_delta);
    }
    out[3] = contract(m, g, omega, delta, -0.5 * s * rabi, 0.5 * c, C64::new(0.0, 0.0), 0.0);
    out
}

/// Fidelity `¼|Tr(V†U)|²` of the segmented evolution and its gradient with
/// respect to every pulse's `(Re Ω, Im Ω, Δ, τ)`.
///
/// `eps` and `eps_rate` give `ε(t)` and `dε/dt` along the atom's trajectory.
pub fn fidelity_gradient<E, D>(
    cp: &CompositePulse,
    grid: &SegmentGrid,
    target: &Unitary2,
    eps: E,
    eps_rate: D,
) -> Result<(f64, PulseGradient)>
where
    E: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let total = cp.total_duration();
    if (grid.total() - total).abs() > 1e-12 * total {
        return Err(Error::GridMismatch { grid: grid.total(), pulse: total });
    }
    let s = grid.boundaries();
    let m = grid.segments();
    let pulses = cp.pulses();
    let n = pulses.len();

    // forward: segment data and prefix products R_l
    let mut active = Vec::with_capacity(m);
    let mut scale = Vec::with_capacity(m);
    let mut segs = Vec::with_capacity(m);
    let mut prefix = Vec::with_capacity(m + 1);
    prefix.push(Unitary2::IDENTITY);
    for l in 0..m {
        let mid = 0.5 * (s[l] + s[l + 1]);
        let k = cp.active_pulse(mid);
        let f = 1.0 + eps(mid);
        let u = segment_propagator(pulses[k].omega * f, pulses[k].detuning, s[l + 1] - s[l]);
        prefix.push(u * prefix[l]);
        active.push(k);
        scale.push(f);
        segs.push(u);
    }
    let vdag = target.adjoint();
    let z = (vdag * prefix[m]).trace();
    let fidelity = 0.25 * z.norm_sqr();

    // backward: B_l = V† L_l
    let mut grad = alloc::vec![[0.0; 4]; n];
    let mut d_boundary = alloc::vec![0.0; m + 1];
    let mut b = vdag;
    for l in (0..m).rev() {
        let k = active[l];
        let p = &pulses[k];
        let dt = s[l + 1] - s[l];
        let mid = 0.5 * (s[l] + s[l + 1]);
        let mm = prefix[l] * b;
        let sens = segment_sensitivity(&mm, p.omega * scale[l], p.detuning, dt);
        let df: [f64; 4] = core::array::from_fn(|j| 0.5 * (z.conj() * sens[j]).re);
        grad[k][0] += scale[l] * df[0];
        grad[k][1] += scale[l] * df[1];
        grad[k][2] += df[2];
        let d_mid = eps_rate(mid) * (p.omega.re * df[0] + p.omega.im * df[1]);
        d_boundary[l + 1] += df[3] + 0.5 * d_mid;
        d_boundary[l] += -df[3] + 0.5 * d_mid;
        b = b * segs[l];
    }

    // boundaries → durations
    let anchors = grid.anchors();
    let free: f64 = (0..=m).filter(|l| anchors[*l].is_none()).map(|l| d_boundary[l] * l as f64 / m as f64).sum();
    for (j, g) in grad.iter_mut().enumerate() {
        let pinned: f64 = (0..=m)
            .filter_map(|l| anchors[l].map(|k| (l, k)))
            .filter(|&(_, k)| j < k)
            .map(|(l, _)| d_boundary[l])
            .sum();
        g[3] += pinned + free;
    }
    Ok((fidelity, grad))
}
