//! Segmented time evolution of the driven two-level system and gate fidelity.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::exec::{ordered_sum, Executor};
use crate::motion::{AtomSample, MotionContext};
use crate::pulses::CompositePulse;
use crate::su2::Unitary2;
use crate::{Error, Result, C64};

/// Below this `Ω̃·dt` the `sin(x)/x` factor is taken from its series.
const SERIES_THRESHOLD: f64 = 1e-6;

/// Closed-form propagator of `H/ħ = ½(Re Ω σx + Im Ω σy + Δ σz)` over `dt`:
/// `cos(Ω̃dt/2) I − (i/Ω̃) [[Δ, Ω*], [Ω, −Δ]] sin(Ω̃dt/2)`.
pub fn segment_propagator(omega: C64, delta: f64, dt: f64) -> Unitary2 {
    let rabi = (omega.norm_sqr() + delta * delta).sqrt();
    let half = 0.5 * rabi * dt;
    let c = half.cos();
    // sin(Ω̃dt/2)/Ω̃
    let g = if rabi * dt < SERIES_THRESHOLD { 0.5 * dt * (1.0 - half * half / 6.0) } else { half.sin() / rabi };
    let mi = C64::new(0.0, -g);
    Unitary2([C64::new(c, -g * delta), mi * omega.conj(), mi * omega, C64::new(c, g * delta)])
}

/// `¼ |Tr(target† actual)|²`, clamped into `[0, 1]`.
pub fn gate_fidelity(target: &Unitary2, actual: &Unitary2) -> f64 {
    let [a, b, c, d] = target.0;
    let [e, f, g, h] = actual.0;
    let tr = a.conj() * e + c.conj() * g + b.conj() * f + d.conj() * h;
    (0.25 * tr.norm_sqr()).clamp(0.0, 1.0)
}

/// `1 - F` from the Pauli components of `target† actual`, which keeps full
/// relative precision where `1 - gate_fidelity` would cancel.
pub fn gate_infidelity(target: &Unitary2, actual: &Unitary2) -> f64 {
    let w = target.adjoint() * *actual;
    w.pauli_projection().iter().map(|c| c.norm_sqr()).sum::<f64>().min(1.0)
}

/// Segment boundaries `s_1 = 0 < … < s_{m+1} = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentGrid {
    boundaries: Vec<f64>,
    /// For each boundary, the pulse-time index pinned to it (index `n` is the
    /// end of the sequence), if any.
    anchors: Vec<Option<usize>>,
}

impl SegmentGrid {
    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn anchors(&self) -> &[Option<usize>] {
        &self.anchors
    }

    pub fn segments(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn total(&self) -> f64 {
        *self.boundaries.last().expect("grid has at least two boundaries")
    }
}

/// Uniform grid `s'_l = (l−1)T/m` with the boundary nearest to each pulse
/// time `T_k` (and to `T`) replaced by that time.
///
/// Fails with [`Error::AmbiguousMapping`] when two pulse times share a
/// nearest boundary; a finer grid resolves it.
pub fn align_segments(pulse_starts: &[f64], total: f64, m: usize) -> Result<SegmentGrid> {
    if m == 0 || !(total > 0.0) {
        return Err(Error::Invalid("segment grid needs m >= 1 and T > 0".into()));
    }
    let step = total / m as f64;
    let mut boundaries: Vec<f64> = (0..=m).map(|l| l as f64 * step).collect();
    boundaries[m] = total;
    let mut anchors = alloc::vec![None; m + 1];
    let times = pulse_starts.iter().copied().chain(core::iter::once(total));
    for (k, t) in times.enumerate() {
        let l = ((t / step).round().max(0.0) as usize).min(m);
        if let Some(prev) = anchors[l] {
            return Err(Error::AmbiguousMapping { first: prev, second: k, boundary: l });
        }
        anchors[l] = Some(k);
        boundaries[l] = t;
    }
    Ok(SegmentGrid { boundaries, anchors })
}

/// Grid aligned to the pulse times of `cp`.
pub fn grid_for(cp: &CompositePulse, m: usize) -> Result<SegmentGrid> {
    align_segments(&cp.start_times(), cp.total_duration(), m)
}

/// [`grid_for`], doubling `m` (up to 16×) until every pulse time has its own
/// boundary.
pub fn resolved_grid(cp: &CompositePulse, m: usize) -> Result<SegmentGrid> {
    let mut err = None;
    for factor in [1, 2, 4, 8, 16] {
        match grid_for(cp, m * factor) {
            Ok(g) => {
                if factor > 1 {
                    log::debug!("segment grid refined to m = {}", m * factor);
                }
                return Ok(g);
            }
            Err(e @ Error::AmbiguousMapping { .. }) => err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(err.expect("loop ran"))
}

fn check_grid(cp: &CompositePulse, grid: &SegmentGrid) -> Result<()> {
    let t = cp.total_duration();
    if (grid.total() - t).abs() > 1e-12 * t {
        return Err(Error::GridMismatch { grid: grid.total(), pulse: t });
    }
    Ok(())
}

/// Product of segment propagators for segments `from..to`, latest leftmost.
///
/// Each segment uses the Hamiltonian at its midpoint: amplitude
/// `Ω_c,k (1 + ε(t_mid))` and detuning `Δ_k` of the pulse active there.
pub fn evolve_range<E>(cp: &CompositePulse, eps: E, grid: &SegmentGrid, from: usize, to: usize) -> Result<Unitary2>
where
    E: Fn(f64) -> f64,
{
    check_grid(cp, grid)?;
    let s = grid.boundaries();
    let mut u = Unitary2::IDENTITY;
    for l in from..to {
        let mid = 0.5 * (s[l] + s[l + 1]);
        let p = &cp.pulses()[cp.active_pulse(mid)];
        let scale = 1.0 + eps(mid);
        u = segment_propagator(p.omega * scale, p.detuning, s[l + 1] - s[l]) * u;
    }
    Ok(u)
}

/// Full propagator `U(T; ε(t))` on `grid`.
pub fn evolve<E>(cp: &CompositePulse, eps: E, grid: &SegmentGrid) -> Result<Unitary2>
where
    E: Fn(f64) -> f64,
{
    evolve_range(cp, eps, grid, 0, grid.segments())
}

/// Fidelity of each atom in `samples`, in sample order.
pub fn sample_fidelities<X: Executor>(
    cp: &CompositePulse,
    target: &Unitary2,
    samples: &[AtomSample],
    ctx: &MotionContext,
    m: usize,
    exec: &X,
) -> Result<Vec<f64>> {
    let grid = grid_for(cp, m)?;
    exec.map(samples.len(), |i| {
        let atom = &samples[i];
        evolve(cp, |t| ctx.epsilon(atom, t), &grid).map(|u| gate_fidelity(target, &u))
    })
    .into_iter()
    .collect()
}

/// Ensemble-averaged fidelity, summed in sample order.
pub fn ensemble_fidelity<X: Executor>(
    cp: &CompositePulse,
    target: &Unitary2,
    samples: &[AtomSample],
    ctx: &MotionContext,
    m: usize,
    exec: &X,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Invalid("ensemble needs at least one atom".into()));
    }
    let f = sample_fidelities(cp, target, samples, ctx, m, exec)?;
    Ok(ordered_sum(&f) / f.len() as f64)
}

/// Mean and standard error of a set of fidelities.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = ordered_sum(values) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
