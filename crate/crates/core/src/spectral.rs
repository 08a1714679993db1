//! Filter-function analysis of composite pulses.
//!
//! In the frame of the ideal control evolution `U_c(t)` an amplitude error
//! enters as `ε(t) H̃⊥(t)`, `H̃⊥ = U_c† H⊥ U_c`. To first order the error
//! rotation is `a = ½∫ ε(t) h(t) dt` with `h = Tr[σ H̃⊥]/ħ`, and
//!
//! ```text
//! 1 − F ≃ |⟨ε⟩ r(0) − D|² + (1/2π) ∫ |r(ω)|² S(δε; ω) dω
//! ```
//!
//! where `r(ω) = ½∫ h(t) e^{−iωt} dt` and `D` is the rotation separating the
//! target from `U_c(T)`.
//!
//! Fourier convention: forward transform `∫ f(t) e^{−iωt} dt`, `1/2π` on the
//! inverse. `S` is the ensemble-averaged periodogram of `δε` over an
//! observation window `T_obs`, divided by `T_obs`; with that normalisation
//! `(1/2π)∫ S dω` is the mean power of `δε` and the decomposition above is
//! exact for an ensemble of random-phase cosines.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::exec::Executor;
use crate::motion::{AtomSample, MotionContext};
use crate::pulses::CompositePulse;
use crate::su2::{RotationVector, Unitary2};
use crate::{Error, Result, C64};

/// `h(t_j) = Tr[σ H̃⊥(t_j)]/ħ` on a uniform grid covering `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSignal {
    step: f64,
    h: Vec<[f64; 3]>,
}

impl FrameSignal {
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn samples(&self) -> &[[f64; 3]] {
        &self.h
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.h.len()).map(|j| j as f64 * self.step).collect()
    }

    pub fn duration(&self) -> f64 {
        (self.h.len() - 1) as f64 * self.step
    }

    fn trapezoid_weight(&self, j: usize) -> f64 {
        if j == 0 || j + 1 == self.h.len() {
            0.5 * self.step
        } else {
            self.step
        }
    }

    /// `r(0) = ½∫ h dt`, a real vector.
    pub fn dc_response(&self) -> RotationVector {
        let mut acc = [0.0; 3];
        for (j, h) in self.h.iter().enumerate() {
            let w = 0.5 * self.trapezoid_weight(j);
            for a in 0..3 {
                acc[a] += w * h[a];
            }
        }
        RotationVector(acc)
    }
}

/// `Tr[σ U† P U]` for the transverse drive `P = ½[[0, Ω*], [Ω, 0]]`.
fn frame_vector(u: &Unitary2, omega: C64) -> [f64; 3] {
    let half = omega * 0.5;
    let p = Unitary2([C64::new(0.0, 0.0), half.conj(), half, C64::new(0.0, 0.0)]);
    let m = u.adjoint() * p * *u;
    let [m00, m01, m10, m11] = m.0;
    [(m01 + m10).re, (C64::new(0.0, 1.0) * (m01 - m10)).re, (m00 - m11).re]
}

/// Samples `h(t)` with step at most `max_step`, using the exact piecewise
/// propagator `U_c(t)`.
///
/// A grid point that coincides with an interior pulse boundary gets the mean
/// of the two one-sided limits, which keeps the trapezoidal rule second order
/// across the jump.
pub fn frame_signal(cp: &CompositePulse, max_step: f64) -> FrameSignal {
    let total = cp.total_duration();
    let n = ((total / max_step).ceil() as usize).max(1);
    let step = total / n as f64;
    let starts = cp.start_times();
    let pulses = cp.pulses();
    // U_c at each pulse start
    let mut at_start = Vec::with_capacity(pulses.len());
    let mut acc = Unitary2::IDENTITY;
    for p in pulses {
        at_start.push(acc);
        acc = p.propagator(p.duration) * acc;
    }
    let value = |k: usize, t: f64| {
        let p = &pulses[k];
        let u = p.propagator(t - starts[k]) * at_start[k];
        frame_vector(&u, p.omega)
    };
    let h = (0..=n)
        .map(|j| {
            let t = j as f64 * step;
            let k = cp.active_pulse(t);
            let boundary = k > 0 && (t - starts[k]).abs() <= 1e-9 * step;
            if boundary {
                let left = value(k - 1, t);
                let right = value(k, t);
                core::array::from_fn(|a| 0.5 * (left[a] + right[a]))
            } else {
                value(k, t)
            }
        })
        .collect();
    FrameSignal { step, h }
}

/// `r(ω)` on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterFunction {
    pub omega: Vec<f64>,
    pub r: Vec<[C64; 3]>,
}

impl FilterFunction {
    /// `|r(ω)|²` per axis.
    pub fn power_per_axis(&self) -> Vec<[f64; 3]> {
        self.r.iter().map(|r| r.map(|c| c.norm_sqr())).collect()
    }

    /// `|r(ω)|²` summed over axes.
    pub fn power(&self) -> Vec<f64> {
        self.r.iter().map(|r| r.iter().map(|c| c.norm_sqr()).sum()).collect()
    }
}

/// Trapezoidal DTFT `r(ω) = ½ Σ_j w_j h(t_j) e^{−iω t_j}`.
pub fn filter_amplitude(sig: &FrameSignal, omega: &[f64]) -> FilterFunction {
    let r = omega
        .iter()
        .map(|&w| {
            let mut acc = [C64::new(0.0, 0.0); 3];
            for (j, h) in sig.h.iter().enumerate() {
                let t = j as f64 * sig.step;
                let phase = C64::from_polar(0.5 * sig.trapezoid_weight(j), -w * t);
                for a in 0..3 {
                    acc[a] += phase * h[a];
                }
            }
            acc
        })
        .collect();
    FilterFunction { omega: omega.to_vec(), r }
}

/// `D = ½ Im Tr[σ log(𝒰† U_c(T))]`, i.e. minus the rotation vector of
/// `𝒰† U_c(T)`. Zero when the ideal sequence hits the target exactly.
pub fn displacement(target: &Unitary2, cp: &CompositePulse) -> Result<RotationVector> {
    let residual = target.adjoint() * cp.ideal_unitary();
    Ok(-residual.log_axis()?)
}

/// First-order Magnus error vector `a = ½∫ ε h dt`, with `ε` sampled on the
/// signal's grid.
pub fn first_order_a(eps: &[f64], sig: &FrameSignal) -> Result<RotationVector> {
    if eps.len() != sig.h.len() {
        return Err(Error::GridMismatch { grid: eps.len() as f64, pulse: sig.h.len() as f64 });
    }
    let mut acc = [0.0; 3];
    for (j, (e, h)) in eps.iter().zip(sig.h.iter()).enumerate() {
        let w = 0.5 * sig.trapezoid_weight(j) * e;
        for a in 0..3 {
            acc[a] += w * h[a];
        }
    }
    Ok(RotationVector(acc))
}

/// `G(⟨ε⟩) = |⟨ε⟩ r(0) − D|²`.
pub fn residual_bias(mean_eps: f64, dc_response: &RotationVector, displacement: &RotationVector) -> f64 {
    (dc_response.scaled(mean_eps) - *displacement).norm_sqr()
}

/// Ensemble power spectrum of the zero-mean fluctuation `δε`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSpectrum {
    pub omega: Vec<f64>,
    pub density: Vec<f64>,
    /// Ensemble-and-time mean `⟨ε⟩` that was subtracted.
    pub mean_eps: f64,
    /// Observation window, s.
    pub window: f64,
}

/// Frequencies `2πk/T_obs` for `k = −K..=K` with `2πK/T_obs ≤ omega_max`.
pub fn spectral_bins(window: f64, omega_max: f64) -> Vec<f64> {
    let spacing = 2.0 * PI / window;
    let k = (omega_max / spacing).floor() as i64;
    (-k..=k).map(|i| i as f64 * spacing).collect()
}

/// Minimum ensemble size accepted by [`power_spectrum`].
pub const MIN_REALIZATIONS: usize = 100;

/// Ensemble-averaged finite-window periodogram of `δε = ε − ⟨ε⟩`, divided by
/// the window length.
///
/// Each realization holds `ε` at `t_j = j·dt`, `j = 0..N`, all on the same
/// grid. `⟨ε⟩` is the scalar mean over time and ensemble.
pub fn power_spectrum<X: Executor>(
    realizations: &[Vec<f64>],
    dt: f64,
    omega: &[f64],
    exec: &X,
) -> Result<ErrorSpectrum> {
    if realizations.len() < MIN_REALIZATIONS {
        return Err(Error::Invalid(alloc::format!(
            "power spectrum needs at least {MIN_REALIZATIONS} realizations, got {}",
            realizations.len()
        )));
    }
    let n = realizations[0].len();
    if n < 2 || realizations.iter().any(|r| r.len() != n) {
        return Err(Error::Invalid("realizations must share a grid of at least two points".into()));
    }
    let window = (n - 1) as f64 * dt;
    let count = (realizations.len() * n) as f64;
    let mean_eps = realizations.iter().flat_map(|r| r.iter()).fold(0.0, |a, v| a + v) / count;
    let weight = |j: usize| if j == 0 || j + 1 == n { 0.5 * dt } else { dt };
    // e^{−iω t_j} tables shared by every realization
    let twiddles: Vec<Vec<C64>> =
        omega.iter().map(|&w| (0..n).map(|j| C64::from_polar(weight(j), -w * j as f64 * dt)).collect()).collect();
    let per_realization = exec.map(realizations.len(), |i| {
        let r = &realizations[i];
        twiddles
            .iter()
            .map(|tw| {
                let mut acc = C64::new(0.0, 0.0);
                for (e, t) in r.iter().zip(tw.iter()) {
                    acc += t * (e - mean_eps);
                }
                acc.norm_sqr()
            })
            .collect::<Vec<f64>>()
    });
    let mut density = alloc::vec![0.0; omega.len()];
    for row in &per_realization {
        for (d, v) in density.iter_mut().zip(row.iter()) {
            *d += v;
        }
    }
    let norm = 1.0 / (realizations.len() as f64 * window);
    density.iter_mut().for_each(|d| *d *= norm);
    Ok(ErrorSpectrum { omega: omega.to_vec(), density, mean_eps, window })
}

/// `ε(t_j)` for every atom on the grid `t_j = j·dt`, `j = 0..=n`.
pub fn epsilon_realizations<X: Executor>(
    ctx: &MotionContext,
    atoms: &[AtomSample],
    dt: f64,
    n: usize,
    exec: &X,
) -> Vec<Vec<f64>> {
    exec.map(atoms.len(), |i| (0..=n).map(|j| ctx.epsilon(&atoms[i], j as f64 * dt)).collect())
}

/// `G + (1/2π) ∫ |r(ω)|² S(δε; ω) dω`, trapezoidal in `ω`.
pub fn leading_order_infidelity(bias: f64, ff: &FilterFunction, spec: &ErrorSpectrum) -> Result<f64> {
    if ff.omega.len() != spec.omega.len()
        || ff.omega.iter().zip(spec.omega.iter()).any(|(a, b)| (a - b).abs() > 1e-9 * a.abs().max(1.0))
    {
        return Err(Error::Invalid("filter and spectrum must share a frequency grid".into()));
    }
    let power = ff.power();
    let integrand: Vec<f64> = power.iter().zip(spec.density.iter()).map(|(r, s)| r * s).collect();
    let mut integral = 0.0;
    for j in 1..integrand.len() {
        integral += 0.5 * (integrand[j] + integrand[j - 1]) * (ff.omega[j] - ff.omega[j - 1]);
    }
    Ok(bias + integral / (2.0 * PI))
}
