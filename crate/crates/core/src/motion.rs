//! Elliptical Gaussian beams, harmonic tweezer traps, classical thermal
//! trajectories and the motion-induced amplitude error `ε(t)`.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::consts::K_B;

/// Elliptical Gaussian beam.
///
/// `I(x,y,z) = I₀ u_x(x,z) u_y(y,z)` with
/// `u_i = √(z_i²/(z²+z_i²)) · exp(−2 x_i² z_i² / (R_i² (z²+z_i²)))`,
/// evaluated relative to `offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamGeometry {
    /// 1/e² intensity radii `(R_x, R_y)`, m.
    pub radius: [f64; 2],
    /// Rayleigh ranges `(z_x, z_y)`, m.
    pub rayleigh: [f64; 2],
    /// Peak intensity, arbitrary units.
    pub peak_intensity: f64,
    /// Beam centre relative to the trap centre, m.
    pub offset: [f64; 3],
}

impl BeamGeometry {
    /// Round, centred beam with diffraction-limited Rayleigh range `πR²/λ`.
    pub fn symmetric(radius: f64, wavelength: f64) -> Self {
        Self::diffraction_limited([radius, radius], wavelength)
    }

    pub fn diffraction_limited(radius: [f64; 2], wavelength: f64) -> Self {
        BeamGeometry {
            radius,
            rayleigh: radius.map(|r| PI * r * r / wavelength),
            peak_intensity: 1.0,
            offset: [0.0; 3],
        }
    }

    pub fn with_offset(self, offset: [f64; 3]) -> Self {
        BeamGeometry { offset, ..self }
    }

    pub fn is_valid(&self) -> bool {
        self.radius.iter().chain(self.rayleigh.iter()).all(|v| *v > 0.0 && v.is_finite()) && self.peak_intensity > 0.0
    }

    /// Effective Rayleigh range, `1/z₀² = ½(1/z_x² + 1/z_y²)`.
    pub fn effective_rayleigh(&self) -> f64 {
        let [zx, zy] = self.rayleigh;
        (0.5 * (1.0 / (zx * zx) + 1.0 / (zy * zy))).sqrt().recip()
    }

    /// Intensity divided by the peak intensity, at a trap-frame point.
    pub fn relative_intensity(&self, point: [f64; 3]) -> f64 {
        self.log_relative_intensity(point).exp()
    }

    pub fn intensity(&self, point: [f64; 3]) -> f64 {
        self.peak_intensity * self.relative_intensity(point)
    }

    fn log_relative_intensity(&self, point: [f64; 3]) -> f64 {
        let z = point[2] - self.offset[2];
        let mut acc = 0.0;
        for i in 0..2 {
            let x = point[i] - self.offset[i];
            let zr2 = self.rayleigh[i] * self.rayleigh[i];
            let w = zr2 / (z * z + zr2);
            acc += 0.5 * w.ln() - 2.0 * x * x / (self.radius[i] * self.radius[i]) * w;
        }
        acc
    }

    /// Gradient of `ln I` at a trap-frame point, 1/m.
    pub fn log_intensity_gradient(&self, point: [f64; 3]) -> [f64; 3] {
        let z = point[2] - self.offset[2];
        let mut grad = [0.0; 3];
        for i in 0..2 {
            let x = point[i] - self.offset[i];
            let zr2 = self.rayleigh[i] * self.rayleigh[i];
            let denom = z * z + zr2;
            let w = zr2 / denom;
            let r2 = self.radius[i] * self.radius[i];
            grad[i] = -4.0 * x * w / r2;
            // d/dz [½ ln w − 2x²w/R²], dw/dz = −2z w/denom
            grad[2] += -z / denom + 4.0 * x * x * w * z / (r2 * denom);
        }
        grad
    }
}

/// Harmonic trap seen by the atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapParams {
    /// Trap depth `V₀`, J.
    pub depth: f64,
    /// Trap angular frequencies `(ω_x, ω_y, ω_z)`, rad/s.
    pub omega: [f64; 3],
    /// Atomic mass, kg.
    pub mass: f64,
    /// Atom temperature, K.
    pub temperature: f64,
}

impl TrapParams {
    /// Thermal position spread `√(k_B T / m ω_i²)` along each axis, m.
    pub fn position_std(&self) -> [f64; 3] {
        let kt_m = K_B * self.temperature / self.mass;
        self.omega.map(|w| kt_m.sqrt() / w)
    }

    /// `V₀ / k_B T`; the harmonic, classical treatment wants this ≫ 1.
    pub fn depth_ratio(&self) -> f64 {
        self.depth / (K_B * self.temperature)
    }

    pub fn check(&self) {
        if self.temperature > 0.0 && self.depth_ratio() < 5.0 {
            log::warn!("trap depth is only {:.2} k_B T; harmonic approximation is poor", self.depth_ratio());
        }
    }

    /// Trap after the tweezer beam changes from `from` to `to`: depth scales
    /// with peak intensity, `ω_r ∝ √V₀/R` and `ω_z ∝ √V₀/z₀`.
    pub fn rescaled(&self, from: &BeamGeometry, to: &BeamGeometry) -> TrapParams {
        let depth_ratio = to.peak_intensity / from.peak_intensity;
        let root = depth_ratio.sqrt();
        TrapParams {
            depth: self.depth * depth_ratio,
            omega: [
                self.omega[0] * root * from.radius[0] / to.radius[0],
                self.omega[1] * root * from.radius[1] / to.radius[1],
                self.omega[2] * root * from.effective_rayleigh() / to.effective_rayleigh(),
            ],
            ..*self
        }
    }
}

/// Trap frequencies from the quadratic expansion of the tweezer intensity:
/// `ω_x² = 4V₀/(m R_x²)`, `ω_y² = 4V₀/(m R_y²)`, `ω_z² = 2V₀/(m z₀²)`.
pub fn derive_trap(tweezer: &BeamGeometry, depth: f64, mass: f64, temperature: f64) -> TrapParams {
    let z0 = tweezer.effective_rayleigh();
    let trap = TrapParams {
        depth,
        omega: [
            (4.0 * depth / (mass * tweezer.radius[0] * tweezer.radius[0])).sqrt(),
            (4.0 * depth / (mass * tweezer.radius[1] * tweezer.radius[1])).sqrt(),
            (2.0 * depth / (mass * z0 * z0)).sqrt(),
        ],
        mass,
        temperature,
    };
    trap.check();
    trap
}

/// One classical thermal atom: `x_i(t) = X_i sin(ω_i t + Φ_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AtomSample {
    pub amplitude: [f64; 3],
    pub phase: [f64; 3],
}

impl AtomSample {
    pub const AT_REST: AtomSample = AtomSample { amplitude: [0.0; 3], phase: [0.0; 3] };

    /// From initial positions and velocities; `Φ = atan2(ω x₀, v₀)`.
    pub fn from_initial(x0: [f64; 3], v0: [f64; 3], trap: &TrapParams) -> Self {
        let mut s = AtomSample::default();
        for i in 0..3 {
            let w = trap.omega[i];
            s.amplitude[i] = (x0[i] * x0[i] + (v0[i] / w) * (v0[i] / w)).sqrt();
            s.phase[i] = (w * x0[i]).atan2(v0[i]);
        }
        s
    }

    pub fn position(&self, trap: &TrapParams, t: f64) -> [f64; 3] {
        core::array::from_fn(|i| self.amplitude[i] * (trap.omega[i] * t + self.phase[i]).sin())
    }

    pub fn velocity(&self, trap: &TrapParams, t: f64) -> [f64; 3] {
        core::array::from_fn(|i| self.amplitude[i] * trap.omega[i] * (trap.omega[i] * t + self.phase[i]).cos())
    }
}

/// Draws `n` thermal atoms: `x_i(0)` and `v_i(0)/ω_i` are independent
/// `N(0, k_B T/(m ω_i²))`.
///
/// Draw order is fixed (per atom, per axis: position then scaled velocity)
/// so a seeded generator gives the same ensemble everywhere.
pub fn sample_thermal<R: Rng + ?Sized>(trap: &TrapParams, rng: &mut R, n: usize) -> Vec<AtomSample> {
    let std = trap.position_std();
    (0..n)
        .map(|_| {
            let mut x0 = [0.0; 3];
            let mut v0 = [0.0; 3];
            for i in 0..3 {
                let a: f64 = StandardNormal.sample(rng);
                let b: f64 = StandardNormal.sample(rng);
                x0[i] = std[i] * a;
                v0[i] = std[i] * b * trap.omega[i];
            }
            AtomSample::from_initial(x0, v0, trap)
        })
        .collect()
}

/// Trap plus control beam: everything needed to turn an atom into `ε(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionContext {
    pub trap: TrapParams,
    pub control: BeamGeometry,
}

impl MotionContext {
    /// `ε(t) = I_control(x(t))/I_control,0 − 1`, exact Gaussian profile.
    /// Pulses are calibrated to unit peak intensity, so a control beam whose
    /// `peak_intensity` deviates from 1 shifts every atom's error.
    pub fn epsilon(&self, atom: &AtomSample, t: f64) -> f64 {
        self.control.intensity(atom.position(&self.trap, t)) - 1.0
    }

    /// `dε/dt` along the trajectory.
    pub fn epsilon_rate(&self, atom: &AtomSample, t: f64) -> f64 {
        let x = atom.position(&self.trap, t);
        let v = atom.velocity(&self.trap, t);
        let g = self.control.log_intensity_gradient(x);
        self.control.intensity(x) * (g[0] * v[0] + g[1] * v[1] + g[2] * v[2])
    }

    pub fn epsilon_series(&self, atom: &AtomSample, times: &[f64]) -> Vec<f64> {
        times.iter().map(|&t| self.epsilon(atom, t)).collect()
    }
}

/// Fractional deviations of a beam from nominal.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InhomogeneityModel {
    pub d_intensity: f64,
    pub d_radius: [f64; 2],
}

impl InhomogeneityModel {
    pub fn is_valid(&self) -> bool {
        1.0 + self.d_intensity > 0.0 && self.d_radius.iter().all(|d| 1.0 + d > 0.0)
    }
}

/// `I₀(1+δI)`, `R_i(1+δR_i)`, `z_i(1+δR_i)²`.
pub fn apply_inhomogeneity(beam: &BeamGeometry, inh: &InhomogeneityModel) -> BeamGeometry {
    let sx = 1.0 + inh.d_radius[0];
    let sy = 1.0 + inh.d_radius[1];
    BeamGeometry {
        radius: [beam.radius[0] * sx, beam.radius[1] * sy],
        rayleigh: [beam.rayleigh[0] * sx * sx, beam.rayleigh[1] * sy * sy],
        peak_intensity: beam.peak_intensity * (1.0 + inh.d_intensity),
        offset: beam.offset,
    }
}

/// Independent Gaussian deviations with the given standard deviations.
pub fn sample_inhomogeneity<R: Rng + ?Sized>(
    sigma_intensity: f64,
    sigma_radius: [f64; 2],
    rng: &mut R,
) -> InhomogeneityModel {
    let mut draw = |s: f64| {
        let z: f64 = StandardNormal.sample(rng);
        s * z
    };
    let d_intensity = draw(sigma_intensity);
    let dx = draw(sigma_radius[0]);
    let dy = draw(sigma_radius[1]);
    InhomogeneityModel { d_intensity, d_radius: [dx, dy] }
}
