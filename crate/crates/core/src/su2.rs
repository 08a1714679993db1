//! 2×2 special-unitary algebra in the `exp(-i a·σ)` convention.

use core::f64::consts::PI;
use core::ops::{Add, Mul, Neg, Sub};

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result, C64};

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Complex 2×2 matrix stored row-major: `[u00, u01, u10, u11]`.
///
/// Every constructor in this crate produces a unitary matrix; the type itself
/// does not re-check that on each operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2(pub [C64; 4]);

impl Unitary2 {
    pub const IDENTITY: Self = Unitary2([ONE, ZERO, ZERO, ONE]);

    pub fn pauli_x() -> Self {
        Unitary2([ZERO, ONE, ONE, ZERO])
    }

    pub fn pauli_y() -> Self {
        Unitary2([ZERO, -I, I, ZERO])
    }

    pub fn pauli_z() -> Self {
        Unitary2([ONE, ZERO, ZERO, -ONE])
    }

    /// `exp(-i a·σ) = cos|a| I − i sin|a| (â·σ)`.
    pub fn from_rotation_vector(a: RotationVector) -> Self {
        let norm = a.norm();
        let c = norm.cos();
        // sin|a|/|a|, finite at zero.
        let sinc = if norm < 1e-8 { 1.0 - norm * norm / 6.0 } else { norm.sin() / norm };
        let [x, y, z] = a.0;
        let s = sinc;
        Unitary2([C64::new(c, -s * z), C64::new(-s * y, -s * x), C64::new(s * y, -s * x), C64::new(c, s * z)])
    }

    pub fn adjoint(&self) -> Self {
        let [a, b, c, d] = self.0;
        Unitary2([a.conj(), c.conj(), b.conj(), d.conj()])
    }

    pub fn trace(&self) -> C64 {
        self.0[0] + self.0[3]
    }

    pub fn det(&self) -> C64 {
        self.0[0] * self.0[3] - self.0[1] * self.0[2]
    }

    pub fn scale(&self, factor: C64) -> Self {
        Unitary2(self.0.map(|z| z * factor))
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `max |U†U − I|`.
    pub fn unitarity_error(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Self::IDENTITY)
    }

    /// `(i/2) Tr(σ_k U)` for `k = x, y, z`.
    ///
    /// For `U = exp(-i a·σ)` this is `sin|a| â`.
    pub fn pauli_projection(&self) -> [C64; 3] {
        let [a, b, c, d] = self.0;
        let half_i = I * 0.5;
        [half_i * (b + c), half_i * (I * b - I * c), half_i * (a - d)]
    }

    /// Rotation vector of `self` up to global phase. See [`su2_log_axis`].
    pub fn log_axis(&self) -> Result<RotationVector> {
        su2_log_axis(self)
    }
}

impl Mul for Unitary2 {
    type Output = Unitary2;

    fn mul(self, rhs: Unitary2) -> Unitary2 {
        let [a, b, c, d] = self.0;
        let [e, f, g, h] = rhs.0;
        Unitary2([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h])
    }
}

/// Axis-angle vector `a`; the rotation is `exp(-i a·σ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RotationVector(pub [f64; 3]);

impl RotationVector {
    pub const ZERO: Self = RotationVector([0.0; 3]);

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        RotationVector([x, y, z])
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.dot(self)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn scaled(&self, k: f64) -> Self {
        RotationVector(self.0.map(|v| v * k))
    }
}

impl Add for RotationVector {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        RotationVector([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1], self.0[2] + rhs.0[2]])
    }
}

impl Sub for RotationVector {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for RotationVector {
    type Output = Self;
    fn neg(self) -> Self {
        self.scaled(-1.0)
    }
}

/// A target gate `exp(-i (A/2) n̂(θ, φ)·σ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetRotation {
    /// Rotation angle `A`, rad.
    pub area: f64,
    /// Polar angle `θ` of the rotation axis, rad.
    pub polar: f64,
    /// Azimuth `φ` of the rotation axis, rad.
    pub azimuth: f64,
}

impl TargetRotation {
    pub fn new(area: f64, polar: f64, azimuth: f64) -> Self {
        TargetRotation { area, polar, azimuth }
    }

    /// Checks `A > 0`, `θ ∈ (0, π)` and wraps `φ` into `[0, 2π)`.
    pub fn validated(self) -> Result<Self> {
        if !(self.area > 0.0) || !self.area.is_finite() {
            return Err(Error::OutOfRange { what: "target area", value: self.area });
        }
        if !(self.polar > 0.0 && self.polar < PI) {
            return Err(Error::OutOfRange { what: "target polar angle", value: self.polar });
        }
        let azimuth = num_traits::Euclid::rem_euclid(&self.azimuth, &(2.0 * PI));
        Ok(TargetRotation { azimuth, ..self })
    }

    pub fn axis(&self) -> [f64; 3] {
        let (st, ct) = self.polar.sin_cos();
        let (sp, cp) = self.azimuth.sin_cos();
        [st * cp, st * sp, ct]
    }

    pub fn unitary(&self) -> Unitary2 {
        su2_from_rotation(self)
    }
}

/// `exp(-i (A/2) n̂·σ)` with `n̂ = (sinθ cosφ, sinθ sinφ, cosθ)`.
pub fn su2_from_rotation(target: &TargetRotation) -> Unitary2 {
    let half = 0.5 * target.area;
    let [x, y, z] = target.axis();
    Unitary2::from_rotation_vector(RotationVector([half * x, half * y, half * z]))
}

/// Rotation vector `a` with `u ≐ exp(-i a·σ)` up to global phase.
///
/// The global phase is fixed by dividing by `√det u` and then choosing the
/// sign that makes `Re Tr u ≥ 0`, so `|a| ∈ [0, π/2]` and the rotation angle
/// `2|a|` lies in `[0, π]`. Within `1e-6` of `π` the axis is ill-conditioned
/// and [`Error::BranchPoint`] is returned instead of a guess.
pub fn su2_log_axis(u: &Unitary2) -> Result<RotationVector> {
    let det = u.det();
    let root = det.sqrt();
    let mut v = u.scale(root.inv());
    if v.trace().re < 0.0 {
        v = v.scale(-ONE);
    }
    let cos_a = (0.5 * v.trace().re).clamp(-1.0, 1.0);
    let proj = v.pauli_projection();
    let sin_axis = [proj[0].re, proj[1].re, proj[2].re];
    let sin_a = (sin_axis[0] * sin_axis[0] + sin_axis[1] * sin_axis[1] + sin_axis[2] * sin_axis[2]).sqrt();
    let half_angle = sin_a.atan2(cos_a);
    if 2.0 * half_angle > PI - 1e-6 {
        return Err(Error::BranchPoint { angle: 2.0 * half_angle });
    }
    if sin_a == 0.0 {
        return Ok(RotationVector::ZERO);
    }
    let k = half_angle / sin_a;
    Ok(RotationVector(sin_axis.map(|s| s * k)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn close(a: &Unitary2, b: &Unitary2, tol: f64) -> bool {
        a.max_abs_diff(b) < tol
    }

    #[test]
    fn zero_area_is_identity() {
        let u = su2_from_rotation(&TargetRotation::new(0.0, PI / 2.0, 0.0));
        assert!(close(&u, &Unitary2::IDENTITY, 1e-15));
    }

    #[test]
    fn pi_about_x_is_minus_i_sigma_x() {
        let u = su2_from_rotation(&TargetRotation::new(PI, PI / 2.0, 0.0));
        assert!(close(&u, &Unitary2::pauli_x().scale(-I), 1e-15));
    }

    #[test]
    fn half_pi_about_z_is_diagonal_phase() {
        let u = su2_from_rotation(&TargetRotation::new(PI / 2.0, 0.0, 0.0));
        let expected = Unitary2([C64::from_polar(1.0, -PI / 4.0), ZERO, ZERO, C64::from_polar(1.0, PI / 4.0)]);
        assert!(close(&u, &expected, 1e-15));
    }

    #[test]
    fn log_axis_single_axis_cases() {
        assert_eq!(su2_log_axis(&Unitary2::IDENTITY).unwrap(), RotationVector::ZERO);
        let u = Unitary2::from_rotation_vector(RotationVector::new(0.0, 0.3, 0.0));
        let a = su2_log_axis(&u).unwrap();
        assert_abs_diff_eq!(a.0[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.0[1], 0.3, epsilon = 1e-14);
        assert_abs_diff_eq!(a.0[2], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn log_axis_rejects_branch_point() {
        let u = Unitary2::pauli_x().scale(-I);
        assert!(matches!(su2_log_axis(&u), Err(Error::BranchPoint { .. })));
    }

    #[test]
    fn log_axis_ignores_global_phase() {
        let a = RotationVector::new(0.2, -0.4, 0.7);
        let u = Unitary2::from_rotation_vector(a).scale(C64::from_polar(1.0, 2.1));
        let back = su2_log_axis(&u).unwrap();
        assert!((back - a).norm() < 1e-12);
    }

    #[test]
    fn target_validation() {
        assert!(TargetRotation::new(-1.0, 1.0, 0.0).validated().is_err());
        assert!(TargetRotation::new(1.0, PI, 0.0).validated().is_err());
        let t = TargetRotation::new(1.0, 1.0, -0.5).validated().unwrap();
        assert_abs_diff_eq!(t.azimuth, 2.0 * PI - 0.5, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn log_axis_round_trips(x in -1.0..1.0f64, y in -1.0..1.0f64, z in -1.0..1.0f64,
                                len in 0.0..(PI / 2.0 - 1e-3), phase in -PI..PI) {
            let n = (x * x + y * y + z * z).sqrt();
            prop_assume!(n > 1e-3);
            let a = RotationVector::new(x, y, z).scaled(len / n);
            let u = Unitary2::from_rotation_vector(a).scale(C64::from_polar(1.0, phase));
            prop_assert!(u.unitarity_error() < 1e-12);
            prop_assert!((u.det().norm() - 1.0).abs() < 1e-12);
            let back = su2_log_axis(&u).unwrap();
            let rebuilt = Unitary2::from_rotation_vector(back);
            // equal up to the global phase that was stripped
            let fid = 0.25 * (rebuilt.adjoint() * u).trace().norm_sqr();
            prop_assert!((fid - 1.0).abs() < 1e-12);
            prop_assert!((back - a).norm() < 1e-10);
        }
    }
}
