//! Simulation and compilation of composite pulses for site-selective control
//! of tweezer-trapped atomic qubits.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs; IO, configuration files and thread pools live in
//! the companion `motionpulse` crate, which plugs parallelism in through
//! [`exec::Executor`].
//!
//! Conventions used throughout:
//!
//! * SI units. Times in seconds, angular frequencies in rad/s with the `2π`
//!   included, lengths in metres.
//! * Rotations are written `exp(-i a·σ)`. A [`su2::RotationVector`] `a`
//!   rotates the Bloch vector by `2|a|` about `â`.
//! * The control Hamiltonian of a pulse is
//!   `H/ħ = ½ (Re Ω σx + Im Ω σy + Δ σz)`.
//! * In a [`pulses::CompositePulse`] the first pulse acts first in time.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod budget;
pub mod consts;
pub mod error;
pub mod evolution;
pub mod exec;
pub mod motion;
pub mod pulses;
pub mod spectral;
pub mod su2;
pub mod trainer;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
