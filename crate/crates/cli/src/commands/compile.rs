//! Pulse tables for hardware.

use core::f64::consts::TAU;

use motionpulse_core::pulses::CompositePulse;

use super::Source;
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::provenance::{num, CsvTable, Provenance};

pub const SCHEMA: &str = "motionpulse.pulses/1";

pub fn compile(cfg: &ExperimentConfig, source: Source) -> Result<CompositePulse> {
    source.compile(&cfg.target()?, &cfg.limits())
}

/// One row per pulse in application order; frequencies as `ω/2π` in Hz.
pub fn to_csv(cp: &CompositePulse, family: &str, prov: &Provenance) -> String {
    let notes = [("family", family.to_string()), ("pulses", cp.len().to_string())];
    let columns = ["index", "re_omega_2pi_hz", "im_omega_2pi_hz", "delta_2pi_hz", "tau_s"];
    let mut t = CsvTable::with_notes(SCHEMA, prov, &notes, &columns);
    for (i, p) in cp.pulses().iter().enumerate() {
        t.row(&[i.to_string(), num(p.omega.re / TAU), num(p.omega.im / TAU), num(p.detuning / TAU), num(p.duration)]);
    }
    t.into_string()
}
