//! Infidelity budget over the error channels of a single pulse.

use core::f64::consts::{PI, TAU};

use motionpulse_core::budget::{budget_table, decade, BudgetEntry, BudgetInputs};
use motionpulse_core::motion::sample_thermal;

use super::{stream_rng, STREAM_BUDGET};
use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::provenance::{num, CsvTable, Provenance};

pub const SCHEMA: &str = "motionpulse.budget/1";

pub fn budget(cfg: &ExperimentConfig) -> Result<Vec<BudgetEntry>> {
    let inputs = cfg.budget_inputs();
    if !inputs.is_valid() {
        return Err(CliError::Config("budget inputs must be positive and finite".into()));
    }
    if cfg.budget.atoms == 0 {
        return Err(CliError::Config("budget.atoms must be positive".into()));
    }
    let ctx = cfg.motion();
    let atoms = sample_thermal(&ctx.trap, &mut stream_rng(cfg.seed, STREAM_BUDGET), cfg.budget.atoms);
    let rows = budget_table(&inputs, &ctx, &atoms);
    if let Some(bad) = rows.iter().find(|r| !(r.value.is_finite() && r.value >= 0.0)) {
        return Err(CliError::NumericCheck(format!("budget channel {} evaluated to {}", bad.channel, bad.value)));
    }
    Ok(rows)
}

/// Inputs in the units of the configuration file, for the table header.
fn inputs_echo(inputs: &BudgetInputs, atoms: usize) -> Vec<(&'static str, String)> {
    let ls = &inputs.light_shift;
    let per_um2 = TAU * 1e3 * 1e12;
    vec![
        ("omega_c_2pi_MHz", num(inputs.omega_c / TAU / 1e6)),
        ("area_pi", num(inputs.area / PI)),
        ("duration_s", num(inputs.duration())),
        ("xi", num(inputs.xi)),
        ("b_field_G", num(inputs.b_gauss)),
        ("mu_MHz_per_G", num(inputs.mu_mhz_per_gauss)),
        ("gamma_2pi_MHz", num(inputs.gamma / TAU / 1e6)),
        ("delta_gamma_2pi_GHz", num(inputs.delta_gamma / TAU / 1e9)),
        ("light_shift_offset_2pi_kHz", num(ls.offset / TAU / 1e3)),
        ("light_shift_radial_2pi_kHz_per_um2", num(ls.radial / per_um2)),
        ("light_shift_axial_2pi_kHz_per_um2", num(ls.axial / per_um2)),
        ("atoms", atoms.to_string()),
    ]
}

pub fn to_csv(rows: &[BudgetEntry], cfg: &ExperimentConfig, prov: &Provenance) -> String {
    let notes = inputs_echo(&cfg.budget_inputs(), cfg.budget.atoms);
    let columns = ["channel", "error_type", "value", "alternate", "within_validity", "decade"];
    let mut t = CsvTable::with_notes(SCHEMA, prov, &notes, &columns);
    for r in rows {
        t.row(&[
            r.channel.to_string(),
            r.error_type.to_string(),
            num(r.value),
            r.alternate.map(num).unwrap_or_default(),
            r.within_validity.to_string(),
            if r.value > 0.0 { decade(r.value).to_string() } else { String::new() },
        ]);
    }
    t.into_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ExperimentConfig {
        let mut c = ExperimentConfig::default();
        c.budget.atoms = 500;
        c.resolved().unwrap()
    }

    #[test]
    fn four_channels_in_table_order() {
        let rows = budget(&cfg()).unwrap();
        let names: Vec<&str> = rows.iter().map(|r| r.channel).collect();
        assert_eq!(names, ["atom_motion", "differential_light_shift", "polarization_mixing", "incoherent_scattering"]);
    }

    #[test]
    fn header_echoes_inputs() {
        let c = cfg();
        let csv = to_csv(&budget(&c).unwrap(), &c, &Provenance::of(&c));
        let head = csv.lines().next().unwrap();
        assert!(head.contains(" gamma_2pi_MHz=5.746"), "{head}");
        assert!(head.contains(" delta_gamma_2pi_GHz=100.0"), "{head}");
        assert!(head.contains(" light_shift_radial_2pi_kHz_per_um2=120"), "{head}");
        assert_eq!(csv.lines().count(), 6);
    }

    #[test]
    fn empty_ensemble_is_a_config_error() {
        let mut c = cfg();
        c.budget.atoms = 0;
        assert_eq!(budget(&c).unwrap_err().exit_code(), 1);
    }
}
