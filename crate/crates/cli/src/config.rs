//! Experiment configuration.
//!
//! A TOML file whose keys carry their unit (`depth_mK`, `omega_r_2pi_kHz`).
//! Angular frequencies are written as `ω/2π` in the unit named by the key;
//! angles as multiples of π. Every field has a default, so an empty file is a
//! valid configuration; the training preset fills whatever the `[training]`
//! table leaves out.

use std::f64::consts::PI;
use std::path::Path;

use motionpulse_core::budget::{BudgetInputs, LightShiftModel};
use motionpulse_core::consts::{K_B, RB87_MASS, TWO_PI};
use motionpulse_core::motion::{BeamGeometry, MotionContext, TrapParams};
use motionpulse_core::pulses::{Baseline, HardwareLimits};
use motionpulse_core::spectral::MIN_REALIZATIONS;
use motionpulse_core::su2::TargetRotation;
use motionpulse_core::trainer::network::TargetBox;
use motionpulse_core::trainer::TrainConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

const AMU: f64 = 1.660_539_066_60e-27;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Where outputs go unless `--out` says otherwise. Left out of the
    /// resolved config, so relocating a run does not change its hash.
    #[serde(skip_serializing)]
    pub output_dir: String,
    pub trap: TrapSection,
    pub control: ControlSection,
    pub limits: LimitsSection,
    pub target: TargetSection,
    pub training: TrainingSection,
    pub report: ReportSection,
    pub spectrum: SpectrumSection,
    pub budget: BudgetSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrapSection {
    #[serde(rename = "depth_mK")]
    pub depth_mk: f64,
    #[serde(rename = "omega_r_2pi_kHz")]
    pub omega_r_2pi_khz: f64,
    #[serde(rename = "omega_z_2pi_kHz")]
    pub omega_z_2pi_khz: f64,
    #[serde(rename = "temperature_uK")]
    pub temperature_uk: f64,
    pub mass_amu: f64,
    /// Only used to rescale the trap in tweezer sweeps.
    pub tweezer_radius_um: f64,
    pub tweezer_wavelength_nm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlSection {
    pub radius_um: f64,
    pub wavelength_nm: f64,
    /// Beam centre offset from the trap centre.
    pub offset_r_nm: f64,
    pub offset_z_nm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitsSection {
    #[serde(rename = "omega_max_2pi_MHz")]
    pub omega_max_2pi_mhz: f64,
    #[serde(rename = "delta_max_2pi_MHz")]
    pub delta_max_2pi_mhz: f64,
    pub chi_min: f64,
    pub chi_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetSection {
    pub area_pi: f64,
    pub polar_pi: f64,
    pub azimuth_pi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Full,
    Desk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    pub preset: Preset,
    pub baseline: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_every_epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cosine_period_epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patience_epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segments: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub area_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polar_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train_atoms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub val_targets: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub val_atoms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hidden_layers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hidden_width: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit_weights: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub area_min_pi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub area_max_pi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polar_min_pi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polar_max_pi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    pub segments: usize,
    pub atoms: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    pub realizations: usize,
    pub window_us: f64,
    pub step_ns: f64,
    #[serde(rename = "omega_max_2pi_MHz")]
    pub omega_max_2pi_mhz: f64,
    /// Points on the `G(⟨ε⟩)` curve, spread over `±bias_span`.
    pub bias_points: usize,
    pub bias_span: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetSection {
    #[serde(rename = "omega_c_2pi_MHz")]
    pub omega_c_2pi_mhz: f64,
    pub area_pi: f64,
    pub xi: f64,
    #[serde(rename = "b_field_G")]
    pub b_field_g: f64,
    #[serde(rename = "mu_MHz_per_G")]
    pub mu_mhz_per_g: f64,
    /// D1 natural linewidth of ⁸⁷Rb (Steck, "Rubidium 87 D Line Data").
    #[serde(rename = "gamma_2pi_MHz")]
    pub gamma_2pi_mhz: f64,
    #[serde(rename = "delta_gamma_2pi_GHz")]
    pub delta_gamma_2pi_ghz: f64,
    #[serde(rename = "light_shift_offset_2pi_kHz")]
    pub light_shift_offset_2pi_khz: f64,
    #[serde(rename = "light_shift_radial_2pi_kHz_per_um2")]
    pub light_shift_radial_2pi_khz_per_um2: f64,
    #[serde(rename = "light_shift_axial_2pi_kHz_per_um2")]
    pub light_shift_axial_2pi_khz_per_um2: f64,
    pub atoms: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            output_dir: "out".into(),
            trap: TrapSection::default(),
            control: ControlSection::default(),
            limits: LimitsSection::default(),
            target: TargetSection::default(),
            training: TrainingSection::default(),
            report: ReportSection::default(),
            spectrum: SpectrumSection::default(),
            budget: BudgetSection::default(),
        }
    }
}

impl Default for TrapSection {
    fn default() -> Self {
        TrapSection {
            depth_mk: 0.8,
            omega_r_2pi_khz: 155.0,
            omega_z_2pi_khz: 42.0,
            temperature_uk: 30.0,
            mass_amu: RB87_MASS / AMU,
            tweezer_radius_um: 0.7,
            tweezer_wavelength_nm: 852.0,
        }
    }
}

impl Default for ControlSection {
    fn default() -> Self {
        ControlSection { radius_um: 1.0, wavelength_nm: 795.0, offset_r_nm: 0.0, offset_z_nm: 0.0 }
    }
}

impl Default for LimitsSection {
    fn default() -> Self {
        LimitsSection { omega_max_2pi_mhz: 1.0, delta_max_2pi_mhz: 1.0, chi_min: 0.1, chi_max: 1.0 }
    }
}

impl Default for TargetSection {
    fn default() -> Self {
        TargetSection { area_pi: 1.0, polar_pi: 0.5, azimuth_pi: 0.0 }
    }
}

impl Default for TrainingSection {
    fn default() -> Self {
        TrainingSection {
            preset: Preset::Full,
            baseline: "SK1".into(),
            epochs: None,
            batch_size: None,
            lr0: None,
            decay_every_epochs: None,
            cosine_period_epochs: None,
            patience_epochs: None,
            segments: None,
            area_points: None,
            polar_points: None,
            train_atoms: None,
            val_targets: None,
            val_atoms: None,
            hidden_layers: None,
            hidden_width: None,
            audit_weights: None,
            area_min_pi: None,
            area_max_pi: None,
            polar_min_pi: None,
            polar_max_pi: None,
        }
    }
}

impl Default for ReportSection {
    fn default() -> Self {
        ReportSection { segments: 100, atoms: 10_000 }
    }
}

impl Default for SpectrumSection {
    fn default() -> Self {
        SpectrumSection {
            realizations: 400,
            window_us: 500.0,
            step_ns: 200.0,
            omega_max_2pi_mhz: 1.0,
            bias_points: 41,
            bias_span: 0.05,
        }
    }
}

impl Default for BudgetSection {
    fn default() -> Self {
        BudgetSection {
            omega_c_2pi_mhz: 1.0,
            area_pi: 1.0,
            xi: 0.016,
            b_field_g: 10.0,
            mu_mhz_per_g: motionpulse_core::budget::DEFAULT_MAGNETIC_MOMENT_MHZ_PER_G,
            gamma_2pi_mhz: 5.746,
            delta_gamma_2pi_ghz: 100.0,
            light_shift_offset_2pi_khz: 0.0,
            light_shift_radial_2pi_khz_per_um2: 120.0,
            light_shift_axial_2pi_khz_per_um2: 8.8,
            atoms: 10_000,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    /// Fills the training table from its preset and checks every section.
    pub fn resolved(mut self) -> Result<Self> {
        let base = self.training.preset_config(self.seed)?;
        let t = &mut self.training;
        let epochs = *t.epochs.get_or_insert(base.epochs);
        t.batch_size.get_or_insert(base.batch_size);
        t.lr0.get_or_insert(base.lr0);
        t.decay_every_epochs.get_or_insert(base.decay_every);
        t.cosine_period_epochs.get_or_insert(base.cosine_period);
        t.patience_epochs.get_or_insert(base.patience.min(epochs));
        t.segments.get_or_insert(base.segments);
        t.area_points.get_or_insert(base.area_points);
        t.polar_points.get_or_insert(base.polar_points);
        t.train_atoms.get_or_insert(base.train_atoms);
        t.val_targets.get_or_insert(base.val_targets);
        t.val_atoms.get_or_insert(base.val_atoms);
        t.hidden_layers.get_or_insert(base.hidden_layers);
        t.hidden_width.get_or_insert(base.hidden_width);
        t.audit_weights.get_or_insert(base.audit_weights);
        t.area_min_pi.get_or_insert(base.target_box.area[0] / PI);
        t.area_max_pi.get_or_insert(base.target_box.area[1] / PI);
        t.polar_min_pi.get_or_insert(base.target_box.polar[0] / PI);
        t.polar_max_pi.get_or_insert(base.target_box.polar[1] / PI);
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(CliError::Config(format!("{what} must be positive and finite")));
        let tr = &self.trap;
        for (name, v) in [
            ("trap.depth_mK", tr.depth_mk),
            ("trap.omega_r_2pi_kHz", tr.omega_r_2pi_khz),
            ("trap.omega_z_2pi_kHz", tr.omega_z_2pi_khz),
            ("trap.mass_amu", tr.mass_amu),
            ("trap.tweezer_radius_um", tr.tweezer_radius_um),
            ("trap.tweezer_wavelength_nm", tr.tweezer_wavelength_nm),
            ("control.radius_um", self.control.radius_um),
            ("control.wavelength_nm", self.control.wavelength_nm),
            ("spectrum.window_us", self.spectrum.window_us),
            ("spectrum.step_ns", self.spectrum.step_ns),
            ("spectrum.omega_max_2pi_MHz", self.spectrum.omega_max_2pi_mhz),
            ("budget.omega_c_2pi_MHz", self.budget.omega_c_2pi_mhz),
            ("budget.area_pi", self.budget.area_pi),
            ("budget.gamma_2pi_MHz", self.budget.gamma_2pi_mhz),
            ("budget.delta_gamma_2pi_GHz", self.budget.delta_gamma_2pi_ghz),
            ("target.area_pi", self.target.area_pi),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(name);
            }
        }
        if !(tr.temperature_uk >= 0.0) {
            return Err(CliError::Config("trap.temperature_uK must be non-negative".into()));
        }
        if self.report.segments == 0 || self.report.atoms == 0 {
            return Err(CliError::Config("report.segments and report.atoms must be positive".into()));
        }
        if self.spectrum.realizations < MIN_REALIZATIONS {
            return Err(CliError::Config(format!("spectrum.realizations must be at least {MIN_REALIZATIONS}")));
        }
        if self.spectrum.bias_points < 2 || !(self.spectrum.bias_span > 0.0) {
            return Err(CliError::Config("spectrum needs at least two bias points over a positive span".into()));
        }
        self.limits().validated().map_err(|e| CliError::Config(e.to_string()))?;
        self.train_config()?;
        Ok(())
    }

    /// SHA-256 of the resolved configuration as written by [`Self::to_toml`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration always serializes")
    }

    pub fn trap(&self) -> TrapParams {
        let t = &self.trap;
        let trap = TrapParams {
            depth: K_B * t.depth_mk * 1e-3,
            omega: [
                TWO_PI * t.omega_r_2pi_khz * 1e3,
                TWO_PI * t.omega_r_2pi_khz * 1e3,
                TWO_PI * t.omega_z_2pi_khz * 1e3,
            ],
            mass: t.mass_amu * AMU,
            temperature: t.temperature_uk * 1e-6,
        };
        trap.check();
        trap
    }

    pub fn tweezer(&self) -> BeamGeometry {
        BeamGeometry::symmetric(self.trap.tweezer_radius_um * 1e-6, self.trap.tweezer_wavelength_nm * 1e-9)
    }

    pub fn control(&self) -> BeamGeometry {
        let c = &self.control;
        BeamGeometry::symmetric(c.radius_um * 1e-6, c.wavelength_nm * 1e-9).with_offset([
            c.offset_r_nm * 1e-9,
            0.0,
            c.offset_z_nm * 1e-9,
        ])
    }

    pub fn motion(&self) -> MotionContext {
        MotionContext { trap: self.trap(), control: self.control() }
    }

    pub fn limits(&self) -> HardwareLimits {
        let l = &self.limits;
        HardwareLimits {
            omega_max: TWO_PI * l.omega_max_2pi_mhz * 1e6,
            delta_max: TWO_PI * l.delta_max_2pi_mhz * 1e6,
            chi_min: l.chi_min,
            chi_max: l.chi_max,
        }
    }

    pub fn target(&self) -> Result<TargetRotation> {
        let t = &self.target;
        TargetRotation::new(t.area_pi * PI, t.polar_pi * PI, t.azimuth_pi * PI)
            .validated()
            .map_err(|e| CliError::Config(format!("target: {e}")))
    }

    /// Training settings; fields left unset fall back to the preset.
    pub fn train_config(&self) -> Result<TrainConfig> {
        let t = &self.training;
        let base = t.preset_config(self.seed)?;
        let area = [
            t.area_min_pi.map_or(base.target_box.area[0], |v| v * PI),
            t.area_max_pi.map_or(base.target_box.area[1], |v| v * PI),
        ];
        let polar = [
            t.polar_min_pi.map_or(base.target_box.polar[0], |v| v * PI),
            t.polar_max_pi.map_or(base.target_box.polar[1], |v| v * PI),
        ];
        if !(area[0] > 0.0 && area[1] > area[0] && polar[0] > 0.0 && polar[1] > polar[0] && polar[1] < PI) {
            return Err(CliError::Config("training target box is empty or outside (0, π)".into()));
        }
        let epochs = t.epochs.unwrap_or(base.epochs);
        let cfg = TrainConfig {
            epochs,
            batch_size: t.batch_size.unwrap_or(base.batch_size),
            lr0: t.lr0.unwrap_or(base.lr0),
            decay_every: t.decay_every_epochs.unwrap_or(base.decay_every),
            cosine_period: t.cosine_period_epochs.unwrap_or(base.cosine_period),
            // a shortened run keeps its full length unless told otherwise
            patience: t.patience_epochs.unwrap_or(base.patience.min(epochs)),
            segments: t.segments.unwrap_or(base.segments),
            area_points: t.area_points.unwrap_or(base.area_points),
            polar_points: t.polar_points.unwrap_or(base.polar_points),
            train_atoms: t.train_atoms.unwrap_or(base.train_atoms),
            val_targets: t.val_targets.unwrap_or(base.val_targets),
            val_atoms: t.val_atoms.unwrap_or(base.val_atoms),
            hidden_layers: t.hidden_layers.unwrap_or(base.hidden_layers),
            hidden_width: t.hidden_width.unwrap_or(base.hidden_width),
            audit_weights: t.audit_weights.unwrap_or(base.audit_weights),
            limits: self.limits(),
            target_box: TargetBox { area, polar },
            ..base
        };
        cfg.validated().map_err(|e| CliError::Config(format!("training: {e}")))
    }

    pub fn budget_inputs(&self) -> BudgetInputs {
        let b = &self.budget;
        // kHz/µm² → rad/s per m²
        let per_um2 = TWO_PI * 1e3 * 1e12;
        BudgetInputs {
            omega_c: TWO_PI * b.omega_c_2pi_mhz * 1e6,
            area: b.area_pi * PI,
            xi: b.xi,
            b_gauss: b.b_field_g,
            mu_mhz_per_gauss: b.mu_mhz_per_g,
            gamma: TWO_PI * b.gamma_2pi_mhz * 1e6,
            delta_gamma: TWO_PI * b.delta_gamma_2pi_ghz * 1e9,
            light_shift: LightShiftModel {
                offset: TWO_PI * b.light_shift_offset_2pi_khz * 1e3,
                radial: b.light_shift_radial_2pi_khz_per_um2 * per_um2,
                axial: b.light_shift_axial_2pi_khz_per_um2 * per_um2,
            },
        }
    }
}

impl TrainingSection {
    fn baseline(&self) -> Result<Baseline> {
        match Baseline::from_name(&self.baseline.to_ascii_lowercase()) {
            Some(b @ (Baseline::Sk1 | Baseline::Bb1)) => Ok(b),
            _ => Err(CliError::Config(format!("training.baseline must be SK1 or BB1, got {:?}", self.baseline))),
        }
    }

    fn preset_config(&self, seed: u64) -> Result<TrainConfig> {
        let baseline = self.baseline()?;
        Ok(match self.preset {
            Preset::Full => TrainConfig::full(baseline, seed),
            Preset::Desk => TrainConfig::desk(baseline, seed),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_table_defaults() {
        let cfg = ExperimentConfig::parse("").unwrap().resolved().unwrap();
        let trap = cfg.trap();
        assert!((trap.omega[0] / TWO_PI - 155e3).abs() < 1e-6);
        assert!((trap.omega[2] / TWO_PI - 42e3).abs() < 1e-6);
        assert!((trap.mass / RB87_MASS - 1.0).abs() < 1e-12);
        assert_eq!(cfg.report.segments, 100);
        assert_eq!(cfg.report.atoms, 10_000);
        assert_eq!(cfg.training.segments, Some(20));
        assert_eq!(cfg.training.epochs, Some(8000));
    }

    #[test]
    fn desk_preset_fills_unset_fields() {
        let cfg = ExperimentConfig::parse("[training]\npreset = \"desk\"\nepochs = 40\n").unwrap().resolved().unwrap();
        let tc = cfg.train_config().unwrap();
        assert_eq!((tc.area_points, tc.polar_points, tc.train_atoms), (8, 4, 32));
        assert_eq!(tc.epochs, 40);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::parse("[trap]\ndepth = 1.0\n").is_err());
        assert!(ExperimentConfig::parse("[training]\nbaseline = \"rect\"\n").unwrap().resolved().is_err());
    }

    #[test]
    fn resolved_config_round_trips_with_stable_hash() {
        let cfg = ExperimentConfig::parse("seed = 9\n[training]\npreset = \"desk\"\n").unwrap().resolved().unwrap();
        let again = ExperimentConfig::parse(&cfg.to_toml()).unwrap().resolved().unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash(), again.hash());
        let mut other = cfg.clone();
        other.seed = 10;
        assert_ne!(cfg.hash(), other.hash());
    }

    #[test]
    fn light_shift_units() {
        let b = ExperimentConfig::default().budget_inputs();
        // 120 kHz/µm² at 1 µm
        let shift = b.light_shift.radial * 1e-12 / TWO_PI;
        assert!((shift - 120e3).abs() < 1e-6);
    }
}
