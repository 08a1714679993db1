//! Fidelity against one optical imperfection at a time.

use motionpulse_core::exec::Executor;
use motionpulse_core::motion::{apply_inhomogeneity, sample_thermal, InhomogeneityModel, MotionContext};
use motionpulse_core::trainer::Checkpoint;

use super::evaluate::fidelity_row;
use super::{report_sources, stream_rng, STREAM_EVALUATION};
use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::provenance::{num, CsvTable, Provenance};

pub const SCHEMA: &str = "motionpulse.sweep/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Control-beam peak intensity, fractional.
    ControlDI,
    /// Control-beam radius, fractional (peak intensity held).
    ControlDR,
    /// Tweezer peak intensity, fractional; rescales the trap.
    TweezerDI,
    /// Tweezer radius, fractional; rescales the trap.
    TweezerDR,
    /// Radial control-beam offset, nm.
    MisalignR,
    /// Axial control-beam offset, nm.
    MisalignZ,
}

impl Axis {
    pub const ALL: [Axis; 6] =
        [Axis::ControlDI, Axis::ControlDR, Axis::TweezerDI, Axis::TweezerDR, Axis::MisalignR, Axis::MisalignZ];

    pub fn name(&self) -> &'static str {
        match self {
            Axis::ControlDI => "control_dI",
            Axis::ControlDR => "control_dR",
            Axis::TweezerDI => "tweezer_dI",
            Axis::TweezerDR => "tweezer_dR",
            Axis::MisalignR => "misalign_r",
            Axis::MisalignZ => "misalign_z",
        }
    }

    pub fn unit(&self) -> &'static str {
        match self {
            Axis::MisalignR | Axis::MisalignZ => "nm",
            _ => "fraction",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Axis::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Axis::ALL.iter().map(|a| a.name()).collect();
            CliError::Usage(format!("unknown sweep axis {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

/// `steps` evenly spaced values from `from` to `to` inclusive.
pub fn grid(from: f64, to: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !from.is_finite() || !to.is_finite() {
        return Err(CliError::Usage("sweep needs a finite range and at least one step".into()));
    }
    if steps == 1 || from == to {
        return Ok(vec![from]);
    }
    Ok((0..steps).map(|i| from + (to - from) * i as f64 / (steps - 1) as f64).collect())
}

/// Trap and control beam with the configured setup perturbed along `axis`.
pub fn perturbed(cfg: &ExperimentConfig, axis: Axis, value: f64) -> Result<MotionContext> {
    let mut ctx = cfg.motion();
    let deviation = |d_intensity: f64, d_radius: f64| {
        let inh = InhomogeneityModel { d_intensity, d_radius: [d_radius; 2] };
        if inh.is_valid() {
            Ok(inh)
        } else {
            Err(CliError::Usage(format!("{} = {value} leaves no beam", axis.name())))
        }
    };
    match axis {
        Axis::ControlDI => ctx.control = apply_inhomogeneity(&ctx.control, &deviation(value, 0.0)?),
        Axis::ControlDR => ctx.control = apply_inhomogeneity(&ctx.control, &deviation(0.0, value)?),
        Axis::TweezerDI | Axis::TweezerDR => {
            let inh = if axis == Axis::TweezerDI { deviation(value, 0.0)? } else { deviation(0.0, value)? };
            let nominal = cfg.tweezer();
            ctx.trap = ctx.trap.rescaled(&nominal, &apply_inhomogeneity(&nominal, &inh));
        }
        Axis::MisalignR => ctx.control.offset[0] += value * 1e-9,
        Axis::MisalignZ => ctx.control.offset[2] += value * 1e-9,
    }
    Ok(ctx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub family: String,
    pub mean_fidelity: f64,
    pub stderr: f64,
}

/// Every family at every grid point. Atoms are redrawn from the same random
/// stream at each point, so curves differ only through the physics.
pub fn sweep<X: Executor>(
    cfg: &ExperimentConfig,
    axis: Axis,
    values: &[f64],
    checkpoint: Option<&Checkpoint>,
    exec: &X,
) -> Result<Vec<SweepRow>> {
    let target = cfg.target()?;
    let lim = cfg.limits();
    let sources = report_sources(checkpoint);
    let sequences = sources.iter().map(|s| Ok((s.name(), s.compile(&target, &lim)?))).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(values.len() * sequences.len());
    for &value in values {
        let ctx = perturbed(cfg, axis, value)?;
        let atoms = sample_thermal(&ctx.trap, &mut stream_rng(cfg.seed, STREAM_EVALUATION), cfg.report.atoms);
        for (name, cp) in &sequences {
            let r = fidelity_row(name.clone(), cp, &target, &atoms, &ctx, cfg.report.segments, exec)?;
            rows.push(SweepRow { value, family: r.family, mean_fidelity: r.mean_fidelity, stderr: r.stderr });
        }
    }
    Ok(rows)
}

pub fn to_csv(rows: &[SweepRow], axis: Axis, prov: &Provenance) -> String {
    let notes = [("axis", axis.name().to_string()), ("unit", axis.unit().to_string())];
    let mut t = CsvTable::with_notes(SCHEMA, prov, &notes, &["axis_value", "family", "mean_fidelity", "stderr"]);
    for r in rows {
        t.row(&[num(r.value), r.family.clone(), num(r.mean_fidelity), num(r.stderr)]);
    }
    t.into_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commands::evaluate::evaluate;
    use motionpulse_core::exec::Sequential;

    fn small() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        cfg.report.atoms = 64;
        cfg.report.segments = 40;
        cfg.resolved().unwrap()
    }

    #[test]
    fn axis_names_round_trip() {
        for a in Axis::ALL {
            assert_eq!(Axis::from_name(a.name()).unwrap(), a);
        }
        assert!(Axis::from_name("control_radius").is_err());
    }

    #[test]
    fn grid_endpoints() {
        assert_eq!(grid(-0.1, 0.1, 3).unwrap(), vec![-0.1, 0.0, 0.1]);
        assert_eq!(grid(0.0, 0.0, 1).unwrap(), vec![0.0]);
        assert!(grid(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn zero_deviation_is_the_nominal_setup() {
        let cfg = small();
        for a in Axis::ALL {
            let ctx = perturbed(&cfg, a, 0.0).unwrap();
            assert_eq!(ctx, cfg.motion(), "{}", a.name());
        }
    }

    #[test]
    fn zero_width_sweep_matches_evaluate() {
        let cfg = small();
        let rows = sweep(&cfg, Axis::ControlDI, &[0.0], None, &Sequential).unwrap();
        let report = evaluate(&cfg, None, None, &Sequential).unwrap();
        assert_eq!(rows.len(), report.rows.len());
        for (s, e) in rows.iter().zip(&report.rows) {
            assert_eq!(s.family, e.family);
            assert_eq!(s.mean_fidelity.to_bits(), e.mean_fidelity.to_bits());
        }
    }

    #[test]
    fn tweezer_intensity_stiffens_the_trap() {
        let cfg = small();
        let ctx = perturbed(&cfg, Axis::TweezerDI, 0.21).unwrap();
        let ratio = ctx.trap.omega[0] / cfg.trap().omega[0];
        assert!((ratio - 1.1).abs() < 1e-12);
    }

    #[test]
    fn csv_has_one_row_per_point_and_family() {
        let cfg = small();
        let rows = sweep(&cfg, Axis::MisalignR, &[0.0, 40.0], None, &Sequential).unwrap();
        let csv = to_csv(&rows, Axis::MisalignR, &Provenance::of(&cfg));
        let mut lines = csv.lines();
        assert!(lines.next().unwrap().contains("axis=misalign_r unit=nm"));
        assert_eq!(lines.next(), Some("axis_value,family,mean_fidelity,stderr"));
        assert_eq!(lines.count(), 6);
    }
}
