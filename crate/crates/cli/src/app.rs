//! Argument parsing and dispatch for the `motionpulse` binary.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use motionpulse_core::pulses::Baseline;
use motionpulse_core::trainer::Checkpoint;

use crate::checkpoint;
use crate::commands::{budget, compile, evaluate, spectrum, sweep, train, trained_name, Source};
use crate::config::{ExperimentConfig, Preset};
use crate::error::{CliError, Result};
use crate::parallel::Pool;
use crate::provenance::{echo_config, json_document, num, write_file, CsvTable, Provenance};

#[derive(Debug, Parser)]
#[command(name = "motionpulse", version, about = "Motion-robust composite pulses for optically addressed atoms")]
pub struct Cli {
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the pulse network and write a checkpoint.
    Train {
        #[command(flatten)]
        common: Common,
        /// Training preset: full or desk.
        #[arg(long)]
        preset: Option<String>,
        /// Epoch limit; overrides the preset.
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Ensemble fidelity of the baselines and, with a checkpoint, the trained sequence.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Trained checkpoint to report alongside the baselines.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Fidelity along one imperfection axis.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Trained checkpoint to report alongside the baselines.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// control_dI, control_dR, tweezer_dI, tweezer_dR, misalign_r or misalign_z.
        #[arg(long)]
        axis: String,
        /// First axis value (fraction, or nm for misalignment).
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        /// Last axis value.
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        /// Evenly spaced points from `--from` to `--to`.
        #[arg(long, default_value_t = 11)]
        steps: usize,
    },
    /// Error spectrum, filter function and leading-order infidelity.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        family: Family,
        /// Thermal trajectories averaged into the spectrum.
        #[arg(long)]
        realizations: Option<usize>,
    },
    /// Infidelity budget per error channel.
    Budget {
        #[command(flatten)]
        common: Common,
    },
    /// Pulse table for the configured target.
    Compile {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        family: Family,
    },
}

/// Options every subcommand shares. Each one overrides its config key.
#[derive(Debug, Args)]
pub struct Common {
    /// TOML configuration; defaults apply to anything it leaves out.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Run seed; overrides the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Target rotation angle, in units of π.
    #[arg(long)]
    pub area_pi: Option<f64>,
    /// Target axis polar angle, in units of π.
    #[arg(long, allow_hyphen_values = true)]
    pub polar_pi: Option<f64>,
    /// Target axis azimuth, in units of π.
    #[arg(long, allow_hyphen_values = true)]
    pub azimuth_pi: Option<f64>,
    /// Thermal atoms averaged over.
    #[arg(long)]
    pub atoms: Option<usize>,
    /// Evolution segments per sequence.
    #[arg(long)]
    pub segments: Option<usize>,
}

/// Which pulse sequence to use: a named baseline or a trained checkpoint.
#[derive(Debug, Args)]
pub struct Family {
    /// rect, sk1 or bb1.
    #[arg(long, conflicts_with = "checkpoint")]
    pub baseline: Option<String>,
    /// Trained checkpoint instead of a baseline.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
}

impl Common {
    fn config(&self, atoms_key: AtomsKey) -> Result<(ExperimentConfig, PathBuf)> {
        let mut cfg = ExperimentConfig::load_or_default(self.config.as_deref())?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(v) = self.area_pi {
            cfg.target.area_pi = v;
        }
        if let Some(v) = self.polar_pi {
            cfg.target.polar_pi = v;
        }
        if let Some(v) = self.azimuth_pi {
            cfg.target.azimuth_pi = v;
        }
        if let Some(n) = self.atoms {
            match atoms_key {
                AtomsKey::Report => cfg.report.atoms = n,
                AtomsKey::Budget => cfg.budget.atoms = n,
                AtomsKey::Training => cfg.training.train_atoms = Some(n),
            }
        }
        if let Some(m) = self.segments {
            cfg.report.segments = m;
        }
        let out = self.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
        Ok((cfg, out))
    }
}

#[derive(Clone, Copy)]
enum AtomsKey {
    Report,
    Budget,
    Training,
}

fn parse_preset(s: &str) -> Result<Preset> {
    match s {
        "full" => Ok(Preset::Full),
        "desk" => Ok(Preset::Desk),
        _ => Err(CliError::Usage(format!("unknown preset {s:?}; expected full or desk"))),
    }
}

fn load_checkpoint(path: Option<&Path>) -> Result<Option<(Checkpoint, String)>> {
    path.map(|p| Ok((checkpoint::load(p)?, checkpoint::file_hash(p)?))).transpose()
}

fn source_of<'a>(family: &Family, ck: Option<&'a Checkpoint>) -> Result<Source<'a>> {
    if let Some(ck) = ck {
        return Ok(Source::Trained(ck));
    }
    let name = family.baseline.as_deref().unwrap_or("rect").to_ascii_lowercase();
    Baseline::from_name(&name)
        .map(Source::Baseline)
        .ok_or_else(|| CliError::Usage(format!("unknown baseline {name:?}; expected rect, sk1 or bb1")))
}

/// Parses `args` and runs the command. Returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().try_init();
    match run(cli) {
        Ok(written) => {
            let mut out = std::io::stdout().lock();
            for p in written {
                let _ = writeln!(out, "{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("motionpulse: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    let pool = Pool::new(cli.workers)?;
    match cli.command {
        Command::Train { common, preset, epochs } => {
            let (mut cfg, out) = common.config(AtomsKey::Training)?;
            if let Some(p) = preset {
                cfg.training.preset = parse_preset(&p)?;
            }
            if let Some(e) = epochs {
                cfg.training.epochs = Some(e);
                if cfg.training.patience_epochs.is_some_and(|p| p > e) {
                    cfg.training.patience_epochs = Some(e);
                }
            }
            let cfg = cfg.resolved()?;
            let outcome = train::train(&cfg, &pool)?;
            train::write_outputs(&outcome, &cfg, &out)
        }
        Command::Evaluate { common, checkpoint } => {
            let (cfg, out) = common.config(AtomsKey::Report)?;
            let cfg = cfg.resolved()?;
            let ck = load_checkpoint(checkpoint.as_deref())?;
            let report = evaluate::evaluate(&cfg, ck.as_ref().map(|c| &c.0), ck.as_ref().map(|c| c.1.clone()), &pool)?;
            let prov = Provenance::of(&cfg);
            let mut t = CsvTable::new(evaluate::SCHEMA, &prov, &["family", "mean_fidelity", "infidelity", "stderr"]);
            for r in &report.rows {
                t.row(&[r.family.clone(), num(r.mean_fidelity), num(r.infidelity), num(r.stderr)]);
            }
            let files =
                [("evaluate.csv", t.into_string()), ("evaluate.json", json_document(evaluate::SCHEMA, &prov, &report))];
            write_all(&out, &files, "evaluate", &cfg)
        }
        Command::Sweep { common, checkpoint, axis, from, to, steps } => {
            let (cfg, out) = common.config(AtomsKey::Report)?;
            let cfg = cfg.resolved()?;
            let axis = sweep::Axis::from_name(&axis)?;
            let values = sweep::grid(from, to, steps)?;
            let ck = load_checkpoint(checkpoint.as_deref())?;
            let rows = sweep::sweep(&cfg, axis, &values, ck.as_ref().map(|c| &c.0), &pool)?;
            let name = format!("sweep_{}.csv", axis.name());
            let csv = sweep::to_csv(&rows, axis, &Provenance::of(&cfg));
            write_all(&out, &[(name.as_str(), csv)], &format!("sweep_{}", axis.name()), &cfg)
        }
        Command::Spectrum { common, family, realizations } => {
            let (mut cfg, out) = common.config(AtomsKey::Report)?;
            if let Some(n) = realizations {
                cfg.spectrum.realizations = n;
            }
            let cfg = cfg.resolved()?;
            let ck = load_checkpoint(family.checkpoint.as_deref())?;
            let src = source_of(&family, ck.as_ref().map(|c| &c.0))?;
            let run = spectrum::spectrum(&cfg, src, &pool)?;
            let prov = Provenance::of(&cfg);
            let files = [
                ("spectrum.csv", spectrum::spectrum_csv(&run, &prov)),
                ("bias.csv", spectrum::bias_csv(&run, &prov)),
                ("spectrum_summary.json", json_document(spectrum::SUMMARY_SCHEMA, &prov, &run.summary)),
            ];
            write_all(&out, &files, "spectrum", &cfg)
        }
        Command::Budget { common } => {
            let (cfg, out) = common.config(AtomsKey::Budget)?;
            let cfg = cfg.resolved()?;
            let rows = budget::budget(&cfg)?;
            let csv = budget::to_csv(&rows, &cfg, &Provenance::of(&cfg));
            write_all(&out, &[("budget.csv", csv)], "budget", &cfg)
        }
        Command::Compile { common, family } => {
            let (cfg, out) = common.config(AtomsKey::Report)?;
            let cfg = cfg.resolved()?;
            let ck = load_checkpoint(family.checkpoint.as_deref())?;
            let src = source_of(&family, ck.as_ref().map(|c| &c.0))?;
            let name = match &ck {
                Some((c, _)) => trained_name(c),
                None => src.name(),
            };
            let cp = compile::compile(&cfg, src)?;
            let csv = compile::to_csv(&cp, &name, &Provenance::of(&cfg));
            write_all(&out, &[("pulses.csv", csv)], "compile", &cfg)
        }
    }
}

fn write_all(dir: &Path, files: &[(&str, String)], stem: &str, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let mut written = Vec::with_capacity(files.len() + 1);
    for (name, text) in files {
        let path = dir.join(name);
        write_file(&path, text)?;
        written.push(path);
    }
    echo_config(dir, stem, cfg)?;
    written.push(dir.join(format!("{stem}.config.toml")));
    Ok(written)
}
