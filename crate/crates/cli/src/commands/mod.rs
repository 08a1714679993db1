pub mod budget;
pub mod compile;
pub mod evaluate;
pub mod spectrum;
pub mod sweep;
pub mod train;

use motionpulse_core::pulses::{Baseline, CompositePulse, HardwareLimits};
use motionpulse_core::su2::TargetRotation;
use motionpulse_core::trainer::Checkpoint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

// Random streams under the run seed. The trainer uses streams 1–3 of the
// same seed for initialisation, shuffling and its gradient audit.
pub const STREAM_DATASET: u64 = 10;
pub const STREAM_EVALUATION: u64 = 11;
pub const STREAM_SPECTRUM: u64 = 12;
pub const STREAM_BUDGET: u64 = 13;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Name used for a trained network in reports: `cp3` or `cp4`.
pub fn trained_name(ck: &Checkpoint) -> String {
    format!("cp{}", ck.net.pulse_count())
}

/// Where a pulse sequence comes from.
#[derive(Debug, Clone, Copy)]
pub enum Source<'a> {
    Baseline(Baseline),
    Trained(&'a Checkpoint),
}

impl Source<'_> {
    pub fn name(&self) -> String {
        match self {
            Source::Baseline(b) => b.name().to_string(),
            Source::Trained(ck) => trained_name(ck),
        }
    }

    pub fn compile(&self, target: &TargetRotation, lim: &HardwareLimits) -> Result<CompositePulse> {
        Ok(match self {
            Source::Baseline(b) => b.for_target(target, lim)?,
            Source::Trained(ck) => ck.compile(target)?,
        })
    }
}

/// Rectangle, rotated SK1 and BB1, then the trained sequence if there is one.
pub fn report_sources(checkpoint: Option<&Checkpoint>) -> Vec<Source<'_>> {
    let mut v =
        vec![Source::Baseline(Baseline::Rect), Source::Baseline(Baseline::Sk1), Source::Baseline(Baseline::Bb1)];
    v.extend(checkpoint.map(Source::Trained));
    v
}
