//! Experiment harness for `cosetlab`: a registry of seeded experiments, each
//! producing a JSON report with its configuration, per-trial records and
//! pass/fail checks against the tolerances in `tolerances.toml`.

pub mod experiments;
pub mod report;
pub mod stats;
pub mod tolerances;

pub use experiments::{find, run, Ctx, Experiment, Outcome, REGISTRY};
pub use report::{Check, Report, RunConfig, SCHEMA};
pub use tolerances::Tolerances;

use cosetlab::oracle::Seed;

/// Parses a seed given either as a decimal `u64` or as 64 hex digits.
pub fn parse_seed(s: &str) -> anyhow::Result<Seed> {
    if let Ok(x) = s.parse::<u64>() {
        return Ok(Seed::from_u64(x));
    }
    Seed::from_hex(s).map_err(|e| anyhow::anyhow!("bad seed '{s}': {e}"))
}
