//! The experiment registry. Every experiment is a pure function of its
//! [`Ctx`]: trial `i` draws its randomness from `seed.derive(label)` indexed by
//! `i`, so reports do not depend on scheduling.

mod binding;
mod collapsing;
mod oracles;
mod pipelines;
mod snark;
mod states;

use std::collections::BTreeMap;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{anyhow, bail, Context as _};
use cosetlab::oracle::Seed;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::report::{Check, Report, RunConfig, SCHEMA};
use crate::tolerances::Tolerances;

pub use collapsing::{collapsing_point, CollapsingPoint};
pub use pipelines::{obf_demo, pvqfhe_demo, ObfDemo, PvDemo};

pub struct Ctx<'a> {
    pub seed: Seed,
    pub trials: Option<usize>,
    pub params: &'a BTreeMap<String, String>,
    pub tol: &'a Tolerances,
}

impl Ctx<'_> {
    /// The main trial count: the `--trials` override or the manifest value.
    pub fn trials_or(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }

    pub fn param<T: FromStr>(&self, key: &str, default: T) -> anyhow::Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| anyhow!("parameter {key}={v}: {e}")),
        }
    }

    pub fn stream(&self, label: &str) -> Seed {
        self.seed.derive(label, &[])
    }

    pub fn trial_rng(&self, label: &str, i: usize) -> ChaCha20Rng {
        self.stream(label).derive_index("trial", i as u64).rng()
    }

    /// Runs `n` independent trials in parallel, results in trial order.
    pub fn trials<T, F>(&self, label: &str, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize, &mut ChaCha20Rng) -> T + Sync + Send,
    {
        let base = self.stream(label);
        (0..n).into_par_iter().map(|i| f(i, &mut base.derive_index("trial", i as u64).rng())).collect()
    }
}

#[derive(Default)]
pub struct Outcome {
    pub records: Vec<Value>,
    pub summary: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn record<T: Serialize>(&mut self, r: T) {
        self.records.push(serde_json::to_value(r).expect("record serialises"));
    }

    pub fn summarize(&mut self, key: &str, v: f64) {
        self.summary.insert(key.into(), v);
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }
}

pub type ExperimentFn = fn(&Ctx) -> anyhow::Result<Outcome>;

pub struct Experiment {
    pub name: &'static str,
    pub about: &'static str,
    pub run: ExperimentFn,
    /// Wall-clock limit from the manifest, if any.
    pub time_limit: fn(&Tolerances) -> Option<f64>,
}

fn no_limit(_: &Tolerances) -> Option<f64> {
    None
}

pub const REGISTRY: &[Experiment] = &[
    Experiment {
        name: "collapsing-closed-form",
        about: "entries of the averaged coset projection on |+>^n against the closed form",
        run: collapsing::closed_form,
        time_limit: |t| Some(t.collapsing.time_limit_s),
    },
    Experiment {
        name: "collapsing-distance",
        about: "distance between coset projection and full measurement, exact and Monte Carlo",
        run: collapsing::distance,
        time_limit: no_limit,
    },
    Experiment { name: "coset-rotation", about: "dense H.Phase.H rotation between coset slices", run: states::rotation, time_limit: no_limit },
    Experiment { name: "pfc-correctness", about: "commitment Z/X openings against direct measurement", run: states::pfc_correctness, time_limit: no_limit },
    Experiment { name: "oss", about: "one-shot signature correctness and the measure-then-rotate cloner", run: states::oss, time_limit: no_limit },
    Experiment { name: "binding-calibration", about: "guessing and control adversaries in both binding games", run: binding::calibration, time_limit: no_limit },
    Experiment { name: "snark", about: "completeness, extraction, witness search and soundness of the toy SNARK", run: snark::snark, time_limit: no_limit },
    Experiment { name: "compressed-oracle", about: "Decomp involution and classical transcripts through the compressed oracle", run: oracles::compressed, time_limit: no_limit },
    Experiment { name: "small-range", about: "small-range sampler image size and collision statistic", run: oracles::small_range, time_limit: no_limit },
    Experiment {
        name: "pipelines",
        about: "verifiable QFHE and obfuscation over the circuit corpus",
        run: pipelines::pipelines,
        time_limit: |t| Some(t.pipelines.time_limit_s),
    },
];

pub fn find(name: &str) -> Option<&'static Experiment> {
    REGISTRY.iter().find(|e| e.name == name)
}

pub fn run(config: &RunConfig) -> anyhow::Result<Report> {
    run_with(config, &Tolerances::builtin())
}

pub fn run_with(config: &RunConfig, tol: &Tolerances) -> anyhow::Result<Report> {
    let Some(exp) = find(&config.experiment) else {
        bail!("unknown experiment '{}'", config.experiment);
    };
    if config.trials == Some(0) {
        bail!("--trials must be positive");
    }
    let seed = crate::parse_seed(&config.seed)?;
    let ctx = Ctx { seed, trials: config.trials, params: &config.params, tol };
    let start = Instant::now();
    let out = (exp.run)(&ctx).with_context(|| format!("experiment {}", exp.name))?;
    let elapsed_s = start.elapsed().as_secs_f64();
    let time_limit_s = (exp.time_limit)(tol);
    let mut report = Report {
        schema: SCHEMA.into(),
        config: config.clone(),
        records: out.records,
        summary: out.summary,
        checks: out.checks,
        time_limit_s,
        elapsed_s,
        pass: false,
    };
    report.pass = !report.checks.is_empty() && report.checks.iter().all(|c| c.pass) && report.within_time();
    Ok(report)
}
