use anyhow::bail;
use cosetlab::collapsing::{
    closed_form_distance, closed_form_entries, mc_plus_state_distance, phi1_apply, plus_density, plus_state_distance, ChannelMode, ChannelSpec,
};
use serde::{Deserialize, Serialize};

use super::{Ctx, Outcome};
use crate::report::Check;

#[derive(Serialize)]
struct EntryRecord {
    n: usize,
    k: usize,
    alpha: f64,
    beta: f64,
    max_diag_err: f64,
    max_offdiag_err: f64,
}

pub fn closed_form(ctx: &Ctx) -> anyhow::Result<Outcome> {
    let tol = &ctx.tol.collapsing;
    let max_n = ctx.param("max_n", tol.max_n)?;
    let mut out = Outcome::default();
    let mut worst = 0.0f64;
    for n in 1..=max_n {
        for k in 0..=n {
            let spec = ChannelSpec::new(n, k, ChannelMode::Exact)?;
            let rho = phi1_apply(&plus_density(n)?, &spec, &mut ctx.trial_rng("phi1", n * 64 + k))?;
            let (alpha, beta) = closed_form_entries(n, k);
            let m = rho.matrix();
            let d = 1usize << n;
            let (mut diag, mut off) = (0.0f64, 0.0f64);
            for i in 0..d {
                for j in 0..d {
                    let want = if i == j { alpha } else { beta };
                    let err = (m[(i, j)].re - want).abs().max(m[(i, j)].im.abs());
                    if i == j {
                        diag = diag.max(err);
                    } else {
                        off = off.max(err);
                    }
                }
            }
            worst = worst.max(diag).max(off);
            out.check(Check::at_most(&format!("entries n={n} k={k}"), diag.max(off), tol.entry_abs));
            out.record(EntryRecord { n, k, alpha, beta, max_diag_err: diag, max_offdiag_err: off });
        }
    }
    out.summarize("max_entry_err", worst);
    Ok(out)
}

#[derive(Serialize)]
struct DistanceRecord {
    n: usize,
    k: usize,
    method: &'static str,
    distance: f64,
    closed_form: f64,
    stderr: f64,
}

fn mc_ks(n: usize) -> Vec<usize> {
    let mut ks = vec![1, n.div_ceil(2), n - 1];
    ks.retain(|&k| k >= 1);
    ks.dedup();
    ks
}

pub fn distance(ctx: &Ctx) -> anyhow::Result<Outcome> {
    let tol = &ctx.tol.distance;
    let samples = ctx.trials_or(tol.mc_samples);
    let mut out = Outcome::default();

    let hand = plus_state_distance(1, 1)?;
    out.check(Check::within("hand value n=1 k=1", hand, tol.hand_value, 1e-12));

    for n in 1..=tol.mc_max_n {
        for k in 0..=n {
            let exact = plus_state_distance(n, k)?;
            let cf = closed_form_distance(n, k);
            let method = if n <= tol.exact_max_n { "enumeration" } else { "spectrum" };
            out.check(Check::within(&format!("{method} n={n} k={k}"), exact, cf, tol.exact_abs));
            out.record(DistanceRecord { n, k, method, distance: exact, closed_form: cf, stderr: 0.0 });
        }
    }

    let mut max_z = 0.0f64;
    for n in 1..=tol.mc_max_n {
        for k in mc_ks(n) {
            let est = mc_plus_state_distance(n, k, samples, &mut ctx.trial_rng("mc", n * 64 + k))?;
            let cf = closed_form_distance(n, k);
            if est.stderr > 0.0 {
                max_z = max_z.max((est.distance - cf).abs() / est.stderr);
            }
            // A zero standard error means no variance at all, so the estimate must be exact.
            let slack = if est.stderr > 0.0 { tol.sigmas * est.stderr } else { 1e-12 };
            out.check(Check::within(&format!("monte-carlo n={n} k={k}"), est.distance, cf, slack));
            out.record(DistanceRecord { n, k, method: "monte-carlo", distance: est.distance, closed_form: cf, stderr: est.stderr });
        }
    }
    out.summarize("mc_samples", samples as f64);
    out.summarize("mc_max_abs_z", max_z);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapsingPoint {
    pub n: usize,
    pub k: usize,
    pub mode: String,
    pub alpha: f64,
    pub beta: f64,
    pub distance: f64,
    pub stderr: f64,
    pub closed_alpha: f64,
    pub closed_beta: f64,
    pub closed_distance: f64,
}

/// One `(n, k)` point. `exact` enumerates subspaces (`n <= 4`); `mc` samples
/// `samples` subspaces.
pub fn collapsing_point(n: usize, k: usize, mode: &str, samples: usize, seed: &cosetlab::oracle::Seed) -> anyhow::Result<CollapsingPoint> {
    let (closed_alpha, closed_beta) = closed_form_entries(n, k);
    let closed_distance = closed_form_distance(n, k);
    let (alpha, beta, distance, stderr) = match mode {
        "exact" => {
            let spec = ChannelSpec::new(n, k, ChannelMode::Exact)?;
            let rho = phi1_apply(&plus_density(n)?, &spec, &mut seed.rng())?;
            let m = rho.matrix();
            let beta = if n == 0 { 0.0 } else { m[(0, 1)].re };
            (m[(0, 0)].re, beta, plus_state_distance(n, k)?, 0.0)
        }
        "mc" => {
            let est = mc_plus_state_distance(n, k, samples, &mut seed.rng())?;
            // The channel never touches the diagonal.
            (1.0 / (1u64 << n) as f64, est.beta, est.distance, est.stderr)
        }
        other => bail!("unknown mode '{other}', expected exact or mc"),
    };
    Ok(CollapsingPoint { n, k, mode: mode.into(), alpha, beta, distance, stderr, closed_alpha, closed_beta, closed_distance })
}
