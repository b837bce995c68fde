use std::collections::{BTreeMap, BTreeSet, HashSet};

use cosetlab::oracle::{
    classical_transcript_distribution, lazy_transcript_distribution, small_range_collision_probability, small_range_distinguisher, CompressedOracleState,
    SmallRangeFn,
};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use super::{Ctx, Outcome};
use crate::report::Check;
use crate::stats::bernoulli_stderr;

/// `(n_in, n_out, capacity)` shapes for the involution check.
const DECOMP_SHAPES: &[(usize, usize, usize)] = &[(1, 1, 1), (1, 1, 2), (2, 1, 2), (1, 2, 2), (2, 2, 1), (2, 2, 2), (3, 1, 2), (2, 3, 1), (3, 3, 1)];

/// Query sequences for the transcript comparison, on 2-bit inputs.
const QUERY_SEQUENCES: &[&[u32]] = &[&[0], &[0, 0], &[0, 1], &[1, 0, 1], &[0, 1, 2], &[3, 3, 3], &[2, 2, 1, 2], &[0, 1, 2, 3]];

#[derive(Serialize)]
struct DecompRecord {
    n_in: usize,
    n_out: usize,
    capacity: usize,
    basis_size: usize,
    /// Frobenius norm of `Decomp^2 - I`, an upper bound on its operator norm.
    deviation: f64,
}

#[derive(Serialize)]
struct TranscriptRecord {
    queries: Vec<u32>,
    n_out: usize,
    outcomes: usize,
    max_abs_diff: f64,
}

fn decomp_deviation(n_in: usize, n_out: usize, capacity: usize) -> anyhow::Result<(usize, f64)> {
    let basis = CompressedOracleState::basis(n_in, n_out, capacity)?;
    let mut sum = 0.0;
    for e in &basis {
        let mut st = CompressedOracleState::from_amplitudes(n_in, n_out, capacity, BTreeMap::from([(e.clone(), Complex64::new(1.0, 0.0))]))?;
        st.decomp();
        st.decomp();
        let mut dev = 0.0;
        let mut seen_self = false;
        for (b, a) in st.amplitudes() {
            let want = if b == e {
                seen_self = true;
                1.0
            } else {
                0.0
            };
            dev += (a - Complex64::new(want, 0.0)).norm_sqr();
        }
        if !seen_self {
            dev += 1.0;
        }
        sum += dev;
    }
    Ok((basis.len(), sum.sqrt()))
}

pub fn compressed(ctx: &Ctx) -> anyhow::Result<Outcome> {
    let tol = &ctx.tol.compressed;
    let mut out = Outcome::default();
    let mut worst = 0.0f64;
    for &(n_in, n_out, capacity) in DECOMP_SHAPES {
        let (basis_size, deviation) = decomp_deviation(n_in, n_out, capacity)?;
        worst = worst.max(deviation);
        out.check(Check::at_most(&format!("decomp involution n_in={n_in} n_out={n_out} cap={capacity}"), deviation, tol.involution_abs));
        out.record(DecompRecord { n_in, n_out, capacity, basis_size, deviation });
    }
    out.summarize("max_involution_deviation", worst);

    let mut worst = 0.0f64;
    for n_out in [1, 2] {
        for xs in QUERY_SEQUENCES {
            let a = classical_transcript_distribution(2, n_out, xs)?;
            let b = lazy_transcript_distribution(n_out, xs);
            let keys: BTreeSet<_> = a.keys().chain(b.keys()).collect();
            let diff = keys.iter().map(|k| (a.get(*k).unwrap_or(&0.0) - b.get(*k).unwrap_or(&0.0)).abs()).fold(0.0, f64::max);
            worst = worst.max(diff);
            out.check(Check::at_most(&format!("transcript {xs:?} n_out={n_out}"), diff, tol.transcript_abs));
            out.record(TranscriptRecord { queries: xs.to_vec(), n_out, outcomes: keys.len(), max_abs_diff: diff });
        }
    }
    out.summarize("max_transcript_diff", worst);
    Ok(out)
}

#[derive(Serialize)]
struct SmallRangeRecord {
    r: usize,
    q: usize,
    image_size: usize,
    image_queries: usize,
    small_range_rate: f64,
    random_rate: f64,
    advantage: f64,
    collision_probability: f64,
    bound: f64,
}

pub fn small_range(ctx: &Ctx) -> anyhow::Result<Outcome> {
    let tol = &ctx.tol.small_range;
    let trials = ctx.trials_or(tol.trials);
    let q = ctx.param("q", tol.q)?;
    let mut out = Outcome::default();
    let mut rates = Vec::new();
    for &r in &tol.ranges {
        let mut rng = ctx.trial_rng("image", r);
        let f = SmallRangeFn::sample(|g: &mut ChaCha20Rng| g.gen::<[u8; 8]>().to_vec(), r, &mut rng)?;
        let image: HashSet<Vec<u8>> = (0..tol.image_queries as u64).map(|x| f.eval(&x.to_le_bytes())).collect();
        out.check(Check::at_most(&format!("image size r={r}"), image.len() as f64, r as f64));

        let rep = small_range_distinguisher(q, r, 8, trials, &mut ctx.trial_rng("distinguisher", r))?;
        let p = small_range_collision_probability(q, r);
        out.check(Check::sigmas(&format!("collision rate r={r}"), rep.small_range_rate, p, bernoulli_stderr(p, trials), tol.sigmas));
        rates.push(rep.advantage);
        out.record(SmallRangeRecord {
            r,
            q,
            image_size: image.len(),
            image_queries: tol.image_queries,
            small_range_rate: rep.small_range_rate,
            random_rate: rep.random_rate,
            advantage: rep.advantage,
            collision_probability: p,
            bound: rep.bound,
        });
    }
    let decreasing = rates.windows(2).all(|w| w[1] < w[0]);
    out.check(Check::holds("statistic decreases in r", decreasing));
    Ok(out)
}
