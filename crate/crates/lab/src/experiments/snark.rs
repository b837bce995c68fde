use cosetlab::oracle::{recording_wrap, FnHandle, Seed};
use cosetlab::snark::{
    self, coins, extract_tree, find_witness, merkle_commit, AuthPath, HashPreimage, QueryOpening, RepetitionPcp, SnarkProof, Symbol, PAD_SYMBOL,
};
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use super::{Ctx, Outcome};
use crate::report::Check;
use crate::stats::{bernoulli_stderr, Rate};

fn random_witness(rng: &mut ChaCha20Rng) -> Vec<Symbol> {
    let mut bytes = [0u8; 64];
    rng.fill(&mut bytes[..]);
    HashPreimage::witness_from_bytes(&bytes)
}

fn oracle(rng: &mut ChaCha20Rng) -> FnHandle {
    FnHandle::new(Seed(rng.gen()), 32)
}

/// Commits to an arbitrary proof string and answers the queries the
/// verifier's coins select, as a cheating prover would.
fn commit_and_open(pcp: &RepetitionPcp, h: &FnHandle, pi: &[Symbol], m: usize) -> anyhow::Result<SnarkProof> {
    let tree = merkle_commit(pi, h)?;
    let rt = tree.root();
    let openings = pcp
        .queries(&mut coins(h, &rt), m)
        .into_iter()
        .map(|j| QueryOpening { index: j as u32, value: tree.leaves()[j], path: tree.auth_path(j) })
        .collect();
    Ok(SnarkProof { root: rt, openings })
}

/// `w` in rows `0..rho/2`; the other rows repeat `w` with one column zeroed.
/// The column vote ties there and the extractor picks the zero symbol, so it
/// misses the witness while the verifier still sometimes accepts.
fn plurality_split_proof(pcp: &RepetitionPcp, w: &[Symbol], column: usize) -> Vec<Symbol> {
    let mut damaged = w.to_vec();
    damaged[column] = PAD_SYMBOL;
    let mut pi = Vec::with_capacity(pcp.proof_len(w.len()));
    for j in 0..pcp.rho {
        pi.extend_from_slice(if j < pcp.rho / 2 { w } else { &damaged });
    }
    pi
}

#[derive(Serialize)]
struct SnarkSummary {
    completeness: Rate,
    extraction_depths: Vec<(usize, usize, usize)>,
    find_witness: Rate,
    knowledge_error: f64,
    garbage_acceptance: Rate,
    split_acceptance: Rate,
    split_exact: f64,
    split_extract_fails: bool,
}

pub fn snark(ctx: &Ctx) -> anyhow::Result<Outcome> {
    let tol = &ctx.tol.snark;
    let pcp = RepetitionPcp::TOY;
    let rel = HashPreimage;
    let m = HashPreimage::WITNESS_SYMBOLS;
    let mut out = Outcome::default();

    let n = ctx.trials_or(tol.completeness);
    let complete = ctx.trials("complete", n, |_, rng| -> anyhow::Result<bool> {
        let w = random_witness(rng);
        let x = HashPreimage::instance_for(&w);
        let h = oracle(rng);
        let p = snark::prove(&pcp, &h, &rel, &x, &w)?;
        Ok(snark::verify(&pcp, &h, &rel, &x, &p))
    });
    let completeness = Rate::of(complete.into_iter().collect::<anyhow::Result<Vec<_>>>()?);
    out.check(Check::at_least("completeness", completeness.rate, 1.0));

    // (depth, trees, fully recovered)
    let mut extraction_depths = Vec::new();
    for depth in 1..=tol.max_depth {
        let trees = 20;
        let ok = ctx.trials(&format!("extract-{depth}"), trees, |_, rng| -> anyhow::Result<bool> {
            let leaves: Vec<Symbol> = (0..1usize << depth).map(|_| rng.gen()).collect();
            let rec = recording_wrap(oracle(rng));
            let tree = merkle_commit(&leaves, &rec)?;
            let got = extract_tree(&rec.database(), &tree.root(), depth);
            Ok(got.is_some_and(|t| t.leaves() == leaves.iter().map(|l| Some(*l)).collect::<Vec<_>>()))
        });
        let ok = ok.into_iter().collect::<anyhow::Result<Vec<_>>>()?.into_iter().filter(|b| *b).count();
        out.check(Check::at_least(&format!("extract recovers all leaves, depth {depth}"), ok as f64, trees as f64));
        extraction_depths.push((depth, trees, ok));
    }

    let found = ctx.trials("find-witness", tol.find_witness_runs, |_, rng| -> anyhow::Result<bool> {
        let w = random_witness(rng);
        let x = HashPreimage::instance_for(&w);
        let rec = recording_wrap(oracle(rng));
        snark::prove(&pcp, &rec, &rel, &x, &w)?;
        Ok(find_witness(&rec.database(), &pcp, &rel, &x) == Some(w))
    });
    let find_rate = Rate::of(found.into_iter().collect::<anyhow::Result<Vec<_>>>()?);
    out.check(Check::at_least("find-witness returns the honest witness", find_rate.rate, 1.0));

    let kappa = pcp.knowledge_error(m);
    out.summarize("knowledge_error", kappa);

    // Uniformly random roots, symbols and paths at the right positions.
    let garbage = ctx.trials("garbage", tol.garbage_trials, |_, rng| {
        let x: [u8; 8] = rng.gen();
        let h = oracle(rng);
        let root = rng.gen();
        let depth = pcp.depth(m);
        let openings = pcp
            .queries(&mut coins(&h, &root), m)
            .into_iter()
            .map(|j| QueryOpening { index: j as u32, value: rng.gen(), path: AuthPath { siblings: (0..depth).map(|_| rng.gen()).collect() } })
            .collect();
        snark::verify(&pcp, &h, &rel, &x, &SnarkProof { root, openings })
    });
    let garbage = Rate::of(garbage);
    let se = bernoulli_stderr(kappa, garbage.trials);
    out.check(Check::at_least("garbage rejection rate >= 1 - 2 kappa", 1.0 - garbage.rate, 1.0 - 2.0 * kappa));
    out.check(Check::at_most("garbage acceptance within kappa + 3 sigma", garbage.rate, kappa + tol.sigmas * se));

    // A proof string built to defeat the plurality vote.
    let split = ctx.trials("plurality-split", tol.adversary_trials, |_, rng| -> anyhow::Result<(bool, f64, bool)> {
        let w = loop {
            let w = random_witness(rng);
            if !w.contains(&PAD_SYMBOL) {
                break w;
            }
        };
        let x = HashPreimage::instance_for(&w);
        let column = rng.gen_range(0..m);
        let pi = plurality_split_proof(&pcp, &w, column);
        let extracted = pcp.extract(&pi, m);
        let extract_fails = extracted != w && !snark::Relation::accepts(&rel, &x, &extracted);
        let exact = pcp.acceptance_probability(&rel, &x, &pi);
        let h = oracle(rng);
        let accepted = snark::verify(&pcp, &h, &rel, &x, &commit_and_open(&pcp, &h, &pi, m)?);
        Ok((accepted, exact, extract_fails))
    });
    let split = split.into_iter().collect::<anyhow::Result<Vec<_>>>()?;
    let split_exact = split.iter().map(|s| s.1).sum::<f64>() / split.len() as f64;
    let split_acceptance = Rate::of(split.iter().map(|s| s.0));
    let split_extract_fails = split.iter().all(|s| s.2);
    let se = bernoulli_stderr(split_exact, split.len());
    out.summarize("split_acceptance", split_acceptance.rate);
    out.summarize("split_exact", split_exact);
    out.check(Check::holds("split proofs defeat the extractor", split_extract_fails));
    out.check(Check::sigmas("split acceptance matches exact", split_acceptance.rate, split_exact, se, tol.sigmas));
    out.check(Check::at_most("split exact acceptance <= kappa", split_exact, kappa));

    out.record(SnarkSummary {
        completeness,
        extraction_depths,
        find_witness: find_rate,
        knowledge_error: kappa,
        garbage_acceptance: garbage,
        split_acceptance,
        split_exact,
        split_extract_fails,
    });
    Ok(out)
}
