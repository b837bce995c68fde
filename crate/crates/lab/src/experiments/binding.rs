use std::collections::HashMap;

use cosetlab::cosetstates::CosetQubitState;
use cosetlab::oss::{OssOracles, OssParams, QuantumAccess};
use cosetlab::pfc::binding::{
    hadamard_test_success, oss_dual_test_success, run_collapse_binding, run_oss_collapse_binding, BindingRegister, CollapseBindingAdversary,
    FirstStageAccess, GameOutcome, GuessingAdversary, HadamardTestAdversary, OssCollapseAdversary, OssDualTestAdversary, OssGameAccess,
    OssGuessingAdversary, OssRegister, SecondStageAccess,
};
use cosetlab::pfc::{self, Commitment, PfcParams};
use rand::RngCore;
use serde::Serialize;

use super::{Ctx, Outcome};
use crate::report::Check;
use crate::stats::{bernoulli_stderr, Rate};

/// Remembers the label an OSS adversary committed to.
struct WithLabel<A> {
    inner: A,
    y: Option<u64>,
}

impl<A: OssCollapseAdversary> OssCollapseAdversary for WithLabel<A> {
    fn prepare(&mut self, access: &OssGameAccess, quantum: &QuantumAccess, rng: &mut dyn RngCore) -> (u64, OssRegister) {
        let (y, reg) = self.inner.prepare(access, quantum, rng);
        self.y = Some(y);
        (y, reg)
    }

    fn guess(&mut self, access: &OssGameAccess, y: u64, register: OssRegister, rng: &mut dyn RngCore) -> bool {
        self.inner.guess(access, y, register, rng)
    }
}

/// Remembers the commitment and the committed state.
struct WithCommitment<A> {
    inner: A,
    seen: Option<(Commitment, CosetQubitState)>,
}

impl<A: CollapseBindingAdversary> CollapseBindingAdversary for WithCommitment<A> {
    fn commit(&mut self, access: &FirstStageAccess, quantum: &QuantumAccess, rng: &mut dyn RngCore) -> (Commitment, BindingRegister) {
        let (c, reg) = self.inner.commit(access, quantum, rng);
        if let BindingRegister::Symbolic(st) = &reg {
            self.seen = Some((c, st.clone()));
        }
        (c, reg)
    }

    fn guess(&mut self, access: &SecondStageAccess, c: &Commitment, register: BindingRegister, rng: &mut dyn RngCore) -> bool {
        self.inner.guess(access, c, register, rng)
    }
}

#[derive(Serialize)]
struct GameSummary {
    game: &'static str,
    adversary: &'static str,
    oracle_granted: bool,
    wins: Rate,
    invalid: usize,
    expected: f64,
}

fn tally(outcomes: &[GameOutcome]) -> (Rate, usize) {
    let invalid = outcomes.iter().filter(|o| **o == GameOutcome::Invalid).count();
    (Rate::of(outcomes.iter().filter(|o| **o != GameOutcome::Invalid).map(|o| *o == GameOutcome::Win)), invalid)
}

pub fn calibration(ctx: &Ctx) -> anyhow::Result<Outcome> {
    let tol = &ctx.tol.binding;
    let trials = ctx.trials_or(tol.trials);
    let sig = tol.sigmas;
    let mut out = Outcome::default();
    let push = |out: &mut Outcome, s: GameSummary, name: &str, se: f64| {
        out.summarize(&format!("{}_{}_{}", s.game, s.adversary, if s.oracle_granted { "granted" } else { "withheld" }), s.wins.rate);
        out.check(Check::sigmas(name, s.wins.rate, s.expected, se, sig));
        out.check(Check::at_most(&format!("{name}: invalid runs"), s.invalid as f64, 0.0));
        out.record(s);
    };

    // Commitment game, honest commitment and a coin flip.
    let pfc_seed = ctx.stream("pfc-guess-keys");
    let runs = ctx.trials("pfc-guess", trials, |i, rng| {
        run_collapse_binding(PfcParams::DESK, &pfc_seed.derive_index("key", i as u64), &mut GuessingAdversary::default(), false, rng)
    });
    let (wins, invalid) = tally(&runs.into_iter().collect::<Result<Vec<_>, _>>()?);
    let se = bernoulli_stderr(0.5, wins.trials);
    push(&mut out, GameSummary { game: "commitment", adversary: "guessing", oracle_granted: false, wins, invalid, expected: 0.5 }, "commitment game: guessing", se);

    // One-shot signature game.
    let o = OssOracles::setup(OssParams::DESK, ctx.stream("oss-keys"))?;
    let runs = ctx.trials("oss-guess", trials, |_, rng| run_oss_collapse_binding(o.clone(), &mut OssGuessingAdversary, false, rng));
    let (wins, invalid) = tally(&runs);
    let se = bernoulli_stderr(0.5, wins.trials);
    push(&mut out, GameSummary { game: "oss", adversary: "guessing", oracle_granted: false, wins, invalid, expected: 0.5 }, "oss game: guessing", se);

    // The dual test with D withheld is a coin flip; with D granted it wins
    // with the dense-computed probability for its label.
    let control_trials = ctx.param("control_trials", tol.control_trials)?;
    let runs = ctx.trials("oss-dual-withheld", control_trials, |_, rng| run_oss_collapse_binding(o.clone(), &mut OssDualTestAdversary, false, rng));
    let (wins, invalid) = tally(&runs);
    let se = bernoulli_stderr(0.5, wins.trials);
    push(&mut out, GameSummary { game: "oss", adversary: "dual-test", oracle_granted: false, wins, invalid, expected: 0.5 }, "oss game: dual test without D", se);

    let runs = ctx.trials("oss-dual-granted", control_trials, |_, rng| {
        let mut adv = WithLabel { inner: OssDualTestAdversary, y: None };
        let outcome = run_oss_collapse_binding(o.clone(), &mut adv, true, rng);
        (outcome, adv.y.expect("prepare ran"))
    });
    let mut exact: HashMap<u64, f64> = HashMap::new();
    let mut expected = 0.0;
    for (_, y) in &runs {
        expected += *exact.entry(*y).or_insert_with(|| oss_dual_test_success(&o, *y));
    }
    expected /= runs.len() as f64;
    let outcomes: Vec<_> = runs.iter().map(|r| r.0).collect();
    let (wins, invalid) = tally(&outcomes);
    let se = bernoulli_stderr(expected, wins.trials);
    out.summarize("oss_dual_test_advantage", wins.rate - 0.5);
    out.summarize("oss_dual_test_dense_advantage", expected - 0.5);
    push(&mut out, GameSummary { game: "oss", adversary: "dual-test", oracle_granted: true, wins, invalid, expected }, "oss game: D control advantage", se);

    // The same control in the commitment game, with DecX granted. The
    // dense value needs a decoding key per run, so this uses the small
    // inner parameters and fewer runs.
    let decx_trials = ctx.param("decx_control_trials", tol.decx_control_trials)?;
    let small_seed = ctx.stream("pfc-decx-keys");
    let runs = ctx.trials("pfc-decx", decx_trials, |i, rng| -> anyhow::Result<(GameOutcome, f64)> {
        let key_seed = small_seed.derive_index("key", i as u64);
        let mut adv = WithCommitment { inner: HadamardTestAdversary, seen: None };
        let outcome = run_collapse_binding(PfcParams::SMALL, &key_seed, &mut adv, true, rng)?;
        let (_, dk) = pfc::gen(PfcParams::SMALL, &key_seed)?;
        let (c, st) = adv.seen.expect("symbolic commitment");
        Ok((outcome, hadamard_test_success(&dk, &c, &st)))
    });
    let runs = runs.into_iter().collect::<anyhow::Result<Vec<_>>>()?;
    let expected = runs.iter().map(|r| r.1).sum::<f64>() / runs.len() as f64;
    let outcomes: Vec<_> = runs.iter().map(|r| r.0).collect();
    let (wins, invalid) = tally(&outcomes);
    let se = bernoulli_stderr(expected, wins.trials);
    push(&mut out, GameSummary { game: "commitment", adversary: "hadamard-test", oracle_granted: true, wins, invalid, expected }, "commitment game: DecX control", se);
    Ok(out)
}
