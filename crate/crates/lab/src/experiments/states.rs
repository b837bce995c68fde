use std::collections::{BTreeMap, HashMap};

use cosetlab::cosetstates::{dense_rotation, rotate_first_bit, CosetSplit, SliceState};
use cosetlab::gf2::{Gf2Coset, Gf2Matrix, Gf2Vector};
use cosetlab::oss::{self, forgery_game, measure_then_rotate_win_probability, Forgery, ForgeryAdversary, MeasureThenRotate, OssOracleAccess, OssOracles, OssParams, QuantumAccess};
use cosetlab::pfc::{self, Basis, Opening, PfcParams};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use super::{Ctx, Outcome};
use crate::report::Check;
use crate::stats::{bernoulli_stderr, Rate};

fn random_balanced_coset(n: usize, rng: &mut ChaCha20Rng) -> (Gf2Coset, CosetSplit) {
    loop {
        let dim = rng.gen_range(1..=n);
        let a = Gf2Matrix::random_full_column_rank(n, dim, rng).expect("dim <= n");
        let b = Gf2Vector::truncated(n, rng.gen());
        let s = Gf2Coset::from_affine_map(&a, &b).expect("shapes agree");
        if let Ok(split) = CosetSplit::of(&s) {
            return (s, split);
        }
    }
}

#[derive(Serialize)]
struct RotationRecord {
    trial: usize,
    n: usize,
    dim: usize,
    from_bit: bool,
    fidelity: f64,
    symbolic_agrees: bool,
}

pub fn rotation(ctx: &Ctx) -> anyhow::Result<Outcome> {
    let tol = &ctx.tol.rotation;
    let count = ctx.trials_or(tol.cosets);
    let max_n = ctx.param("max_n", tol.max_n)?;
    let rows = ctx.trials("rotation", count, |trial, rng| -> anyhow::Result<RotationRecord> {
        let n = rng.gen_range(2..=max_n);
        let (s, split) = random_balanced_coset(n, rng);
        let target_bit: bool = rng.gen();
        let dual = split.full_dual();
        let from = SliceState::new(split.clone(), !target_bit);
        let mut psi = from.to_state_vector()?;
        dense_rotation(&mut psi, |v| dual.contains(v));
        let target = SliceState::new(split, target_bit);
        let fidelity = target.to_state_vector()?.overlap(&psi)?.powi(2);
        let symbolic_agrees = rotate_first_bit(&from, |v| dual.contains(v))? == target;
        Ok(RotationRecord { trial, n, dim: s.dim(), from_bit: !target_bit, fidelity, symbolic_agrees })
    });
    let mut out = Outcome::default();
    let mut min_f = 1.0f64;
    let mut agree = true;
    for r in rows {
        let r = r?;
        min_f = min_f.min(r.fidelity);
        agree &= r.symbolic_agrees;
        out.record(r);
    }
    out.summarize("min_fidelity", min_f);
    out.check(Check::at_least("min fidelity", min_f, 1.0 - tol.fidelity_slack));
    out.check(Check::holds("symbolic rotation agrees", agree));
    Ok(out)
}

fn random_qubit(trial: usize, rng: &mut ChaCha20Rng) -> [Complex64; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let fixed = [[1.0, 0.0], [0.0, 1.0], [h, h], [h, -h]];
    if let Some(&[a, b]) = fixed.get(trial) {
        return [Complex64::new(a, 0.0), Complex64::new(b, 0.0)];
    }
    let mut c = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let (a, b) = (c(), c());
    let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
    [a / norm, b / norm]
}

/// Total variation between two distributions over `Option<bool>` outcomes.
fn tv(p: &BTreeMap<Option<bool>, f64>, q: &BTreeMap<Option<bool>, f64>) -> f64 {
    let keys: std::collections::BTreeSet<_> = p.keys().chain(q.keys()).collect();
    0.5 * keys.into_iter().map(|k| (p.get(k).unwrap_or(&0.0) - q.get(k).unwrap_or(&0.0)).abs()).sum::<f64>()
}

#[derive(Serialize)]
struct PfcRecord {
    trial: usize,
    amps: [[f64; 2]; 2],
    tv_z: f64,
    tv_x: f64,
    bottom_mass: f64,
}

pub fn pfc_correctness(ctx: &Ctx) -> anyhow::Result<Outcome> {
    let tol = &ctx.tol.pfc;
    let count = ctx.trials_or(tol.states);
    let params = match ctx.param("params", "desk".to_string())?.as_str() {
        "small" => PfcParams::SMALL,
        _ => PfcParams::DESK,
    };
    let (ck, dk) = pfc::gen(params, &ctx.stream("pfc-keys"))?;
    let mut out = Outcome::default();
    let (mut max_tv, mut max_bottom) = (0.0f64, 0.0f64);
    for trial in 0..count {
        let mut rng = ctx.trial_rng("pfc", trial);
        let amps = random_qubit(trial, &mut rng);
        let committed = pfc::commit(&ck, amps, &mut rng)?;
        let c = committed.commitment();
        let st = committed.state();

        let direct_z = BTreeMap::from([(Some(false), amps[0].norm_sqr()), (Some(true), amps[1].norm_sqr())]);
        let direct_x = BTreeMap::from([(Some(false), (amps[0] + amps[1]).norm_sqr() / 2.0), (Some(true), (amps[0] - amps[1]).norm_sqr() / 2.0)]);
        let mut pipe_z = BTreeMap::new();
        for ((bit, u), p) in st.z_open_distribution()? {
            *pipe_z.entry(dk.dec_z(&c, &Opening { basis: Basis::Z, bit, u })).or_insert(0.0) += p;
        }
        let mut pipe_x = BTreeMap::new();
        for ((bit, u), p) in st.x_open_distribution()? {
            *pipe_x.entry(dk.dec_x(&c, &Opening { basis: Basis::X, bit, u })).or_insert(0.0) += p;
        }
        let (tv_z, tv_x) = (tv(&direct_z, &pipe_z), tv(&direct_x, &pipe_x));
        let bottom_mass = pipe_z.get(&None).unwrap_or(&0.0) + pipe_x.get(&None).unwrap_or(&0.0);
        max_tv = max_tv.max(tv_z).max(tv_x);
        max_bottom = max_bottom.max(bottom_mass);
        out.record(PfcRecord { trial, amps: [[amps[0].re, amps[0].im], [amps[1].re, amps[1].im]], tv_z, tv_x, bottom_mass });
    }
    out.summarize("max_tv", max_tv);
    out.check(Check::at_most("max TV distance", max_tv, tol.tv_abs));
    out.check(Check::at_most("mass decoded to bottom", max_bottom, 0.0));
    Ok(out)
}

/// Records the label each forgery attempt used.
struct Labelled<A> {
    inner: A,
    vk: Option<u64>,
}

impl<A: ForgeryAdversary> ForgeryAdversary for Labelled<A> {
    fn forge(&mut self, access: &OssOracleAccess, quantum: &QuantumAccess, rng: &mut dyn rand::RngCore) -> Forgery {
        let f = self.inner.forge(access, quantum, rng);
        self.vk = Some(f.vk);
        f
    }
}

pub fn oss(ctx: &Ctx) -> anyhow::Result<Outcome> {
    let tol = &ctx.tol.oss;
    let mut out = Outcome::default();

    let honest = ctx.trials("oss-honest", tol.honest_runs, |i, rng| -> anyhow::Result<bool> {
        let o = OssOracles::setup(OssParams::DESK, ctx.stream("oss-honest-setup").derive_index("run", i as u64))?;
        let token = oss::gen(&o, rng)?;
        let vk = token.vk();
        let m: bool = rng.gen();
        Ok(oss::sign(&o, token, m, rng)?.signature().is_some_and(|s| oss::verify(&o, vk, m, &s)))
    });
    let honest = Rate::of(honest.into_iter().collect::<anyhow::Result<Vec<_>>>()?);
    out.summarize("honest_acceptance", honest.rate);
    out.check(Check::at_least("honest acceptance", honest.rate, 1.0));

    let n = ctx.param("n", tol.clone_n)?;
    let r = ctx.param("r", tol.clone_r)?;
    let trials = ctx.trials_or(tol.clone_trials);
    let o = OssOracles::setup(OssParams::new(n, r)?, ctx.stream("oss-clone-setup"))?;
    let runs = ctx.trials("oss-clone", trials, |_, rng| {
        let mut adv = Labelled { inner: MeasureThenRotate, vk: None };
        let win = forgery_game(o.clone(), &mut adv, rng);
        (win, adv.vk.expect("forge ran"))
    });
    let mut exact: HashMap<u64, f64> = HashMap::new();
    let mut expected = 0.0;
    for &(_, vk) in &runs {
        expected += match exact.get(&vk) {
            Some(&p) => p,
            None => *exact.entry(vk).or_insert(measure_then_rotate_win_probability(&o, vk)?),
        };
    }
    expected /= trials as f64;
    let wins = Rate::of(runs.iter().map(|r| r.0));
    let se = bernoulli_stderr(expected, trials);
    out.summarize("clone_win_rate", wins.rate);
    out.summarize("clone_exact", expected);
    out.summarize("clone_labels", exact.len() as f64);
    out.record(serde_json::json!({ "honest": honest, "clone": wins, "clone_exact": expected, "n": n, "r": r }));
    out.check(Check::sigmas("cloner matches dense value", wins.rate, expected, se, tol.sigmas));
    Ok(out)
}
