use cosetlab::obfuscate::{
    pp_size_bound, qobf_eval, qobf_eval_tampered, qobf_obfuscate, sobf_eval, sobf_obfuscate, DkProgram, GuardCounters, ObfError, ObfuscatedQuantumProgram,
    Program, QobfParams, SobfParams, Tamper, TmProgram,
};
use cosetlab::oracle::Seed;
use cosetlab::pvqfhe::{self, all_inputs, bits_to_bytes, corpus, encode_proof, proof_size_bound, EvalStats, PseudoDetCircuit, PvMaster, PvParams, TransparentPriv};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Ctx, Outcome};
use crate::report::Check;

fn bit_string(x: &[bool]) -> String {
    x.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PvDemo {
    pub input: String,
    pub expected: bool,
    pub accepted: bool,
    pub decrypted: Option<bool>,
    pub proof_bytes: usize,
    pub proof_bound: usize,
    pub stats: EvalStats,
}

/// One honest `Enc -> Eval -> Ver -> Dec` run of `q` on `x`.
pub fn pvqfhe_demo(q: &PseudoDetCircuit, x: &[bool], seed: &Seed) -> anyhow::Result<PvDemo> {
    let params = PvParams::DESK;
    let (pk, sk, pp) = pvqfhe::gen(params, seed.derive("pv-keys", &[]))?;
    let ct = pvqfhe::enc_bits(&pk, x)?;
    let out = pvqfhe::eval(&pp, &ct, q, &mut seed.derive("pv-eval", &[]).rng())?;
    let accepted = pvqfhe::verify(&pp, &ct, &q.description(), &out.ct, &out.proof);
    let decrypted = if accepted { Some(pvqfhe::dec(&pp, &sk, &out.ct)?) } else { None };
    Ok(PvDemo {
        input: bit_string(x),
        expected: q.output(x)?,
        accepted,
        decrypted,
        proof_bytes: encode_proof(&out.proof).len(),
        proof_bound: proof_size_bound(&params, TransparentPriv::ELL),
        stats: out.stats,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObfDemo {
    pub input: String,
    pub expected: bool,
    pub tamper: Option<String>,
    pub output: Option<bool>,
    /// Why evaluation returned bottom, if it did.
    pub bottom: Option<String>,
    pub size: usize,
    pub size_bound: usize,
    pub counters: GuardCounters,
}

fn tamper_name(t: Tamper) -> &'static str {
    match t {
        Tamper::Ciphertext => "ciphertext",
        Tamper::Proof => "proof",
        Tamper::Opening => "opening",
        Tamper::Signature => "signature",
    }
}

fn describe(r: Result<bool, ObfError>) -> (Option<bool>, Option<String>) {
    match r {
        Ok(b) => (Some(b), None),
        Err(ObfError::Bottom(stage)) => (None, Some(format!("bottom at {stage}"))),
        Err(e) => (None, Some(e.to_string())),
    }
}

/// Obfuscates `q` and evaluates it on `x`, optionally corrupting the
/// evaluation transcript before it reaches the obfuscated key.
pub fn obf_demo(q: &PseudoDetCircuit, x: &[bool], tamper: Option<Tamper>, seed: &Seed) -> anyhow::Result<ObfDemo> {
    let obf = qobf_obfuscate(q, QobfParams::DESK, &seed.derive("obf", &[]))?;
    let (output, bottom) = describe(qobf_eval_tampered(&obf, x, tamper, &mut seed.derive("obf-eval", &[]).rng()));
    Ok(ObfDemo {
        input: bit_string(x),
        expected: q.output(x)?,
        tamper: tamper.map(|t| tamper_name(t).to_string()),
        output,
        bottom,
        size: obf.size(),
        size_bound: ObfuscatedQuantumProgram::size_bound(obf.params.pv.lambda, q.description().len()),
        counters: obf.dk.counters(),
    })
}

#[derive(Serialize)]
struct CircuitRecord {
    circuit: &'static str,
    truth_table: Vec<bool>,
    pv_runs: Vec<PvDemo>,
    obf_outputs: Vec<Option<bool>>,
    tampered: Vec<(String, Option<String>)>,
    obf_size: usize,
    obf_size_bound: usize,
    dk_pp_size: usize,
    dk_pp_bound: usize,
    counters: GuardCounters,
}

pub fn pipelines(ctx: &Ctx) -> anyhow::Result<Outcome> {
    let tol = &ctx.tol.pipelines;
    let mut out = Outcome::default();
    let circuits = corpus();

    for (ci, (name, q)) in circuits.iter().enumerate() {
        let inputs = all_inputs(q.n_inputs());
        let truth = q.truth_table();
        let base = ctx.stream("pipelines").derive_index("circuit", ci as u64);

        let mut pv_runs = Vec::new();
        for (xi, x) in inputs.iter().enumerate() {
            let demo = pvqfhe_demo(q, x, &base.derive_index("pv", xi as u64))?;
            out.check(Check::holds(&format!("pvqfhe {name} x={}: accepted, decrypts to Q(x)", demo.input), demo.accepted && demo.decrypted == Some(truth[xi])));
            out.check(Check::at_most(&format!("pvqfhe {name} x={}: |pi|", demo.input), demo.proof_bytes as f64, demo.proof_bound as f64));
            pv_runs.push(demo);
        }

        // A proof for this circuit must not verify for another one.
        let other = &circuits[(ci + 1) % circuits.len()].1;
        let (pk, _, pp) = pvqfhe::gen(PvParams::DESK, base.derive("replay-keys", &[]))?;
        let x = &inputs[0];
        let ct = pvqfhe::enc_bits(&pk, x)?;
        let ev = pvqfhe::eval(&pp, &ct, q, &mut base.derive("replay", &[]).rng())?;
        out.check(Check::holds(&format!("pvqfhe {name}: proof replayed for another circuit rejected"), !pvqfhe::verify(&pp, &ct, &other.description(), &ev.ct, &ev.proof)));

        let obf_seed = base.derive("obf", &[]);
        let obf = qobf_obfuscate(q, QobfParams::DESK, &obf_seed)?;
        let mut rng = base.derive("obf-eval", &[]).rng();
        let mut obf_outputs = Vec::new();
        for (xi, x) in inputs.iter().enumerate() {
            let got = qobf_eval(&obf, x, &mut rng).ok();
            out.check(Check::holds(&format!("qobf {name} x={}: matches truth table", bit_string(x)), got == Some(truth[xi])));
            obf_outputs.push(got);
        }
        let mut tampered = Vec::new();
        for t in Tamper::ALL {
            let x = &inputs[rng.gen_range(0..inputs.len())];
            let (output, bottom) = describe(qobf_eval_tampered(&obf, x, Some(t), &mut rng));
            out.check(Check::holds(&format!("qobf {name}: {} tamper rejected", tamper_name(t)), output.is_none()));
            tampered.push((tamper_name(t).to_string(), bottom));
        }
        let counters = obf.dk.counters();
        out.check(Check::holds(
            &format!("qobf {name}: key counters consistent"),
            counters.calls == (inputs.len() + Tamper::ALL.len()) as u64 && counters.decrypted <= counters.verified,
        ));

        let obf_size_bound = ObfuscatedQuantumProgram::size_bound(obf.params.pv.lambda, q.description().len());
        out.check(Check::at_most(&format!("qobf {name}: |P_Q~|"), obf.size() as f64, obf_size_bound as f64));
        // The obfuscated key's public part against its own program length.
        let dk = DkProgram { master: PvMaster { params: obf.params.pv, seed: obf_seed.derive("qobf-pv", &[]) }, ct: obf.ct.clone(), max_gates: obf.params.max_gates };
        let dk_len = Program::VerifyThenDecrypt(dk).to_bytes().len();
        let dk_pp_size = obf.dk.public().size();
        let dk_pp_bound = pp_size_bound(obf.params.pv.lambda, dk_len);
        out.check(Check::at_most(&format!("qobf {name}: |pp| of the obfuscated key"), dk_pp_size as f64, dk_pp_bound as f64));

        out.record(CircuitRecord {
            circuit: name,
            truth_table: truth,
            pv_runs,
            obf_outputs,
            tampered,
            obf_size: obf.size(),
            obf_size_bound,
            dk_pp_size,
            dk_pp_bound,
            counters,
        });
    }

    // Classical programs through the succinct obfuscator.
    let n = ctx.trials_or(tol.sobf_programs);
    let runs = ctx.trials("sobf", n, |i, rng| -> anyhow::Result<(bool, bool)> {
        let input_len = rng.gen_range(1..=8);
        let p = TmProgram::random(rng.gen_range(1..=4), input_len, rng.gen_range(1..=4), rng.gen_range(1..=32), rng);
        let program = Program::Tm(p.clone());
        let obf = sobf_obfuscate(&program, SobfParams::DESK, &ctx.stream("sobf-keys").derive_index("program", i as u64))?;
        let x: Vec<bool> = (0..input_len).map(|_| rng.gen()).collect();
        let got = sobf_eval(&obf, &bits_to_bytes(&x))?;
        let size_ok = obf.public().size() <= pp_size_bound(SobfParams::DESK.lambda, program.to_bytes().len());
        Ok((got == bits_to_bytes(&p.run(&x).0), size_ok))
    });
    let runs = runs.into_iter().collect::<anyhow::Result<Vec<_>>>()?;
    let correct = runs.iter().filter(|r| r.0).count();
    let sized = runs.iter().filter(|r| r.1).count();
    out.summarize("sobf_programs", n as f64);
    out.check(Check::at_least("sobf matches direct runs", correct as f64, n as f64));
    out.check(Check::at_least("sobf |pp| within bound", sized as f64, n as f64));
    Ok(out)
}
