use std::collections::BTreeMap;

use cosetlab::homenc::FheCiphertext;
use cosetlab::obfuscate::qobf::encode_dk_input;
use cosetlab::obfuscate::sobf::{decode_witness, encode_witness};
use cosetlab::obfuscate::{
    pp_size_bound, qobf_eval, qobf_eval_tampered, qobf_obfuscate, sobf_eval, sobf_obfuscate, sobf_prove, GuardCounters, ObfError,
    ObfuscatedQuantumProgram, Program, QobfParams, SobfParams, Stage, Tamper, TmProgram, TmRule,
};
use cosetlab::oracle::Seed;
use cosetlab::pvqfhe::{self, all_inputs, corpus, CircuitFile, GateSpec, PseudoDetCircuit};
use cosetlab::snark::SnarkProof;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Independent machine: sparse tape, blank by default, head pinned at 0.
fn run_tm(p: &TmProgram, x: &[bool]) -> Vec<bool> {
    let mut tape: BTreeMap<usize, u8> = x.iter().enumerate().map(|(i, &b)| (i, b as u8)).collect();
    let (mut head, mut state) = (0usize, 0usize);
    for _ in 0..p.max_steps {
        if state == p.rules.len() {
            break;
        }
        let sym = *tape.get(&head).unwrap_or(&2);
        let rule = p.rules[state][sym as usize];
        tape.insert(head, rule.write);
        head = (head as i64 + rule.shift as i64).max(0) as usize;
        state = rule.next as usize;
    }
    (0..p.output_len).map(|i| tape.get(&i) == Some(&1)).collect()
}

fn bytes(x: &[bool]) -> Vec<u8> {
    x.iter().map(|&b| b as u8).collect()
}

fn counters(c: GuardCounters) -> (u64, u64, u64) {
    (c.calls, c.verified, c.decrypted)
}

#[test]
fn random_machines_match_direct_runs() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    for i in 0..1000u64 {
        let input_len = rng.gen_range(0..=8);
        let p = TmProgram::random(rng.gen_range(1..=5), input_len, rng.gen_range(0..=6), rng.gen_range(1..=40), &mut rng);
        let program = Program::Tm(p.clone());
        let obf = sobf_obfuscate(&program, SobfParams::DESK, &Seed::from_u64(i)).unwrap();
        assert!(obf.public().size() <= pp_size_bound(128, program.to_bytes().len()));
        let x: Vec<bool> = (0..input_len).map(|_| rng.gen()).collect();
        let want = run_tm(&p, &x);
        assert_eq!(p.run(&x).0, want);
        assert_eq!(sobf_eval(&obf, &bytes(&x)).unwrap(), bytes(&want), "machine {i}");
        assert_eq!(counters(obf.counters()), (1, 1, 1));
    }
}

#[test]
fn oracle_refuses_replayed_and_garbage_proofs() {
    let p = Program::Tm(TmProgram::complement(4));
    let obf = sobf_obfuscate(&p, SobfParams::DESK, &Seed::from_u64(2)).unwrap();
    let (ct_a, pi_a) = sobf_prove(&obf, &[1, 0, 0, 1]).unwrap();
    let (ct_b, pi_b) = sobf_prove(&obf, &[1, 1, 1, 1]).unwrap();
    assert_eq!(obf.query(&ct_a, &pi_a), Some(vec![0, 1, 1, 0]));
    assert_eq!(obf.query(&ct_b, &pi_b), Some(vec![0, 0, 0, 0]));
    assert_eq!(obf.query(&ct_a, &pi_b), None);
    assert_eq!(obf.query(&ct_b, &pi_a), None);
    // A ciphertext that decrypts fine but was never proved.
    let mut ct_c = ct_a.clone();
    ct_c.payload[0] ^= 1;
    assert_eq!(obf.query(&ct_c, &pi_a), None);
    assert_eq!(obf.query(&ct_a, &SnarkProof { root: [0; 16], openings: vec![] }), None);
    let mut cut = pi_a.clone();
    cut.openings.pop();
    assert_eq!(obf.query(&ct_a, &cut), None);
    // A proof from a different obfuscation of the same program.
    let twin = sobf_obfuscate(&p, SobfParams::DESK, &Seed::from_u64(3)).unwrap();
    let (ct_t, pi_t) = sobf_prove(&twin, &[1, 0, 0, 1]).unwrap();
    assert_eq!(obf.query(&ct_t, &pi_t), None);
    assert_eq!(obf.query(&ct_a, &pi_t), None);
    assert_eq!(counters(obf.counters()), (9, 2, 2));
    assert_eq!(counters(twin.counters()), (0, 0, 0));
    // Clones share the oracle.
    let clone = obf.clone();
    assert_eq!(sobf_eval(&clone, &[0, 0, 0, 0]).unwrap(), vec![1, 1, 1, 1]);
    assert_eq!(counters(obf.counters()), (10, 3, 3));
}

#[test]
fn sobf_bounds() {
    let long = TmProgram { max_steps: 65, ..TmProgram::complement(3) };
    assert!(matches!(sobf_obfuscate(&Program::Tm(long), SobfParams::DESK, &Seed::from_u64(4)), Err(ObfError::Bounds(_))));
    let obf = sobf_obfuscate(&Program::Tm(TmProgram::identity(2, 2)), SobfParams::DESK, &Seed::from_u64(5)).unwrap();
    assert!(matches!(sobf_eval(&obf, &[0; 17]), Err(ObfError::Bounds(_))));
    // Wrong input length or a non-bit byte fails inside the evaluation.
    assert_eq!(sobf_eval(&obf, &[1, 0, 1]), Err(ObfError::Bottom(Stage::Evaluate)));
    assert_eq!(sobf_eval(&obf, &[1, 5]), Err(ObfError::Bottom(Stage::Evaluate)));
    assert_eq!(counters(obf.counters()), (0, 0, 0));
    // A malformed rule table is refused when it runs.
    let bad = TmProgram { rules: vec![[TmRule { write: 9, shift: 0, next: 1 }; 3]], ..TmProgram::identity(1, 1) };
    let obf = sobf_obfuscate(&Program::Tm(bad), SobfParams::DESK, &Seed::from_u64(6)).unwrap();
    assert_eq!(sobf_eval(&obf, &[1]), Err(ObfError::Bottom(Stage::Evaluate)));
}

#[test]
fn witness_encoding_round_trips() {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    for len in 0..=16 {
        let x: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
        let w = encode_witness(&x, 16);
        assert_eq!(w.len(), 2);
        assert_eq!(decode_witness(&w, 16), Some(x.clone()));
        // A length past the bound, or nonzero padding, is not a witness.
        assert_eq!(decode_witness(&w, len.max(1) - 1), if len == 0 { Some(vec![]) } else { None });
        if len < 16 {
            let mut bad = w.clone();
            bad[1][15] = 1;
            assert_eq!(decode_witness(&bad, 16), None);
        }
    }
}

fn expected(name: &str, x: &[bool]) -> bool {
    match name {
        "const0" => false,
        "and" => x[0] && x[1],
        "xor_kickback" => x[0] ^ x[1],
        _ => panic!("unknown circuit {name}"),
    }
}

#[test]
fn qobf_truth_tables_and_repeats() {
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    for (i, (name, q)) in corpus().into_iter().enumerate() {
        let obf = qobf_obfuscate(&q, QobfParams::DESK, &Seed::from_u64(100 + i as u64)).unwrap();
        let desc = q.description().len();
        assert!(obf.size() <= ObfuscatedQuantumProgram::size_bound(128, desc), "{name}: {}", obf.size());
        let mut evals = 0;
        for x in all_inputs(q.n_inputs()) {
            for _ in 0..3 {
                assert_eq!(qobf_eval(&obf, &x, &mut rng).unwrap(), expected(name, &x), "{name} {x:?}");
                evals += 1;
            }
        }
        assert_eq!(counters(obf.dk.counters()), (evals, evals, evals));
        assert!(matches!(qobf_eval(&obf, &[true; 3], &mut rng), Err(ObfError::Bounds(_))));
    }
}

#[test]
fn qobf_tampers_return_bottom() {
    let (_, q) = &corpus()[2];
    let obf = qobf_obfuscate(q, QobfParams::DESK, &Seed::from_u64(9)).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    for (k, t) in Tamper::ALL.into_iter().enumerate() {
        for x in all_inputs(2) {
            assert_eq!(qobf_eval_tampered(&obf, &x, Some(t), &mut rng), Err(ObfError::Bottom(Stage::Verify)), "{t:?} {x:?}");
        }
        // The key's own evaluation is honest, so its SNARK verifies and it
        // decrypts to the empty rejection output.
        let n = 4 * (k as u64 + 1);
        assert_eq!(counters(obf.dk.counters()), (n, n, n));
    }
    assert_eq!(qobf_eval(&obf, &[true, false], &mut rng), Ok(true));
    assert_eq!("opening".parse::<Tamper>(), Ok(Tamper::Opening));
    assert!("nothing".parse::<Tamper>().is_err());
}

#[test]
fn qobf_key_rejects_foreign_transcripts() {
    // An honest transcript for one input presented as another, and a
    // transcript from a different obfuscation of the same circuit.
    let (_, q) = &corpus()[1];
    let obf = qobf_obfuscate(q, QobfParams::DESK, &Seed::from_u64(10)).unwrap();
    let other = qobf_obfuscate(q, QobfParams::DESK, &Seed::from_u64(11)).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(10);
    let transcript = |o: &ObfuscatedQuantumProgram, x: &[bool], rng: &mut ChaCha20Rng| -> (FheCiphertext, pvqfhe::PvProof) {
        let u = cosetlab::obfuscate::UniversalCircuit { x: x.to_vec(), max_gates: o.params.max_gates };
        let out = pvqfhe::eval(&o.pp, &o.ct, &u, rng).unwrap();
        (out.ct, out.proof)
    };
    let (ct2, pi) = transcript(&obf, &[true, true], &mut rng);
    assert_eq!(sobf_eval(&obf.dk, &encode_dk_input(&[true, true], &ct2, &pi)).unwrap(), vec![1]);
    assert_eq!(sobf_eval(&obf.dk, &encode_dk_input(&[true, false], &ct2, &pi)).unwrap(), Vec::<u8>::new());
    let (ct3, pi3) = transcript(&other, &[true, true], &mut rng);
    assert_eq!(sobf_eval(&obf.dk, &encode_dk_input(&[true, true], &ct3, &pi3)).unwrap(), Vec::<u8>::new());
    assert_eq!(sobf_eval(&obf.dk, b"not an input").unwrap(), Vec::<u8>::new());
}

#[test]
fn qobf_gate_bound() {
    let gate = GateSpec { kind: "x".into(), targets: vec![0] };
    let f = CircuitFile { n_qubits: 1, n_inputs: Some(1), out_qubit: 0, gates: vec![gate; 34] };
    let q = PseudoDetCircuit::new(f).unwrap();
    assert!(matches!(qobf_obfuscate(&q, QobfParams::DESK, &Seed::from_u64(12)), Err(ObfError::Bounds(_))));
    let params = QobfParams { max_gates: 40, ..QobfParams::DESK };
    let obf = qobf_obfuscate(&q, params, &Seed::from_u64(12)).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(12);
    // 34 flips is the identity.
    assert!(qobf_eval(&obf, &[true], &mut rng).unwrap());
    assert!(!qobf_eval(&obf, &[false], &mut rng).unwrap());
}
