//! Succinct obfuscation from FHE and a SNARK. The public part is `Enc(pk, P)`
//! together with `pk`; the oracle `O[P]` takes `(ct', pi)`, checks `pi`
//! against the instance `(ct, ct')` and only then decrypts `ct'`.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ObfError, Program, ProgramEvaluator, Result, Stage};
use crate::homenc::{self, FheCiphertext, PublicKey, SecretKey};
use crate::oracle::{FnHandle, Seed};
use crate::snark::{self, Relation, RepetitionPcp, SnarkProof, Symbol, NODE_BYTES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SobfParams {
    pub lambda: u16,
    /// Longest input in bytes.
    pub max_input: usize,
    /// Largest program cost, also the FHE depth bound.
    pub run_depth: u32,
}

impl SobfParams {
    pub const DESK: SobfParams = SobfParams { lambda: 128, max_input: 16, run_depth: 64 };
}

/// `pp`: the encrypted program and the key it was encrypted under.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SobfPublic {
    pub pk: PublicKey,
    pub ct: FheCiphertext,
}

impl SobfPublic {
    pub fn size(&self) -> usize {
        self.ct.size() + 4 + self.pk.commitment.len()
    }
}

/// `p(lambda, |P|)` bounding `|pp|`.
pub fn pp_size_bound(lambda: u16, program_len: usize) -> usize {
    program_len + lambda as usize / 4 + 64
}

/// The relation `{((ct, ct'), x) : ct' = Eval(pk, U_x, ct)}`.
#[derive(Clone, Debug)]
pub struct EvalRelation {
    pk: PublicKey,
    max_input: usize,
    run_depth: u32,
}

fn witness_symbols_for(max_input: usize) -> usize {
    (4 + max_input).div_ceil(NODE_BYTES)
}

/// `u32 len | x | zero padding` cut into symbols.
pub fn encode_witness(x: &[u8], max_input: usize) -> Vec<Symbol> {
    let m = witness_symbols_for(max_input);
    let mut bytes = (x.len() as u32).to_le_bytes().to_vec();
    bytes.extend_from_slice(x);
    bytes.resize(m * NODE_BYTES, 0);
    bytes.chunks(NODE_BYTES).map(|c| c.try_into().expect("symbol")).collect()
}

pub fn decode_witness(w: &[Symbol], max_input: usize) -> Option<Vec<u8>> {
    let bytes: Vec<u8> = w.iter().flatten().copied().collect();
    let len = u32::from_le_bytes(bytes.get(..4)?.try_into().ok()?) as usize;
    if len > max_input || 4 + len > bytes.len() || bytes[4 + len..].iter().any(|&b| b != 0) {
        return None;
    }
    Some(bytes[4..4 + len].to_vec())
}

pub fn encode_instance(ct: &FheCiphertext, ct2: &FheCiphertext) -> Vec<u8> {
    serde_json::to_vec(&(ct, ct2)).expect("ciphertexts serialise")
}

fn decode_instance(b: &[u8]) -> Option<(FheCiphertext, FheCiphertext)> {
    serde_json::from_slice(b).ok()
}

impl Relation for EvalRelation {
    fn witness_symbols(&self, _instance: &[u8]) -> usize {
        witness_symbols_for(self.max_input)
    }

    fn accepts(&self, instance: &[u8], witness: &[Symbol]) -> bool {
        let (Some((ct, ct2)), Some(x)) = (decode_instance(instance), decode_witness(witness, self.max_input)) else {
            return false;
        };
        homenc::eval(&self.pk, &ProgramEvaluator { input: x, depth: self.run_depth }, &ct).is_ok_and(|c| c == ct2)
    }
}

/// Calls into the oracle: every call, those whose proof verified, and
/// decryptions performed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardCounters {
    pub calls: u64,
    pub verified: u64,
    pub decrypted: u64,
}

struct Guard {
    sk: SecretKey,
    pp: SobfPublic,
    relation: EvalRelation,
    pcp: RepetitionPcp,
    h: FnHandle,
    calls: AtomicU64,
    verified: AtomicU64,
    decrypted: AtomicU64,
}

impl Guard {
    fn query(&self, ct2: &FheCiphertext, proof: &SnarkProof) -> Option<Vec<u8>> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let instance = encode_instance(&self.pp.ct, ct2);
        if !snark::verify(&self.pcp, &self.h, &self.relation, &instance, proof) {
            return None;
        }
        self.verified.fetch_add(1, Ordering::SeqCst);
        let out = homenc::dec(&self.pp.pk, &self.sk, ct2).ok()?;
        self.decrypted.fetch_add(1, Ordering::SeqCst);
        Some(out)
    }
}

/// `(O[P], pp)`. Clones share the oracle and its counters.
#[derive(Clone)]
pub struct ObfuscatedProgram {
    params: SobfParams,
    guard: Arc<Guard>,
}

impl std::fmt::Debug for ObfuscatedProgram {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ObfuscatedProgram").field("params", &self.params).finish_non_exhaustive()
    }
}

impl ObfuscatedProgram {
    pub fn params(&self) -> SobfParams {
        self.params
    }

    pub fn public(&self) -> &SobfPublic {
        &self.guard.pp
    }

    /// The random oracle shared by prover and `O[P]`.
    pub fn hash(&self) -> &FnHandle {
        &self.guard.h
    }

    pub fn pcp(&self) -> RepetitionPcp {
        self.guard.pcp
    }

    pub fn relation(&self) -> &EvalRelation {
        &self.guard.relation
    }

    /// `O[P](ct', pi)`.
    pub fn query(&self, ct2: &FheCiphertext, proof: &SnarkProof) -> Option<Vec<u8>> {
        self.guard.query(ct2, proof)
    }

    pub fn counters(&self) -> GuardCounters {
        GuardCounters {
            calls: self.guard.calls.load(Ordering::SeqCst),
            verified: self.guard.verified.load(Ordering::SeqCst),
            decrypted: self.guard.decrypted.load(Ordering::SeqCst),
        }
    }
}

/// `Obf(1^lambda, P)`.
pub fn sobf_obfuscate(p: &Program, params: SobfParams, seed: &Seed) -> Result<ObfuscatedProgram> {
    if p.cost() > params.run_depth {
        return Err(ObfError::Bounds(format!("program cost {} exceeds {}", p.cost(), params.run_depth)));
    }
    let depth = u16::try_from(params.run_depth).map_err(|_| ObfError::Bounds("run depth too large".into()))?;
    let keys = homenc::gen(params.lambda, depth, &mut seed.derive("sobf-fhe", &[]).rng())?;
    let ct = homenc::enc(&keys.pk, &p.to_bytes());
    let relation = EvalRelation { pk: keys.pk.clone(), max_input: params.max_input, run_depth: params.run_depth };
    let guard = Guard {
        sk: keys.sk,
        pp: SobfPublic { pk: keys.pk, ct },
        relation,
        pcp: RepetitionPcp::TOY,
        h: FnHandle::new(seed.derive("sobf-H", &[]), 32),
        calls: AtomicU64::new(0),
        verified: AtomicU64::new(0),
        decrypted: AtomicU64::new(0),
    };
    Ok(ObfuscatedProgram { params, guard: Arc::new(guard) })
}

/// Homomorphic evaluation and proof for `x`, without calling the oracle.
pub fn sobf_prove(obf: &ObfuscatedProgram, x: &[u8]) -> Result<(FheCiphertext, SnarkProof)> {
    let params = obf.params;
    if x.len() > params.max_input {
        return Err(ObfError::Bounds(format!("input of {} bytes, limit {}", x.len(), params.max_input)));
    }
    let pp = obf.public();
    let ct2 = homenc::eval(&pp.pk, &ProgramEvaluator { input: x.to_vec(), depth: params.run_depth }, &pp.ct)?;
    let proof = snark::prove(&obf.pcp(), obf.hash(), obf.relation(), &encode_instance(&pp.ct, &ct2), &encode_witness(x, params.max_input))?;
    Ok((ct2, proof))
}

/// `Eval(O[P], pp, x)`.
pub fn sobf_eval(obf: &ObfuscatedProgram, x: &[u8]) -> Result<Vec<u8>> {
    let (ct2, proof) = sobf_prove(obf, x).map_err(|e| match e {
        ObfError::Fhe(_) => ObfError::Bottom(Stage::Evaluate),
        e => e,
    })?;
    obf.query(&ct2, &proof).ok_or(ObfError::Bottom(Stage::Snark))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obfuscate::TmProgram;
    use crate::pvqfhe::bits_to_bytes;

    #[test]
    fn identity_program() {
        let p = Program::Tm(TmProgram::identity(4, 2));
        let obf = sobf_obfuscate(&p, SobfParams::DESK, &Seed::from_u64(1)).unwrap();
        let x = bits_to_bytes(&[true, false, true, true]);
        assert_eq!(sobf_eval(&obf, &x).unwrap(), vec![1, 0]);
        assert!(obf.public().size() <= pp_size_bound(128, p.to_bytes().len()));
    }

    #[test]
    fn garbage_and_replayed_proofs_rejected() {
        let p = Program::Tm(TmProgram::complement(3));
        let obf = sobf_obfuscate(&p, SobfParams::DESK, &Seed::from_u64(2)).unwrap();
        let (ct_a, pi_a) = sobf_prove(&obf, &[1, 0, 0]).unwrap();
        let (ct_b, _) = sobf_prove(&obf, &[0, 1, 1]).unwrap();
        assert_eq!(obf.query(&ct_a, &pi_a), Some(vec![0, 1, 1]));
        assert_eq!(obf.query(&ct_b, &pi_a), None);
        let garbage = SnarkProof { root: [3u8; 16], openings: vec![] };
        assert_eq!(obf.query(&ct_a, &garbage), None);
        let c = obf.counters();
        assert_eq!((c.calls, c.verified, c.decrypted), (3, 1, 1));
    }

    #[test]
    fn witness_encoding() {
        let w = encode_witness(&[1, 2, 3], 40);
        assert_eq!(w.len(), 3);
        assert_eq!(decode_witness(&w, 40).unwrap(), vec![1, 2, 3]);
        let mut bad = w.clone();
        bad[2][15] = 1;
        assert_eq!(decode_witness(&bad, 40), None);
    }
}
