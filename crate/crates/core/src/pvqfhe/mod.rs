//! Publicly-verifiable quantum FHE compiled from one-shot signatures,
//! commitments with Hadamard openings and a privately-verifiable scheme.
//!
//! The evaluator commits to every qubit of the honest state under a key that
//! depends on a fresh one-shot verification key, signs the commitments, and
//! only then learns the per-position verification data. The public
//! parameters [`PublicParams`] bundle the five keyed functionalities behind an
//! evaluate-only handle: the signature oracles, the commitment keys, `PrivGen`,
//! the challenge hash `H` and `PrivVer`.

pub mod circuit;
pub mod privscheme;
pub mod wire;

pub use circuit::{all_inputs, bits_to_bytes, bytes_to_bits, corpus, parse_bits, CircuitFile, GateSpec, PseudoDetCircuit};
pub use privscheme::{Mark, PrivScheme, TransparentPriv};
pub use wire::{decode_proof, encode_proof};

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::densesim::SimError;
use crate::homenc::{self, FheCiphertext, FheError, PublicKey, SecretKey};
use crate::oracle::{prf, prf_seed, Seed};
use crate::oss::multi::{gen_multi, sign_multi, verify_multi, MultiSignature, MultiVk};
use crate::oss::{OssError, OssOracles, OssParams};
use crate::pfc::{self, CommitKey, Commitment, DecodeKey, Opening, PfcError, PfcParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PvError {
    #[error("bad circuit: {0}")]
    Circuit(String),
    #[error("circuit is not pseudo-deterministic on input {input}: Pr[1] = {p_one}")]
    NotPseudoDeterministic { input: u64, p_one: f64 },
    #[error("bad input: {0}")]
    Input(String),
    #[error("outside the scheme bounds: {0}")]
    Bounds(String),
    #[error(transparent)]
    Fhe(#[from] FheError),
    #[error(transparent)]
    Oss(#[from] OssError),
    #[error(transparent)]
    Pfc(#[from] PfcError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("one-shot signature aborted")]
    SignatureAbort,
    #[error("evaluation produced a transcript that PrivVer rejects: {0:?}")]
    Rejected(Reject),
    #[error("malformed proof encoding: {0}")]
    Wire(String),
}

pub type Result<T> = std::result::Result<T, PvError>;

/// A quantum computation as seen by the compiler: its description `P_Q`, a
/// depth and the pseudo-deterministic output on a plaintext.
pub trait QuantumProgram: Send + Sync {
    fn description(&self) -> Vec<u8>;
    fn depth(&self) -> u32;
    fn output(&self, plaintext: &[u8]) -> Result<bool>;
}

impl QuantumProgram for PseudoDetCircuit {
    fn description(&self) -> Vec<u8> {
        PseudoDetCircuit::description(self)
    }

    fn depth(&self) -> u32 {
        PseudoDetCircuit::depth(self)
    }

    fn output(&self, plaintext: &[u8]) -> Result<bool> {
        PseudoDetCircuit::output(self, &bytes_to_bits(plaintext)?)
    }
}

/// Scheme bounds `(lambda, D, N, S)` and the component parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PvParams {
    pub lambda: u16,
    pub depth: u16,
    pub max_input: usize,
    pub max_desc: usize,
    pub oss: OssParams,
    pub pfc: PfcParams,
}

impl PvParams {
    pub const DESK: PvParams = PvParams { lambda: 128, depth: 64, max_input: 4096, max_desc: 4096, oss: OssParams::DESK, pfc: PfcParams::DESK };

    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 || self.max_input == 0 || self.max_desc == 0 {
            return Err(PvError::Bounds("bounds must be positive".into()));
        }
        self.oss.validate()?;
        self.pfc.outer.validate()?;
        self.pfc.inner.validate()?;
        Ok(())
    }
}

/// Everything `Gen` samples, as a seed. Rebuilding from it is how a program
/// that carries the keys can reconstruct them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PvMaster {
    pub params: PvParams,
    pub seed: Seed,
}

impl PvMaster {
    pub fn to_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("master serialises")
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        serde_json::from_slice(b).map_err(|e| PvError::Input(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PvPublicKey {
    pub params: PvParams,
    pub fhe: PublicKey,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PvSecretKey {
    pub fhe_pk: PublicKey,
    pub fhe: SecretKey,
}

/// `pi = (pk_OSS, c, sigma, u, y, z)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PvProof {
    pub pk_oss: MultiVk,
    pub c: Vec<Commitment>,
    pub sigma: MultiSignature,
    pub u: Vec<Opening>,
    pub y: Vec<u8>,
    pub z: Vec<u8>,
}

/// Encoded size for the given section lengths.
pub fn proof_wire_size(labels: usize, commitments: usize, sig_parts: usize, openings: usize, y: usize, z: usize) -> usize {
    4 + (4 + 8 * labels) + (4 + 25 * commitments) + (4 + 9 * sig_parts) + (4 + 11 * openings) + (4 + y) + (4 + z)
}

/// `p(lambda, D, N, S)` bounding `|pi|`. The proof does not grow with `D`,
/// `N` or `S`; it is linear in `lambda` and the number of positions.
pub fn proof_size_bound(params: &PvParams, ell: usize) -> usize {
    9 * params.lambda as usize + 40 * ell + 128
}

/// How `PrivVer` treated one position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PositionClass {
    /// `i in T`: standard-basis decoding.
    Standard,
    /// `i in T-bar \ S`: Hadamard decoding.
    Hadamard,
    /// `i in T-bar and S`: replaced by `*`.
    Starred,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Reject {
    Shape,
    Signature,
    Opening(usize),
    Priv,
}

/// `PrivVer` with its intermediate classification exposed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrivVerOutcome {
    pub classes: Vec<PositionClass>,
    pub result: std::result::Result<FheCiphertext, Reject>,
}

struct PpInner {
    params: PvParams,
    master: PvMaster,
    k_pfc: Seed,
    k_priv: Seed,
    k_h: Seed,
    oss: Arc<OssOracles>,
    scheme: Arc<dyn PrivScheme>,
    ck_cache: Mutex<HashMap<(MultiVk, usize), Arc<CommitKey>>>,
}

/// The obfuscated bundle `PP`. Cloning shares the same oracles.
#[derive(Clone)]
pub struct PublicParams {
    inner: Arc<PpInner>,
}

impl std::fmt::Debug for PublicParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PublicParams").field("params", &self.inner.params).finish_non_exhaustive()
    }
}

/// Canonical signed message for `(ct, Q, c)`.
pub fn signed_message(ct: &FheCiphertext, q: &[u8], c: &[Commitment]) -> Vec<u8> {
    let mut m = Vec::new();
    for part in [ct.to_bytes(), q.to_vec()] {
        m.extend_from_slice(&(part.len() as u64).to_le_bytes());
        m.extend_from_slice(&part);
    }
    m.extend_from_slice(&(c.len() as u64).to_le_bytes());
    for ci in c {
        m.extend_from_slice(&ci.to_bytes());
    }
    m
}

fn sig_bytes(s: &MultiSignature) -> Vec<u8> {
    s.parts.iter().flat_map(|p| [vec![p.len() as u8], p.bits().to_le_bytes().to_vec()].concat()).collect()
}

impl PublicParams {
    fn from_master(master: &PvMaster, fhe_pk: PublicKey) -> Result<Self> {
        let s = &master.seed;
        let inner = PpInner {
            params: master.params,
            master: master.clone(),
            k_pfc: s.derive("pv-k-pfc", &[]),
            k_priv: s.derive("pv-k-priv", &[]),
            k_h: s.derive("pv-k-h", &[]),
            oss: OssOracles::setup(master.params.oss, s.derive("pv-oss", &[]))?,
            scheme: Arc::new(TransparentPriv::new(fhe_pk)),
            ck_cache: Mutex::new(HashMap::new()),
        };
        Ok(Self { inner: Arc::new(inner) })
    }

    pub fn params(&self) -> PvParams {
        self.inner.params
    }

    pub fn scheme(&self) -> &dyn PrivScheme {
        &*self.inner.scheme
    }

    /// Size of the key material the bundle is built from.
    pub fn description_size(&self) -> usize {
        self.inner.master.to_bytes().len()
    }

    /// `O`.
    pub fn oss(&self) -> &OssOracles {
        &self.inner.oss
    }

    fn ck_seed(&self, pk_oss: &MultiVk, i: usize) -> Seed {
        let mut input = pk_oss.to_bytes();
        input.extend_from_slice(&(i as u64).to_le_bytes());
        prf_seed(&self.inner.k_pfc, "pv-ck", &input)
    }

    fn dk(&self, pk_oss: &MultiVk, i: usize) -> Result<DecodeKey> {
        Ok(pfc::gen(self.inner.params.pfc, &self.ck_seed(pk_oss, i))?.1)
    }

    /// `CK(pk_OSS, i, .)`: the commitment key of `PFC.Gen(F(pk_OSS, i))`.
    pub fn ck(&self, pk_oss: &MultiVk, i: usize) -> Result<Arc<CommitKey>> {
        let key = (pk_oss.clone(), i);
        if let Some(ck) = self.inner.ck_cache.lock().expect("lock").get(&key) {
            return Ok(ck.clone());
        }
        let ck = Arc::new(pfc::gen(self.inner.params.pfc, &self.ck_seed(pk_oss, i))?.0);
        self.inner.ck_cache.lock().expect("lock").insert(key, ck.clone());
        Ok(ck)
    }

    fn sp(&self, ct: &FheCiphertext, q: &[u8], pk_oss: &MultiVk, c: &[Commitment], sigma: &MultiSignature) -> Option<Seed> {
        let msg = signed_message(ct, q, c);
        if !verify_multi(&self.inner.oss, pk_oss, &msg, sigma) {
            return None;
        }
        let mut input = msg;
        input.extend_from_slice(&pk_oss.to_bytes());
        input.extend_from_slice(&sig_bytes(sigma));
        Some(prf_seed(&self.inner.k_priv, "pv-sp", &input))
    }

    /// `PrivGen(ct, Q, pk_OSS, c, sigma, i)`; `None` when `sigma` does not
    /// sign `(ct, Q, c)` under `pk_OSS`.
    pub fn priv_gen(&self, ct: &FheCiphertext, q: &[u8], pk_oss: &MultiVk, c: &[Commitment], sigma: &MultiSignature, i: usize) -> Option<Vec<u8>> {
        let sp = self.sp(ct, q, pk_oss, c, sigma)?;
        Some(self.inner.scheme.par_ver_gen(ct, q, &sp, i))
    }

    /// `H(y) = H(1, y) || ... || H(l, y)`, one bit per position; a set bit
    /// puts the position in `T`.
    pub fn h(&self, y: &[u8]) -> Vec<bool> {
        (0..self.inner.scheme.ell())
            .map(|i| {
                let mut input = (i as u64 + 1).to_le_bytes().to_vec();
                input.extend_from_slice(y);
                prf(&self.inner.k_h, "pv-h", &input)[0] & 1 == 1
            })
            .collect()
    }

    /// `PrivVer(ct, Q, pi)`.
    pub fn priv_ver(&self, ct: &FheCiphertext, q: &[u8], pi: &PvProof) -> Option<FheCiphertext> {
        self.priv_ver_outcome(ct, q, pi).result.ok()
    }

    pub fn priv_ver_outcome(&self, ct: &FheCiphertext, q: &[u8], pi: &PvProof) -> PrivVerOutcome {
        let scheme = &*self.inner.scheme;
        let ell = scheme.ell();
        let reject = |classes, r| PrivVerOutcome { classes, result: Err(r) };
        if pi.c.len() != ell || pi.u.len() != ell {
            return reject(vec![], Reject::Shape);
        }
        let Some(sp) = self.sp(ct, q, &pi.pk_oss, &pi.c, &pi.sigma) else {
            return reject(vec![], Reject::Signature);
        };
        let s = scheme.standard_positions(&sp);
        let t = self.h(&pi.y);
        let classes: Vec<PositionClass> = (0..ell)
            .map(|i| match (t[i], s[i]) {
                (true, _) => PositionClass::Standard,
                (false, false) => PositionClass::Hadamard,
                (false, true) => PositionClass::Starred,
            })
            .collect();
        let mut m = Vec::with_capacity(ell);
        for (i, class) in classes.iter().enumerate() {
            let decoded = match class {
                PositionClass::Starred => {
                    m.push(Mark::Star);
                    continue;
                }
                PositionClass::Standard => self.dk(&pi.pk_oss, i).ok().and_then(|dk| dk.dec_z(&pi.c[i], &pi.u[i])),
                PositionClass::Hadamard => self.dk(&pi.pk_oss, i).ok().and_then(|dk| dk.dec_x(&pi.c[i], &pi.u[i])),
            };
            match decoded {
                Some(b) => m.push(Mark::Bit(b)),
                None => return reject(classes, Reject::Opening(i)),
            }
        }
        let h = |y: &[u8]| self.h(y);
        match scheme.ver(&sp, ct, q, &m, &pi.y, &pi.z, &h) {
            Some(out) => PrivVerOutcome { classes, result: Ok(out) },
            None => reject(classes, Reject::Priv),
        }
    }
}

/// `Gen(1^lambda, D, N, S)` from a seed.
pub fn gen(params: PvParams, seed: Seed) -> Result<(PvPublicKey, PvSecretKey, PublicParams)> {
    params.validate()?;
    let master = PvMaster { params, seed };
    rebuild(&master)
}

/// Reconstructs `Gen`'s output from its seed.
pub fn rebuild(master: &PvMaster) -> Result<(PvPublicKey, PvSecretKey, PublicParams)> {
    let p = master.params;
    let keys = homenc::gen(p.lambda, p.depth, &mut master.seed.derive("pv-fhe", &[]).rng())?;
    let pp = PublicParams::from_master(master, keys.pk.clone())?;
    Ok((PvPublicKey { params: p, fhe: keys.pk.clone() }, PvSecretKey { fhe_pk: keys.pk, fhe: keys.sk }, pp))
}

/// `Enc(pk, x)` for a plaintext byte string.
pub fn enc(pk: &PvPublicKey, x: &[u8]) -> Result<FheCiphertext> {
    if x.len() > pk.params.max_input {
        return Err(PvError::Bounds(format!("plaintext of {} bytes, limit {}", x.len(), pk.params.max_input)));
    }
    Ok(homenc::enc(&pk.fhe, x))
}

/// `Enc` of a bit string, one byte per bit.
pub fn enc_bits(pk: &PvPublicKey, x: &[bool]) -> Result<FheCiphertext> {
    enc(pk, &bits_to_bytes(x))
}

/// Retry counts surfaced by `Eval`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalStats {
    /// Unbalanced cosets skipped while generating signature tokens.
    pub oss_retries: u32,
    /// Unbalanced cosets skipped inside the commitments.
    pub pfc_retries: u32,
    /// Challenges `T` redrawn because they left nothing to check.
    pub challenge_retries: u32,
}

#[derive(Clone, Debug)]
pub struct EvalOutput {
    pub ct: FheCiphertext,
    pub proof: PvProof,
    pub stats: EvalStats,
}

/// Challenge redraws before giving up; each succeeds with probability at least 15/16.
pub const MAX_CHALLENGE_ATTEMPTS: u32 = 256;

/// `Eval^PP(ct, Q)`.
pub fn eval<R: Rng + ?Sized>(pp: &PublicParams, ct: &FheCiphertext, q: &dyn QuantumProgram, rng: &mut R) -> Result<EvalOutput> {
    let params = pp.params();
    let q_desc = q.description();
    if q.depth() > params.depth as u32 || q_desc.len() > params.max_desc || ct.payload.len() > params.max_input {
        return Err(PvError::Bounds(format!("depth {}, |Q| = {}, |ct| = {}", q.depth(), q_desc.len(), ct.payload.len())));
    }
    let scheme = pp.scheme();
    let ell = scheme.ell();
    let mut stats = EvalStats::default();

    let (pk_oss, token) = gen_multi(pp.oss(), rng)?;
    stats.oss_retries = token.retries();

    let psi = scheme.state(ct, q)?;
    let mut committed = Vec::with_capacity(ell);
    for (i, amps) in psi.into_iter().enumerate() {
        let com = pfc::commit(&*pp.ck(&pk_oss, i)?, amps, rng)?;
        stats.pfc_retries += com.retries();
        committed.push(com);
    }
    let c: Vec<Commitment> = committed.iter().map(|x| x.commitment()).collect();

    let sigma = sign_multi(pp.oss(), token, &signed_message(ct, &q_desc, &c), rng)?.ok_or(PvError::SignatureAbort)?;
    let ppv = (0..ell)
        .map(|i| pp.priv_gen(ct, &q_desc, &pk_oss, &c, &sigma, i))
        .collect::<Option<Vec<_>>>()
        .ok_or(PvError::Rejected(Reject::Signature))?;

    let mut attempt = 0;
    let (y, t) = loop {
        let y = scheme.measure_y(&ppv, ct, &q_desc, attempt);
        let t = pp.h(&y);
        if scheme.challenge_usable(&t) {
            break (y, t);
        }
        attempt += 1;
        stats.challenge_retries += 1;
        if attempt >= MAX_CHALLENGE_ATTEMPTS {
            return Err(PvError::Rejected(Reject::Priv));
        }
    };
    let z = scheme.measure_z(&ppv, &y, &t);

    let u: Vec<Opening> = committed.into_iter().zip(&t).map(|(com, &ti)| if ti { com.open_z(rng) } else { com.open_x(rng) }).collect();
    let proof = PvProof { pk_oss, c, sigma, u, y, z };
    let out = pp.priv_ver_outcome(ct, &q_desc, &proof);
    match out.result {
        Ok(ct_out) => Ok(EvalOutput { ct: ct_out, proof, stats }),
        Err(r) => Err(PvError::Rejected(r)),
    }
}

/// `Ver^PP(ct, P_Q, ct-tilde, pi)`.
pub fn verify(pp: &PublicParams, ct: &FheCiphertext, q: &[u8], ct_out: &FheCiphertext, pi: &PvProof) -> bool {
    pp.priv_ver(ct, q, pi).as_ref() == Some(ct_out)
}

/// `Dec(sk, ct-tilde)`.
pub fn dec(pp: &PublicParams, sk: &PvSecretKey, ct: &FheCiphertext) -> Result<bool> {
    pp.scheme().dec(&sk.fhe_pk, &sk.fhe, ct)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn setup() -> (PvPublicKey, PvSecretKey, PublicParams) {
        gen(PvParams::DESK, Seed::from_u64(77)).unwrap()
    }

    #[test]
    fn honest_and_circuit() {
        let (pk, sk, pp) = setup();
        let q = &corpus()[1].1;
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let ct = enc_bits(&pk, &[true, true]).unwrap();
        let out = eval(&pp, &ct, q, &mut rng).unwrap();
        assert!(verify(&pp, &ct, &q.description(), &out.ct, &out.proof));
        assert!(dec(&pp, &sk, &out.ct).unwrap());
        assert_eq!(decode_proof(&encode_proof(&out.proof)).unwrap(), out.proof);
        assert!(encode_proof(&out.proof).len() <= proof_size_bound(&pk.params, TransparentPriv::ELL));
    }

    #[test]
    fn priv_gen_requires_signature() {
        let (pk, _, pp) = setup();
        let q = &corpus()[0].1;
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let ct = enc_bits(&pk, &[false]).unwrap();
        let out = eval(&pp, &ct, q, &mut rng).unwrap();
        let d = q.description();
        let a = pp.priv_gen(&ct, &d, &out.proof.pk_oss, &out.proof.c, &out.proof.sigma, 2).unwrap();
        assert_eq!(pp.priv_gen(&ct, &d, &out.proof.pk_oss, &out.proof.c, &out.proof.sigma, 2).unwrap(), a);
        let mut bad = out.proof.sigma.clone();
        bad.parts[0].flip(0);
        assert_eq!(pp.priv_gen(&ct, &d, &out.proof.pk_oss, &out.proof.c, &bad, 2), None);
    }

    #[test]
    fn rebuild_reproduces_keys() {
        let (pk, sk, pp) = setup();
        let (pk2, sk2, pp2) = rebuild(&PvMaster { params: PvParams::DESK, seed: Seed::from_u64(77) }).unwrap();
        assert_eq!((pk, sk), (pk2, sk2));
        assert_eq!(pp.h(b"abc"), pp2.h(b"abc"));
    }
}
