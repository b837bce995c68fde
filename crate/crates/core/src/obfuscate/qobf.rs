//! Obfuscation of pseudo-deterministic quantum circuits: encrypt `P_Q` under
//! the publicly-verifiable QFHE scheme, and obfuscate the key that checks an
//! evaluation proof for `U_x` before decrypting the result.

use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sobf::{sobf_eval, sobf_obfuscate, ObfuscatedProgram, SobfParams};
use super::{ObfError, Program, Result, Stage};
use crate::homenc::FheCiphertext;
use crate::oracle::Seed;
use crate::pvqfhe::{self, decode_proof, encode_proof, PseudoDetCircuit, PublicParams, PvError, PvMaster, PvParams, QuantumProgram};

/// `U_x`: interprets a circuit description on the hardwired input `x`.
/// Each gate costs one layer of depth.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniversalCircuit {
    pub x: Vec<bool>,
    pub max_gates: u32,
}

impl QuantumProgram for UniversalCircuit {
    fn description(&self) -> Vec<u8> {
        let mut d = b"U".to_vec();
        d.extend_from_slice(&serde_json::to_vec(self).expect("serialises"));
        d
    }

    fn depth(&self) -> u32 {
        self.max_gates
    }

    fn output(&self, plaintext: &[u8]) -> pvqfhe::Result<bool> {
        let q = PseudoDetCircuit::from_description(plaintext)?;
        if q.depth() > self.max_gates {
            return Err(PvError::Bounds(format!("{} gates, universal circuit handles {}", q.depth(), self.max_gates)));
        }
        q.output(&self.x)
    }
}

/// `DK(x, ct', pi)`: runs `Ver^PP(ct, U_x, ct', pi)` and decrypts on success.
/// It carries the QFHE key material as a seed. Output is `[b]`, or empty for
/// a rejected proof.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DkProgram {
    pub master: PvMaster,
    pub ct: FheCiphertext,
    pub max_gates: u32,
}

/// `u32 |x| | x | u32 |ct'| | ct' (JSON) | pi (wire format)`.
pub fn encode_dk_input(x: &[bool], ct2: &FheCiphertext, proof: &pvqfhe::PvProof) -> Vec<u8> {
    let mut b = (x.len() as u32).to_le_bytes().to_vec();
    b.extend(x.iter().map(|&v| u8::from(v)));
    let ct = serde_json::to_vec(ct2).expect("ciphertext serialises");
    b.extend_from_slice(&(ct.len() as u32).to_le_bytes());
    b.extend_from_slice(&ct);
    b.extend_from_slice(&encode_proof(proof));
    b
}

fn decode_dk_input(b: &[u8]) -> Option<(Vec<bool>, FheCiphertext, pvqfhe::PvProof)> {
    let n = u32::from_le_bytes(b.get(..4)?.try_into().ok()?) as usize;
    let x = pvqfhe::bytes_to_bits(b.get(4..4 + n)?).ok()?;
    let rest = &b[4 + n..];
    let m = u32::from_le_bytes(rest.get(..4)?.try_into().ok()?) as usize;
    let ct = serde_json::from_slice(rest.get(4..4 + m)?).ok()?;
    let proof = decode_proof(&rest[4 + m..]).ok()?;
    Some((x, ct, proof))
}

impl DkProgram {
    pub fn run(&self, input: &[u8]) -> Result<Vec<u8>> {
        let Some((x, ct2, proof)) = decode_dk_input(input) else {
            return Ok(vec![]);
        };
        let (_, sk, pp) = pvqfhe::rebuild(&self.master)?;
        let u = UniversalCircuit { x, max_gates: self.max_gates };
        if !pvqfhe::verify(&pp, &self.ct, &u.description(), &ct2, &proof) {
            return Ok(vec![]);
        }
        Ok(vec![u8::from(pvqfhe::dec(&pp, &sk, &ct2)?)])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QobfParams {
    pub pv: PvParams,
    pub max_gates: u32,
    /// Input bound of the obfuscated key; must fit `x`, `ct'` and `pi`.
    pub dk_max_input: usize,
}

impl QobfParams {
    pub const DESK: QobfParams = QobfParams { pv: PvParams::DESK, max_gates: 32, dk_max_input: 2048 };
}

/// `Q-tilde = (ct, PP, DK-tilde)`.
#[derive(Clone, Debug)]
pub struct ObfuscatedQuantumProgram {
    pub params: QobfParams,
    pub n_inputs: usize,
    pub ct: FheCiphertext,
    pub pp: PublicParams,
    pub dk: ObfuscatedProgram,
}

impl ObfuscatedQuantumProgram {
    /// `|ct| + |PP| + |DK-tilde|`, counting `PP` by its key material.
    pub fn size(&self) -> usize {
        self.ct.size() + self.pp.description_size() + self.dk.public().size()
    }

    /// `poly(lambda, |P_Q|)` bounding [`Self::size`].
    pub fn size_bound(lambda: u16, desc_len: usize) -> usize {
        4 * desc_len + 16 * lambda as usize + 2048
    }
}

pub fn qobf_obfuscate(q: &PseudoDetCircuit, params: QobfParams, seed: &Seed) -> Result<ObfuscatedQuantumProgram> {
    if q.depth() > params.max_gates {
        return Err(ObfError::Bounds(format!("{} gates, limit {}", q.depth(), params.max_gates)));
    }
    let master = PvMaster { params: params.pv, seed: seed.derive("qobf-pv", &[]) };
    let (pk, _, pp) = pvqfhe::gen(master.params, master.seed)?;
    let ct = pvqfhe::enc(&pk, &q.description())?;
    let dk = DkProgram { master, ct: ct.clone(), max_gates: params.max_gates };
    let sobf = SobfParams { lambda: params.pv.lambda, max_input: params.dk_max_input, run_depth: 1 + params.max_gates };
    let dk = sobf_obfuscate(&Program::VerifyThenDecrypt(dk), sobf, &seed.derive("qobf-dk", &[]))?;
    Ok(ObfuscatedQuantumProgram { params, n_inputs: q.n_inputs(), ct, pp, dk })
}

/// Transcript corruptions applied between evaluation and the key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tamper {
    /// Flip a bit of the evaluated ciphertext.
    Ciphertext,
    /// Flip a bit of `z`.
    Proof,
    /// Move a standard-basis opening off its claimed slice.
    Opening,
    /// Flip a bit of the one-shot signature.
    Signature,
}

impl Tamper {
    pub const ALL: [Tamper; 4] = [Tamper::Ciphertext, Tamper::Proof, Tamper::Opening, Tamper::Signature];

    fn apply(self, ct2: &mut FheCiphertext, proof: &mut pvqfhe::PvProof) {
        match self {
            Tamper::Ciphertext => ct2.payload[0] ^= 1,
            Tamper::Proof => proof.z[0] ^= 1,
            Tamper::Opening => {
                let o = proof.u.iter_mut().find(|o| o.basis == crate::pfc::Basis::Z).expect("challenge opens a standard position");
                o.u.flip(0);
            }
            Tamper::Signature => proof.sigma.parts[0].flip(0),
        }
    }
}

impl FromStr for Tamper {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ciphertext" => Ok(Tamper::Ciphertext),
            "proof" => Ok(Tamper::Proof),
            "opening" => Ok(Tamper::Opening),
            "signature" => Ok(Tamper::Signature),
            _ => Err(format!("unknown tamper stage '{s}'")),
        }
    }
}

/// `Eval(Q-tilde, x)`.
pub fn qobf_eval<R: Rng + ?Sized>(obf: &ObfuscatedQuantumProgram, x: &[bool], rng: &mut R) -> Result<bool> {
    qobf_eval_tampered(obf, x, None, rng)
}

pub fn qobf_eval_tampered<R: Rng + ?Sized>(obf: &ObfuscatedQuantumProgram, x: &[bool], tamper: Option<Tamper>, rng: &mut R) -> Result<bool> {
    if x.len() != obf.n_inputs {
        return Err(ObfError::Bounds(format!("expected {} input bits, got {}", obf.n_inputs, x.len())));
    }
    let u = UniversalCircuit { x: x.to_vec(), max_gates: obf.params.max_gates };
    let out = pvqfhe::eval(&obf.pp, &obf.ct, &u, rng).map_err(|_| ObfError::Bottom(Stage::Evaluate))?;
    let (mut ct2, mut proof) = (out.ct, out.proof);
    if let Some(t) = tamper {
        t.apply(&mut ct2, &mut proof);
    }
    match sobf_eval(&obf.dk, &encode_dk_input(x, &ct2, &proof))?.as_slice() {
        [b] => Ok(*b == 1),
        _ => Err(ObfError::Bottom(Stage::Verify)),
    }
}
