//! Leveled homomorphic encryption interface with a transparent reference
//! scheme. The reference scheme provides correctness, determinism and the
//! size profile of a real scheme; it hides nothing. Ciphertexts carry the
//! plaintext in the clear next to an integrity tag bound to the public key,
//! so tampering is detected at decryption.

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FheError {
    #[error("depth bound must be at least 1")]
    ZeroDepth,
    #[error("security parameter {0} must be a multiple of 8 in 64..=256")]
    BadLambda(u16),
    #[error("evaluation needs depth {needed}, bound is {bound}")]
    DepthExceeded { needed: u32, bound: u16 },
    #[error("ciphertext integrity check failed")]
    BadTag,
    #[error("secret key does not match the public key")]
    WrongKey,
    #[error("malformed plaintext for this computation: {0}")]
    BadInput(String),
}

pub type Result<T> = std::result::Result<T, FheError>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PublicKey {
    pub lambda: u16,
    pub depth_bound: u16,
    #[serde(with = "hex_bytes")]
    pub commitment: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecretKey {
    #[serde(with = "hex_bytes")]
    pub key: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FheKeys {
    pub pk: PublicKey,
    pub sk: SecretKey,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FheCiphertext {
    #[serde(with = "hex_bytes")]
    pub payload: Vec<u8>,
    #[serde(with = "hex_bytes")]
    pub tag: Vec<u8>,
    pub depth: u16,
}

impl FheCiphertext {
    /// Canonical bytes: `u16 depth | u32 len | payload | tag`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(6 + self.payload.len() + self.tag.len());
        out.extend_from_slice(&self.depth.to_le_bytes());
        out.extend_from_slice(&(self.payload.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.payload);
        out.extend_from_slice(&self.tag);
        out
    }

    pub fn size(&self) -> usize {
        self.payload.len() + self.tag.len() + 2
    }
}

/// `p(lambda, D, |x|)` for the reference scheme: plaintext, tag and depth counter.
pub fn ciphertext_size_bound(lambda: u16, _depth_bound: u16, plaintext_len: usize) -> usize {
    plaintext_len + lambda as usize / 8 + 2
}

mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(b: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(b))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        hex::decode(s).map_err(serde::de::Error::custom)
    }
}

fn commit_key(sk: &[u8]) -> Vec<u8> {
    Sha256::new().chain_update(b"fhe-pk").chain_update(sk).finalize().to_vec()
}

fn tag(pk: &PublicKey, depth: u16, payload: &[u8]) -> Vec<u8> {
    let h = Sha256::new()
        .chain_update(b"fhe-tag")
        .chain_update(&pk.commitment)
        .chain_update(depth.to_le_bytes())
        .chain_update((payload.len() as u64).to_le_bytes())
        .chain_update(payload)
        .finalize();
    h[..pk.lambda as usize / 8].to_vec()
}

/// `Gen(1^lambda, D)`.
pub fn gen<R: Rng + ?Sized>(lambda: u16, depth_bound: u16, rng: &mut R) -> Result<FheKeys> {
    if depth_bound == 0 {
        return Err(FheError::ZeroDepth);
    }
    if !(64..=256).contains(&lambda) || !lambda.is_multiple_of(8) {
        return Err(FheError::BadLambda(lambda));
    }
    let mut key = vec![0u8; lambda as usize / 8];
    rng.fill_bytes(&mut key);
    let pk = PublicKey { lambda, depth_bound, commitment: commit_key(&key) };
    Ok(FheKeys { pk, sk: SecretKey { key } })
}

pub fn enc(pk: &PublicKey, x: &[u8]) -> FheCiphertext {
    FheCiphertext { payload: x.to_vec(), tag: tag(pk, 0, x), depth: 0 }
}

/// Integrity check against `pk`, available to anyone holding the public key.
pub fn check_tag(pk: &PublicKey, ct: &FheCiphertext) -> Result<()> {
    if tag(pk, ct.depth, &ct.payload) == ct.tag {
        Ok(())
    } else {
        Err(FheError::BadTag)
    }
}

pub fn dec(pk: &PublicKey, sk: &SecretKey, ct: &FheCiphertext) -> Result<Vec<u8>> {
    if commit_key(&sk.key) != pk.commitment {
        return Err(FheError::WrongKey);
    }
    check_tag(pk, ct)?;
    Ok(ct.payload.clone())
}

/// A classical deterministic computation with a depth.
pub trait ClassicalComputation {
    fn depth(&self) -> u32;
    fn eval_plain(&self, x: &[u8]) -> Result<Vec<u8>>;
}

/// `Eval(pk, C, ct)`.
pub fn eval<C: ClassicalComputation + ?Sized>(pk: &PublicKey, c: &C, ct: &FheCiphertext) -> Result<FheCiphertext> {
    check_tag(pk, ct)?;
    let needed = ct.depth as u32 + c.depth();
    if needed > pk.depth_bound as u32 {
        return Err(FheError::DepthExceeded { needed, bound: pk.depth_bound });
    }
    let payload = c.eval_plain(&ct.payload)?;
    let depth = needed as u16;
    Ok(FheCiphertext { tag: tag(pk, depth, &payload), payload, depth })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoolGate {
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Xor(usize, usize),
}

/// A boolean circuit over one-bit-per-byte plaintexts. Wires `0..n_inputs`
/// are inputs; gate `g` drives wire `n_inputs + g`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoolCircuit {
    pub n_inputs: usize,
    pub gates: Vec<BoolGate>,
    pub outputs: Vec<usize>,
}

impl BoolCircuit {
    pub fn identity(n: usize) -> Self {
        Self { n_inputs: n, gates: vec![], outputs: (0..n).collect() }
    }

    pub fn not1() -> Self {
        Self { n_inputs: 1, gates: vec![BoolGate::Not(0)], outputs: vec![1] }
    }

    /// `(a1 a0) + (b1 b0) mod 4` on inputs `[a0, a1, b0, b1]`, outputs `[s0, s1]`.
    pub fn adder2() -> Self {
        Self {
            n_inputs: 4,
            gates: vec![BoolGate::Xor(0, 2), BoolGate::And(0, 2), BoolGate::Xor(1, 3), BoolGate::Xor(6, 5)],
            outputs: vec![4, 7],
        }
    }

    /// Random well-formed circuit.
    pub fn random<R: Rng + ?Sized>(n_inputs: usize, n_gates: usize, n_outputs: usize, rng: &mut R) -> Self {
        let mut gates = Vec::with_capacity(n_gates);
        for g in 0..n_gates {
            let w = n_inputs + g;
            let a = rng.gen_range(0..w);
            let b = rng.gen_range(0..w);
            gates.push(match rng.gen_range(0..4) {
                0 => BoolGate::Not(a),
                1 => BoolGate::And(a, b),
                2 => BoolGate::Or(a, b),
                _ => BoolGate::Xor(a, b),
            });
        }
        let total = n_inputs + n_gates;
        let outputs = (0..n_outputs).map(|_| rng.gen_range(0..total)).collect();
        Self { n_inputs, gates, outputs }
    }

    fn wire_depths(&self) -> Vec<u32> {
        let mut d = vec![0u32; self.n_inputs + self.gates.len()];
        for (g, gate) in self.gates.iter().enumerate() {
            d[self.n_inputs + g] = 1 + match *gate {
                BoolGate::Not(a) => d[a],
                BoolGate::And(a, b) | BoolGate::Or(a, b) | BoolGate::Xor(a, b) => d[a].max(d[b]),
            };
        }
        d
    }

    pub fn eval_bits(&self, x: &[bool]) -> Result<Vec<bool>> {
        if x.len() != self.n_inputs {
            return Err(FheError::BadInput(format!("expected {} bits, got {}", self.n_inputs, x.len())));
        }
        let mut w = x.to_vec();
        for (g, gate) in self.gates.iter().enumerate() {
            let wire = |i: usize| -> Result<bool> {
                if i < self.n_inputs + g {
                    Ok(w[i])
                } else {
                    Err(FheError::BadInput(format!("gate {g} reads undriven wire {i}")))
                }
            };
            let v = match *gate {
                BoolGate::Not(a) => !wire(a)?,
                BoolGate::And(a, b) => wire(a)? & wire(b)?,
                BoolGate::Or(a, b) => wire(a)? | wire(b)?,
                BoolGate::Xor(a, b) => wire(a)? ^ wire(b)?,
            };
            w.push(v);
        }
        self.outputs.iter().map(|&o| w.get(o).copied().ok_or_else(|| FheError::BadInput(format!("no wire {o}")))).collect()
    }
}

impl ClassicalComputation for BoolCircuit {
    fn depth(&self) -> u32 {
        let d = self.wire_depths();
        self.outputs.iter().map(|&o| d.get(o).copied().unwrap_or(0)).max().unwrap_or(0)
    }

    fn eval_plain(&self, x: &[u8]) -> Result<Vec<u8>> {
        if let Some(b) = x.iter().find(|&&b| b > 1) {
            return Err(FheError::BadInput(format!("byte {b} is not a bit")));
        }
        let bits: Vec<bool> = x.iter().map(|&b| b == 1).collect();
        Ok(self.eval_bits(&bits)?.into_iter().map(u8::from).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn keys(d: u16) -> FheKeys {
        gen(128, d, &mut ChaCha20Rng::seed_from_u64(1)).unwrap()
    }

    #[test]
    fn round_trip_and_tamper() {
        let k = keys(4);
        let ct = enc(&k.pk, b"hello");
        assert_eq!(dec(&k.pk, &k.sk, &ct).unwrap(), b"hello");
        let mut bad = ct.clone();
        bad.payload[0] ^= 1;
        assert_eq!(dec(&k.pk, &k.sk, &bad), Err(FheError::BadTag));
        let other = gen(128, 4, &mut ChaCha20Rng::seed_from_u64(2)).unwrap();
        assert_ne!(other.pk, k.pk);
        assert_eq!(dec(&k.pk, &other.sk, &ct), Err(FheError::WrongKey));
        assert!(ct.size() <= ciphertext_size_bound(128, 4, 5));
    }

    #[test]
    fn not_and_adder() {
        let k = keys(8);
        let ct = eval(&k.pk, &BoolCircuit::not1(), &enc(&k.pk, &[1])).unwrap();
        assert_eq!(dec(&k.pk, &k.sk, &ct).unwrap(), vec![0]);
        let id = eval(&k.pk, &BoolCircuit::identity(3), &enc(&k.pk, &[1, 0, 1])).unwrap();
        assert_eq!(dec(&k.pk, &k.sk, &id).unwrap(), vec![1, 0, 1]);
        for x in 0u8..16 {
            let bits: Vec<u8> = (0..4).map(|i| (x >> i) & 1).collect();
            let a = bits[0] + 2 * bits[1];
            let b = bits[2] + 2 * bits[3];
            let s = (a + b) % 4;
            let ct = eval(&k.pk, &BoolCircuit::adder2(), &enc(&k.pk, &bits)).unwrap();
            assert_eq!(dec(&k.pk, &k.sk, &ct).unwrap(), vec![s & 1, s >> 1]);
        }
    }

    #[test]
    fn depth_bound_enforced() {
        let k = keys(1);
        let ct = eval(&k.pk, &BoolCircuit::not1(), &enc(&k.pk, &[0])).unwrap();
        assert_eq!(ct.depth, 1);
        assert_eq!(eval(&k.pk, &BoolCircuit::not1(), &ct), Err(FheError::DepthExceeded { needed: 2, bound: 1 }));
        assert_eq!(gen(128, 0, &mut ChaCha20Rng::seed_from_u64(0)).unwrap_err(), FheError::ZeroDepth);
    }

    #[test]
    fn serialisation_is_hex() {
        let k = keys(2);
        let ct = enc(&k.pk, &[0xab]);
        let js = serde_json::to_value(&ct).unwrap();
        assert_eq!(js["payload"], "ab");
        assert_eq!(serde_json::from_value::<FheCiphertext>(js).unwrap(), ct);
    }
}
