//! Many-bit one-shot signatures: one single-bit token per bit of a message
//! digest. Each token still signs exactly once.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{gen, sign, verify, OssOracles, OssToken, Result, SignResult};
use crate::gf2::Gf2Vector;
use crate::oracle::hash_parts;

/// Digest length; one token per digest bit.
pub const DIGEST_BITS: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiVk {
    pub labels: Vec<u64>,
}

impl MultiVk {
    pub fn to_bytes(&self) -> Vec<u8> {
        self.labels.iter().flat_map(|l| l.to_le_bytes()).collect()
    }
}

#[derive(Debug)]
pub struct MultiToken {
    tokens: Vec<OssToken>,
}

impl MultiToken {
    /// Unbalanced cosets skipped across all component tokens.
    pub fn retries(&self) -> u32 {
        self.tokens.iter().map(|t| t.retries()).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiSignature {
    pub parts: Vec<Gf2Vector>,
}

fn digest_bits(msg: &[u8]) -> Vec<bool> {
    let h = hash_parts(&[b"oss-multi-digest", msg]);
    (0..DIGEST_BITS).map(|i| (h[i / 8] >> (7 - i % 8)) & 1 == 1).collect()
}

pub fn gen_multi<R: Rng + ?Sized>(o: &OssOracles, rng: &mut R) -> Result<(MultiVk, MultiToken)> {
    let tokens = (0..DIGEST_BITS).map(|_| gen(o, rng)).collect::<Result<Vec<_>>>()?;
    let vk = MultiVk { labels: tokens.iter().map(|t| t.vk()).collect() };
    Ok((vk, MultiToken { tokens }))
}

/// Signs `msg`; `None` if any component aborted.
pub fn sign_multi<R: Rng + ?Sized>(o: &OssOracles, token: MultiToken, msg: &[u8], rng: &mut R) -> Result<Option<MultiSignature>> {
    let mut parts = Vec::with_capacity(DIGEST_BITS);
    for (t, bit) in token.tokens.into_iter().zip(digest_bits(msg)) {
        match sign(o, t, bit, rng)? {
            SignResult::Signature(u) => parts.push(u),
            SignResult::Abort => return Ok(None),
        }
    }
    Ok(Some(MultiSignature { parts }))
}

pub fn verify_multi(o: &OssOracles, vk: &MultiVk, msg: &[u8], sig: &MultiSignature) -> bool {
    vk.labels.len() == DIGEST_BITS
        && sig.parts.len() == DIGEST_BITS
        && vk
            .labels
            .iter()
            .zip(&sig.parts)
            .zip(digest_bits(msg))
            .all(|((&y, u), bit)| verify(o, y, bit, u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Seed;
    use crate::oss::OssParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn multi_bit_round_trip() {
        let o = OssOracles::setup(OssParams::DESK, Seed::from_u64(8)).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let (vk, tok) = gen_multi(&o, &mut rng).unwrap();
        let sig = sign_multi(&o, tok, b"hello", &mut rng).unwrap().unwrap();
        assert!(verify_multi(&o, &vk, b"hello", &sig));
        assert!(!verify_multi(&o, &vk, b"hellp", &sig));
    }
}
