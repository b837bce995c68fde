//! Seeded random oracles: permutations, functions, keyed hashing and query
//! recording. Everything here is a pure function of its seed, so a handle can be
//! regenerated from key material and will agree pointwise with the original.

mod compressed;
mod perm;
mod record;
mod small_range;

pub use compressed::{
    classical_transcript_distribution, lazy_transcript_distribution, CompressedOracleState, DatabaseEntry, OracleBasis,
    MAX_COMPRESSED_BITS,
};
pub use perm::{PermHandle, MAX_PERM_BITS};
pub use record::{recording_wrap, QueryDatabase, Recording};
pub use small_range::{small_range_collision_probability, small_range_distinguisher, small_range_bound, SmallRangeFn, SmallRangeReport};

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("domain of {0} bits is outside the supported range")]
    DomainTooLarge(usize),
    #[error("input {input:#x} outside a {bits}-bit domain")]
    OutOfDomain { input: u64, bits: usize },
    #[error("compressed oracle limited to {MAX_COMPRESSED_BITS} total bits, got {0}")]
    CompressedTooLarge(usize),
    #[error("small-range size must be positive")]
    EmptyRange,
    #[error("query register is not classical")]
    QueryNotClassical,
    #[error("bad seed: {0}")]
    BadSeed(String),
}

/// SHA-256 over length-prefixed parts.
pub fn hash_parts(parts: &[&[u8]]) -> [u8; 32] {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    h.finalize().into()
}

/// 32 bytes of seed material.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Seed(pub [u8; 32]);

impl Seed {
    pub fn from_u64(x: u64) -> Self {
        Seed(hash_parts(&[b"seed-u64", &x.to_le_bytes()]))
    }

    pub fn from_hex(s: &str) -> Result<Self, OracleError> {
        let raw = hex::decode(s.trim_start_matches("0x")).map_err(|e| OracleError::BadSeed(e.to_string()))?;
        if raw.len() == 32 {
            let mut b = [0u8; 32];
            b.copy_from_slice(&raw);
            Ok(Seed(b))
        } else {
            // Short seeds are accepted and stretched.
            Ok(Seed(hash_parts(&[b"seed-hex", &raw])))
        }
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    /// Independent child seed for a labelled purpose.
    pub fn derive(&self, label: &str, data: &[u8]) -> Seed {
        Seed(hash_parts(&[b"derive", &self.0, label.as_bytes(), data]))
    }

    pub fn derive_index(&self, label: &str, i: u64) -> Seed {
        self.derive(label, &i.to_le_bytes())
    }

    pub fn rng(&self) -> ChaCha20Rng {
        ChaCha20Rng::from_seed(self.0)
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }
}

impl fmt::Debug for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Seed({}..)", &self.to_hex()[..8])
    }
}

/// Keyed hash used as a PRF: `F_key(domain, input)`.
pub fn prf(key: &Seed, domain: &str, input: &[u8]) -> [u8; 32] {
    hash_parts(&[b"prf", &key.0, domain.as_bytes(), input])
}

/// PRF output reinterpreted as a seed.
pub fn prf_seed(key: &Seed, domain: &str, input: &[u8]) -> Seed {
    Seed(prf(key, domain, input))
}

/// Expands `prf` output to `len` bytes with a counter.
pub fn prf_expand(key: &Seed, domain: &str, input: &[u8], len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(len);
    let mut ctr = 0u64;
    while out.len() < len {
        out.extend_from_slice(&hash_parts(&[b"expand", &key.0, domain.as_bytes(), input, &ctr.to_le_bytes()]));
        ctr += 1;
    }
    out.truncate(len);
    out
}

/// Anything answering byte-string queries.
pub trait Oracle: Send + Sync {
    fn query(&self, input: &[u8]) -> Vec<u8>;
}

impl<O: Oracle + ?Sized> Oracle for std::sync::Arc<O> {
    fn query(&self, input: &[u8]) -> Vec<u8> {
        (**self).query(input)
    }
}

impl<O: Oracle + ?Sized> Oracle for &O {
    fn query(&self, input: &[u8]) -> Vec<u8> {
        (**self).query(input)
    }
}

/// A uniformly random function `{0,1}* -> {0,1}^{8 out_len}` fixed by its seed.
#[derive(Clone, Debug)]
pub struct FnHandle {
    seed: Seed,
    out_len: usize,
}

impl FnHandle {
    pub fn new(seed: Seed, out_len: usize) -> Self {
        Self { seed, out_len }
    }

    pub fn out_len(&self) -> usize {
        self.out_len
    }

    pub fn seed(&self) -> &Seed {
        &self.seed
    }

    pub fn eval(&self, input: &[u8]) -> Vec<u8> {
        prf_expand(&self.seed, "fn", input, self.out_len)
    }
}

impl Oracle for FnHandle {
    fn query(&self, input: &[u8]) -> Vec<u8> {
        self.eval(input)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fn_handles_with_equal_seeds_agree() {
        let a = FnHandle::new(Seed::from_u64(3), 40);
        let b = FnHandle::new(Seed::from_u64(3), 40);
        for i in 0u32..50 {
            assert_eq!(a.eval(&i.to_le_bytes()), b.eval(&i.to_le_bytes()));
        }
        assert_eq!(a.eval(b"x").len(), 40);
        assert_ne!(a.eval(b"x"), FnHandle::new(Seed::from_u64(4), 40).eval(b"x"));
    }

    #[test]
    fn seed_hex_round_trip() {
        let s = Seed::from_u64(99);
        assert_eq!(Seed::from_hex(&s.to_hex()).unwrap(), s);
        assert!(Seed::from_hex("zz").is_err());
        assert_eq!(Seed::from_hex("00ff").unwrap(), Seed::from_hex("0x00ff").unwrap());
    }

    #[test]
    fn hash_parts_is_length_prefixed() {
        assert_ne!(hash_parts(&[b"ab", b"c"]), hash_parts(&[b"a", b"bc"]));
    }
}
