use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::OnceLock;

use rand::seq::SliceRandom;

use super::{OracleError, Seed};

/// Largest permutation domain, in bits.
pub const MAX_PERM_BITS: usize = 22;

struct Tables {
    forward: Vec<u32>,
    inverse: Vec<u32>,
}

/// Uniformly random permutation of `{0,1}^n_bits` with forward and inverse
/// access.
///
/// The table is drawn on first use with a seeded Fisher-Yates shuffle, so the
/// permutation depends only on the seed and never on query order. A key holder
/// that rebuilds the handle later sees exactly the same map.
pub struct PermHandle {
    n_bits: usize,
    seed: Seed,
    tables: OnceLock<Tables>,
    forward_queries: AtomicU64,
    inverse_queries: AtomicU64,
}

impl PermHandle {
    pub fn new(n_bits: usize, seed: Seed) -> Result<Self, OracleError> {
        if n_bits == 0 || n_bits > MAX_PERM_BITS {
            return Err(OracleError::DomainTooLarge(n_bits));
        }
        Ok(Self {
            n_bits,
            seed,
            tables: OnceLock::new(),
            forward_queries: AtomicU64::new(0),
            inverse_queries: AtomicU64::new(0),
        })
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    fn tables(&self) -> &Tables {
        self.tables.get_or_init(|| {
            let size = 1usize << self.n_bits;
            let mut forward: Vec<u32> = (0..size as u32).collect();
            forward.shuffle(&mut self.seed.derive("perm", &[]).rng());
            let mut inverse = vec![0u32; size];
            for (x, &y) in forward.iter().enumerate() {
                inverse[y as usize] = x as u32;
            }
            Tables { forward, inverse }
        })
    }

    fn check(&self, v: u64) -> Result<usize, OracleError> {
        if v >> self.n_bits != 0 {
            Err(OracleError::OutOfDomain { input: v, bits: self.n_bits })
        } else {
            Ok(v as usize)
        }
    }

    pub fn eval(&self, x: u64) -> Result<u64, OracleError> {
        let i = self.check(x)?;
        self.forward_queries.fetch_add(1, Ordering::Relaxed);
        Ok(self.tables().forward[i] as u64)
    }

    pub fn invert(&self, y: u64) -> Result<u64, OracleError> {
        let i = self.check(y)?;
        self.inverse_queries.fetch_add(1, Ordering::Relaxed);
        Ok(self.tables().inverse[i] as u64)
    }

    /// `(forward, inverse)` query counts so far.
    pub fn query_counts(&self) -> (u64, u64) {
        (self.forward_queries.load(Ordering::Relaxed), self.inverse_queries.load(Ordering::Relaxed))
    }
}

impl std::fmt::Debug for PermHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PermHandle").field("n_bits", &self.n_bits).field("seed", &self.seed).finish()
    }
}
