//! A repetition PCP. The proof string is the witness written `rho` times; the
//! verifier reads one full row and `checks` random cells from other rows, each
//! of which must agree with that row in its column, and runs the relation on
//! the row. The extractor takes the columnwise plurality.
//!
//! Knowledge error: if the plurality word is not a witness but the verifier
//! accepts with row `j0 = w`, some column has at most `floor(rho/2)` copies of
//! `w`'s symbol, so a uniformly chosen cell outside row `j0` agrees with `w`
//! with probability at most `((m-1)(rho-1) + floor(rho/2) - 1) / (m(rho-1))`,
//! and acceptance is bounded by that raised to `checks`.

use rand::Rng;
use sha2::{Digest, Sha256};

use super::{Symbol, NODE_BYTES, PAD_SYMBOL};

/// An NP relation over witnesses made of symbols.
pub trait Relation {
    fn witness_symbols(&self, instance: &[u8]) -> usize;
    fn accepts(&self, instance: &[u8], witness: &[Symbol]) -> bool;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RepetitionPcp {
    pub rho: usize,
    pub checks: usize,
}

impl RepetitionPcp {
    pub const TOY: RepetitionPcp = RepetitionPcp { rho: 8, checks: 12 };

    /// Unpadded proof length for an `m`-symbol witness.
    pub fn proof_len(&self, m: usize) -> usize {
        self.rho * m
    }

    /// Merkle depth of the padded proof string.
    pub fn depth(&self, m: usize) -> usize {
        self.proof_len(m).next_power_of_two().trailing_zeros() as usize
    }

    pub fn query_count(&self, m: usize) -> usize {
        m + self.checks
    }

    pub fn prove(&self, witness: &[Symbol]) -> Vec<Symbol> {
        let mut pi = Vec::with_capacity(self.proof_len(witness.len()));
        for _ in 0..self.rho {
            pi.extend_from_slice(witness);
        }
        pi
    }

    /// Positions read: row `j0` in full, then `checks` cells from other rows.
    pub fn queries<R: Rng + ?Sized>(&self, coins: &mut R, m: usize) -> Vec<usize> {
        let j0 = coins.gen_range(0..self.rho);
        let mut q: Vec<usize> = (0..m).map(|c| j0 * m + c).collect();
        for _ in 0..self.checks {
            let mut j = coins.gen_range(0..self.rho - 1);
            if j >= j0 {
                j += 1;
            }
            q.push(j * m + coins.gen_range(0..m));
        }
        q
    }

    /// Decision given the queried positions and the answers.
    pub fn decide<R: super::Relation + ?Sized>(&self, rel: &R, instance: &[u8], positions: &[usize], answers: &[Symbol]) -> bool {
        let m = rel.witness_symbols(instance);
        if m == 0 || answers.len() != self.query_count(m) || positions.len() != answers.len() {
            return false;
        }
        let row = &answers[..m];
        positions[m..].iter().zip(&answers[m..]).all(|(p, a)| *a == row[p % m]) && rel.accepts(instance, row)
    }

    /// Columnwise plurality over the first `rho * m` positions, ties to the
    /// smaller symbol. Positions beyond the string count as [`PAD_SYMBOL`].
    pub fn extract(&self, pi: &[Symbol], m: usize) -> Vec<Symbol> {
        (0..m)
            .map(|c| {
                let mut column: Vec<Symbol> = (0..self.rho).map(|j| pi.get(j * m + c).copied().unwrap_or(PAD_SYMBOL)).collect();
                column.sort();
                let mut best = column[0];
                let mut best_count = 0;
                let mut i = 0;
                while i < column.len() {
                    let mut e = i;
                    while e < column.len() && column[e] == column[i] {
                        e += 1;
                    }
                    if e - i > best_count {
                        best = column[i];
                        best_count = e - i;
                    }
                    i = e;
                }
                best
            })
            .collect()
    }

    /// Bound on the acceptance probability of proofs the extractor fails on.
    pub fn knowledge_error(&self, m: usize) -> f64 {
        let agree = ((m - 1) * (self.rho - 1) + self.rho / 2 - 1) as f64;
        (agree / (m * (self.rho - 1)) as f64).powi(self.checks as i32)
    }

    /// Exact acceptance probability of the verifier on the proof string `pi`.
    pub fn acceptance_probability<R: super::Relation + ?Sized>(&self, rel: &R, instance: &[u8], pi: &[Symbol]) -> f64 {
        let m = rel.witness_symbols(instance);
        let cell = |j: usize, c: usize| pi.get(j * m + c).copied().unwrap_or(PAD_SYMBOL);
        let mut total = 0.0;
        for j0 in 0..self.rho {
            let row: Vec<Symbol> = (0..m).map(|c| cell(j0, c)).collect();
            if !rel.accepts(instance, &row) {
                continue;
            }
            let agree = (0..self.rho).filter(|&j| j != j0).flat_map(|j| (0..m).map(move |c| (j, c))).filter(|&(j, c)| cell(j, c) == row[c]).count();
            let f = agree as f64 / ((self.rho - 1) * m) as f64;
            total += f.powi(self.checks as i32) / self.rho as f64;
        }
        total
    }
}

/// `w` is a preimage of the instance under `SHA-256(w)[..8]`; witnesses are
/// four symbols (64 bytes).
#[derive(Clone, Copy, Debug, Default)]
pub struct HashPreimage;

impl HashPreimage {
    pub const WITNESS_SYMBOLS: usize = 4;
    pub const INSTANCE_BYTES: usize = 8;

    pub fn image(witness: &[Symbol]) -> Vec<u8> {
        let mut h = Sha256::new();
        for s in witness {
            h.update(s);
        }
        h.finalize()[..Self::INSTANCE_BYTES].to_vec()
    }

    pub fn instance_for(witness: &[Symbol]) -> Vec<u8> {
        Self::image(witness)
    }

    pub fn witness_from_bytes(bytes: &[u8; 64]) -> Vec<Symbol> {
        bytes
            .chunks(NODE_BYTES)
            .map(|c| {
                let mut s = [0u8; NODE_BYTES];
                s.copy_from_slice(c);
                s
            })
            .collect()
    }
}

impl Relation for HashPreimage {
    fn witness_symbols(&self, _instance: &[u8]) -> usize {
        Self::WITNESS_SYMBOLS
    }

    fn accepts(&self, instance: &[u8], witness: &[Symbol]) -> bool {
        witness.len() == Self::WITNESS_SYMBOLS && Self::image(witness) == instance
    }
}
