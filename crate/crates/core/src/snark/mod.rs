//! A Micali-style succinct argument: the PCP proof string is committed with a
//! Merkle tree under a random oracle, the verifier's coins are the oracle's
//! answer on the root, and only the queried symbols travel with their
//! authentication paths.
//!
//! The oracle `H` answers 32 bytes; a tree node is the first 16 of them on a
//! tagged pair of children. Leaves are the proof symbols themselves.

mod extract;
mod merkle;
mod pcp;
mod wire;

pub use extract::{extract_tree, find_witness, ExtractedTree};
pub use merkle::{check_path, expand_path, merkle_commit, AuthPath, MerkleTree};
pub use pcp::{HashPreimage, Relation, RepetitionPcp};
pub use wire::{decode_proof, encode_proof};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::Oracle;

/// Bytes per node and per proof symbol.
pub const NODE_BYTES: usize = 16;

pub type Node = [u8; NODE_BYTES];
pub type Symbol = [u8; NODE_BYTES];

/// Padding symbol for proof strings whose length is not a power of two.
pub const PAD_SYMBOL: Symbol = [0u8; NODE_BYTES];

const NODE_TAG: &[u8] = b"N";
const RAND_TAG: &[u8] = b"R";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SnarkError {
    #[error("cannot commit to an empty list")]
    Empty,
    #[error("witness does not satisfy the relation")]
    InvalidWitness,
    #[error("witness has {got} symbols, relation expects {expected}")]
    WitnessLength { expected: usize, got: usize },
    #[error("malformed proof encoding: {0}")]
    Wire(String),
}

pub type Result<T> = std::result::Result<T, SnarkError>;

/// Oracle input for hashing two children.
pub fn node_query(left: &Node, right: &Node) -> Vec<u8> {
    let mut q = Vec::with_capacity(1 + 2 * NODE_BYTES);
    q.extend_from_slice(NODE_TAG);
    q.extend_from_slice(left);
    q.extend_from_slice(right);
    q
}

/// Splits a node query back into its children.
pub fn parse_node_query(q: &[u8]) -> Option<(Node, Node)> {
    if q.len() != 1 + 2 * NODE_BYTES || &q[..1] != NODE_TAG {
        return None;
    }
    let mut l = [0u8; NODE_BYTES];
    let mut r = [0u8; NODE_BYTES];
    l.copy_from_slice(&q[1..1 + NODE_BYTES]);
    r.copy_from_slice(&q[1 + NODE_BYTES..]);
    Some((l, r))
}

/// Node value from an oracle answer.
pub fn truncate_node(answer: &[u8]) -> Node {
    let mut n = [0u8; NODE_BYTES];
    n.copy_from_slice(&answer[..NODE_BYTES]);
    n
}

pub fn hash_node(h: &dyn Oracle, left: &Node, right: &Node) -> Node {
    truncate_node(&h.query(&node_query(left, right)))
}

/// Verifier coins `r = H(rt)` as a seeded generator.
pub fn coins(h: &dyn Oracle, rt: &Node) -> ChaCha20Rng {
    let mut q = RAND_TAG.to_vec();
    q.extend_from_slice(rt);
    let a = h.query(&q);
    let mut seed = [0u8; 32];
    let n = a.len().min(32);
    seed[..n].copy_from_slice(&a[..n]);
    ChaCha20Rng::from_seed(seed)
}

/// One opened position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryOpening {
    pub index: u32,
    pub value: Symbol,
    pub path: AuthPath,
}

/// `(rt, (v_i), (ap_i))`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnarkProof {
    pub root: Node,
    pub openings: Vec<QueryOpening>,
}

impl SnarkProof {
    /// `|rt| + q (|Sigma| + d |node|)`, counted from the content.
    pub fn content_size(&self) -> usize {
        NODE_BYTES + self.openings.iter().map(|o| NODE_BYTES + o.path.siblings.len() * NODE_BYTES).sum::<usize>()
    }
}

/// Proof size predicted from the parameters.
pub fn proof_size_formula(q: usize, depth: usize) -> usize {
    NODE_BYTES + q * (NODE_BYTES + depth * NODE_BYTES)
}

/// `Prove^H(x, w)`.
pub fn prove<R: Relation + ?Sized>(pcp: &RepetitionPcp, h: &dyn Oracle, rel: &R, instance: &[u8], witness: &[Symbol]) -> Result<SnarkProof> {
    let m = rel.witness_symbols(instance);
    if witness.len() != m {
        return Err(SnarkError::WitnessLength { expected: m, got: witness.len() });
    }
    if !rel.accepts(instance, witness) {
        return Err(SnarkError::InvalidWitness);
    }
    let pi = pcp.prove(witness);
    let tree = merkle_commit(&pi, h)?;
    let rt = tree.root();
    let positions = pcp.queries(&mut coins(h, &rt), m);
    let openings = positions
        .into_iter()
        .map(|j| QueryOpening { index: j as u32, value: pi[j], path: tree.auth_path(j) })
        .collect();
    Ok(SnarkProof { root: rt, openings })
}

/// `Ver^H(x, pi)`: positions are rederived from `H(rt)` and the claimed
/// indices must match them.
pub fn verify<R: Relation + ?Sized>(pcp: &RepetitionPcp, h: &dyn Oracle, rel: &R, instance: &[u8], proof: &SnarkProof) -> bool {
    let m = rel.witness_symbols(instance);
    let depth = pcp.depth(m);
    let positions = pcp.queries(&mut coins(h, &proof.root), m);
    if positions.len() != proof.openings.len() {
        return false;
    }
    for (j, o) in positions.iter().zip(&proof.openings) {
        if o.index as usize != *j || o.path.siblings.len() != depth || !check_path(h, &proof.root, *j, &o.value, &o.path) {
            return false;
        }
    }
    let answers: Vec<Symbol> = proof.openings.iter().map(|o| o.value).collect();
    pcp.decide(rel, instance, &positions, &answers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{FnHandle, Seed};

    fn setup() -> (RepetitionPcp, FnHandle, HashPreimage) {
        (RepetitionPcp::TOY, FnHandle::new(Seed::from_u64(10), 32), HashPreimage)
    }

    #[test]
    fn honest_proof_verifies_with_predicted_size() {
        let (pcp, h, rel) = setup();
        let w = HashPreimage::witness_from_bytes(&[7u8; 64]);
        let x = HashPreimage::instance_for(&w);
        let p = prove(&pcp, &h, &rel, &x, &w).unwrap();
        assert!(verify(&pcp, &h, &rel, &x, &p));
        assert_eq!(p.openings.len(), pcp.query_count(4));
        assert_eq!(p.content_size(), proof_size_formula(16, 5));
        assert_eq!(p, prove(&pcp, &h, &rel, &x, &w).unwrap());
    }

    #[test]
    fn invalid_witness_is_refused() {
        let (pcp, h, rel) = setup();
        let w = HashPreimage::witness_from_bytes(&[7u8; 64]);
        assert_eq!(prove(&pcp, &h, &rel, &[0u8; 8], &w), Err(SnarkError::InvalidWitness));
    }

    #[test]
    fn truncated_path_rejected() {
        let (pcp, h, rel) = setup();
        let w = HashPreimage::witness_from_bytes(&[1u8; 64]);
        let x = HashPreimage::instance_for(&w);
        let mut p = prove(&pcp, &h, &rel, &x, &w).unwrap();
        p.openings[3].path.siblings.pop();
        assert!(!verify(&pcp, &h, &rel, &x, &p));
    }

    #[test]
    fn replay_on_other_instance_rejected() {
        let (pcp, h, rel) = setup();
        let w = HashPreimage::witness_from_bytes(&[2u8; 64]);
        let x = HashPreimage::instance_for(&w);
        let p = prove(&pcp, &h, &rel, &x, &w).unwrap();
        let mut x2 = x.clone();
        x2[0] ^= 1;
        assert!(!verify(&pcp, &h, &rel, &x2, &p));
    }
}
