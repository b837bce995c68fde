//! Merkle trees with leaves `z_{d,i} = v_i` and internal nodes
//! `z_{k,i} = H(z_{k+1,2i}, z_{k+1,2i+1})` (0-based indices).

use serde::{Deserialize, Serialize};

use super::{hash_node, node_query, Node, Result, SnarkError, Symbol, PAD_SYMBOL};
use crate::oracle::Oracle;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MerkleTree {
    /// `levels[k]` holds the `2^k` nodes at depth `k`.
    levels: Vec<Vec<Node>>,
}

/// Siblings from the leaf level up to just below the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthPath {
    pub siblings: Vec<Node>,
}

/// Commits to `values`, padding with [`PAD_SYMBOL`] to a power of two.
pub fn merkle_commit(values: &[Symbol], h: &dyn Oracle) -> Result<MerkleTree> {
    if values.is_empty() {
        return Err(SnarkError::Empty);
    }
    let len = values.len().next_power_of_two();
    let mut leaves = values.to_vec();
    leaves.resize(len, PAD_SYMBOL);
    let mut levels = vec![leaves];
    while levels[0].len() > 1 {
        let below = &levels[0];
        let above: Vec<Node> = below.chunks(2).map(|p| hash_node(h, &p[0], &p[1])).collect();
        levels.insert(0, above);
    }
    Ok(MerkleTree { levels })
}

impl MerkleTree {
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn root(&self) -> Node {
        self.levels[0][0]
    }

    pub fn leaves(&self) -> &[Symbol] {
        &self.levels[self.depth()]
    }

    pub fn node(&self, k: usize, i: usize) -> Node {
        self.levels[k][i]
    }

    pub fn auth_path(&self, i: usize) -> AuthPath {
        let d = self.depth();
        let siblings = (0..d).map(|step| self.levels[d - step][(i >> step) ^ 1]).collect();
        AuthPath { siblings }
    }

    /// Every `(query, node)` pair hashed while building the tree.
    pub fn hash_pairs(&self) -> Vec<(Vec<u8>, Node)> {
        let mut out = Vec::new();
        for k in 0..self.depth() {
            for (i, z) in self.levels[k].iter().enumerate() {
                out.push((node_query(&self.levels[k + 1][2 * i], &self.levels[k + 1][2 * i + 1]), *z));
            }
        }
        out
    }
}

/// `Expand^H(i, v, ap)`: the oracle queries and answers along the path, from
/// the leaf upward. The last answer is the claimed root.
pub fn expand_path(h: &dyn Oracle, i: usize, v: &Symbol, ap: &AuthPath) -> Vec<(Vec<u8>, Node)> {
    let mut cur = *v;
    let mut out = Vec::with_capacity(ap.siblings.len());
    for (step, sib) in ap.siblings.iter().enumerate() {
        let (l, r) = if (i >> step) & 1 == 0 { (cur, *sib) } else { (*sib, cur) };
        let q = node_query(&l, &r);
        cur = hash_node(h, &l, &r);
        out.push((q, cur));
    }
    out
}

/// `CheckPath^H(rt, i, v, ap)`.
pub fn check_path(h: &dyn Oracle, rt: &Node, i: usize, v: &Symbol, ap: &AuthPath) -> bool {
    if ap.siblings.len() < usize::BITS as usize && i >> ap.siblings.len() != 0 {
        return false;
    }
    match expand_path(h, i, v, ap).last() {
        Some((_, top)) => top == rt,
        None => v == rt,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{FnHandle, Seed};
    use crate::snark::truncate_node;

    fn sym(b: u8) -> Symbol {
        [b; 16]
    }

    #[test]
    fn single_leaf_is_root() {
        let h = FnHandle::new(Seed::from_u64(1), 32);
        let t = merkle_commit(&[sym(9)], &h).unwrap();
        assert_eq!(t.depth(), 0);
        assert_eq!(t.root(), sym(9));
        assert!(check_path(&h, &t.root(), 0, &sym(9), &AuthPath::default()));
    }

    #[test]
    fn four_leaves_hand_composed() {
        let h = FnHandle::new(Seed::from_u64(2), 32);
        let v = [sym(1), sym(2), sym(3), sym(4)];
        let t = merkle_commit(&v, &h).unwrap();
        let hh = |a: &Node, b: &Node| truncate_node(&h.eval(&node_query(a, b)));
        assert_eq!(t.root(), hh(&hh(&v[0], &v[1]), &hh(&v[2], &v[3])));
        let swapped = merkle_commit(&[sym(2), sym(1), sym(3), sym(4)], &h).unwrap();
        assert_ne!(swapped.root(), t.root());
    }

    #[test]
    fn paths_check_and_reject_tampering() {
        let h = FnHandle::new(Seed::from_u64(3), 32);
        let v: Vec<Symbol> = (0..8).map(sym).collect();
        let t = merkle_commit(&v, &h).unwrap();
        for (i, leaf) in v.iter().enumerate() {
            let ap = t.auth_path(i);
            assert!(check_path(&h, &t.root(), i, leaf, &ap));
            let mut bad = *leaf;
            bad[0] ^= 1;
            assert!(!check_path(&h, &t.root(), i, &bad, &ap));
            assert!(!check_path(&h, &t.root(), i ^ 1, leaf, &ap));
        }
        assert!(!check_path(&h, &t.root(), 8, &v[0], &t.auth_path(0)));
    }

    #[test]
    fn padding_and_empty() {
        let h = FnHandle::new(Seed::from_u64(4), 32);
        assert_eq!(merkle_commit(&[], &h), Err(SnarkError::Empty));
        let t = merkle_commit(&[sym(1), sym(2), sym(3)], &h).unwrap();
        assert_eq!(t.leaves()[3], PAD_SYMBOL);
        assert_eq!(t.hash_pairs().len(), 3);
    }
}
