//! Tree recovery from a database of oracle queries, and witness search over it.

use std::collections::{BTreeMap, HashMap, VecDeque};

use super::{parse_node_query, truncate_node, Node, Relation, RepetitionPcp, Symbol, PAD_SYMBOL};
use crate::oracle::QueryDatabase;

/// A rooted binary tree with vertices `(value, position)`; a position is a
/// bit string from the root, stored as `(length, bits)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractedTree {
    depth: usize,
    vertices: BTreeMap<(usize, u64), Node>,
}

impl ExtractedTree {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex(&self, len: usize, bits: u64) -> Option<Node> {
        self.vertices.get(&(len, bits)).copied()
    }

    /// `leaves(T)`, with `None` for absent leaves.
    pub fn leaves(&self) -> Vec<Option<Symbol>> {
        (0..1u64 << self.depth).map(|i| self.vertex(self.depth, i)).collect()
    }

    /// `Pi_T`: the leaves with absent entries set to zero.
    pub fn proof_string(&self) -> Vec<Symbol> {
        self.leaves().into_iter().map(|l| l.unwrap_or(PAD_SYMBOL)).collect()
    }
}

/// Node-shaped entries of `db`, grouped by answer.
fn preimages(db: &QueryDatabase) -> HashMap<Node, Vec<(Node, Node)>> {
    let mut m: HashMap<Node, Vec<(Node, Node)>> = HashMap::new();
    for (q, a) in db.iter() {
        if let Some(children) = parse_node_query(q) {
            if a.len() >= super::NODE_BYTES {
                m.entry(truncate_node(a)).or_default().push(children);
            }
        }
    }
    m
}

/// `Extract(D, rt, d)`; `None` is the collision outcome.
pub fn extract_tree(db: &QueryDatabase, rt: &Node, depth: usize) -> Option<ExtractedTree> {
    extract_with(&preimages(db), rt, depth)
}

fn extract_with(pre: &HashMap<Node, Vec<(Node, Node)>>, rt: &Node, depth: usize) -> Option<ExtractedTree> {
    let mut vertices = BTreeMap::new();
    vertices.insert((0usize, 0u64), *rt);
    let mut queue = VecDeque::from([(0usize, 0u64)]);
    while let Some((len, bits)) = queue.pop_front() {
        if len >= depth {
            continue;
        }
        let u = vertices[&(len, bits)];
        let Some(xs) = pre.get(&u) else { continue };
        if xs.len() > 1 {
            return None;
        }
        let (x0, x1) = xs[0];
        for (b, x) in [(0u64, x0), (1u64, x1)] {
            let pos = (len + 1, (bits << 1) | b);
            vertices.insert(pos, x);
            queue.push_back(pos);
        }
    }
    Some(ExtractedTree { depth, vertices })
}

/// `FindWitness(D)`: the extractor on the all-zero proof first, then on the
/// tree under every node value in the database, in recording order.
pub fn find_witness<R: Relation + ?Sized>(db: &QueryDatabase, pcp: &RepetitionPcp, rel: &R, instance: &[u8]) -> Option<Vec<Symbol>> {
    let m = rel.witness_symbols(instance);
    let depth = pcp.depth(m);
    let zero = vec![PAD_SYMBOL; 1 << depth];
    let w = pcp.extract(&zero, m);
    if rel.accepts(instance, &w) {
        return Some(w);
    }
    let pre = preimages(db);
    let mut seen = std::collections::HashSet::new();
    for (q, a) in db.iter() {
        if parse_node_query(q).is_none() || a.len() < super::NODE_BYTES {
            continue;
        }
        let rt = truncate_node(a);
        if !seen.insert(rt) {
            continue;
        }
        let Some(tree) = extract_with(&pre, &rt, depth) else { continue };
        let w = pcp.extract(&tree.proof_string(), m);
        if rel.accepts(instance, &w) {
            return Some(w);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{recording_wrap, FnHandle, Seed};
    use crate::snark::{merkle_commit, node_query, HashPreimage};

    #[test]
    fn honest_tree_recovered() {
        let h = recording_wrap(FnHandle::new(Seed::from_u64(1), 32));
        let v: Vec<Symbol> = (0..8u8).map(|b| [b; 16]).collect();
        let t = merkle_commit(&v, &h).unwrap();
        let tree = extract_tree(&h.database(), &t.root(), 3).unwrap();
        assert_eq!(tree.leaves(), v.iter().map(|x| Some(*x)).collect::<Vec<_>>());
    }

    #[test]
    fn root_collision_is_bottom() {
        let mut db = QueryDatabase::new();
        let rt = [9u8; 16];
        let mut ans = rt.to_vec();
        ans.extend_from_slice(&[0u8; 16]);
        db.insert(node_query(&[1u8; 16], &[2u8; 16]), ans.clone());
        db.insert(node_query(&[3u8; 16], &[4u8; 16]), ans);
        assert_eq!(extract_tree(&db, &rt, 2), None);
    }

    #[test]
    fn root_outside_image_gives_bare_root() {
        let db = QueryDatabase::new();
        let tree = extract_tree(&db, &[5u8; 16], 2).unwrap();
        assert_eq!(tree.vertex_count(), 1);
        assert_eq!(tree.leaves(), vec![None; 4]);
    }

    #[test]
    fn zero_proof_fast_path() {
        let pcp = RepetitionPcp::TOY;
        let zero = vec![PAD_SYMBOL; 4];
        let x = HashPreimage::instance_for(&zero);
        assert_eq!(find_witness(&QueryDatabase::new(), &pcp, &HashPreimage, &x), Some(zero));
        assert_eq!(find_witness(&QueryDatabase::new(), &pcp, &HashPreimage, &[1u8; 8]), None);
    }
}
