use std::collections::HashMap;
use std::sync::Mutex;

use super::Oracle;

/// Ordered record of `(input, output)` pairs without repeated inputs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QueryDatabase {
    entries: Vec<(Vec<u8>, Vec<u8>)>,
    index: HashMap<Vec<u8>, usize>,
}

impl QueryDatabase {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a pair; a repeated input keeps its first position.
    pub fn insert(&mut self, input: Vec<u8>, output: Vec<u8>) {
        if self.index.contains_key(&input) {
            return;
        }
        self.index.insert(input.clone(), self.entries.len());
        self.entries.push((input, output));
    }

    pub fn get(&self, input: &[u8]) -> Option<&[u8]> {
        self.index.get(input).map(|&i| self.entries[i].1.as_slice())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u8], &[u8])> {
        self.entries.iter().map(|(a, b)| (a.as_slice(), b.as_slice()))
    }

    pub fn merge(&mut self, other: &QueryDatabase) {
        for (i, o) in other.iter() {
            self.insert(i.to_vec(), o.to_vec());
        }
    }
}

/// Wrapper that records every query made through it.
pub struct Recording<O> {
    inner: O,
    db: Mutex<QueryDatabase>,
}

impl<O: Oracle> Recording<O> {
    pub fn database(&self) -> QueryDatabase {
        self.db.lock().expect("recording lock poisoned").clone()
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: Oracle> Oracle for Recording<O> {
    fn query(&self, input: &[u8]) -> Vec<u8> {
        let out = self.inner.query(input);
        self.db.lock().expect("recording lock poisoned").insert(input.to_vec(), out.clone());
        out
    }
}

pub fn recording_wrap<O: Oracle>(inner: O) -> Recording<O> {
    Recording { inner, db: Mutex::new(QueryDatabase::new()) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{FnHandle, Seed};

    #[test]
    fn recording_keeps_first_occurrence_order() {
        let r = recording_wrap(FnHandle::new(Seed::from_u64(1), 4));
        let a = r.query(b"a");
        r.query(b"b");
        r.query(b"a");
        let db = r.database();
        assert_eq!(db.len(), 2);
        assert_eq!(db.iter().next().unwrap().0, b"a");
        assert_eq!(db.get(b"a").unwrap(), a.as_slice());
    }
}
