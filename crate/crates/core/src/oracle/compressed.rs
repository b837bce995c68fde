//! Toy compressed standard oracle on a sparse state vector.
//!
//! A basis state is `|x, u> |D>` where `D` is a partial function from
//! `n_in`-bit inputs to `n_out`-bit outputs holding at most `capacity` entries.
//! A query is `Decomp . CStO' . Decomp . Increase`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::OracleError;

pub const MAX_COMPRESSED_BITS: usize = 6;

const AMP_EPS: f64 = 1e-15;

pub type DatabaseEntry = (u32, u32);

/// Basis label `(x, u, D)` with `D` sorted by input.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OracleBasis {
    pub x: u32,
    pub u: u32,
    pub db: Vec<DatabaseEntry>,
}

impl OracleBasis {
    fn lookup(&self, x: u32) -> Option<u32> {
        self.db.iter().find(|e| e.0 == x).map(|e| e.1)
    }
}

#[derive(Clone, Debug)]
pub struct CompressedOracleState {
    n_in: usize,
    n_out: usize,
    capacity: usize,
    amps: BTreeMap<OracleBasis, Complex64>,
}

impl CompressedOracleState {
    /// `|x, u>|empty>` with capacity zero.
    pub fn new(n_in: usize, n_out: usize, x: u32, u: u32) -> Result<Self, OracleError> {
        Self::check_size(n_in, n_out)?;
        let mut amps = BTreeMap::new();
        amps.insert(OracleBasis { x, u, db: Vec::new() }, Complex64::new(1.0, 0.0));
        Ok(Self { n_in, n_out, capacity: 0, amps })
    }

    pub fn from_amplitudes(
        n_in: usize,
        n_out: usize,
        capacity: usize,
        amps: BTreeMap<OracleBasis, Complex64>,
    ) -> Result<Self, OracleError> {
        Self::check_size(n_in, n_out)?;
        Ok(Self { n_in, n_out, capacity, amps })
    }

    fn check_size(n_in: usize, n_out: usize) -> Result<(), OracleError> {
        if n_in == 0 || n_out == 0 || n_in + n_out > MAX_COMPRESSED_BITS {
            Err(OracleError::CompressedTooLarge(n_in + n_out))
        } else {
            Ok(())
        }
    }

    /// Every basis label with at most `capacity` database entries.
    pub fn basis(n_in: usize, n_out: usize, capacity: usize) -> Result<Vec<OracleBasis>, OracleError> {
        Self::check_size(n_in, n_out)?;
        let mut dbs: Vec<Vec<DatabaseEntry>> = vec![Vec::new()];
        for x in 0..(1u32 << n_in) {
            let mut next = Vec::new();
            for db in &dbs {
                next.push(db.clone());
                if db.len() < capacity {
                    for y in 0..(1u32 << n_out) {
                        let mut d = db.clone();
                        d.push((x, y));
                        next.push(d);
                    }
                }
            }
            dbs = next;
        }
        let mut out = Vec::new();
        for x in 0..(1u32 << n_in) {
            for u in 0..(1u32 << n_out) {
                for db in &dbs {
                    out.push(OracleBasis { x, u, db: db.clone() });
                }
            }
        }
        Ok(out)
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn amplitudes(&self) -> &BTreeMap<OracleBasis, Complex64> {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    /// Adds one empty database slot.
    pub fn increase(&mut self) {
        self.capacity += 1;
    }

    /// Swaps `|D>` (with `D(x)` undefined) and the uniform superposition of
    /// `|D + (x, y)>` over `y`, controlled on the query input `x`; identity on
    /// the orthogonal complement and on full databases that cannot grow.
    pub fn decomp(&mut self) {
        let n_y = 1usize << self.n_out;
        let inv_sqrt = 1.0 / (n_y as f64).sqrt();
        // Group by (x, u, D without x).
        let mut groups: BTreeMap<OracleBasis, (Complex64, Vec<Complex64>)> = BTreeMap::new();
        for (k, &a) in &self.amps {
            let base_db: Vec<_> = k.db.iter().copied().filter(|e| e.0 != k.x).collect();
            let g = groups
                .entry(OracleBasis { x: k.x, u: k.u, db: base_db })
                .or_insert_with(|| (Complex64::new(0.0, 0.0), vec![Complex64::new(0.0, 0.0); n_y]));
            match k.lookup(k.x) {
                None => g.0 += a,
                Some(y) => g.1[y as usize] += a,
            }
        }
        let mut out = BTreeMap::new();
        let mut put = |k: OracleBasis, a: Complex64| {
            if a.norm_sqr() > AMP_EPS * AMP_EPS {
                out.insert(k, a);
            }
        };
        for (base, (a0, ay)) in groups {
            if base.db.len() >= self.capacity {
                put(base, a0);
                continue;
            }
            let overlap: Complex64 = ay.iter().sum::<Complex64>() * inv_sqrt;
            let with = |y: usize| {
                let mut db = base.db.clone();
                db.push((base.x, y as u32));
                db.sort_unstable();
                OracleBasis { x: base.x, u: base.u, db }
            };
            for (y, &a) in ay.iter().enumerate() {
                put(with(y), a - overlap * inv_sqrt + a0 * inv_sqrt);
            }
            put(base, overlap);
        }
        self.amps = out;
    }

    /// `|x, u>|D> -> |x, u xor D(x)>|D>`.
    pub fn cstoprime(&mut self) {
        let old = std::mem::take(&mut self.amps);
        for (mut k, a) in old {
            if let Some(y) = k.lookup(k.x) {
                k.u ^= y;
            }
            self.amps.insert(k, a);
        }
    }

    /// One compressed standard-oracle query.
    pub fn query(&mut self) {
        self.increase();
        self.decomp();
        self.cstoprime();
        self.decomp();
    }

    /// Probability of each value of the output register `u`.
    pub fn output_distribution(&self) -> BTreeMap<u32, f64> {
        let mut m = BTreeMap::new();
        for (k, a) in &self.amps {
            *m.entry(k.u).or_insert(0.0) += a.norm_sqr();
        }
        m
    }

    /// Probability of each database content.
    pub fn database_distribution(&self) -> BTreeMap<Vec<DatabaseEntry>, f64> {
        let mut m = BTreeMap::new();
        for (k, a) in &self.amps {
            *m.entry(k.db.clone()).or_insert(0.0) += a.norm_sqr();
        }
        m
    }

    /// Projects onto output value `u`; returns the probability and the
    /// renormalised state.
    pub fn condition_on_output(&self, u: u32) -> (f64, Self) {
        let amps: BTreeMap<_, _> = self.amps.iter().filter(|(k, _)| k.u == u).map(|(k, a)| (k.clone(), *a)).collect();
        let p: f64 = amps.values().map(|a| a.norm_sqr()).sum();
        let scale = if p > 0.0 { 1.0 / p.sqrt() } else { 0.0 };
        let amps = amps.into_iter().map(|(k, a)| (k, a * scale)).collect();
        (p, Self { n_in: self.n_in, n_out: self.n_out, capacity: self.capacity, amps })
    }

    /// Replaces a classical query register by `|x, 0>`.
    pub fn reset_query(&mut self, x: u32) -> Result<(), OracleError> {
        let mut regs = self.amps.keys().map(|k| (k.x, k.u));
        if let Some(first) = regs.next() {
            if regs.any(|r| r != first) {
                return Err(OracleError::QueryNotClassical);
            }
        }
        let old = std::mem::take(&mut self.amps);
        for (mut k, a) in old {
            k.x = x;
            k.u = 0;
            self.amps.insert(k, a);
        }
        Ok(())
    }
}

/// Exact distribution of the answers to classical queries `xs` made through
/// the compressed oracle, each answer measured before the next query.
pub fn classical_transcript_distribution(
    n_in: usize,
    n_out: usize,
    xs: &[u32],
) -> Result<BTreeMap<Vec<u32>, f64>, OracleError> {
    let mut out = BTreeMap::new();
    if xs.is_empty() {
        out.insert(Vec::new(), 1.0);
        return Ok(out);
    }
    let state = CompressedOracleState::new(n_in, n_out, xs[0], 0)?;
    branch(state, xs, 0, Vec::new(), 1.0, &mut out)?;
    Ok(out)
}

fn branch(
    mut state: CompressedOracleState,
    xs: &[u32],
    i: usize,
    prefix: Vec<u32>,
    p: f64,
    out: &mut BTreeMap<Vec<u32>, f64>,
) -> Result<(), OracleError> {
    state.reset_query(xs[i])?;
    state.query();
    for (u, pu) in state.output_distribution() {
        if pu < 1e-14 {
            continue;
        }
        let (_, next) = state.condition_on_output(u);
        let mut t = prefix.clone();
        t.push(u);
        if i + 1 == xs.len() {
            *out.entry(t).or_insert(0.0) += p * pu;
        } else {
            branch(next, xs, i + 1, t, p * pu, out)?;
        }
    }
    Ok(())
}

/// Exact transcript distribution of a lazily sampled uniform random function.
pub fn lazy_transcript_distribution(n_out: usize, xs: &[u32]) -> BTreeMap<Vec<u32>, f64> {
    let n_y = 1u32 << n_out;
    let mut dist: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    dist.insert(Vec::new(), 1.0);
    for (i, &x) in xs.iter().enumerate() {
        let mut next = BTreeMap::new();
        for (t, p) in dist {
            if let Some(j) = xs[..i].iter().position(|&e| e == x) {
                let mut t2 = t.clone();
                t2.push(t[j]);
                *next.entry(t2).or_insert(0.0) += p;
            } else {
                for y in 0..n_y {
                    let mut t2 = t.clone();
                    t2.push(y);
                    *next.entry(t2).or_insert(0.0) += p / n_y as f64;
                }
            }
        }
        dist = next;
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_query_output_is_uniform() {
        let mut s = CompressedOracleState::new(2, 2, 1, 0).unwrap();
        s.query();
        for (_, p) in s.output_distribution() {
            assert!((p - 0.25).abs() < 1e-12);
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_classical_query_register_rejected() {
        let mut s = CompressedOracleState::new(1, 1, 0, 0).unwrap();
        s.query();
        assert_eq!(s.reset_query(1), Err(OracleError::QueryNotClassical));
    }

    #[test]
    fn size_cap_enforced() {
        assert!(CompressedOracleState::new(4, 3, 0, 0).is_err());
    }
}
