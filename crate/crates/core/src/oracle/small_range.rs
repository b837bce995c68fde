use std::f64::consts::PI;

use rand::{Rng, RngCore};

use super::{hash_parts, FnHandle, Oracle, OracleError, Seed};

/// Function whose image is `r` values drawn from a base distribution; each
/// input picks one of them uniformly at random.
pub struct SmallRangeFn {
    values: Vec<Vec<u8>>,
    selector: Seed,
}

impl SmallRangeFn {
    pub fn sample<R, D>(mut base: D, r: usize, rng: &mut R) -> Result<Self, OracleError>
    where
        R: RngCore + ?Sized,
        D: FnMut(&mut R) -> Vec<u8>,
    {
        if r == 0 {
            return Err(OracleError::EmptyRange);
        }
        let values = (0..r).map(|_| base(rng)).collect();
        let mut s = [0u8; 32];
        rng.fill_bytes(&mut s);
        Ok(Self { values, selector: Seed(s) })
    }

    pub fn range_size(&self) -> usize {
        self.values.len()
    }

    /// Index into the range chosen for `x`, uniform over `[r]` (rejection on a
    /// 64-bit hash, so no modulo bias).
    pub fn index_of(&self, x: &[u8]) -> usize {
        let r = self.values.len() as u64;
        let limit = u64::MAX - (u64::MAX % r);
        let mut ctr = 0u64;
        loop {
            let h = hash_parts(&[b"small-range", &self.selector.0, x, &ctr.to_le_bytes()]);
            let v = u64::from_le_bytes(h[..8].try_into().expect("8 bytes"));
            if v < limit {
                return (v % r) as usize;
            }
            ctr += 1;
        }
    }

    pub fn eval(&self, x: &[u8]) -> Vec<u8> {
        self.values[self.index_of(x)].clone()
    }
}

impl Oracle for SmallRangeFn {
    fn query(&self, input: &[u8]) -> Vec<u8> {
        self.eval(input)
    }
}

/// `pi^2 (2q)^3 / (3 r)`, the distinguishing bound for `q` quantum queries.
pub fn small_range_bound(q: usize, r: usize) -> f64 {
    PI * PI * (2.0 * q as f64).powi(3) / 3.0 / r as f64
}

/// Probability that `q` distinct inputs collide under a small-range function
/// with `r` uniformly distinct range values.
pub fn small_range_collision_probability(q: usize, r: usize) -> f64 {
    1.0 - (0..q).map(|i| (1.0 - i as f64 / r as f64).max(0.0)).product::<f64>()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmallRangeReport {
    pub q: usize,
    pub r: usize,
    pub trials: usize,
    pub small_range_rate: f64,
    pub random_rate: f64,
    /// Empirical distinguishing advantage of the collision test.
    pub advantage: f64,
    pub bound: f64,
}

/// Classical collision distinguisher: query `q` distinct points and report
/// whether two outputs coincide. Estimates its advantage between a
/// small-range function and a truly random one (both with `out_len`-byte
/// outputs).
pub fn small_range_distinguisher<R: Rng + ?Sized>(
    q: usize,
    r: usize,
    out_len: usize,
    trials: usize,
    rng: &mut R,
) -> Result<SmallRangeReport, OracleError> {
    let collides = |o: &dyn Oracle| {
        let mut seen = std::collections::HashSet::new();
        (0..q as u64).any(|x| !seen.insert(o.query(&x.to_le_bytes())))
    };
    let mut sr_hits = 0usize;
    let mut rand_hits = 0usize;
    for _ in 0..trials {
        let base_seed = Seed(rng.gen());
        let mut ctr = 0u64;
        let sr = SmallRangeFn::sample(
            |_: &mut R| {
                ctr += 1;
                FnHandle::new(base_seed, out_len).eval(&ctr.to_le_bytes())
            },
            r,
            rng,
        )?;
        sr_hits += collides(&sr) as usize;
        rand_hits += collides(&FnHandle::new(Seed(rng.gen()), out_len)) as usize;
    }
    let small_range_rate = sr_hits as f64 / trials as f64;
    let random_rate = rand_hits as f64 / trials as f64;
    Ok(SmallRangeReport {
        q,
        r,
        trials,
        small_range_rate,
        random_rate,
        advantage: (small_range_rate - random_rate).abs(),
        bound: small_range_bound(q, r),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn image_size_at_most_r() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let f = SmallRangeFn::sample(|g: &mut ChaCha20Rng| g.gen::<[u8; 8]>().to_vec(), 5, &mut rng).unwrap();
        let image: std::collections::HashSet<_> = (0u32..500).map(|x| f.eval(&x.to_le_bytes())).collect();
        assert!(image.len() <= 5);
    }

    #[test]
    fn zero_range_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        assert!(SmallRangeFn::sample(|_: &mut ChaCha20Rng| vec![0], 0, &mut rng).is_err());
    }

    #[test]
    fn collision_probability_matches_birthday_product() {
        assert!((small_range_collision_probability(2, 4) - 0.25).abs() < 1e-12);
        assert_eq!(small_range_collision_probability(5, 4), 1.0);
    }
}
