//! Binomial summaries used by the checks.

use serde::{Deserialize, Serialize};

/// `z` used for every interval in the reports.
pub const Z: f64 = 3.0;

/// Wilson score interval for `successes` out of `n`.
pub fn wilson(successes: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    // The endpoints at p = 0 and p = 1 are exact; rounding would move them.
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Standard error of a Bernoulli mean with success probability `p`.
pub fn bernoulli_stderr(p: f64, n: usize) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub successes: usize,
    pub trials: usize,
    pub rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

impl Rate {
    pub fn new(successes: usize, trials: usize) -> Self {
        let (wilson_lo, wilson_hi) = wilson(successes, trials, Z);
        let rate = if trials == 0 { 0.0 } else { successes as f64 / trials as f64 };
        Self { successes, trials, rate, wilson_lo, wilson_hi }
    }

    pub fn of(flags: impl IntoIterator<Item = bool>) -> Self {
        let (mut s, mut n) = (0, 0);
        for f in flags {
            s += f as usize;
            n += 1;
        }
        Self::new(s, n)
    }
}
