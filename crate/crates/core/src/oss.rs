//! One-shot signatures from a random permutation and per-label affine maps.
//!
//! `P(x) = (H(x), A_y J(x) + b_y)` where `H, J` split a random permutation of
//! `{0,1}^n` into its first `r` bits and the rest. The secret key left by `Gen`
//! is the coset state `|S_y>` with `S_y = {A_y z + b_y}`, and a signature on bit
//! `m` is an element of `S_y` whose first coordinate is `m`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cosetstates::{rotate_first_bit, CosetState, CosetStateError};
use crate::gf2::{solve_affine, Gf2Coset, Gf2Error, Gf2Matrix, Gf2Vector};
use crate::oracle::{hash_parts, prf_expand, OracleError, PermHandle, Seed};

/// Upper bound on Gen retries before giving up.
pub const MAX_GEN_RETRIES: u32 = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OssError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("no balanced coset after {0} attempts")]
    GenExhausted(u32),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error(transparent)]
    Coset(#[from] CosetStateError),
}

pub type Result<T> = std::result::Result<T, OssError>;

/// `n` total bits, `r` label bits; the coset dimension is `n - r` inside
/// `k = n` dimensional space. `s` is carried for reporting only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OssParams {
    pub n: usize,
    pub r: usize,
    pub s: usize,
}

impl OssParams {
    pub const DESK: OssParams = OssParams { n: 8, r: 3, s: 2 };

    pub fn new(n: usize, r: usize) -> Result<Self> {
        let p = Self { n, r, s: 2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 || self.r >= self.n || self.n - self.r < 2 {
            return Err(OssError::Params(format!("need 0 < r and n - r >= 2, got n={} r={}", self.n, self.r)));
        }
        if self.n > crate::oracle::MAX_PERM_BITS {
            return Err(OssError::Params(format!("n={} too large for an explicit permutation", self.n)));
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.n
    }

    pub fn coset_dim(&self) -> usize {
        self.n - self.r
    }
}

/// The public oracles `P`, `P^-1` and `D`, fully determined by a seed.
pub struct OssOracles {
    params: OssParams,
    seed: Seed,
    perm: PermHandle,
    maps: Mutex<HashMap<u64, Arc<(Gf2Matrix, Gf2Vector)>>>,
}

impl std::fmt::Debug for OssOracles {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OssOracles").field("params", &self.params).field("seed", &self.seed).finish()
    }
}

impl OssOracles {
    pub fn setup(params: OssParams, seed: Seed) -> Result<Arc<Self>> {
        params.validate()?;
        let perm = PermHandle::new(params.n, seed.derive("oss-perm", &[]))?;
        Ok(Arc::new(Self { params, seed, perm, maps: Mutex::new(HashMap::new()) }))
    }

    pub fn params(&self) -> OssParams {
        self.params
    }

    pub fn seed(&self) -> &Seed {
        &self.seed
    }

    /// `(A_y, b_y)`; `A_y` is `k x (n - r)` of full column rank, obtained by
    /// re-drawing `F(y, counter)` until the rank is full.
    pub fn affine_map(&self, y: u64) -> Arc<(Gf2Matrix, Gf2Vector)> {
        if let Some(m) = self.maps.lock().expect("lock").get(&y) {
            return m.clone();
        }
        let (k, c) = (self.params.k(), self.params.coset_dim());
        let f_seed = self.seed.derive("oss-F", &[]);
        let mut ctr = 0u64;
        let map = loop {
            let bytes = prf_expand(&f_seed, "affine", &[y.to_le_bytes(), ctr.to_le_bytes()].concat(), 8 * (k + 1));
            let word = |i: usize| u64::from_le_bytes(bytes[8 * i..8 * i + 8].try_into().expect("8 bytes"));
            let rows: Vec<_> = (0..k).map(|i| Gf2Vector::truncated(c, word(i))).collect();
            let a = Gf2Matrix::from_rows(c, &rows).expect("dims checked");
            if a.rank() == c {
                break Arc::new((a, Gf2Vector::truncated(k, word(k))));
            }
            ctr += 1;
        };
        self.maps.lock().expect("lock").insert(y, map.clone());
        map
    }

    /// `S_y`.
    pub fn coset(&self, y: u64) -> Gf2Coset {
        let m = self.affine_map(y);
        Gf2Coset::from_affine_map(&m.0, &m.1).expect("dims checked")
    }

    /// Whether `S_y` is balanced, i.e. the first row of `A_y` is nonzero.
    pub fn is_balanced(&self, y: u64) -> bool {
        !self.affine_map(y).0.row(0).is_zero()
    }

    /// `P(x) = (y, A_y J(x) + b_y)`.
    pub fn p(&self, x: u64) -> Result<(u64, Gf2Vector)> {
        let px = self.perm.eval(x)?;
        let c = self.params.coset_dim();
        let y = px >> c;
        let z = Gf2Vector::truncated(c, px);
        let m = self.affine_map(y);
        Ok((y, (m.0.mul_vec(&z)? ^ m.1)))
    }

    /// `P^-1(y, u)`: the unique preimage, or `None` when `u` is not in `S_y`.
    pub fn p_inv(&self, y: u64, u: &Gf2Vector) -> Option<u64> {
        if y >> self.params.r != 0 || u.len() != self.params.k() {
            return None;
        }
        let m = self.affine_map(y);
        let z = solve_affine(&m.0, &m.1, u).ok()??;
        let c = self.params.coset_dim();
        self.perm.invert((y << c) | z.bits()).ok()
    }

    /// `D(y, v) = 1` iff `v^T A_y = 0`, i.e. `v` is in the dual of `S_y`'s
    /// linear part.
    pub fn d(&self, y: u64, v: &Gf2Vector) -> bool {
        v.len() == self.params.k() && self.affine_map(y).0.left_mul_vec(v).map(|r| r.is_zero()).unwrap_or(false)
    }

    pub fn digest(&self) -> [u8; 32] {
        hash_parts(&[b"oss-oracles", &self.seed.0, &(self.params.n as u64).to_le_bytes(), &(self.params.r as u64).to_le_bytes()])
    }
}

/// Gates operations that hand raw quantum state to an adversary. Only the
/// security games construct one.
pub struct QuantumAccess {
    _private: (),
}

impl QuantumAccess {
    pub(crate) fn grant() -> Self {
        Self { _private: () }
    }
}

/// A fresh key pair: classical `vk = y` and the coset state `|S_y>`. Not
/// `Clone`; signing consumes it.
#[derive(Debug)]
pub struct OssToken {
    vk: u64,
    state: CosetState,
    retries: u32,
}

impl OssToken {
    pub fn vk(&self) -> u64 {
        self.vk
    }

    /// Unbalanced cosets Gen discarded before this one.
    pub fn retries(&self) -> u32 {
        self.retries
    }

    pub fn into_state(self, _access: &QuantumAccess) -> CosetState {
        self.state
    }

    pub(crate) fn state(&self) -> &CosetState {
        &self.state
    }
}

/// Samples `x` uniformly, measures `y = H(x)` and keeps the coset state on
/// `U`; retries while `S_y` is unbalanced.
pub fn gen<R: Rng + ?Sized>(o: &OssOracles, rng: &mut R) -> Result<OssToken> {
    let mut retries = 0;
    while retries < MAX_GEN_RETRIES {
        let x = rng.gen_range(0..1u64 << o.params.n);
        let (y, _) = o.p(x)?;
        let state = CosetState::new(o.coset(y));
        if state.is_balanced() {
            return Ok(OssToken { vk: y, state, retries });
        }
        retries += 1;
    }
    Err(OssError::GenExhausted(retries))
}

/// Outcome of signing. `Abort` occurs only for unbalanced cosets, which
/// [`gen`] never returns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignResult {
    Signature(Gf2Vector),
    Abort,
}

impl SignResult {
    pub fn signature(&self) -> Option<Gf2Vector> {
        match self {
            SignResult::Signature(u) => Some(*u),
            SignResult::Abort => None,
        }
    }
}

/// Measures the first qubit; on a mismatch rotates with `H^n . Phase^D . H^n`
/// and measures again.
pub fn sign<R: Rng + ?Sized>(o: &OssOracles, token: OssToken, m: bool, rng: &mut R) -> Result<SignResult> {
    let y = token.vk;
    let state = token.state;
    if !state.is_balanced() {
        // The first coordinate is fixed; the rotation maps |S_y> to -|S_y>.
        let u = state.measure_all(rng);
        return Ok(if u.first() == m { SignResult::Signature(u) } else { SignResult::Abort });
    }
    let slice = state.measure_first_bit(rng)?;
    let slice = if slice.bit() == m {
        slice
    } else {
        // Phase^D flips sign on the dual; the rotation helper flips off it.
        // The two differ by a global sign only.
        rotate_first_bit(&slice, |v| o.d(y, v))?
    };
    let u = slice.measure_all(rng);
    Ok(if u.first() == m { SignResult::Signature(u) } else { SignResult::Abort })
}

/// Samples a signature on `m` from the token without consuming it. Models a
/// sign-then-uncompute pair run coherently: on a balanced coset the rotation is
/// exact, so undoing it restores the token.
pub(crate) fn coherent_sign_sample<R: Rng + ?Sized>(token: &OssToken, m: bool, rng: &mut R) -> Result<Gf2Vector> {
    Ok(token.state.split()?.slice(m).sample(rng))
}

pub fn verify(o: &OssOracles, vk: u64, m: bool, sig: &Gf2Vector) -> bool {
    sig.len() == o.params.k() && sig.first() == m && o.p_inv(vk, sig).is_some()
}

/// Everything a forger may query.
pub struct OssOracleAccess {
    oracles: Arc<OssOracles>,
}

impl OssOracleAccess {
    pub fn oracles(&self) -> &OssOracles {
        &self.oracles
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Forgery {
    pub vk: u64,
    pub first: (bool, Gf2Vector),
    pub second: (bool, Gf2Vector),
}

pub trait ForgeryAdversary {
    fn forge(&mut self, access: &OssOracleAccess, quantum: &QuantumAccess, rng: &mut dyn rand::RngCore) -> Forgery;
}

/// Strong unforgeability: the adversary wins with two verifying pairs whose
/// signatures differ.
pub fn forgery_game<A: ForgeryAdversary + ?Sized, R: rand::RngCore>(
    o: Arc<OssOracles>,
    adversary: &mut A,
    rng: &mut R,
) -> bool {
    let access = OssOracleAccess { oracles: o.clone() };
    let f = adversary.forge(&access, &QuantumAccess::grant(), rng);
    verify(&o, f.vk, f.first.0, &f.first.1) && verify(&o, f.vk, f.second.0, &f.second.1) && f.first.1 != f.second.1
}

/// Signs once, honestly, and reports the same pair twice.
pub struct HonestSigner;

impl ForgeryAdversary for HonestSigner {
    fn forge(&mut self, access: &OssOracleAccess, _q: &QuantumAccess, rng: &mut dyn rand::RngCore) -> Forgery {
        let o = access.oracles();
        let token = gen(o, rng).expect("gen");
        let vk = token.vk();
        let sig = sign(o, token, false, rng).expect("sign").signature().expect("balanced token");
        Forgery { vk, first: (false, sig), second: (false, sig) }
    }
}

/// Measures the token, then applies the signing rotation to the collapsed
/// state and measures again, hoping for a second element of `S_y`.
pub struct MeasureThenRotate;

impl ForgeryAdversary for MeasureThenRotate {
    fn forge(&mut self, access: &OssOracleAccess, quantum: &QuantumAccess, rng: &mut dyn rand::RngCore) -> Forgery {
        let o = access.oracles();
        let token = gen(o, rng).expect("gen");
        let vk = token.vk();
        let state = token.into_state(quantum);
        let u0 = state.measure_all(rng);
        let mut psi = crate::densesim::StateVector::basis(u0.len(), u0.bits()).expect("small n");
        crate::cosetstates::dense_rotation(&mut psi, |v| o.d(vk, v));
        let u1 = Gf2Vector::truncated(u0.len(), psi.measure_all(rng));
        Forgery { vk, first: (u0.first(), u0), second: (u1.first(), u1) }
    }
}

/// Exact win probability of [`MeasureThenRotate`] for a given label, from the
/// dense post-measurement state averaged over the collapsed element.
pub fn measure_then_rotate_win_probability(o: &OssOracles, y: u64) -> Result<f64> {
    let s = o.coset(y);
    let members = s.members()?;
    let mut total = 0.0;
    for u0 in &members {
        let mut psi = crate::densesim::StateVector::basis(u0.len(), u0.bits()).map_err(CosetStateError::from)?;
        crate::cosetstates::dense_rotation(&mut psi, |v| o.d(y, v));
        for (x, p) in psi.probabilities().into_iter().enumerate() {
            let u1 = Gf2Vector::truncated(u0.len(), x as u64);
            if p > 0.0 && u1 != *u0 && verify(o, y, u1.first(), &u1) {
                total += p;
            }
        }
    }
    Ok(total / members.len() as f64)
}

pub mod multi;

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn params_validated() {
        assert!(OssParams::new(4, 3).is_err());
        assert!(OssParams::new(8, 3).is_ok());
        assert!(OssParams::new(8, 0).is_err());
    }

    #[test]
    fn p_inverts() {
        let o = OssOracles::setup(OssParams::DESK, Seed::from_u64(1)).unwrap();
        for x in 0..256 {
            let (y, u) = o.p(x).unwrap();
            assert_eq!(o.p_inv(y, &u), Some(x));
        }
    }

    #[test]
    fn honest_signature_verifies() {
        let o = OssOracles::setup(OssParams::DESK, Seed::from_u64(2)).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for m in [false, true] {
            let t = gen(&o, &mut rng).unwrap();
            let vk = t.vk();
            let sig = sign(&o, t, m, &mut rng).unwrap().signature().unwrap();
            assert!(verify(&o, vk, m, &sig));
            assert!(!verify(&o, vk, !m, &sig));
        }
    }
}
