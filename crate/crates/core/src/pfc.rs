//! Commitments to a qubit with classical keys and both standard- and
//! Hadamard-basis openings.
//!
//! The commitment key holds an outer one-shot signature setup and a PRF key.
//! Each outer verification key seeds its own inner one-shot signature setup;
//! the committed qubit is entangled with a coset state of that inner setup, and
//! the outer token signs `1` to bind the commitment. The decode key is the
//! outer seed plus the PRF key, from which every oracle can be regenerated.

pub mod binding;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cosetstates::{rotate_first_bit, CosetQubitState, CosetStateError};
use crate::gf2::{Gf2Coset, Gf2Vector};
use crate::oracle::{prf_seed, Seed};
use crate::oss::{self, OssError, OssOracles, OssParams, QuantumAccess, SignResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PfcError {
    #[error(transparent)]
    Oss(#[from] OssError),
    #[error(transparent)]
    Coset(#[from] CosetStateError),
    #[error("outer signature aborted on a balanced token")]
    UnexpectedAbort,
    #[error("qubit amplitudes are not normalised")]
    NotNormalized,
}

pub type Result<T> = std::result::Result<T, PfcError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PfcParams {
    pub outer: OssParams,
    pub inner: OssParams,
}

impl PfcParams {
    pub const DESK: PfcParams = PfcParams { outer: OssParams::DESK, inner: OssParams::DESK };

    /// Small inner cosets for dense cross-checks.
    pub const SMALL: PfcParams = PfcParams { outer: OssParams::DESK, inner: OssParams { n: 6, r: 3, s: 2 } };
}

/// `dk = (R1, k)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeKey {
    pub params: PfcParams,
    pub outer_seed: Seed,
    pub prf_key: Seed,
}

/// `CK = (O, CK_P, CK_P^-1, CK_D)` behind an API boundary.
pub struct CommitKey {
    params: PfcParams,
    outer: Arc<OssOracles>,
    prf_key: Seed,
    inner: Mutex<HashMap<u64, Arc<OssOracles>>>,
}

impl std::fmt::Debug for CommitKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CommitKey").field("params", &self.params).finish_non_exhaustive()
    }
}

fn inner_seed(prf_key: &Seed, vk: u64) -> Seed {
    prf_seed(prf_key, "pfc-inner", &vk.to_le_bytes())
}

/// Key generation from a single seed split into `(R1, k)`.
pub fn gen(params: PfcParams, seed: &Seed) -> Result<(CommitKey, DecodeKey)> {
    let dk = DecodeKey { params, outer_seed: seed.derive("pfc-R1", &[]), prf_key: seed.derive("pfc-prf", &[]) };
    Ok((CommitKey::from_decode_key(&dk)?, dk))
}

impl CommitKey {
    pub fn from_decode_key(dk: &DecodeKey) -> Result<Self> {
        Ok(Self {
            params: dk.params,
            outer: OssOracles::setup(dk.params.outer, dk.outer_seed)?,
            prf_key: dk.prf_key,
            inner: Mutex::new(HashMap::new()),
        })
    }

    pub fn params(&self) -> PfcParams {
        self.params
    }

    /// The outer one-shot signature oracles `O`.
    pub fn outer(&self) -> &OssOracles {
        &self.outer
    }

    fn inner(&self, vk: u64) -> Arc<OssOracles> {
        let mut cache = self.inner.lock().expect("lock");
        cache
            .entry(vk)
            .or_insert_with(|| OssOracles::setup(self.params.inner, inner_seed(&self.prf_key, vk)).expect("validated params"))
            .clone()
    }

    /// `CK_P(vk, x)`.
    pub fn ck_p(&self, vk: u64, x: u64) -> Result<(u64, Gf2Vector)> {
        Ok(self.inner(vk).p(x)?)
    }

    /// `CK_P^-1(vk, vk_bar, u)`.
    pub fn ck_p_inv(&self, vk: u64, vk_bar: u64, u: &Gf2Vector) -> Option<u64> {
        self.inner(vk).p_inv(vk_bar, u)
    }

    /// `CK_D(vk, sigma, vk_bar, u)`: `None` unless `sigma` signs 0 under `vk`;
    /// otherwise 0 when `u` is in the dual of `S_{vk_bar}` and 1 when not.
    pub fn ck_d(&self, vk: u64, sigma: &Gf2Vector, vk_bar: u64, u: &Gf2Vector) -> Option<u8> {
        if !oss::verify(&self.outer, vk, false, sigma) {
            return None;
        }
        Some(if self.inner(vk).d(vk_bar, u) { 0 } else { 1 })
    }

    /// `S_{vk_bar}` of the inner setup for `vk`.
    pub fn inner_coset(&self, vk: u64, vk_bar: u64) -> Gf2Coset {
        self.inner(vk).coset(vk_bar)
    }

    /// Standard-basis decoding computed from the commitment key's oracles.
    pub fn dec_z(&self, c: &Commitment, d: &Opening) -> Option<bool> {
        decode_z(&self.outer, &self.inner(c.vk), c, d)
    }

    /// Hadamard-basis decoding computed from the commitment key's oracles.
    pub fn dec_x(&self, c: &Commitment, d: &Opening) -> Option<bool> {
        decode_x(&self.outer, &self.inner(c.vk), c, d)
    }
}

impl DecodeKey {
    fn regenerate(&self, vk: u64) -> Result<(Arc<OssOracles>, Arc<OssOracles>)> {
        Ok((OssOracles::setup(self.params.outer, self.outer_seed)?, OssOracles::setup(self.params.inner, inner_seed(&self.prf_key, vk))?))
    }

    /// `DecZ(dk, c, (b, u))`: `b` if `u` lies in `S_{y,b}`, else `None`.
    pub fn dec_z(&self, c: &Commitment, d: &Opening) -> Option<bool> {
        let (outer, inner) = self.regenerate(c.vk).ok()?;
        decode_z(&outer, &inner, c, d)
    }

    /// `DecX(dk, c, (b', u))`: `b' xor r` with `r = 0` if `u` is in the dual of
    /// `S_y`, `r = 1` if `u + e_1` is, `None` otherwise.
    pub fn dec_x(&self, c: &Commitment, d: &Opening) -> Option<bool> {
        let (outer, inner) = self.regenerate(c.vk).ok()?;
        decode_x(&outer, &inner, c, d)
    }

    /// The set `{u : DecZ(c, (b, u)) = b}`, if nonempty.
    pub fn opening_set(&self, c: &Commitment, b: bool) -> Option<Gf2Coset> {
        let (outer, inner) = self.regenerate(c.vk).ok()?;
        if !oss::verify(&outer, c.vk, true, &c.sig) {
            return None;
        }
        let s = inner.coset(c.vk_bar);
        match crate::cosetstates::CosetSplit::of(&s) {
            Ok(split) => Some(split.slice(b)),
            Err(_) => (s.shift().first() == b).then_some(s),
        }
    }
}

fn decode_z(outer: &OssOracles, inner: &OssOracles, c: &Commitment, d: &Opening) -> Option<bool> {
    if !oss::verify(outer, c.vk, true, &c.sig) {
        return None;
    }
    (d.u.len() == inner.params().k() && d.u.first() == d.bit && inner.p_inv(c.vk_bar, &d.u).is_some()).then_some(d.bit)
}

fn decode_x(outer: &OssOracles, inner: &OssOracles, c: &Commitment, d: &Opening) -> Option<bool> {
    if !oss::verify(outer, c.vk, true, &c.sig) || d.u.len() != inner.params().k() {
        return None;
    }
    let r = if inner.d(c.vk_bar, &d.u) {
        false
    } else if inner.d(c.vk_bar, &(d.u ^ Gf2Vector::unit(d.u.len(), 0))) {
        true
    } else {
        return None;
    };
    Some(d.bit ^ r)
}

/// `c = (vk, sigma, vk_bar)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Commitment {
    pub vk: u64,
    pub sig: Gf2Vector,
    pub vk_bar: u64,
}

impl Commitment {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(26);
        out.extend_from_slice(&self.vk.to_le_bytes());
        out.push(self.sig.len() as u8);
        out.extend_from_slice(&self.sig.bits().to_le_bytes());
        out.extend_from_slice(&self.vk_bar.to_le_bytes());
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

/// Measurement outcome of all committed registers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Opening {
    pub basis: Basis,
    pub bit: bool,
    pub u: Gf2Vector,
}

/// The quantum side of a commitment.
#[derive(Debug)]
pub struct Committed {
    state: CosetQubitState,
    commitment: Commitment,
    retries: u32,
}

impl Committed {
    pub fn commitment(&self) -> Commitment {
        self.commitment
    }

    /// Unbalanced cosets skipped by the outer and inner key generation.
    pub fn retries(&self) -> u32 {
        self.retries
    }

    pub fn open_z<R: Rng + ?Sized>(self, rng: &mut R) -> Opening {
        let (bit, u) = self.state.measure_z(rng);
        Opening { basis: Basis::Z, bit, u }
    }

    pub fn open_x<R: Rng + ?Sized>(self, rng: &mut R) -> Opening {
        let (bit, u) = self.state.measure_x(rng);
        Opening { basis: Basis::X, bit, u }
    }

    pub fn into_state(self, _access: &QuantumAccess) -> CosetQubitState {
        self.state
    }

    /// Read-only view for exact distribution checks.
    pub fn state(&self) -> &CosetQubitState {
        &self.state
    }
}

/// `Com` applied to `a0|0> + a1|1>`.
pub fn commit<R: Rng + ?Sized>(ck: &CommitKey, amps: [Complex64; 2], rng: &mut R) -> Result<Committed> {
    if ((amps[0].norm_sqr() + amps[1].norm_sqr()) - 1.0).abs() > 1e-9 {
        return Err(PfcError::NotNormalized);
    }
    let outer_token = oss::gen(&ck.outer, rng)?;
    let vk = outer_token.vk();
    // Coherently signing 0 and uncomputing leaves the token intact; one branch
    // of that signature is all CK_D needs.
    let sigma0 = oss::coherent_sign_sample(&outer_token, false, rng)?;

    let inner = ck.inner(vk);
    let inner_token = oss::gen(&inner, rng)?;
    let vk_bar = inner_token.vk();
    let slice = inner_token.state().measure_first_bit(rng)?;
    // For B = 1 - b' rotate with Phase^{CK_D}; CK_D is 0 exactly on the dual.
    let rotated = rotate_first_bit(&slice, |u| ck.ck_d(vk, &sigma0, vk_bar, u) == Some(0))?;
    debug_assert_eq!(rotated.split(), slice.split());
    let state = CosetQubitState::new(amps, slice.split().clone(), vk_bar)?;
    let retries = outer_token.retries() + inner_token.retries();

    let sig = match oss::sign(&ck.outer, outer_token, true, rng)? {
        SignResult::Signature(u) => u,
        SignResult::Abort => return Err(PfcError::UnexpectedAbort),
    };
    Ok(Committed { state, commitment: Commitment { vk, sig, vk_bar }, retries })
}

/// Commitment to a classical bit.
pub fn commit_bit<R: Rng + ?Sized>(ck: &CommitKey, b: bool, rng: &mut R) -> Result<Committed> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    commit(ck, if b { [zero, one] } else { [one, zero] }, rng)
}

/// Recorded run for offline inspection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub ck_seed: String,
    pub commitment: Commitment,
    pub openings: Vec<Opening>,
    pub verdicts: Vec<Option<bool>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn classical_bits_open_correctly() {
        let (ck, dk) = gen(PfcParams::DESK, &Seed::from_u64(1)).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for b in [false, true] {
            let c = commit_bit(&ck, b, &mut rng).unwrap();
            let com = c.commitment();
            let d = c.open_z(&mut rng);
            assert_eq!(dk.dec_z(&com, &d), Some(b));
            assert_eq!(ck.dec_z(&com, &d), Some(b));
        }
    }

    #[test]
    fn ck_d_requires_zero_signature() {
        let (ck, _) = gen(PfcParams::DESK, &Seed::from_u64(3)).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let c = commit_bit(&ck, false, &mut rng).unwrap().commitment();
        // The commitment carries a signature of 1, useless as a 0-signature.
        assert_eq!(ck.ck_d(c.vk, &c.sig, c.vk_bar, &Gf2Vector::zero(8)), None);
    }

    #[test]
    fn transcript_serialises() {
        let (ck, dk) = gen(PfcParams::DESK, &Seed::from_u64(5)).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let c = commit_bit(&ck, true, &mut rng).unwrap();
        let com = c.commitment();
        let d = c.open_z(&mut rng);
        let t = Transcript { ck_seed: Seed::from_u64(5).to_hex(), commitment: com, openings: vec![d], verdicts: vec![dk.dec_z(&com, &d)] };
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(serde_json::from_str::<Transcript>(&json).unwrap(), t);
    }
}
