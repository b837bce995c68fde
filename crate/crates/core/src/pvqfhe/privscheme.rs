//! The privately-verifiable scheme consumed by the compiler, and a transparent
//! reference instance of it.
//!
//! The compiler only needs the pieces listed on [`PrivScheme`]: a per-position
//! verification-key split, the honest state as one qubit per position, the
//! two classical measurements run on that state, and `Ver`/`Dec`. How `y` and
//! `z` are measured is left to the instance.

use num_complex::Complex64;

use super::{PvError, QuantumProgram, Result};
use crate::homenc::{self, FheCiphertext, PublicKey, SecretKey};
use crate::oracle::{hash_parts, prf, Seed};

/// A decoded position handed to `Ver`: a bit, or `*` when the position was
/// measured in the Hadamard basis but belongs to `S`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mark {
    Bit(bool),
    Star,
}

pub trait PrivScheme: Send + Sync {
    /// Number of qubit positions `l`.
    fn ell(&self) -> usize;

    /// `ParVerGen(ct, Q, sp, i)`.
    fn par_ver_gen(&self, ct: &FheCiphertext, q: &[u8], sp: &Seed, i: usize) -> Vec<u8>;

    /// `S[sp]`: positions checked in the standard basis.
    fn standard_positions(&self, sp: &Seed) -> Vec<bool>;

    /// The honest state as a product of single-qubit states, one per position.
    fn state(&self, ct: &FheCiphertext, q: &dyn QuantumProgram) -> Result<Vec<[Complex64; 2]>>;

    /// `M_pp`; `attempt` lets the evaluator redraw an unusable challenge.
    fn measure_y(&self, pp: &[Vec<u8>], ct: &FheCiphertext, q: &[u8], attempt: u32) -> Vec<u8>;

    /// Whether the challenge `T` (standard-basis set) leaves something to check.
    fn challenge_usable(&self, t: &[bool]) -> bool;

    /// `M_{pp, y, T}`.
    fn measure_z(&self, pp: &[Vec<u8>], y: &[u8], t: &[bool]) -> Vec<u8>;

    /// `Ver^H(sp, ct, Q, (m, y, z))`.
    #[allow(clippy::too_many_arguments)]
    fn ver(&self, sp: &Seed, ct: &FheCiphertext, q: &[u8], m: &[Mark], y: &[u8], z: &[u8], h: &dyn Fn(&[u8]) -> Vec<bool>) -> Option<FheCiphertext>;

    /// Membership of `m` in `M_b[sp]`.
    fn in_m(&self, sp: &Seed, b: bool, m: &[Mark]) -> bool;

    fn dec(&self, pk: &PublicKey, sk: &SecretKey, ct: &FheCiphertext) -> Result<bool>;
}

/// Reference instance. It hides nothing: the output bit is computed in the
/// clear from the ciphertext payload. Positions in `S` hold `|b>` and the
/// others hold `H|b>`, so both kinds of opening carry `b`.
#[derive(Clone, Debug)]
pub struct TransparentPriv {
    pk: PublicKey,
    ell: usize,
}

impl TransparentPriv {
    pub const ELL: usize = 8;

    pub fn new(pk: PublicKey) -> Self {
        Self { pk, ell: Self::ELL }
    }

    fn in_s(i: usize) -> bool {
        i.is_multiple_of(2)
    }

    fn pp_bytes(pp: &[Vec<u8>]) -> Vec<u8> {
        let mut out = Vec::new();
        for p in pp {
            out.extend_from_slice(&(p.len() as u32).to_le_bytes());
            out.extend_from_slice(p);
        }
        out
    }

    fn y_digest(pp: &[Vec<u8>], ct: &FheCiphertext, q: &[u8], attempt: u32) -> [u8; 32] {
        hash_parts(&[b"priv-y", &ct.to_bytes(), q, &Self::pp_bytes(pp), &attempt.to_le_bytes()])
    }

    fn z_digest(pp: &[Vec<u8>], y: &[u8], t: &[bool]) -> [u8; 32] {
        let tb: Vec<u8> = t.iter().map(|&b| u8::from(b)).collect();
        hash_parts(&[b"priv-z", &Self::pp_bytes(pp), y, &tb])
    }

    /// The bit carried by `m` when every checked position agrees.
    fn carried_bit(&self, m: &[Mark], t: &[bool]) -> Option<bool> {
        let mut seen = None;
        for i in 0..self.ell {
            let checked = match (t[i], Self::in_s(i)) {
                (true, true) | (false, false) => true,
                (false, true) => {
                    if m[i] != Mark::Star {
                        return None;
                    }
                    false
                }
                // A standard-basis outcome of `H|b>` is uniform.
                (true, false) => false,
            };
            if checked {
                let Mark::Bit(v) = m[i] else { return None };
                if *seen.get_or_insert(v) != v {
                    return None;
                }
            }
        }
        seen
    }
}

impl PrivScheme for TransparentPriv {
    fn ell(&self) -> usize {
        self.ell
    }

    fn par_ver_gen(&self, ct: &FheCiphertext, q: &[u8], sp: &Seed, i: usize) -> Vec<u8> {
        let mut input = ct.to_bytes();
        input.extend_from_slice(&(q.len() as u64).to_le_bytes());
        input.extend_from_slice(q);
        input.extend_from_slice(&(i as u64).to_le_bytes());
        prf(sp, "priv-pp", &input)[..16].to_vec()
    }

    fn standard_positions(&self, _sp: &Seed) -> Vec<bool> {
        (0..self.ell).map(Self::in_s).collect()
    }

    fn state(&self, ct: &FheCiphertext, q: &dyn QuantumProgram) -> Result<Vec<[Complex64; 2]>> {
        homenc::check_tag(&self.pk, ct)?;
        let b = q.output(&ct.payload)?;
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Ok((0..self.ell)
            .map(|i| match (Self::in_s(i), b) {
                (true, false) => [one, zero],
                (true, true) => [zero, one],
                (false, false) => [r, r],
                (false, true) => [r, -r],
            })
            .collect())
    }

    fn measure_y(&self, pp: &[Vec<u8>], ct: &FheCiphertext, q: &[u8], attempt: u32) -> Vec<u8> {
        let mut y = attempt.to_le_bytes().to_vec();
        y.extend_from_slice(&Self::y_digest(pp, ct, q, attempt));
        y
    }

    fn challenge_usable(&self, t: &[bool]) -> bool {
        (0..self.ell).any(|i| t[i] && Self::in_s(i))
    }

    fn measure_z(&self, pp: &[Vec<u8>], y: &[u8], t: &[bool]) -> Vec<u8> {
        Self::z_digest(pp, y, t).to_vec()
    }

    fn ver(&self, sp: &Seed, ct: &FheCiphertext, q: &[u8], m: &[Mark], y: &[u8], z: &[u8], h: &dyn Fn(&[u8]) -> Vec<bool>) -> Option<FheCiphertext> {
        if m.len() != self.ell || y.len() != 36 || homenc::check_tag(&self.pk, ct).is_err() {
            return None;
        }
        let pp: Vec<Vec<u8>> = (0..self.ell).map(|i| self.par_ver_gen(ct, q, sp, i)).collect();
        let attempt = u32::from_le_bytes(y[..4].try_into().expect("4 bytes"));
        if self.measure_y(&pp, ct, q, attempt) != y {
            return None;
        }
        let t = h(y);
        if t.len() != self.ell || !self.challenge_usable(&t) || self.measure_z(&pp, y, &t) != z {
            return None;
        }
        let b = self.carried_bit(m, &t)?;
        Some(homenc::enc(&self.pk, &[u8::from(b)]))
    }

    fn in_m(&self, _sp: &Seed, b: bool, m: &[Mark]) -> bool {
        m.len() == self.ell && m.iter().all(|&x| x == Mark::Star || x == Mark::Bit(b))
    }

    fn dec(&self, pk: &PublicKey, sk: &SecretKey, ct: &FheCiphertext) -> Result<bool> {
        match homenc::dec(pk, sk, ct)?.as_slice() {
            [0] => Ok(false),
            [1] => Ok(true),
            other => Err(PvError::Input(format!("plaintext {other:?} is not a bit"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn scheme() -> TransparentPriv {
        TransparentPriv::new(homenc::gen(128, 4, &mut ChaCha20Rng::seed_from_u64(1)).unwrap().pk)
    }

    #[test]
    fn m_sets_incompatible_once_a_position_is_revealed() {
        let s = scheme();
        let sp = Seed::from_u64(0);
        let stars = vec![Mark::Star; 8];
        assert!(s.in_m(&sp, false, &stars) && s.in_m(&sp, true, &stars));
        let mut m = stars.clone();
        m[2] = Mark::Bit(true);
        assert!(s.in_m(&sp, true, &m) && !s.in_m(&sp, false, &m));
    }

    #[test]
    fn carried_bit_rules() {
        let s = scheme();
        // T = {0, 1}: position 0 checked, 1 ignored, 2/4/6 starred, 3/5/7 Hadamard-checked.
        let mut t = vec![false; 8];
        t[0] = true;
        t[1] = true;
        let mut m = vec![Mark::Bit(true), Mark::Bit(false), Mark::Star, Mark::Bit(true), Mark::Star, Mark::Bit(true), Mark::Star, Mark::Bit(true)];
        assert_eq!(s.carried_bit(&m, &t), Some(true));
        m[3] = Mark::Bit(false);
        assert_eq!(s.carried_bit(&m, &t), None);
        m[3] = Mark::Bit(true);
        m[2] = Mark::Bit(true);
        assert_eq!(s.carried_bit(&m, &t), None);
    }

    #[test]
    fn par_ver_gen_is_deterministic() {
        let s = scheme();
        let ct = homenc::enc(&s.pk, &[1, 0]);
        let sp = Seed::from_u64(5);
        assert_eq!(s.par_ver_gen(&ct, b"q", &sp, 3), s.par_ver_gen(&ct, b"q", &sp, 3));
        assert_ne!(s.par_ver_gen(&ct, b"q", &sp, 3), s.par_ver_gen(&ct, b"q", &sp, 4));
    }
}
