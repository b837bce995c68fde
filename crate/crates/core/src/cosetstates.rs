//! Symbolic coset states `|S + v>` and their first-coordinate slices.
//!
//! A balanced coset `S_y` (first coordinate not constant) splits as
//! `S_{y,b} = H + v0 + b w`, where `H` is the subspace of linear-part elements
//! with first coordinate 0 and `w` is the basis row whose pivot is coordinate
//! 0. Every operation here works on that triple, so nothing is enumerated
//! unless a caller asks for an explicit distribution.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::densesim::{hadamard_transform, SimError, StateVector};
use crate::gf2::{Gf2Coset, Gf2Error, Gf2Vector};

/// Exhaustive predicate checks are done up to this many elements (as a power of two).
const PREDICATE_CHECK_DIM: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CosetStateError {
    #[error("coset is unbalanced: its first coordinate is constant")]
    Unbalanced,
    #[error("dual predicate disagrees with the stored coset at {0}")]
    PredicateMismatch(Gf2Vector),
    #[error("amplitudes ({0}, {1}) are not normalised")]
    NotNormalized(Complex64, Complex64),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error(transparent)]
    Sim(#[from] SimError),
}

pub type Result<T> = std::result::Result<T, CosetStateError>;

/// The uniform superposition over a coset, kept as the coset itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetState {
    coset: Gf2Coset,
}

impl CosetState {
    pub fn new(coset: Gf2Coset) -> Self {
        Self { coset }
    }

    pub fn coset(&self) -> &Gf2Coset {
        &self.coset
    }

    pub fn into_coset(self) -> Gf2Coset {
        self.coset
    }

    pub fn n(&self) -> usize {
        self.coset.n()
    }

    /// Whether both values of the first coordinate occur.
    pub fn is_balanced(&self) -> bool {
        self.coset.basis().first().is_some_and(|b| b.leading_coordinate() == Some(0))
    }

    pub fn split(&self) -> Result<CosetSplit> {
        CosetSplit::of(&self.coset)
    }

    /// Post-measurement slice `|S_{y,b}>` for a given first bit.
    pub fn restrict_first_bit(&self, b: bool) -> Result<SliceState> {
        Ok(SliceState { split: self.split()?, bit: b })
    }

    /// Measures the first qubit. On an unbalanced coset the outcome is forced
    /// and the state is unchanged, which is reported as `Err(Unbalanced)`.
    pub fn measure_first_bit<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SliceState> {
        let b = rng.gen::<bool>();
        self.restrict_first_bit(b)
    }

    pub fn measure_all<R: Rng + ?Sized>(&self, rng: &mut R) -> Gf2Vector {
        self.coset.sample(rng)
    }

    /// Hadamard-basis measurement: uniform over the dual of the linear part.
    pub fn measure_hadamard<R: Rng + ?Sized>(&self, rng: &mut R) -> Gf2Vector {
        self.coset.linear_part().dual().expect("linear part").sample(rng)
    }

    pub fn to_state_vector(&self) -> Result<StateVector> {
        Ok(StateVector::from_coset(&self.coset)?)
    }
}

/// `S_y = H + v0 + span(w)` with `H` the first-coordinate-zero part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetSplit {
    half: Gf2Coset,
    v0: Gf2Vector,
    w: Gf2Vector,
}

impl CosetSplit {
    pub fn of(s: &Gf2Coset) -> Result<Self> {
        let (w, rest) = match s.basis().split_first() {
            Some((w, rest)) if w.leading_coordinate() == Some(0) => (*w, rest),
            _ => return Err(CosetStateError::Unbalanced),
        };
        // Reduced rows after the first have a zero in coordinate 0, and so does
        // the canonical shift.
        let half = Gf2Coset::subspace(s.n(), rest)?;
        Ok(Self { half, v0: s.shift(), w })
    }

    /// Builds a split from explicit parts; `w` must start with a 1 and `half`
    /// must lie in the first-coordinate-zero hyperplane.
    pub fn from_parts(half: Gf2Coset, v0: Gf2Vector, w: Gf2Vector) -> Result<Self> {
        let full = Gf2Coset::from_generators(half.n(), &[half.basis(), &[w]].concat(), v0)?;
        let s = Self::of(&full)?;
        if s.half != half.linear_part() || !s.slice(false).contains(&v0) {
            return Err(CosetStateError::Unbalanced);
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.half.n()
    }

    pub fn half(&self) -> &Gf2Coset {
        &self.half
    }

    pub fn v0(&self) -> Gf2Vector {
        self.v0
    }

    pub fn w(&self) -> Gf2Vector {
        self.w
    }

    /// `S_{y,b}`.
    pub fn slice(&self, b: bool) -> Gf2Coset {
        let shift = if b { self.v0 ^ self.w } else { self.v0 };
        self.half.translate(&shift).expect("same dimension")
    }

    /// `S_y`.
    pub fn full(&self) -> Gf2Coset {
        Gf2Coset::from_generators(self.n(), &[self.half.basis(), &[self.w]].concat(), self.v0).expect("same dimension")
    }

    /// `H^perp`, which equals `S_y^perp + span(e_1)`.
    pub fn half_dual(&self) -> Gf2Coset {
        self.half.dual().expect("half is linear")
    }

    /// Linear part of `S_y`'s dual.
    pub fn full_dual(&self) -> Gf2Coset {
        self.full().linear_part().dual().expect("linear part")
    }
}

/// `|S_{y,b}>` for a known split and bit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SliceState {
    split: CosetSplit,
    bit: bool,
}

impl SliceState {
    pub fn new(split: CosetSplit, bit: bool) -> Self {
        Self { split, bit }
    }

    pub fn split(&self) -> &CosetSplit {
        &self.split
    }

    pub fn bit(&self) -> bool {
        self.bit
    }

    pub fn coset(&self) -> Gf2Coset {
        self.split.slice(self.bit)
    }

    pub fn measure_all<R: Rng + ?Sized>(&self, rng: &mut R) -> Gf2Vector {
        self.coset().sample(rng)
    }

    pub fn to_state_vector(&self) -> Result<StateVector> {
        Ok(StateVector::from_coset(&self.coset())?)
    }
}

/// Checks `in_dual` against membership in `S_y^perp` on `H^perp`, the only
/// vectors the rotation ever touches.
fn check_dual_predicate<F: Fn(&Gf2Vector) -> bool>(split: &CosetSplit, in_dual: &F) -> Result<()> {
    let dual = split.full_dual();
    let hd = split.half_dual();
    let probe = |v: &Gf2Vector| {
        if in_dual(v) != dual.contains(v) {
            Err(CosetStateError::PredicateMismatch(*v))
        } else {
            Ok(())
        }
    };
    if hd.dim() <= PREDICATE_CHECK_DIM {
        for s in hd.members()? {
            probe(&s)?;
        }
    } else {
        let e1 = Gf2Vector::unit(split.n(), 0);
        probe(&Gf2Vector::zero(split.n()))?;
        probe(&e1)?;
        for d in dual.basis() {
            probe(d)?;
            probe(&(*d ^ e1))?;
        }
    }
    Ok(())
}

/// `H^n . Phase . H^n` on `|S_{y,b}>`, where the phase is -1 on vectors
/// outside `S_y^perp`. The result is exactly `|S_{y,1-b}>`.
pub fn rotate_first_bit<F: Fn(&Gf2Vector) -> bool>(state: &SliceState, in_dual: F) -> Result<SliceState> {
    check_dual_predicate(&state.split, &in_dual)?;
    Ok(SliceState { split: state.split.clone(), bit: !state.bit })
}

/// Dense counterpart of [`rotate_first_bit`] acting on any state.
pub fn dense_rotation<F: Fn(&Gf2Vector) -> bool>(psi: &mut StateVector, in_dual: F) {
    let n = psi.n_qubits();
    psi.hadamard_all();
    psi.phase_oracle(|x| !in_dual(&Gf2Vector::truncated(n, x)));
    psi.hadamard_all();
}

/// `a0 |0>|S_{y,0}> + a1 |1>|S_{y,1}>`, the state a commitment leaves behind.
#[derive(Clone, Debug, PartialEq)]
pub struct CosetQubitState {
    amps: [Complex64; 2],
    split: CosetSplit,
    label: u64,
}

impl CosetQubitState {
    pub fn new(amps: [Complex64; 2], split: CosetSplit, label: u64) -> Result<Self> {
        let norm = amps[0].norm_sqr() + amps[1].norm_sqr();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(CosetStateError::NotNormalized(amps[0], amps[1]));
        }
        Ok(Self { amps, split, label })
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        self.amps
    }

    pub fn split(&self) -> &CosetSplit {
        &self.split
    }

    /// Verification-key label of the coset.
    pub fn label(&self) -> u64 {
        self.label
    }

    /// Support of branch `b`, or `None` when its amplitude is zero.
    pub fn branch_support(&self, b: bool) -> Option<Gf2Coset> {
        (self.amps[b as usize].norm_sqr() > 0.0).then(|| self.split.slice(b))
    }

    /// `(1 + n)`-qubit vector with the committed qubit first.
    pub fn to_state_vector(&self) -> Result<StateVector> {
        let n = self.split.n();
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << (n + 1)];
        for b in [false, true] {
            let slice = self.split.slice(b);
            let a = self.amps[b as usize] / (slice.cardinality() as f64).sqrt();
            for u in slice.members()? {
                amps[((b as usize) << n) | u.bits() as usize] = a;
            }
        }
        Ok(StateVector::from_amplitudes(amps)?)
    }

    /// Exact outcome distribution of measuring everything in the standard basis.
    pub fn z_open_distribution(&self) -> Result<BTreeMap<(bool, Gf2Vector), f64>> {
        let mut m = BTreeMap::new();
        for b in [false, true] {
            let p = self.amps[b as usize].norm_sqr();
            if p == 0.0 {
                continue;
            }
            let slice = self.split.slice(b);
            let each = p / slice.cardinality() as f64;
            for u in slice.members()? {
                m.insert((b, u), each);
            }
        }
        Ok(m)
    }

    /// Probability of `(b', s)` under a Hadamard-basis measurement, zero
    /// unless `s` is in `H^perp`.
    pub fn x_open_probability(&self, b_prime: bool, s: &Gf2Vector) -> f64 {
        let hd = self.split.half_dual();
        if !hd.contains(s) {
            return 0.0;
        }
        let sign = if b_prime ^ s.dot(&self.split.w) { -1.0 } else { 1.0 };
        (self.amps[0] + self.amps[1] * sign).norm_sqr() / (2.0 * hd.cardinality() as f64)
    }

    /// Exact outcome distribution of measuring everything in the Hadamard basis.
    pub fn x_open_distribution(&self) -> Result<BTreeMap<(bool, Gf2Vector), f64>> {
        let hd = self.split.half_dual();
        let mut m = BTreeMap::new();
        for s in hd.members()? {
            for b in [false, true] {
                let p = self.x_open_probability(b, &s);
                if p > 0.0 {
                    m.insert((b, s), p);
                }
            }
        }
        Ok(m)
    }

    /// Standard-basis measurement: `b` with probability `|a_b|^2`, then `u`
    /// uniform in `S_{y,b}`.
    pub fn measure_z<R: Rng + ?Sized>(&self, rng: &mut R) -> (bool, Gf2Vector) {
        let b = rng.gen::<f64>() >= self.amps[0].norm_sqr();
        (b, self.split.slice(b).sample(rng))
    }

    /// Hadamard-basis measurement: `s` uniform in `H^perp`, then the committed
    /// qubit becomes `a0|0> + (-1)^{s.w} a1|1>` and is measured in the
    /// Hadamard basis.
    pub fn measure_x<R: Rng + ?Sized>(&self, rng: &mut R) -> (bool, Gf2Vector) {
        let s = self.split.half_dual().sample(rng);
        let sign = if s.dot(&self.split.w) { -1.0 } else { 1.0 };
        let p0 = (self.amps[0] + self.amps[1] * sign).norm_sqr() / 2.0;
        (rng.gen::<f64>() >= p0, s)
    }
}

/// Exact Hadamard-basis outcome distribution of a dense state.
pub fn dense_x_distribution(psi: &StateVector) -> BTreeMap<u64, f64> {
    let mut amps = psi.amplitudes().to_vec();
    hadamard_transform(&mut amps);
    amps.iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 1e-15)
        .map(|(i, a)| (i as u64, a.norm_sqr()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: usize, bits: u64) -> Gf2Vector {
        Gf2Vector::new(n, bits).unwrap()
    }

    #[test]
    fn split_of_small_coset() {
        // S = span{110, 011} + 001
        let s = Gf2Coset::from_basis(3, &[v(3, 0b110), v(3, 0b011)], v(3, 0b001)).unwrap();
        let split = CosetSplit::of(&s).unwrap();
        let s0 = split.slice(false);
        let s1 = split.slice(true);
        assert!(s0.members().unwrap().iter().all(|u| !u.first()));
        assert!(s1.members().unwrap().iter().all(|u| u.first()));
        assert_eq!(split.full(), s);
        assert_eq!(s0.cardinality() + s1.cardinality(), s.cardinality());
    }

    #[test]
    fn unbalanced_coset_rejected() {
        let s = Gf2Coset::from_basis(3, &[v(3, 0b011)], v(3, 0b100)).unwrap();
        assert!(!CosetState::new(s.clone()).is_balanced());
        assert_eq!(CosetSplit::of(&s), Err(CosetStateError::Unbalanced));
    }

    #[test]
    fn wrong_predicate_detected() {
        let s = Gf2Coset::from_basis(3, &[v(3, 0b110), v(3, 0b011)], v(3, 0)).unwrap();
        let st = CosetState::new(s).restrict_first_bit(false).unwrap();
        assert!(matches!(rotate_first_bit(&st, |_| true), Err(CosetStateError::PredicateMismatch(_))));
    }
}
