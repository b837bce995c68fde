//! Collapse-binding games for the commitment scheme and for the inner
//! one-shot signatures, with honest and control adversaries.
//!
//! Registers are either symbolic (exact support checks) or dense state vectors
//! whose leading qubits are the challenged registers and whose remaining
//! qubits are the adversary's side register.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::{commit, gen, Basis, CommitKey, Commitment, DecodeKey, Opening, PfcParams, Result};
use crate::cosetstates::{dense_x_distribution, CosetQubitState, CosetState};
use crate::densesim::StateVector;
use crate::gf2::{Gf2Coset, Gf2Vector};
use crate::oracle::Seed;
use crate::oss::{self, OssOracles, QuantumAccess};

const VALIDITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GameOutcome {
    Win,
    Lose,
    /// The adversary's state failed the validity check; the run does not count.
    Invalid,
}

/// The challenged registers `(B, U)` and any side register.
#[derive(Clone, Debug)]
pub enum BindingRegister {
    Symbolic(CosetQubitState),
    /// Qubit 0 is `B`, the next `n_u` qubits are `U`, the rest are `R`.
    Dense { state: StateVector, n_u: usize },
    /// `(B, U)` after a standard-basis measurement of a symbolic register.
    Collapsed { bit: bool, u: Gf2Vector },
}

pub struct FirstStageAccess<'a> {
    ck: &'a CommitKey,
    dk: &'a DecodeKey,
}

impl FirstStageAccess<'_> {
    pub fn ck(&self) -> &CommitKey {
        self.ck
    }

    pub fn dec_z(&self, c: &Commitment, d: &Opening) -> Option<bool> {
        self.dk.dec_z(c, d)
    }

    pub fn dec_x(&self, c: &Commitment, d: &Opening) -> Option<bool> {
        self.dk.dec_x(c, d)
    }
}

/// Second-stage oracles. `DecX` is withheld unless the game is run as a
/// control experiment.
pub struct SecondStageAccess<'a> {
    ck: &'a CommitKey,
    dk: &'a DecodeKey,
    dec_x_granted: bool,
}

impl SecondStageAccess<'_> {
    pub fn ck(&self) -> &CommitKey {
        self.ck
    }

    pub fn dec_z(&self, c: &Commitment, d: &Opening) -> Option<bool> {
        self.dk.dec_z(c, d)
    }

    /// `None` when the oracle is withheld.
    pub fn dec_x(&self, c: &Commitment, d: &Opening) -> Option<Option<bool>> {
        self.dec_x_granted.then(|| self.dk.dec_x(c, d))
    }
}

pub trait CollapseBindingAdversary {
    fn commit(&mut self, access: &FirstStageAccess, quantum: &QuantumAccess, rng: &mut dyn RngCore) -> (Commitment, BindingRegister);
    fn guess(&mut self, access: &SecondStageAccess, c: &Commitment, register: BindingRegister, rng: &mut dyn RngCore) -> bool;
}

/// Weight of the register inside the image of
/// `|0><0| (x) Pi_{c,0} + |1><1| (x) Pi_{c,1}`.
pub fn valid_weight(dk: &DecodeKey, c: &Commitment, reg: &BindingRegister) -> f64 {
    match reg {
        BindingRegister::Symbolic(st) => {
            let mut w = 0.0;
            for b in [false, true] {
                let p = st.amplitudes()[b as usize].norm_sqr();
                let Some(support) = st.branch_support(b) else { continue };
                if dk.opening_set(c, b).is_some_and(|allowed| allowed.contains_coset(&support)) {
                    w += p;
                }
            }
            w
        }
        BindingRegister::Collapsed { bit, u } => {
            let ok = dk.dec_z(c, &Opening { basis: Basis::Z, bit: *bit, u: *u }) == Some(*bit);
            if ok {
                1.0
            } else {
                0.0
            }
        }
        BindingRegister::Dense { state, n_u } => {
            let n = state.n_qubits();
            let allowed = [dk.opening_set(c, false), dk.opening_set(c, true)];
            state
                .probabilities()
                .iter()
                .enumerate()
                .filter(|(_, p)| **p > 0.0)
                .filter(|(x, _)| {
                    let bu = (*x as u64) >> (n - 1 - n_u);
                    let b = (bu >> n_u) & 1 == 1;
                    let u = Gf2Vector::truncated(*n_u, bu);
                    allowed[b as usize].as_ref().is_some_and(|s| s.contains(&u))
                })
                .map(|(_, p)| *p)
                .sum()
        }
    }
}

fn challenge<R: Rng + ?Sized>(reg: BindingRegister, rng: &mut R) -> BindingRegister {
    match reg {
        BindingRegister::Symbolic(st) => {
            let (bit, u) = st.measure_z(rng);
            BindingRegister::Collapsed { bit, u }
        }
        BindingRegister::Dense { state, n_u } => {
            let qubits: Vec<usize> = (0..=n_u).collect();
            let (_, post) = state.measure(&qubits, rng).expect("qubits in range");
            BindingRegister::Dense { state: post, n_u }
        }
        c @ BindingRegister::Collapsed { .. } => c,
    }
}

/// One run of the collapse-binding experiment. With `grant_dec_x` the second
/// stage also gets `DecX`, which the real game withholds.
pub fn run_collapse_binding<A: CollapseBindingAdversary + ?Sized, R: RngCore>(
    params: PfcParams,
    seed: &Seed,
    adversary: &mut A,
    grant_dec_x: bool,
    rng: &mut R,
) -> Result<GameOutcome> {
    let (ck, dk) = gen(params, seed)?;
    let first = FirstStageAccess { ck: &ck, dk: &dk };
    let (c, reg) = adversary.commit(&first, &QuantumAccess::grant(), rng);
    if valid_weight(&dk, &c, &reg) < 1.0 - VALIDITY_TOL {
        return Ok(GameOutcome::Invalid);
    }
    let b = rng.gen::<bool>();
    let reg = if b { challenge(reg, rng) } else { reg };
    let second = SecondStageAccess { ck: &ck, dk: &dk, dec_x_granted: grant_dec_x };
    let guess = adversary.guess(&second, &c, reg, rng);
    Ok(if guess == b { GameOutcome::Win } else { GameOutcome::Lose })
}

fn plus() -> [Complex64; 2] {
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [r, r]
}

/// Commits honestly to `amps` and guesses the challenge bit at random.
pub struct GuessingAdversary {
    pub amps: [Complex64; 2],
}

impl Default for GuessingAdversary {
    fn default() -> Self {
        Self { amps: plus() }
    }
}

impl CollapseBindingAdversary for GuessingAdversary {
    fn commit(&mut self, access: &FirstStageAccess, quantum: &QuantumAccess, rng: &mut dyn RngCore) -> (Commitment, BindingRegister) {
        let committed = commit(access.ck(), self.amps, rng).expect("honest commit");
        (committed.commitment(), BindingRegister::Symbolic(committed.into_state(quantum)))
    }

    fn guess(&mut self, _access: &SecondStageAccess, _c: &Commitment, _reg: BindingRegister, rng: &mut dyn RngCore) -> bool {
        rng.gen()
    }
}

/// Commits to `|+>`, then in the second stage measures in the Hadamard basis
/// and decodes with `DecX`: an undisturbed commitment decodes to 0, a measured
/// one rarely does. Only meaningful when `DecX` is granted.
pub struct HadamardTestAdversary;

fn hadamard_measure_register<R: Rng + ?Sized>(reg: BindingRegister, rng: &mut R) -> Opening {
    match reg {
        BindingRegister::Symbolic(st) => {
            let (bit, u) = st.measure_x(rng);
            Opening { basis: Basis::X, bit, u }
        }
        BindingRegister::Collapsed { u, .. } => {
            // H on a basis state gives a uniform outcome.
            let bits = rng.gen::<u64>();
            Opening { basis: Basis::X, bit: rng.gen(), u: Gf2Vector::truncated(u.len(), bits) }
        }
        BindingRegister::Dense { mut state, n_u } => {
            let n = state.n_qubits();
            state.hadamard_all();
            let x = state.measure_all(rng) >> (n - 1 - n_u);
            Opening { basis: Basis::X, bit: (x >> n_u) & 1 == 1, u: Gf2Vector::truncated(n_u, x) }
        }
    }
}

impl CollapseBindingAdversary for HadamardTestAdversary {
    fn commit(&mut self, access: &FirstStageAccess, quantum: &QuantumAccess, rng: &mut dyn RngCore) -> (Commitment, BindingRegister) {
        let committed = commit(access.ck(), plus(), rng).expect("honest commit");
        (committed.commitment(), BindingRegister::Symbolic(committed.into_state(quantum)))
    }

    fn guess(&mut self, access: &SecondStageAccess, c: &Commitment, reg: BindingRegister, rng: &mut dyn RngCore) -> bool {
        let d = hadamard_measure_register(reg, rng);
        match access.dec_x(c, &d) {
            Some(decoded) => decoded != Some(false),
            None => rng.gen(),
        }
    }
}

/// Exact success probability of [`HadamardTestAdversary`]'s second stage on a
/// given commitment state, by dense simulation of both challenge branches.
pub fn hadamard_test_success(dk: &DecodeKey, c: &Commitment, state: &CosetQubitState) -> f64 {
    let n = state.split().n();
    let decodes_zero = |x: u64| {
        let d = Opening { basis: Basis::X, bit: (x >> n) & 1 == 1, u: Gf2Vector::truncated(n, x) };
        dk.dec_x(c, &d) == Some(false)
    };
    let psi = state.to_state_vector().expect("small n");
    let p_zero_unmeasured: f64 = dense_x_distribution(&psi).iter().filter(|(x, _)| decodes_zero(**x)).map(|(_, p)| p).sum();
    // Measured branch: every standard-basis outcome Hadamard-transforms to the
    // uniform distribution over all 2^{n+1} strings.
    let mut p_zero_measured = 0.0;
    for (x, p) in psi.probabilities().into_iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let basis = StateVector::basis(n + 1, x as u64).expect("small n");
        let hits: f64 = dense_x_distribution(&basis).iter().filter(|(y, _)| decodes_zero(**y)).map(|(_, q)| q).sum();
        p_zero_measured += p * hits;
    }
    0.5 * p_zero_unmeasured + 0.5 * (1.0 - p_zero_measured)
}

/// A register that breaks validity: honest commitment, mismatched coset.
pub struct MismatchedRegisterAdversary;

impl CollapseBindingAdversary for MismatchedRegisterAdversary {
    fn commit(&mut self, access: &FirstStageAccess, quantum: &QuantumAccess, rng: &mut dyn RngCore) -> (Commitment, BindingRegister) {
        let first = commit(access.ck(), plus(), rng).expect("honest commit");
        let c = first.commitment();
        loop {
            let other = commit(access.ck(), plus(), rng).expect("honest commit");
            if other.commitment().vk_bar != c.vk_bar || other.commitment().vk != c.vk {
                return (c, BindingRegister::Symbolic(other.into_state(quantum)));
            }
        }
    }

    fn guess(&mut self, _access: &SecondStageAccess, _c: &Commitment, _reg: BindingRegister, _rng: &mut dyn RngCore) -> bool {
        false
    }
}

/// Predicate of `Pi_{dk,c,W}`: the tuple of standard-basis decodings lies in `W`.
pub fn string_projector_accepts(dks: &[DecodeKey], cs: &[Commitment], openings: &[Opening], w: &[Vec<bool>]) -> bool {
    assert!(dks.len() == cs.len() && cs.len() == openings.len(), "tuple lengths differ");
    let decoded: Option<Vec<bool>> = dks.iter().zip(cs).zip(openings).map(|((dk, c), d)| dk.dec_z(c, d)).collect();
    decoded.is_some_and(|s| w.contains(&s))
}

// ---- One-shot signature collapse binding ----------------------------------

/// The register `U` of the one-shot signature game.
#[derive(Clone, Debug)]
pub enum OssRegister {
    Symbolic(CosetState),
    /// Leading `n_u` qubits are `U`.
    Dense { state: StateVector, n_u: usize },
    Collapsed(Gf2Vector),
}

/// Oracle access in the one-shot signature game; `D` only when granted.
pub struct OssGameAccess {
    oracles: Arc<OssOracles>,
    d_granted: bool,
}

impl OssGameAccess {
    pub fn p(&self, x: u64) -> Option<(u64, Gf2Vector)> {
        self.oracles.p(x).ok()
    }

    pub fn p_inv(&self, y: u64, u: &Gf2Vector) -> Option<u64> {
        self.oracles.p_inv(y, u)
    }

    /// `None` when `D` is withheld.
    pub fn d(&self, y: u64, v: &Gf2Vector) -> Option<bool> {
        self.d_granted.then(|| self.oracles.d(y, v))
    }

    /// Honest key generation through the granted oracles.
    pub fn gen(&self, rng: &mut dyn RngCore) -> oss::OssToken {
        oss::gen(&self.oracles, rng).expect("gen")
    }
}

pub trait OssCollapseAdversary {
    fn prepare(&mut self, access: &OssGameAccess, quantum: &QuantumAccess, rng: &mut dyn RngCore) -> (u64, OssRegister);
    fn guess(&mut self, access: &OssGameAccess, y: u64, register: OssRegister, rng: &mut dyn RngCore) -> bool;
}

/// Weight of `U` inside the image of `Pi_y` (the span of `S_y`).
pub fn oss_valid_weight(o: &OssOracles, y: u64, reg: &OssRegister) -> f64 {
    let s = o.coset(y);
    match reg {
        OssRegister::Symbolic(st) => {
            if s.contains_coset(st.coset()) {
                1.0
            } else {
                0.0
            }
        }
        OssRegister::Collapsed(u) => {
            if s.contains(u) {
                1.0
            } else {
                0.0
            }
        }
        OssRegister::Dense { state, n_u } => {
            let n = state.n_qubits();
            state
                .probabilities()
                .iter()
                .enumerate()
                .filter(|(x, p)| **p > 0.0 && s.contains(&Gf2Vector::truncated(*n_u, (*x as u64) >> (n - n_u))))
                .map(|(_, p)| *p)
                .sum()
        }
    }
}

pub fn run_oss_collapse_binding<A: OssCollapseAdversary + ?Sized, R: RngCore>(
    o: Arc<OssOracles>,
    adversary: &mut A,
    grant_d: bool,
    rng: &mut R,
) -> GameOutcome {
    let first = OssGameAccess { oracles: o.clone(), d_granted: true };
    let (y, reg) = adversary.prepare(&first, &QuantumAccess::grant(), rng);
    if oss_valid_weight(&o, y, &reg) < 1.0 - VALIDITY_TOL {
        return GameOutcome::Invalid;
    }
    let b = rng.gen::<bool>();
    let reg = if b {
        match reg {
            OssRegister::Symbolic(st) => OssRegister::Collapsed(st.measure_all(rng)),
            OssRegister::Dense { state, n_u } => {
                let qubits: Vec<usize> = (0..n_u).collect();
                let (_, post) = state.measure(&qubits, rng).expect("qubits in range");
                OssRegister::Dense { state: post, n_u }
            }
            c @ OssRegister::Collapsed(_) => c,
        }
    } else {
        reg
    };
    let second = OssGameAccess { oracles: o, d_granted: grant_d };
    if adversary.guess(&second, y, reg, rng) == b {
        GameOutcome::Win
    } else {
        GameOutcome::Lose
    }
}

/// Honest token, random guess.
pub struct OssGuessingAdversary;

impl OssCollapseAdversary for OssGuessingAdversary {
    fn prepare(&mut self, access: &OssGameAccess, quantum: &QuantumAccess, rng: &mut dyn RngCore) -> (u64, OssRegister) {
        let t = access.gen(rng);
        (t.vk(), OssRegister::Symbolic(t.into_state(quantum)))
    }

    fn guess(&mut self, _access: &OssGameAccess, _y: u64, _reg: OssRegister, rng: &mut dyn RngCore) -> bool {
        rng.gen()
    }
}

/// Honest token; the second stage measures `U` in the Hadamard basis and
/// asks `D` whether the outcome lies in the dual.
pub struct OssDualTestAdversary;

impl OssCollapseAdversary for OssDualTestAdversary {
    fn prepare(&mut self, access: &OssGameAccess, quantum: &QuantumAccess, rng: &mut dyn RngCore) -> (u64, OssRegister) {
        let t = access.gen(rng);
        (t.vk(), OssRegister::Symbolic(t.into_state(quantum)))
    }

    fn guess(&mut self, access: &OssGameAccess, y: u64, reg: OssRegister, rng: &mut dyn RngCore) -> bool {
        let s = match reg {
            OssRegister::Symbolic(st) => st.measure_hadamard(rng),
            OssRegister::Collapsed(u) => Gf2Vector::truncated(u.len(), rng.gen()),
            OssRegister::Dense { mut state, n_u } => {
                let n = state.n_qubits();
                state.hadamard_all();
                Gf2Vector::truncated(n_u, state.measure_all(rng) >> (n - n_u))
            }
        };
        match access.d(y, &s) {
            Some(in_dual) => !in_dual,
            None => rng.gen(),
        }
    }
}

/// Exact success probability of [`OssDualTestAdversary`] for label `y`, from a
/// dense simulation of `|S_y>` and of its measured version.
pub fn oss_dual_test_success(o: &OssOracles, y: u64) -> f64 {
    let s: Gf2Coset = o.coset(y);
    let n = s.n();
    let psi = StateVector::from_coset(&s).expect("small n");
    let in_dual = |x: u64| o.d(y, &Gf2Vector::truncated(n, x));
    let p_dual_unmeasured: f64 = dense_x_distribution(&psi).iter().filter(|(x, _)| in_dual(**x)).map(|(_, p)| p).sum();
    let mut p_dual_measured = 0.0;
    for (x, p) in psi.probabilities().into_iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let basis = StateVector::basis(n, x as u64).expect("small n");
        let hits: f64 = dense_x_distribution(&basis).iter().filter(|(z, _)| in_dual(**z)).map(|(_, q)| q).sum();
        p_dual_measured += p * hits;
    }
    0.5 * p_dual_unmeasured + 0.5 * (1.0 - p_dual_measured)
}
