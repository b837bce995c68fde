//! The coset-projection channel `Phi_1`, the full-measurement channel `Phi_2`,
//! their distance on `|+><+|^n`, and the coset-collapsing game.
//!
//! Both channels act on a density matrix by entrywise scaling:
//! `Phi(rho)[x][x'] = w(x ^ x') rho[x][x']`, where `w(z)` is the probability
//! that `x` and `x'` land in the same projector. For `Phi_1` that is the
//! fraction of `k`-dimensional subspaces `T` containing `z`; for `Phi_2` it is
//! `[z = 0]`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::densesim::{hadamard_transform, helstrom, DensityMatrix, SimError, StateVector, MAX_DENSITY_QUBITS};
use crate::gf2::{all_subspaces, gaussian_binomial, sample_subspace, sample_subspace_within, Gf2Coset, Gf2Error, Gf2Vector};

/// Largest `n` for exact enumeration over all subspaces.
pub const MAX_EXACT_N: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CollapsingError {
    #[error("subspace dimension {k} exceeds {n}")]
    BadDimension { n: usize, k: usize },
    #[error("exact enumeration supports n <= {MAX_EXACT_N}, got {0}")]
    ExactTooLarge(usize),
    #[error("register of {register} qubits at offset {offset} does not fit a {total}-qubit state")]
    RegisterOutOfRange { register: usize, offset: usize, total: usize },
    #[error("Monte-Carlo mode needs at least one sample")]
    NoSamples,
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error(transparent)]
    Sim(#[from] SimError),
}

pub type Result<T> = std::result::Result<T, CollapsingError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ChannelMode {
    Exact,
    MonteCarlo { samples: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub n: usize,
    pub k: usize,
    pub mode: ChannelMode,
}

impl ChannelSpec {
    pub fn new(n: usize, k: usize, mode: ChannelMode) -> Result<Self> {
        let s = Self { n, k, mode };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k > self.n {
            return Err(CollapsingError::BadDimension { n: self.n, k: self.k });
        }
        match self.mode {
            ChannelMode::Exact if self.n > MAX_EXACT_N => Err(CollapsingError::ExactTooLarge(self.n)),
            ChannelMode::MonteCarlo { samples: 0 } => Err(CollapsingError::NoSamples),
            _ => Ok(()),
        }
    }

    /// Number of `k`-dimensional subspaces averaged over.
    pub fn subspace_count(&self) -> u128 {
        gaussian_binomial(self.n, self.k)
    }
}

/// A channel of the form `rho -> w(x ^ x') rho[x][x']` on an `n`-qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct SchurChannel {
    n: usize,
    weights: Vec<f64>,
}

impl SchurChannel {
    pub fn from_weights(n: usize, weights: Vec<f64>) -> Self {
        assert_eq!(weights.len(), 1 << n, "one weight per difference vector");
        Self { n, weights }
    }

    /// `Phi_2`.
    pub fn full_measurement(n: usize) -> Self {
        let mut weights = vec![0.0; 1 << n];
        weights[0] = 1.0;
        Self { n, weights }
    }

    pub fn identity(n: usize) -> Self {
        Self { n, weights: vec![1.0; 1 << n] }
    }

    /// `Phi_1` over subspaces of the linear subspace `ambient`: the average of
    /// coset projections for `T` uniform among `k`-dimensional subspaces of
    /// `ambient`. Exact mode enumerates every `T`; Monte-Carlo mode averages
    /// `samples` independent draws.
    pub fn coset_projection_within(ambient: &Gf2Coset, k: usize, mode: ChannelMode, rng: &mut dyn RngCore) -> Result<Self> {
        let n = ambient.n();
        let d = ambient.dim();
        if k > d {
            return Err(CollapsingError::BadDimension { n: d, k });
        }
        let mut counts = vec![0u64; 1 << n];
        let mut add = |t: &Gf2Coset| -> Result<()> {
            for z in t.members()? {
                counts[z.bits() as usize] += 1;
            }
            Ok(())
        };
        let total = match mode {
            ChannelMode::Exact => {
                if d > MAX_EXACT_N {
                    return Err(CollapsingError::ExactTooLarge(d));
                }
                let subspaces = all_subspaces(d, k)?;
                for coords in &subspaces {
                    add(&embed(ambient, coords)?)?;
                }
                subspaces.len() as u64
            }
            ChannelMode::MonteCarlo { samples } => {
                if samples == 0 {
                    return Err(CollapsingError::NoSamples);
                }
                for _ in 0..samples {
                    add(&sample_subspace_within(ambient, k, rng)?)?;
                }
                samples as u64
            }
        };
        Ok(Self { n, weights: counts.into_iter().map(|c| c as f64 / total as f64).collect() })
    }

    /// `Phi_1` on the whole space.
    pub fn coset_projection(spec: &ChannelSpec, rng: &mut dyn RngCore) -> Result<Self> {
        spec.validate()?;
        Self::coset_projection_within(&Gf2Coset::full_space(spec.n)?, spec.k, spec.mode, rng)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self, z: u64) -> f64 {
        self.weights[z as usize]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Applies the channel to the whole of `rho`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.apply_on(rho, 0)
    }

    /// Applies the channel to qubits `offset..offset + n` of `rho`.
    pub fn apply_on(&self, rho: &DensityMatrix, offset: usize) -> Result<DensityMatrix> {
        let total = rho.n_qubits();
        if offset + self.n > total {
            return Err(CollapsingError::RegisterOutOfRange { register: self.n, offset, total });
        }
        let shift = total - offset - self.n;
        let mask = (1usize << self.n) - 1;
        let m = rho.matrix();
        let out = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
            let z = ((i ^ j) >> shift) & mask;
            m[(i, j)] * self.weights[z]
        });
        Ok(DensityMatrix::from_matrix_unchecked(out))
    }
}

/// The subspace of `ambient` with coordinates in `coords` (w.r.t. its basis).
fn embed(ambient: &Gf2Coset, coords: &Gf2Coset) -> Result<Gf2Coset> {
    let gens: Vec<Gf2Vector> = coords
        .basis()
        .iter()
        .map(|c| {
            (0..ambient.dim()).filter(|&i| c.get(i)).fold(Gf2Vector::zero(ambient.n()), |acc, i| acc ^ ambient.basis()[i])
        })
        .collect();
    Ok(Gf2Coset::subspace(ambient.n(), &gens)?)
}

/// `Phi_1(rho)`.
pub fn phi1_apply(rho: &DensityMatrix, spec: &ChannelSpec, rng: &mut dyn RngCore) -> Result<DensityMatrix> {
    if rho.n_qubits() != spec.n {
        return Err(SimError::DimensionMismatch(spec.n, rho.n_qubits()).into());
    }
    SchurChannel::coset_projection(spec, rng)?.apply(rho)
}

/// `Phi_2(rho)`: drops every off-diagonal entry.
pub fn phi2_apply(rho: &DensityMatrix) -> DensityMatrix {
    SchurChannel::full_measurement(rho.n_qubits()).apply(rho).expect("register fits")
}

pub fn plus_density(n: usize) -> Result<DensityMatrix> {
    Ok(DensityMatrix::from_state(&StateVector::uniform(n)?)?)
}

/// `(alpha, beta)`: diagonal and off-diagonal entries of `Phi_1(|+><+|^n)`.
pub fn closed_form_entries(n: usize, k: usize) -> (f64, f64) {
    let d = (1u64 << n) as f64;
    (1.0 / d, ((1u64 << k) - 1) as f64 / (d * d - d))
}

/// `(2^k - 1) / 2^n`.
pub fn closed_form_distance(n: usize, k: usize) -> f64 {
    ((1u64 << k) - 1) as f64 / (1u64 << n) as f64
}

/// Half the trace norm of `Phi_1(|+><+|^n) - Phi_2(|+><+|^n)`.
///
/// For `n <= 4` both channel outputs are built by enumeration and the distance
/// comes from an eigendecomposition. Up to `n = 10` the weights come from
/// counting subspaces through a fixed vector and the spectrum of the
/// difference (a function of `x ^ x'`) from a Walsh-Hadamard transform.
pub fn plus_state_distance(n: usize, k: usize) -> Result<f64> {
    if k > n {
        return Err(CollapsingError::BadDimension { n, k });
    }
    if n <= MAX_EXACT_N {
        let spec = ChannelSpec::new(n, k, ChannelMode::Exact)?;
        let plus = plus_density(n)?;
        let a = phi1_apply(&plus, &spec, &mut rand::rngs::mock::StepRng::new(0, 0))?;
        return Ok(crate::densesim::trace_distance(&a, &phi2_apply(&plus))?);
    }
    if n > MAX_DENSITY_QUBITS {
        return Err(SimError::TooManyQubits { got: n, limit: MAX_DENSITY_QUBITS }.into());
    }
    let through = if k == 0 { 0.0 } else { gaussian_binomial(n - 1, k - 1) as f64 / gaussian_binomial(n, k) as f64 };
    let d = 1usize << n;
    let mut diff: Vec<Complex64> = (0..d).map(|z| Complex64::new(if z == 0 { 0.0 } else { through / d as f64 }, 0.0)).collect();
    hadamard_transform(&mut diff);
    // `hadamard_transform` is normalised; the group-matrix spectrum is the
    // unnormalised transform.
    let scale = (d as f64).sqrt();
    Ok(0.5 * diff.iter().map(|l| (l.re * scale).abs()).sum::<f64>())
}

/// Monte-Carlo estimate of the off-diagonal entry and the resulting distance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub samples: usize,
    /// Fraction of draws `(T, x, x')`, `x != x'`, with `x ^ x'` in `T`.
    pub hit_rate: f64,
    pub beta: f64,
    pub distance: f64,
    pub stderr: f64,
}

/// Estimates `beta` from `samples` independent `(T, x, x')` draws, rebuilds
/// `Phi_1(|+><+|^n)` from it, and reads the distance off the spectrum of the
/// difference.
pub fn mc_plus_state_distance(n: usize, k: usize, samples: usize, rng: &mut dyn RngCore) -> Result<McEstimate> {
    if k > n || n == 0 {
        return Err(CollapsingError::BadDimension { n, k });
    }
    if samples == 0 {
        return Err(CollapsingError::NoSamples);
    }
    let d = (1u64 << n) as f64;
    let mut hits = 0usize;
    for _ in 0..samples {
        let t = sample_subspace(n, k, rng)?;
        let x = rng.gen_range(0..1u64 << n);
        let x2 = loop {
            let c = rng.gen_range(0..1u64 << n);
            if c != x {
                break c;
            }
        };
        if t.contains(&Gf2Vector::truncated(n, x ^ x2)) {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    let beta = p / d;
    // Spectrum of beta (J - I): beta (d - 1) once and -beta with multiplicity d - 1.
    let distance = 0.5 * (beta * (d - 1.0) + beta * (d - 1.0));
    let stderr = (d - 1.0) / d * (p * (1.0 - p) / samples as f64).sqrt();
    Ok(McEstimate { samples, hit_rate: p, beta, distance, stderr })
}

// ---- Coset-collapsing game -------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GameVariant {
    Plain,
    /// The first stage may query membership in `T^perp` for the same `T` the
    /// challenger projects with.
    DualAccess,
}

/// Membership oracle handed to the first stage in the dual-access variant.
pub type DualOracle<'a> = &'a dyn Fn(&Gf2Vector) -> bool;

/// A two-stage adversary. The prepared state's leading `n` qubits are the
/// challenged register `U`; the rest are kept as `R`.
pub trait CosetCollapsingAdversary {
    fn prepare(&mut self, s: &Gf2Coset, dual: Option<DualOracle>, rng: &mut dyn RngCore) -> StateVector;
    fn guess(&mut self, s: &Gf2Coset, state: StateVector, rng: &mut dyn RngCore) -> bool;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapsingRun {
    pub b: bool,
    pub guess: Option<bool>,
    pub subspace_check_passed: bool,
}

impl CollapsingRun {
    /// A failed subspace check is a loss.
    pub fn win(&self) -> bool {
        self.subspace_check_passed && self.guess == Some(self.b)
    }
}

/// Projective measurement with outcome `label(U)`; returns the post-state.
fn measure_label<F: Fn(u64) -> u64, R: Rng + ?Sized>(psi: &StateVector, n_u: usize, label: F, rng: &mut R) -> StateVector {
    let total = psi.n_qubits();
    let amps = psi.amplitudes();
    let mut t = rng.gen::<f64>() * psi.norm_sqr();
    let mut chosen = None;
    for (x, a) in amps.iter().enumerate() {
        let p = a.norm_sqr();
        if p > 0.0 {
            chosen = Some(x);
            if t < p {
                break;
            }
            t -= p;
        }
    }
    let target = label((chosen.expect("nonzero state") as u64) >> (total - n_u));
    let kept: Vec<Complex64> = amps
        .iter()
        .enumerate()
        .map(|(x, a)| if label((x as u64) >> (total - n_u)) == target { *a } else { Complex64::new(0.0, 0.0) })
        .collect();
    let norm = kept.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(kept.into_iter().map(|a| a / norm).collect()).expect("renormalised")
}

/// One run of the game with public subspace `s` and projection subspaces of
/// dimension `k`.
pub fn run_coset_collapsing_game<A: CosetCollapsingAdversary + ?Sized, R: Rng>(
    s: &Gf2Coset,
    k: usize,
    adversary: &mut A,
    variant: GameVariant,
    rng: &mut R,
) -> Result<CollapsingRun> {
    if !s.is_subspace() {
        return Err(Gf2Error::NotASubspace.into());
    }
    let n = s.n();
    let t_early = match variant {
        GameVariant::DualAccess => Some(sample_subspace_within(s, k, rng)?),
        GameVariant::Plain => None,
    };
    let psi = match &t_early {
        Some(t) => {
            let t_perp = t.dual()?;
            let oracle = move |v: &Gf2Vector| t_perp.contains(v);
            adversary.prepare(s, Some(&oracle), rng)
        }
        None => adversary.prepare(s, None, rng),
    };
    if psi.n_qubits() < n {
        return Err(CollapsingError::RegisterOutOfRange { register: n, offset: 0, total: psi.n_qubits() });
    }
    let t = match t_early {
        Some(t) => t,
        None => sample_subspace_within(s, k, rng)?,
    };
    let b = rng.gen::<bool>();

    // Subspace check as a two-outcome measurement.
    let in_s = |u: u64| u64::from(s.contains(&Gf2Vector::truncated(n, u)));
    let psi = measure_label(&psi, n, in_s, rng);
    let total = psi.n_qubits();
    let passed = psi.amplitudes().iter().enumerate().any(|(x, a)| a.norm_sqr() > 0.0 && in_s((x as u64) >> (total - n)) == 1);
    if !passed {
        return Ok(CollapsingRun { b, guess: None, subspace_check_passed: false });
    }
    let psi = measure_label(&psi, n, |u| t.reduce(&Gf2Vector::truncated(n, u)).bits(), rng);
    let psi = if b { measure_label(&psi, n, |u| u, rng) } else { psi };
    let guess = adversary.guess(s, psi, rng);
    Ok(CollapsingRun { b, guess: Some(guess), subspace_check_passed: true })
}

/// Prepares `|S>` and guesses at random.
pub struct GuessingCollapser;

impl CosetCollapsingAdversary for GuessingCollapser {
    fn prepare(&mut self, s: &Gf2Coset, _dual: Option<DualOracle>, _rng: &mut dyn RngCore) -> StateVector {
        StateVector::from_coset(s).expect("small n")
    }

    fn guess(&mut self, _s: &Gf2Coset, _state: StateVector, rng: &mut dyn RngCore) -> bool {
        rng.gen()
    }
}

/// Submits a basis state outside `S`.
pub struct OutsideCollapser;

impl CosetCollapsingAdversary for OutsideCollapser {
    fn prepare(&mut self, s: &Gf2Coset, _dual: Option<DualOracle>, _rng: &mut dyn RngCore) -> StateVector {
        let n = s.n();
        let x = (0..1u64 << n).find(|&x| !s.contains(&Gf2Vector::truncated(n, x))).expect("proper subspace");
        StateVector::basis(n, x).expect("small n")
    }

    fn guess(&mut self, _s: &Gf2Coset, _state: StateVector, _rng: &mut dyn RngCore) -> bool {
        false
    }
}

/// Optimal measurement against the averaged channels. Prepares `|S>`, or with
/// `entangled` the maximally entangled state `sum_{s in S} |s>|s>`, and
/// measures the Helstrom projector separating the unmeasured branch from the
/// measured one.
pub struct HelstromCollapser {
    pub k: usize,
    pub entangled: bool,
    cached: Option<(Gf2Coset, DMatrix<Complex64>, f64)>,
}

impl HelstromCollapser {
    pub fn new(k: usize, entangled: bool) -> Self {
        Self { k, entangled, cached: None }
    }

    fn input(&self, s: &Gf2Coset) -> Result<StateVector> {
        let u = StateVector::from_coset(s)?;
        if !self.entangled {
            return Ok(u);
        }
        let n = s.n();
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << (2 * n)];
        for (x, a) in u.amplitudes().iter().enumerate() {
            amps[(x << n) | x] = *a;
        }
        Ok(StateVector::from_amplitudes(amps)?)
    }

    /// Projector onto the "unmeasured" outcome and its success probability.
    pub fn measurement(&mut self, s: &Gf2Coset) -> Result<(DMatrix<Complex64>, f64)> {
        if let Some((cs, p, w)) = &self.cached {
            if cs == s {
                return Ok((p.clone(), *w));
            }
        }
        let rho = DensityMatrix::from_state(&self.input(s)?)?;
        let phi1 = SchurChannel::coset_projection_within(s, self.k, ChannelMode::Exact, &mut rand::rngs::mock::StepRng::new(0, 0))?;
        let unmeasured = phi1.apply_on(&rho, 0)?;
        let measured = SchurChannel::full_measurement(s.n()).apply_on(&rho, 0)?;
        let (win, proj) = helstrom(&unmeasured, &measured)?;
        self.cached = Some((s.clone(), proj.clone(), win));
        Ok((proj, win))
    }

    /// Exact win probability of this adversary.
    pub fn win_probability(&mut self, s: &Gf2Coset) -> Result<f64> {
        Ok(self.measurement(s)?.1)
    }
}

impl CosetCollapsingAdversary for HelstromCollapser {
    fn prepare(&mut self, s: &Gf2Coset, _dual: Option<DualOracle>, _rng: &mut dyn RngCore) -> StateVector {
        self.input(s).expect("small n")
    }

    fn guess(&mut self, s: &Gf2Coset, state: StateVector, rng: &mut dyn RngCore) -> bool {
        let (proj, _) = self.measurement(s).expect("small n");
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        let p_unmeasured = (v.adjoint() * &proj * &v)[(0, 0)].re;
        // Outcome "unmeasured" means guess b = 0.
        rng.gen::<f64>() >= p_unmeasured
    }
}

/// Uses the `T^perp` oracle by exhaustive classical queries to learn `T`, then
/// submits `|T>` and tests the returned register for membership of its
/// Hadamard transform in `T^perp`. Exhaustive queries are affordable only at
/// toy sizes, which is why the dual-access variant is not information
/// theoretically hiding there.
pub struct DualLearningCollapser {
    learned: Option<Gf2Coset>,
}

impl DualLearningCollapser {
    pub fn new() -> Self {
        Self { learned: None }
    }

    /// Exact win probability with `T` of dimension `k`: the unmeasured branch
    /// always passes, the measured one passes with probability `2^-k`.
    pub fn win_probability(k: usize) -> f64 {
        0.5 + 0.5 * (1.0 - 1.0 / (1u64 << k) as f64)
    }
}

impl Default for DualLearningCollapser {
    fn default() -> Self {
        Self::new()
    }
}

impl CosetCollapsingAdversary for DualLearningCollapser {
    fn prepare(&mut self, s: &Gf2Coset, dual: Option<DualOracle>, _rng: &mut dyn RngCore) -> StateVector {
        let n = s.n();
        let t = match dual {
            Some(oracle) => {
                let perp: Vec<Gf2Vector> = (0..1u64 << n).map(|x| Gf2Vector::truncated(n, x)).filter(|v| oracle(v)).collect();
                Gf2Coset::from_generators(n, &perp, Gf2Vector::zero(n)).and_then(|tp| tp.dual()).expect("oracle is a subspace")
            }
            None => s.clone(),
        };
        let psi = StateVector::from_coset(&t).expect("small n");
        self.learned = Some(t);
        psi
    }

    fn guess(&mut self, s: &Gf2Coset, state: StateVector, rng: &mut dyn RngCore) -> bool {
        let n = s.n();
        let t = self.learned.take().expect("prepare ran");
        let mut st = state;
        st.hadamard_all();
        let total = st.n_qubits();
        let z = st.measure_all(rng) >> (total - n);
        !t.dual().expect("subspace").contains(&Gf2Vector::truncated(n, z))
    }
}
