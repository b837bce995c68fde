//! Dense state-vector and density-matrix simulation.
//!
//! Qubit `q` of an `n`-qubit register is bit `n - 1 - q` of the basis index, the
//! same most-significant-first layout as [`crate::gf2::Gf2Vector`], so a coset
//! element's integer value is directly its amplitude index.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::gf2::{Gf2Coset, Gf2Vector};

pub const MAX_STATE_QUBITS: usize = 16;
pub const MAX_COSET_STATE_QUBITS: usize = 12;
pub const MAX_DENSITY_QUBITS: usize = 10;

const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("{got} qubits exceeds the limit of {limit}")]
    TooManyQubits { got: usize, limit: usize },
    #[error("amplitude vector of length {0} is not a power of two")]
    BadLength(usize),
    #[error("state has norm {0}, expected 1")]
    NotNormalized(f64),
    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("basis map is not a bijection")]
    NotBijective,
    #[error("matrix is not a valid density matrix: {0}")]
    InvalidDensity(String),
    #[error("outcome has zero probability")]
    ZeroProbability,
}

pub type Result<T> = std::result::Result<T, SimError>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// In-place normalised Walsh-Hadamard transform (H on every qubit).
pub fn hadamard_transform(amps: &mut [Complex64]) {
    let len = amps.len();
    debug_assert!(len.is_power_of_two());
    let mut h = 1;
    while h < len {
        for block in (0..len).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (amps[i], amps[i + h]);
                amps[i] = a + b;
                amps[i + h] = a - b;
            }
        }
        h *= 2;
    }
    let s = 1.0 / (len as f64).sqrt();
    for a in amps.iter_mut() {
        *a *= s;
    }
}

/// Single- and multi-qubit gates understood by [`StateVector::apply_gate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    H(usize),
    X(usize),
    Y(usize),
    Z(usize),
    S(usize),
    Sdg(usize),
    T(usize),
    Tdg(usize),
    Cx(usize, usize),
    Cz(usize, usize),
    Swap(usize, usize),
    Ccx(usize, usize, usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    fn check_n(n: usize) -> Result<()> {
        if n > MAX_STATE_QUBITS {
            Err(SimError::TooManyQubits { got: n, limit: MAX_STATE_QUBITS })
        } else {
            Ok(())
        }
    }

    pub fn basis(n: usize, index: u64) -> Result<Self> {
        Self::check_n(n)?;
        let mut amps = vec![ZERO; 1 << n];
        let i = usize::try_from(index).ok().filter(|&i| i < amps.len()).ok_or(SimError::BadLength(index as usize))?;
        amps[i] = ONE;
        Ok(Self { n, amps })
    }

    /// `|+>^n`.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::check_n(n)?;
        let a = Complex64::new(1.0 / ((1u64 << n) as f64).sqrt(), 0.0);
        Ok(Self { n, amps: vec![a; 1 << n] })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(SimError::BadLength(amps.len()));
        }
        let n = amps.len().trailing_zeros() as usize;
        Self::check_n(n)?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(SimError::NotNormalized(norm));
        }
        Ok(Self { n, amps })
    }

    /// Uniform superposition over the elements of a coset.
    pub fn from_coset(c: &Gf2Coset) -> Result<Self> {
        if c.n() > MAX_COSET_STATE_QUBITS {
            return Err(SimError::TooManyQubits { got: c.n(), limit: MAX_COSET_STATE_QUBITS });
        }
        let mut amps = vec![ZERO; 1 << c.n()];
        let a = Complex64::new(1.0 / (c.cardinality() as f64).sqrt(), 0.0);
        for v in c.members().expect("dimension bounded by n <= 12") {
            amps[v.bits() as usize] = a;
        }
        Ok(Self { n: c.n(), amps })
    }

    /// Tensor product `self (x) other`, `self` on the leading qubits.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Self::check_n(self.n + other.n)?;
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(Self { n: self.n + other.n, amps })
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: u64) -> Complex64 {
        self.amps[index as usize]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, q: usize) -> Result<usize> {
        if q >= self.n {
            Err(SimError::QubitOutOfRange { qubit: q, n: self.n })
        } else {
            Ok(1usize << (self.n - 1 - q))
        }
    }

    pub fn hadamard_all(&mut self) {
        hadamard_transform(&mut self.amps);
    }

    fn single(&mut self, q: usize, m: [[Complex64; 2]; 2]) -> Result<()> {
        let bit = self.check_qubit(q)?;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a, b) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[i | bit] = m[1][0] * a + m[1][1] * b;
            }
        }
        Ok(())
    }

    fn diag_phase(&mut self, q: usize, phase: Complex64) -> Result<()> {
        let bit = self.check_qubit(q)?;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & bit != 0 {
                *a *= phase;
            }
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, g: Gate) -> Result<()> {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let i = Complex64::new(0.0, 1.0);
        match g {
            Gate::H(q) => self.single(q, [[ONE * r, ONE * r], [ONE * r, -ONE * r]]),
            Gate::X(q) => self.single(q, [[ZERO, ONE], [ONE, ZERO]]),
            Gate::Y(q) => self.single(q, [[ZERO, -i], [i, ZERO]]),
            Gate::Z(q) => self.diag_phase(q, -ONE),
            Gate::S(q) => self.diag_phase(q, i),
            Gate::Sdg(q) => self.diag_phase(q, -i),
            Gate::T(q) => self.diag_phase(q, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)),
            Gate::Tdg(q) => self.diag_phase(q, Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)),
            Gate::Cx(c, t) => self.controlled_flip(&[c], t),
            Gate::Ccx(c1, c2, t) => self.controlled_flip(&[c1, c2], t),
            Gate::Cz(a, b) => {
                let (ba, bb) = (self.check_qubit(a)?, self.check_qubit(b)?);
                self.phase_oracle(|x| x as usize & ba != 0 && x as usize & bb != 0);
                Ok(())
            }
            Gate::Swap(a, b) => {
                let (ba, bb) = (self.check_qubit(a)?, self.check_qubit(b)?);
                if ba != bb {
                    for x in 0..self.amps.len() {
                        if x & ba != 0 && x & bb == 0 {
                            self.amps.swap(x, (x & !ba) | bb);
                        }
                    }
                }
                Ok(())
            }
        }
    }

    fn controlled_flip(&mut self, controls: &[usize], target: usize) -> Result<()> {
        let tb = self.check_qubit(target)?;
        let mut cm = 0usize;
        for &c in controls {
            let b = self.check_qubit(c)?;
            if b == tb {
                return Err(SimError::QubitOutOfRange { qubit: c, n: self.n });
            }
            cm |= b;
        }
        for x in 0..self.amps.len() {
            if x & cm == cm && x & tb == 0 {
                self.amps.swap(x, x | tb);
            }
        }
        Ok(())
    }

    /// Multiplies the amplitude of every basis state `x` with `pred(x)` by -1.
    pub fn phase_oracle<F: Fn(u64) -> bool>(&mut self, pred: F) {
        for (x, a) in self.amps.iter_mut().enumerate() {
            if pred(x as u64) {
                *a = -*a;
            }
        }
    }

    /// Applies the basis permutation `|x> -> |f(x)>`.
    pub fn apply_basis_map<F: Fn(u64) -> u64>(&mut self, f: F) -> Result<()> {
        let len = self.amps.len();
        let mut out = vec![ZERO; len];
        let mut hit = vec![false; len];
        for (x, a) in self.amps.iter().enumerate() {
            let y = f(x as u64) as usize;
            if y >= len || hit[y] {
                return Err(SimError::NotBijective);
            }
            hit[y] = true;
            out[y] = *a;
        }
        self.amps = out;
        Ok(())
    }

    /// Runs `f` on the half of the amplitudes where qubit 0 equals `value`,
    /// i.e. applies a gate controlled on the first qubit.
    pub fn controlled_on_first<F: FnOnce(&mut [Complex64])>(&mut self, value: bool, f: F) -> Result<()> {
        if self.n == 0 {
            return Err(SimError::QubitOutOfRange { qubit: 0, n: 0 });
        }
        let half = self.amps.len() / 2;
        let block = if value { &mut self.amps[half..] } else { &mut self.amps[..half] };
        f(block);
        Ok(())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn outcome_of(&self, x: usize, qubits: &[usize]) -> u64 {
        qubits.iter().fold(0u64, |acc, &q| (acc << 1) | ((x >> (self.n - 1 - q)) & 1) as u64)
    }

    /// Distribution of the listed qubits, packed first-listed-most-significant.
    pub fn marginal(&self, qubits: &[usize]) -> Result<BTreeMap<u64, f64>> {
        for &q in qubits {
            self.check_qubit(q)?;
        }
        let mut m = BTreeMap::new();
        for (x, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p > 0.0 {
                *m.entry(self.outcome_of(x, qubits)).or_insert(0.0) += p;
            }
        }
        Ok(m)
    }

    /// Projects the listed qubits onto `outcome`; returns the probability and
    /// the renormalised post-measurement state.
    pub fn project(&self, qubits: &[usize], outcome: u64) -> Result<(f64, Self)> {
        for &q in qubits {
            self.check_qubit(q)?;
        }
        let mut amps = self.amps.clone();
        for (x, a) in amps.iter_mut().enumerate() {
            if self.outcome_of(x, qubits) != outcome {
                *a = ZERO;
            }
        }
        let p: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if p <= 0.0 {
            return Err(SimError::ZeroProbability);
        }
        let s = 1.0 / p.sqrt();
        amps.iter_mut().for_each(|a| *a *= s);
        Ok((p, Self { n: self.n, amps }))
    }

    /// Standard-basis measurement of the listed qubits. An empty list is the
    /// identity with an empty outcome.
    pub fn measure<R: Rng + ?Sized>(&self, qubits: &[usize], rng: &mut R) -> Result<(Vec<bool>, Self)> {
        if qubits.is_empty() {
            return Ok((Vec::new(), self.clone()));
        }
        let marginal = self.marginal(qubits)?;
        let total: f64 = marginal.values().sum();
        let mut t = rng.gen::<f64>() * total;
        let mut chosen = *marginal.keys().next_back().expect("nonempty state");
        for (&o, &p) in &marginal {
            if t < p {
                chosen = o;
                break;
            }
            t -= p;
        }
        let (_, post) = self.project(qubits, chosen)?;
        let bits = (0..qubits.len()).map(|i| (chosen >> (qubits.len() - 1 - i)) & 1 == 1).collect();
        Ok((bits, post))
    }

    /// Full measurement returning the basis index.
    pub fn measure_all<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let mut t = rng.gen::<f64>() * self.norm_sqr();
        for (x, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if t < p {
                return x as u64;
            }
            t -= p;
        }
        (self.amps.len() - 1) as u64
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.n != other.n {
            return Err(SimError::DimensionMismatch(self.n, other.n));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|<self|other>|`.
    pub fn overlap(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    /// Equality up to global phase: `|<a|b>| >= 1 - tol`.
    pub fn approx_eq_up_to_phase(&self, other: &Self, tol: f64) -> bool {
        self.overlap(other).map(|o| o >= 1.0 - tol).unwrap_or(false)
    }

    /// Support of the state as GF(2) vectors.
    pub fn support(&self, tol: f64) -> Vec<Gf2Vector> {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > tol)
            .map(|(x, _)| Gf2Vector::truncated(self.n, x as u64))
            .collect()
    }
}

/// Density matrix on at most [`MAX_DENSITY_QUBITS`] qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    rho: DMatrix<Complex64>,
}

impl DensityMatrix {
    fn check_n(n: usize) -> Result<()> {
        if n > MAX_DENSITY_QUBITS {
            Err(SimError::TooManyQubits { got: n, limit: MAX_DENSITY_QUBITS })
        } else {
            Ok(())
        }
    }

    pub fn from_state(psi: &StateVector) -> Result<Self> {
        Self::check_n(psi.n)?;
        let v = nalgebra::DVector::from_column_slice(&psi.amps);
        Ok(Self { n: psi.n, rho: &v * v.adjoint() })
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        Self::check_n(n)?;
        let d = 1usize << n;
        Ok(Self { n, rho: DMatrix::identity(d, d) * Complex64::new(1.0 / d as f64, 0.0) })
    }

    /// Validates Hermiticity, unit trace and positivity (eigenvalues >= -1e-9).
    pub fn from_matrix(rho: DMatrix<Complex64>) -> Result<Self> {
        let d = rho.nrows();
        if d != rho.ncols() || !d.is_power_of_two() {
            return Err(SimError::BadLength(d));
        }
        let n = d.trailing_zeros() as usize;
        Self::check_n(n)?;
        let m = Self { n, rho };
        m.validate()?;
        Ok(m)
    }

    /// Wraps a matrix without validation; used for channel outputs and
    /// differences that are checked separately.
    pub fn from_matrix_unchecked(rho: DMatrix<Complex64>) -> Self {
        let n = rho.nrows().trailing_zeros() as usize;
        Self { n, rho }
    }

    pub fn validate(&self) -> Result<()> {
        let herm = (&self.rho - self.rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > 1e-9 {
            return Err(SimError::InvalidDensity(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(SimError::InvalidDensity(format!("trace {tr}")));
        }
        let min = hermitian_eigenvalues(&self.rho).into_iter().fold(f64::INFINITY, f64::min);
        if min < -1e-9 {
            return Err(SimError::InvalidDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.rho
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    /// `U rho U^dagger` for a unitary given as a dense matrix.
    pub fn conjugate(&self, u: &DMatrix<Complex64>) -> Result<Self> {
        if u.nrows() != self.rho.nrows() {
            return Err(SimError::DimensionMismatch(u.nrows(), self.rho.nrows()));
        }
        Ok(Self { n: self.n, rho: u * &self.rho * u.adjoint() })
    }

    /// Probability that measuring with projector `p` succeeds.
    pub fn expectation(&self, p: &DMatrix<Complex64>) -> f64 {
        (p * &self.rho).trace().re
    }
}

/// Real eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    nalgebra::SymmetricEigen::new(herm).eigenvalues.iter().copied().collect()
}

/// Half the trace norm of `a - b`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.n != b.n {
        return Err(SimError::DimensionMismatch(a.n, b.n));
    }
    let diff = &a.rho - &b.rho;
    Ok(0.5 * hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum::<f64>())
}

/// Optimal measurement for telling `a` from `b` with equal priors: the
/// projector onto the positive eigenspace of `a - b` (outcome "a"), and its
/// success probability `1/2 + TD/2`.
pub fn helstrom(a: &DensityMatrix, b: &DensityMatrix) -> Result<(f64, DMatrix<Complex64>)> {
    if a.n != b.n {
        return Err(SimError::DimensionMismatch(a.n, b.n));
    }
    let diff = &a.rho - &b.rho;
    let herm = (&diff + diff.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = nalgebra::SymmetricEigen::new(herm);
    let d = diff.nrows();
    let mut proj = DMatrix::<Complex64>::zeros(d, d);
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l > 1e-12 {
            let v = eig.eigenvectors.column(i);
            proj += v * v.adjoint();
        }
    }
    let td = 0.5 * eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>();
    Ok((0.5 + 0.5 * td, proj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn coset_state_of_shifted_zero_space() {
        let v = Gf2Vector::new(2, 0b10).unwrap();
        let s = Gf2Coset::from_generators(2, &[], v).unwrap();
        let psi = StateVector::from_coset(&s).unwrap();
        assert_eq!(psi, StateVector::basis(2, 2).unwrap());
    }

    #[test]
    fn hadamard_of_diagonal_is_its_dual() {
        let s = Gf2Coset::subspace(2, &[Gf2Vector::new(2, 0b11).unwrap()]).unwrap();
        let mut psi = StateVector::from_coset(&s).unwrap();
        psi.hadamard_all();
        let expect = StateVector::from_coset(&s.dual().unwrap()).unwrap();
        assert!(psi.approx_eq_up_to_phase(&expect, 1e-12));
    }

    #[test]
    fn gates_match_definitions() {
        let mut psi = StateVector::basis(2, 0).unwrap();
        psi.apply_gate(Gate::H(0)).unwrap();
        psi.apply_gate(Gate::Cx(0, 1)).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(psi.amplitudes(), &[c(r), c(0.0), c(0.0), c(r)]);
        let mut t = StateVector::basis(3, 0b110).unwrap();
        t.apply_gate(Gate::Ccx(0, 1, 2)).unwrap();
        assert_eq!(t, StateVector::basis(3, 0b111).unwrap());
        let mut sw = StateVector::basis(3, 0b100).unwrap();
        sw.apply_gate(Gate::Swap(0, 2)).unwrap();
        assert_eq!(sw, StateVector::basis(3, 0b001).unwrap());
        assert!(StateVector::basis(2, 0).unwrap().apply_gate(Gate::X(2)).is_err());
    }

    #[test]
    fn measurement_collapses() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let psi = StateVector::uniform(3).unwrap();
        let (bits, post) = psi.measure(&[0, 2], &mut rng).unwrap();
        let m = post.marginal(&[0, 2]).unwrap();
        let key = ((bits[0] as u64) << 1) | bits[1] as u64;
        assert!((m[&key] - 1.0).abs() < 1e-12);
        let (none, same) = psi.measure(&[], &mut rng).unwrap();
        assert!(none.is_empty());
        assert_eq!(same, psi);
    }

    #[test]
    fn unnormalised_input_rejected() {
        assert!(matches!(StateVector::from_amplitudes(vec![c(1.0), c(1.0)]), Err(SimError::NotNormalized(_))));
        assert!(StateVector::from_coset(&Gf2Coset::zero_space(13).unwrap()).is_err());
    }

    #[test]
    fn trace_distance_of_orthogonal_states_is_one() {
        let a = DensityMatrix::from_state(&StateVector::basis(1, 0).unwrap()).unwrap();
        let b = DensityMatrix::from_state(&StateVector::basis(1, 1).unwrap()).unwrap();
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        let (p, _) = helstrom(&a, &b).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_density_rejected() {
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 0)] = c(1.5);
        m[(1, 1)] = c(-0.5);
        assert!(DensityMatrix::from_matrix(m).is_err());
    }
}
