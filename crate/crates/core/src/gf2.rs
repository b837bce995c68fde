//! Bit-packed linear algebra over GF(2).
//!
//! Coordinates are numbered from 0 and stored most-significant first: coordinate
//! `i` of a length-`n` vector lives in bit `n - 1 - i`. With that layout the
//! integer value of a vector is its computational-basis index and numeric order
//! is lexicographic order.
//!
//! Subspace bases are kept in reduced row-echelon form (pivot = first nonzero
//! coordinate), and coset shifts are reduced against the basis, so two cosets are
//! equal exactly when their stored representations are equal.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 64;

/// Largest dimension we are willing to enumerate element by element.
pub const MAX_ENUM_DIM: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("dimension {0} exceeds the supported maximum of {MAX_DIM}")]
    DimensionTooLarge(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("value {bits:#x} does not fit in {len} bits")]
    Overflow { len: usize, bits: u64 },
    #[error("basis vectors are linearly dependent")]
    DependentBasis,
    #[error("operation requires a linear subspace, got a proper coset")]
    NotASubspace,
    #[error("subspace is not contained in the ambient subspace")]
    NotContained,
    #[error("no {k}-dimensional subspace exists inside a {n}-dimensional space")]
    InvalidSubspaceDim { n: usize, k: usize },
    #[error("refusing to enumerate 2^{0} elements")]
    TooLarge(usize),
    #[error("malformed coset text: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Gf2Error>;

#[inline]
fn mask(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n > MAX_DIM {
        Err(Gf2Error::DimensionTooLarge(n))
    } else {
        Ok(())
    }
}

/// A vector in GF(2)^n, n <= 64.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawVector", into = "RawVector")]
pub struct Gf2Vector {
    len: u8,
    bits: u64,
}

#[derive(Serialize, Deserialize)]
struct RawVector {
    len: usize,
    bits: u64,
}

impl TryFrom<RawVector> for Gf2Vector {
    type Error = Gf2Error;
    fn try_from(r: RawVector) -> Result<Self> {
        Gf2Vector::new(r.len, r.bits)
    }
}

impl From<Gf2Vector> for RawVector {
    fn from(v: Gf2Vector) -> Self {
        RawVector { len: v.len(), bits: v.bits }
    }
}

impl Gf2Vector {
    pub fn new(len: usize, bits: u64) -> Result<Self> {
        check_dim(len)?;
        if bits & !mask(len) != 0 {
            return Err(Gf2Error::Overflow { len, bits });
        }
        Ok(Self { len: len as u8, bits })
    }

    /// Builds a vector, silently dropping bits above `len`.
    pub fn truncated(len: usize, bits: u64) -> Self {
        assert!(len <= MAX_DIM, "dimension {len} too large");
        Self { len: len as u8, bits: bits & mask(len) }
    }

    pub fn zero(len: usize) -> Self {
        Self::truncated(len, 0)
    }

    /// The `i`-th standard basis vector.
    pub fn unit(len: usize, i: usize) -> Self {
        assert!(i < len, "coordinate {i} out of range for length {len}");
        Self::truncated(len, 1u64 << (len - 1 - i))
    }

    pub fn from_bools(coords: &[bool]) -> Result<Self> {
        check_dim(coords.len())?;
        let bits = coords.iter().fold(0u64, |acc, &c| (acc << 1) | c as u64);
        Ok(Self { len: coords.len() as u8, bits })
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len(), "coordinate {i} out of range");
        (self.bits >> (self.len() - 1 - i)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len(), "coordinate {i} out of range");
        let b = 1u64 << (self.len() - 1 - i);
        if value {
            self.bits |= b;
        } else {
            self.bits &= !b;
        }
    }

    pub fn flip(&mut self, i: usize) {
        let v = self.get(i);
        self.set(i, !v);
    }

    /// First coordinate of the vector, the bit a one-shot signature signs with.
    #[inline]
    pub fn first(&self) -> bool {
        self.get(0)
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn dot(&self, other: &Self) -> bool {
        debug_assert_eq!(self.len, other.len);
        (self.bits & other.bits).count_ones() & 1 == 1
    }

    /// Index of the first nonzero coordinate.
    pub fn leading_coordinate(&self) -> Option<usize> {
        if self.bits == 0 {
            None
        } else {
            let top = 63 - self.bits.leading_zeros() as usize;
            Some(self.len() - 1 - top)
        }
    }

    pub fn to_hex(&self) -> String {
        let width = self.len().div_ceil(4).max(1);
        format!("{:0width$x}", self.bits, width = width)
    }

    /// Concatenation `self || other`.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        let len = self.len() + other.len();
        check_dim(len)?;
        let hi = if other.len() == 64 { 0 } else { self.bits << other.len() };
        Ok(Self { len: len as u8, bits: hi | other.bits })
    }

    /// Coordinates `[start, start + len)` as a new vector.
    pub fn slice(&self, start: usize, len: usize) -> Self {
        assert!(start + len <= self.len(), "slice out of range");
        let shift = self.len() - start - len;
        Self::truncated(len, self.bits >> shift)
    }
}

impl std::ops::BitXor for Gf2Vector {
    type Output = Gf2Vector;
    fn bitxor(self, rhs: Self) -> Self {
        debug_assert_eq!(self.len, rhs.len, "length mismatch in xor");
        Self { len: self.len, bits: self.bits ^ rhs.bits }
    }
}

impl std::ops::BitXorAssign for Gf2Vector {
    fn bitxor_assign(&mut self, rhs: Self) {
        debug_assert_eq!(self.len, rhs.len, "length mismatch in xor");
        self.bits ^= rhs.bits;
    }
}

impl fmt::Display for Gf2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A dense matrix over GF(2) with at most 64 rows and 64 columns.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        check_dim(rows)?;
        check_dim(cols)?;
        Ok(Self { rows, cols, data: vec![0; rows] })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.set(i, i, true);
        }
        Ok(m)
    }

    pub fn from_rows(cols: usize, rows: &[Gf2Vector]) -> Result<Self> {
        let mut m = Self::zeros(rows.len(), cols)?;
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Gf2Error::DimensionMismatch { expected: cols, got: r.len() });
            }
            m.data[i] = r.bits;
        }
        Ok(m)
    }

    pub fn from_columns(rows: usize, columns: &[Gf2Vector]) -> Result<Self> {
        let mut m = Self::zeros(rows, columns.len())?;
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Gf2Error::DimensionMismatch { expected: rows, got: c.len() });
            }
            for i in 0..rows {
                if c.get(i) {
                    m.set(i, j, true);
                }
            }
        }
        Ok(m)
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<Self> {
        let mut m = Self::zeros(rows, cols)?;
        for r in m.data.iter_mut() {
            *r = rng.gen::<u64>() & mask(cols);
        }
        Ok(m)
    }

    /// Uniformly random matrix of full column rank (rejection sampling).
    pub fn random_full_column_rank<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<Self> {
        if cols > rows {
            return Err(Gf2Error::InvalidSubspaceDim { n: rows, k: cols });
        }
        loop {
            let m = Self::random(rows, cols, rng)?;
            if m.rank() == cols {
                return Ok(m);
            }
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(i < self.rows && j < self.cols, "index out of range");
        (self.data[i] >> (self.cols - 1 - j)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        assert!(i < self.rows && j < self.cols, "index out of range");
        let b = 1u64 << (self.cols - 1 - j);
        if value {
            self.data[i] |= b;
        } else {
            self.data[i] &= !b;
        }
    }

    pub fn row(&self, i: usize) -> Gf2Vector {
        Gf2Vector::truncated(self.cols, self.data[i])
    }

    pub fn column(&self, j: usize) -> Gf2Vector {
        let mut v = Gf2Vector::zero(self.rows);
        for i in 0..self.rows {
            if self.get(i, j) {
                v.set(i, true);
            }
        }
        v
    }

    pub fn columns(&self) -> Vec<Gf2Vector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &Gf2Vector) -> Result<Gf2Vector> {
        if x.len() != self.cols {
            return Err(Gf2Error::DimensionMismatch { expected: self.cols, got: x.len() });
        }
        let mut out = 0u64;
        for &r in &self.data {
            out = (out << 1) | ((r & x.bits).count_ones() & 1) as u64;
        }
        Ok(Gf2Vector::truncated(self.rows, out))
    }

    /// `v^T A`.
    pub fn left_mul_vec(&self, v: &Gf2Vector) -> Result<Gf2Vector> {
        if v.len() != self.rows {
            return Err(Gf2Error::DimensionMismatch { expected: self.rows, got: v.len() });
        }
        let mut out = 0u64;
        for i in 0..self.rows {
            if v.get(i) {
                out ^= self.data[i];
            }
        }
        Ok(Gf2Vector::truncated(self.cols, out))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self { rows: self.cols, cols: self.rows, data: vec![0; self.cols] };
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    t.set(j, i, true);
                }
            }
        }
        t
    }

    pub fn rank(&self) -> usize {
        rref_rows(self.cols, self.data.clone()).0.len()
    }

    /// Reduced row-echelon form with zero rows dropped, plus the pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let (rows, pivots) = rref_rows(self.cols, self.data.clone());
        (Self { rows: rows.len(), cols: self.cols, data: rows }, pivots)
    }
}

/// Gauss-Jordan elimination on packed rows of width `width`. Returns the
/// nonzero reduced rows ordered by pivot and the pivot coordinates.
fn rref_rows(width: usize, mut rows: Vec<u64>) -> (Vec<u64>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..width {
        let bit = 1u64 << (width - 1 - col);
        let Some(p) = (top..rows.len()).find(|&i| rows[i] & bit != 0) else {
            continue;
        };
        rows.swap(top, p);
        let pr = rows[top];
        for (i, r) in rows.iter_mut().enumerate() {
            if i != top && *r & bit != 0 {
                *r ^= pr;
            }
        }
        pivots.push(col);
        top += 1;
        if top == rows.len() {
            break;
        }
    }
    rows.truncate(top);
    (rows, pivots)
}

/// Solves `A z = u + b`. Returns `None` when no solution exists; when `A` lacks
/// full column rank the free coordinates are set to zero.
pub fn solve_affine(a: &Gf2Matrix, b: &Gf2Vector, u: &Gf2Vector) -> Result<Option<Gf2Vector>> {
    if b.len() != a.rows || u.len() != a.rows {
        return Err(Gf2Error::DimensionMismatch { expected: a.rows, got: u.len().max(b.len()) });
    }
    let target = *u ^ *b;
    let cols = a.cols;
    // Augmented rows: matrix bits shifted left by one, target in bit 0.
    let mut rows: Vec<u128> = (0..a.rows)
        .map(|i| ((a.data[i] as u128) << 1) | target.get(i) as u128)
        .collect();
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..cols {
        let bit = 1u128 << (cols - col);
        let Some(p) = (top..rows.len()).find(|&i| rows[i] & bit != 0) else {
            continue;
        };
        rows.swap(top, p);
        let pr = rows[top];
        for (i, r) in rows.iter_mut().enumerate() {
            if i != top && *r & bit != 0 {
                *r ^= pr;
            }
        }
        pivots.push(col);
        top += 1;
    }
    if rows[top..].iter().any(|r| r & 1 == 1) {
        return Ok(None);
    }
    let mut z = Gf2Vector::zero(cols);
    for (i, &col) in pivots.iter().enumerate() {
        if rows[i] & 1 == 1 {
            z.set(col, true);
        }
    }
    Ok(Some(z))
}

/// An affine subspace `span(basis) + shift` of GF(2)^n in canonical form.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Gf2Coset {
    n: usize,
    basis: Vec<Gf2Vector>,
    shift: Gf2Vector,
}

impl Gf2Coset {
    /// Coset with a basis that must be linearly independent.
    pub fn from_basis(n: usize, basis: &[Gf2Vector], shift: Gf2Vector) -> Result<Self> {
        let c = Self::from_generators(n, basis, shift)?;
        if c.dim() != basis.len() {
            return Err(Gf2Error::DependentBasis);
        }
        Ok(c)
    }

    /// Coset spanned by arbitrary (possibly dependent) generators.
    pub fn from_generators(n: usize, generators: &[Gf2Vector], shift: Gf2Vector) -> Result<Self> {
        check_dim(n)?;
        for g in generators.iter().chain(std::iter::once(&shift)) {
            if g.len() != n {
                return Err(Gf2Error::DimensionMismatch { expected: n, got: g.len() });
            }
        }
        let (rows, _) = rref_rows(n, generators.iter().map(|g| g.bits).collect());
        let basis: Vec<Gf2Vector> = rows.into_iter().map(|r| Gf2Vector::truncated(n, r)).collect();
        let mut c = Self { n, basis, shift: Gf2Vector::zero(n) };
        c.shift = c.reduce(&shift);
        Ok(c)
    }

    pub fn subspace(n: usize, generators: &[Gf2Vector]) -> Result<Self> {
        Self::from_generators(n, generators, Gf2Vector::zero(n))
    }

    /// `{0}` inside GF(2)^n.
    pub fn zero_space(n: usize) -> Result<Self> {
        Self::subspace(n, &[])
    }

    pub fn full_space(n: usize) -> Result<Self> {
        let gens: Vec<_> = (0..n).map(|i| Gf2Vector::unit(n, i)).collect();
        Self::subspace(n, &gens)
    }

    /// `{A x + b : x}` for a matrix `A` acting on column vectors.
    pub fn from_affine_map(a: &Gf2Matrix, b: &Gf2Vector) -> Result<Self> {
        Self::from_generators(a.rows(), &a.columns(), *b)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Basis rows in reduced row-echelon form.
    pub fn basis(&self) -> &[Gf2Vector] {
        &self.basis
    }

    /// Lexicographically smallest element of the coset.
    pub fn shift(&self) -> Gf2Vector {
        self.shift
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.basis.iter().map(|b| b.leading_coordinate().expect("basis rows are nonzero")).collect()
    }

    pub fn is_subspace(&self) -> bool {
        self.shift.is_zero()
    }

    pub fn linear_part(&self) -> Self {
        Self { n: self.n, basis: self.basis.clone(), shift: Gf2Vector::zero(self.n) }
    }

    pub fn cardinality(&self) -> u128 {
        1u128 << self.dim()
    }

    /// Canonical representative of `v + span(basis)`.
    pub fn reduce(&self, v: &Gf2Vector) -> Gf2Vector {
        let mut out = *v;
        for b in &self.basis {
            let p = b.leading_coordinate().expect("basis rows are nonzero");
            if out.get(p) {
                out ^= *b;
            }
        }
        out
    }

    pub fn contains(&self, v: &Gf2Vector) -> bool {
        v.len() == self.n && self.reduce(&(*v ^ self.shift)).is_zero()
    }

    /// Whether every element of `other` lies in `self`.
    pub fn contains_coset(&self, other: &Self) -> bool {
        other.n == self.n
            && self.contains(&other.shift)
            && other.basis.iter().all(|b| self.reduce(b).is_zero())
    }

    pub fn translate(&self, v: &Gf2Vector) -> Result<Self> {
        Self::from_generators(self.n, &self.basis, self.shift ^ *v)
    }

    /// The element selected by `coeffs`: bit `i` of `coeffs` (least significant
    /// first) picks basis row `i`.
    pub fn element(&self, coeffs: u64) -> Gf2Vector {
        let mut v = self.shift;
        for (i, b) in self.basis.iter().enumerate() {
            if (coeffs >> i) & 1 == 1 {
                v ^= *b;
            }
        }
        v
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Gf2Vector {
        let coeffs = rng.gen::<u64>() & mask(self.dim());
        self.element(coeffs)
    }

    /// All elements in increasing order.
    pub fn members(&self) -> Result<Vec<Gf2Vector>> {
        if self.dim() > MAX_ENUM_DIM {
            return Err(Gf2Error::TooLarge(self.dim()));
        }
        let mut out: Vec<_> = (0..1u64 << self.dim()).map(|c| self.element(c)).collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Orthogonal complement of a linear subspace.
    pub fn dual(&self) -> Result<Self> {
        if !self.is_subspace() {
            return Err(Gf2Error::NotASubspace);
        }
        let pivots = self.pivots();
        let mut gens = Vec::with_capacity(self.n - self.dim());
        for f in (0..self.n).filter(|c| !pivots.contains(c)) {
            let mut x = Gf2Vector::unit(self.n, f);
            for (row, &p) in self.basis.iter().zip(&pivots) {
                if row.get(f) {
                    x.set(p, true);
                }
            }
            gens.push(x);
        }
        Self::subspace(self.n, &gens)
    }

    /// Text form `n=<n>;basis=<hex rows, comma separated>;shift=<hex>`.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Gf2Coset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.basis.iter().map(|b| b.to_hex()).collect();
        write!(f, "n={};basis={};shift={}", self.n, rows.join(","), self.shift.to_hex())
    }
}

impl FromStr for Gf2Coset {
    type Err = Gf2Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |what: &str| Gf2Error::Parse(format!("{what} in {s:?}"));
        let mut parts = s.split(';');
        let n_part = parts.next().ok_or_else(|| bad("missing n"))?;
        let basis_part = parts.next().ok_or_else(|| bad("missing basis"))?;
        let shift_part = parts.next().ok_or_else(|| bad("missing shift"))?;
        if parts.next().is_some() {
            return Err(bad("trailing fields"));
        }
        let n: usize = n_part
            .strip_prefix("n=")
            .ok_or_else(|| bad("expected n="))?
            .parse()
            .map_err(|_| bad("bad n"))?;
        check_dim(n)?;
        let parse_vec = |h: &str| -> Result<Gf2Vector> {
            let bits = u64::from_str_radix(h, 16).map_err(|_| bad("bad hex"))?;
            Gf2Vector::new(n, bits)
        };
        let basis_hex = basis_part.strip_prefix("basis=").ok_or_else(|| bad("expected basis="))?;
        let basis = if basis_hex.is_empty() {
            Vec::new()
        } else {
            basis_hex.split(',').map(parse_vec).collect::<Result<Vec<_>>>()?
        };
        let shift = parse_vec(shift_part.strip_prefix("shift=").ok_or_else(|| bad("expected shift="))?)?;
        Gf2Coset::from_basis(n, &basis, shift)
    }
}

/// Uniform `k`-dimensional subspace of GF(2)^n.
pub fn sample_subspace<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Gf2Coset> {
    if k > n {
        return Err(Gf2Error::InvalidSubspaceDim { n, k });
    }
    let m = Gf2Matrix::random_full_column_rank(n, k, rng)?;
    Gf2Coset::subspace(n, &m.columns())
}

/// Uniform `k`-dimensional subspace of the linear subspace `ambient`.
pub fn sample_subspace_within<R: Rng + ?Sized>(ambient: &Gf2Coset, k: usize, rng: &mut R) -> Result<Gf2Coset> {
    if !ambient.is_subspace() {
        return Err(Gf2Error::NotASubspace);
    }
    let d = ambient.dim();
    if k > d {
        return Err(Gf2Error::InvalidSubspaceDim { n: d, k });
    }
    let coeffs = Gf2Matrix::random_full_column_rank(d, k, rng)?;
    let gens: Vec<_> = coeffs
        .columns()
        .iter()
        .map(|c| {
            let mut v = Gf2Vector::zero(ambient.n());
            for i in 0..d {
                if c.get(i) {
                    v ^= ambient.basis()[i];
                }
            }
            v
        })
        .collect();
    Gf2Coset::subspace(ambient.n(), &gens)
}

/// Lexicographically smallest representative of every coset of `t` inside
/// `ambient`, in increasing order.
pub fn coset_representatives(t: &Gf2Coset, ambient: &Gf2Coset) -> Result<Vec<Gf2Vector>> {
    if !t.is_subspace() || !ambient.is_subspace() {
        return Err(Gf2Error::NotASubspace);
    }
    if t.n() != ambient.n() {
        return Err(Gf2Error::DimensionMismatch { expected: ambient.n(), got: t.n() });
    }
    if !ambient.contains_coset(t) {
        return Err(Gf2Error::NotContained);
    }
    // Reduction modulo t is linear, so the canonical representatives form a
    // subspace spanned by the reduced ambient basis.
    let reduced: Vec<_> = ambient.basis().iter().map(|b| t.reduce(b)).collect();
    Gf2Coset::subspace(ambient.n(), &reduced)?.members()
}

/// Number of `k`-dimensional subspaces of GF(2)^n.
pub fn gaussian_binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut num = 1u128;
    let mut den = 1u128;
    for i in 0..k {
        num *= (1u128 << (n - i)) - 1;
        den *= (1u128 << (i + 1)) - 1;
    }
    num / den
}

/// Every `k`-dimensional subspace of GF(2)^n, enumerated through their
/// reduced row-echelon bases.
pub fn all_subspaces(n: usize, k: usize) -> Result<Vec<Gf2Coset>> {
    if k > n {
        return Err(Gf2Error::InvalidSubspaceDim { n, k });
    }
    if n > 12 {
        return Err(Gf2Error::TooLarge(n * k));
    }
    let mut out = Vec::new();
    let mut pivots: Vec<usize> = (0..k).collect();
    loop {
        // Free slots: (row, column) with column after the row's pivot and not a pivot.
        let free: Vec<(usize, usize)> = (0..k)
            .flat_map(|i| {
                let piv = pivots.clone();
                ((pivots[i] + 1)..n).filter(move |c| !piv.contains(c)).map(move |c| (i, c))
            })
            .collect();
        for assignment in 0..(1u64 << free.len()) {
            let mut rows: Vec<Gf2Vector> = pivots.iter().map(|&p| Gf2Vector::unit(n, p)).collect();
            for (bit, &(i, c)) in free.iter().enumerate() {
                if (assignment >> bit) & 1 == 1 {
                    rows[i].set(c, true);
                }
            }
            out.push(Gf2Coset { n, basis: rows, shift: Gf2Vector::zero(n) });
        }
        // Next k-combination of 0..n in lexicographic order.
        let Some(i) = (0..k).rev().find(|&i| pivots[i] < n - k + i) else {
            break;
        };
        pivots[i] += 1;
        for j in i + 1..k {
            pivots[j] = pivots[j - 1] + 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn v(s: &str) -> Gf2Vector {
        Gf2Vector::from_bools(&s.chars().map(|c| c == '1').collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn vector_layout_is_lexicographic() {
        assert_eq!(v("10").bits(), 2);
        assert!(v("01") < v("10"));
        assert_eq!(v("0010").leading_coordinate(), Some(2));
        assert_eq!(v("101").to_string(), "101");
        assert_eq!(v("1100").concat(&v("01")).unwrap(), v("110001"));
        assert_eq!(v("110001").slice(2, 3), v("000"));
    }

    #[test]
    fn span_and_dual_of_diagonal() {
        let s = Gf2Coset::subspace(2, &[v("11")]).unwrap();
        assert_eq!(s.members().unwrap(), vec![v("00"), v("11")]);
        let d = s.dual().unwrap();
        assert_eq!(d.members().unwrap(), vec![v("00"), v("11")]);
    }

    #[test]
    fn representatives_are_lex_minimal() {
        let t = Gf2Coset::subspace(2, &[v("11")]).unwrap();
        let amb = Gf2Coset::full_space(2).unwrap();
        assert_eq!(coset_representatives(&t, &amb).unwrap(), vec![v("00"), v("01")]);
    }

    #[test]
    fn dependent_basis_rejected() {
        assert_eq!(
            Gf2Coset::from_basis(3, &[v("110"), v("011"), v("101")], v("000")),
            Err(Gf2Error::DependentBasis)
        );
    }

    #[test]
    fn dual_of_proper_coset_rejected() {
        let c = Gf2Coset::from_basis(2, &[v("10")], v("01")).unwrap();
        assert_eq!(c.dual(), Err(Gf2Error::NotASubspace));
    }

    #[test]
    fn solve_affine_examples() {
        let a = Gf2Matrix::from_columns(3, &[v("100"), v("011")]).unwrap();
        let b = v("001");
        let u = a.mul_vec(&v("11")).unwrap() ^ b;
        assert_eq!(solve_affine(&a, &b, &u).unwrap(), Some(v("11")));
        assert_eq!(solve_affine(&a, &b, &v("011")).unwrap(), None);
    }

    #[test]
    fn gaussian_binomial_values() {
        assert_eq!(gaussian_binomial(4, 2), 35);
        assert_eq!(gaussian_binomial(3, 1), 7);
        assert_eq!(gaussian_binomial(5, 0), 1);
        for (n, k) in [(3, 1), (4, 2), (5, 2), (6, 3)] {
            assert_eq!(all_subspaces(n, k).unwrap().len() as u128, gaussian_binomial(n, k));
        }
    }

    #[test]
    fn text_round_trip() {
        let c = Gf2Coset::from_basis(6, &[v("110000"), v("001011")], v("010101")).unwrap();
        let s = c.to_text();
        assert_eq!(s.parse::<Gf2Coset>().unwrap(), c);
        assert!("n=3;basis=;shift=9".parse::<Gf2Coset>().is_err());
    }

    #[test]
    fn sampled_subspace_has_requested_dim() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for k in 0..=6 {
            assert_eq!(sample_subspace(6, k, &mut rng).unwrap().dim(), k);
        }
        assert!(sample_subspace(3, 4, &mut rng).is_err());
    }
}
