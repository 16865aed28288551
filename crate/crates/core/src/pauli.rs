//! Weighted Pauli-string algebra.
//!
//! A string is stored as two bit masks `(x, z)` and denotes the Hermitian
//! operator `i^{|x & z|} X^x Z^z`, so a qubit with both bits set carries `Y`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::C64;

/// Terms with magnitude at or below this are dropped by [`PauliSum::simplify`].
pub const SIMPLIFY_TOL: f64 = 1e-12;
/// Largest register accepted by [`PauliSum::to_dense`].
pub const MAX_DENSE_QUBITS: usize = 12;
/// Largest register accepted by [`PauliSum::to_sparse`].
pub const MAX_MATRIX_QUBITS: usize = 14;
/// Largest register representable by the bit-mask encoding.
pub const MAX_QUBITS: usize = 64;

const I_POW: [C64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

/// `i^k` for any integer `k`.
pub fn i_pow(k: i64) -> C64 {
    I_POW[k.rem_euclid(4) as usize]
}

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn parity(v: u64) -> bool {
    v.count_ones() & 1 == 1
}

/// Tensor product of single-qubit Pauli letters on `n` qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_QUBITS, "register of {n} qubits exceeds {MAX_QUBITS}");
        Self { n, x: 0, z: 0 }
    }

    /// Builds a string from raw masks. Bits at or above `n` are rejected.
    pub fn from_masks(n: usize, x: u64, z: u64) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::TooLarge { n, max: MAX_QUBITS });
        }
        if (x | z) & !mask(n) != 0 {
            return Err(Error::InvalidParam(format!(
                "mask bits beyond a {n}-qubit register"
            )));
        }
        Ok(Self { n, x, z })
    }

    /// A single letter `p` on qubit `q` of an `n`-qubit register.
    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        assert!(q < n, "qubit {q} out of range for {n} qubits");
        Self::identity(n).with(q, p)
    }

    /// Parses letters written qubit-0-first, e.g. `"IXYIY"`.
    pub fn from_letters(s: &str) -> Result<Self> {
        let n = s.chars().count();
        if n > MAX_QUBITS {
            return Err(Error::TooLarge { n, max: MAX_QUBITS });
        }
        let mut out = Self::identity(n);
        for (q, c) in s.chars().enumerate() {
            let p = Pauli::from_char(c).ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("invalid Pauli letter {c:?}"),
            })?;
            out = out.with(q, p);
        }
        Ok(out)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    /// Qubits acted on non-trivially.
    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> usize {
        self.support().count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.support() == 0
    }

    pub fn is_diagonal(&self) -> bool {
        self.x == 0
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x >> q & 1 == 1, self.z >> q & 1 == 1)
    }

    /// Returns a copy with qubit `q` replaced by `p`.
    pub fn with(mut self, q: usize, p: Pauli) -> Self {
        let (bx, bz) = p.bits();
        let b = 1u64 << q;
        self.x = if bx { self.x | b } else { self.x & !b };
        self.z = if bz { self.z | b } else { self.z & !b };
        self
    }

    /// Letters written qubit-0-first.
    pub fn letters(&self) -> String {
        (0..self.n).map(|q| self.get(q).as_char()).collect()
    }

    fn y_count(&self) -> i64 {
        (self.x & self.z).count_ones() as i64
    }

    /// Product `self * other = phase * result`.
    pub fn mul(&self, other: &Self) -> (C64, Self) {
        debug_assert_eq!(self.n, other.n);
        let out = Self {
            n: self.n,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        };
        let sign = 2 * (self.z & other.x).count_ones() as i64;
        let k = self.y_count() + other.y_count() - out.y_count() + sign;
        (i_pow(k), out)
    }

    /// True when the two strings commute as operators.
    pub fn commutes(&self, other: &Self) -> bool {
        !parity((self.x & other.z) ^ (self.z & other.x))
    }

    /// True when the strings commute on every qubit separately.
    pub fn qubitwise_commutes(&self, other: &Self) -> bool {
        let s = self.support() & other.support();
        (self.x & s) == (other.x & s) && (self.z & s) == (other.z & s)
    }

    /// Action on a basis state: `P|b> = phase |b'>`.
    pub fn apply_basis(&self, b: u64) -> (u64, C64) {
        let sign = if parity(b & self.z) { 2 } else { 0 };
        (b ^ self.x, i_pow(self.y_count() + sign))
    }

    /// Re-indexes the string into a larger register: qubit `q` goes to `map[q]`.
    pub fn embed(&self, n: usize, map: &[usize]) -> Result<Self> {
        if map.len() != self.n {
            return Err(Error::SizeMismatch {
                left: map.len(),
                right: self.n,
            });
        }
        let mut out = Self::identity(n);
        for (q, &t) in map.iter().enumerate() {
            if t >= n {
                return Err(Error::InvalidParam(format!("target qubit {t} out of range")));
            }
            out = out.with(t, self.get(q));
        }
        Ok(out)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.letters())
    }
}

/// Linear combination of Pauli strings on a fixed register.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: BTreeMap<PauliString, C64>,
}

impl PauliSum {
    pub fn zero(n: usize) -> Self {
        assert!(n <= MAX_QUBITS, "register of {n} qubits exceeds {MAX_QUBITS}");
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::term(PauliString::identity(n), C64::new(1.0, 0.0))
    }

    /// `c * I` on `n` qubits.
    pub fn scalar(n: usize, c: impl Into<C64>) -> Self {
        Self::term(PauliString::identity(n), c.into())
    }

    pub fn term(p: PauliString, c: impl Into<C64>) -> Self {
        let mut s = Self::zero(p.n_qubits());
        s.add_term(p, c.into());
        s
    }

    /// `c * P_q` for a single letter on qubit `q`.
    pub fn single(n: usize, q: usize, p: Pauli, c: impl Into<C64>) -> Self {
        Self::term(PauliString::single(n, q, p), c)
    }

    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliString, C64)>,
    {
        let mut s = Self::zero(n);
        for (p, c) in terms {
            if p.n_qubits() != n {
                return Err(Error::SizeMismatch {
                    left: n,
                    right: p.n_qubits(),
                });
            }
            s.add_term(p, c);
        }
        s.simplify();
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &C64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, p: &PauliString) -> C64 {
        self.terms.get(p).copied().unwrap_or_default()
    }

    /// Adds `c * p` without simplifying.
    pub fn add_term(&mut self, p: PauliString, c: C64) {
        assert_eq!(p.n_qubits(), self.n, "register size mismatch");
        *self.terms.entry(p).or_default() += c;
    }

    /// Drops terms with magnitude at most [`SIMPLIFY_TOL`].
    pub fn simplify(&mut self) {
        self.terms.retain(|_, c| c.norm() > SIMPLIFY_TOL);
    }

    pub fn simplified(mut self) -> Self {
        self.simplify();
        self
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            Err(Error::SizeMismatch {
                left: self.n,
                right: other.n,
            })
        } else {
            Ok(())
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.add_term(*p, *c);
        }
        Ok(out.simplified())
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = Self::zero(self.n);
        for (p1, c1) in &self.terms {
            for (p2, c2) in &other.terms {
                let (ph, p) = p1.mul(p2);
                out.add_term(p, ph * c1 * c2);
            }
        }
        Ok(out.simplified())
    }

    /// `self * other - other * self`; empty when the operators commute.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = Self::zero(self.n);
        for (p1, c1) in &self.terms {
            for (p2, c2) in &other.terms {
                if !p1.commutes(p2) {
                    let (ph, p) = p1.mul(p2);
                    out.add_term(p, 2.0 * ph * c1 * c2);
                }
            }
        }
        Ok(out.simplified())
    }

    /// `self * other + other * self`.
    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = Self::zero(self.n);
        for (p1, c1) in &self.terms {
            for (p2, c2) in &other.terms {
                if p1.commutes(p2) {
                    let (ph, p) = p1.mul(p2);
                    out.add_term(p, 2.0 * ph * c1 * c2);
                }
            }
        }
        Ok(out.simplified())
    }

    pub fn scale(&self, c: impl Into<C64>) -> Self {
        let c = c.into();
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out.simplified()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = v.conj();
        }
        out
    }

    /// `self^k` for `k >= 0`.
    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::identity(self.n);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Largest imaginary part among the coefficients.
    pub fn max_imag(&self) -> f64 {
        self.terms.values().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_imag() <= tol
    }

    /// Errors unless every coefficient is real within `tol`.
    pub fn ensure_hermitian(&self, tol: f64) -> Result<()> {
        let m = self.max_imag();
        if m > tol {
            Err(Error::NotHermitian(m))
        } else {
            Ok(())
        }
    }

    /// `(self + self^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale(0.5)
    }

    /// Sum of coefficient magnitudes; an upper bound on the operator norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    pub fn is_diagonal(&self) -> bool {
        self.terms.keys().all(|p| p.is_diagonal())
    }

    /// Coefficient of the identity string.
    pub fn trace_per_dim(&self) -> C64 {
        self.coeff(&PauliString::identity(self.n))
    }

    /// Re-indexes every string into an `n`-qubit register.
    pub fn embed(&self, n: usize, map: &[usize]) -> Result<Self> {
        let mut out = Self::zero(n);
        for (p, c) in &self.terms {
            out.add_term(p.embed(n, map)?, *c);
        }
        Ok(out.simplified())
    }

    /// Qubits acted on by at least one term.
    pub fn support(&self) -> u64 {
        self.terms.keys().fold(0, |acc, p| acc | p.support())
    }

    /// Greedy first-fit partition into mutually commuting groups.
    ///
    /// Terms are visited by descending coefficient magnitude, ties in string
    /// order, so the partition is deterministic.
    pub fn group_commuting(&self) -> Vec<Vec<(PauliString, C64)>> {
        let mut order: Vec<(PauliString, C64)> =
            self.terms.iter().map(|(p, c)| (*p, *c)).collect();
        order.sort_by(|a, b| b.1.norm().total_cmp(&a.1.norm()));
        let mut groups: Vec<Vec<(PauliString, C64)>> = Vec::new();
        for (p, c) in order {
            match groups
                .iter_mut()
                .find(|g| g.iter().all(|(q, _)| q.commutes(&p)))
            {
                Some(g) => g.push((p, c)),
                None => groups.push(vec![(p, c)]),
            }
        }
        groups
    }

    /// Diagonal entries in the computational basis for a diagonal operator.
    pub fn diagonal(&self) -> Result<Vec<C64>> {
        if !self.is_diagonal() {
            return Err(Error::InvalidParam("operator is not diagonal".into()));
        }
        if self.n > MAX_MATRIX_QUBITS + 10 {
            return Err(Error::TooLarge {
                n: self.n,
                max: MAX_MATRIX_QUBITS + 10,
            });
        }
        let terms: Vec<(u64, C64)> = self.terms.iter().map(|(p, c)| (p.z_mask(), *c)).collect();
        let mut out = vec![C64::default(); 1usize << self.n];
        crate::par::fill(&mut out, |b| {
            terms
                .iter()
                .map(|(z, c)| if parity(b as u64 & z) { -c } else { *c })
                .sum()
        });
        Ok(out)
    }

    /// Expands a dense `2^n x 2^n` matrix in the Pauli basis. Intended for small `n`.
    pub fn from_dense(m: &DMatrix<C64>) -> Result<Self> {
        let dim = m.nrows();
        if dim != m.ncols() || !dim.is_power_of_two() {
            return Err(Error::InvalidParam("matrix must be square of size 2^n".into()));
        }
        let n = dim.trailing_zeros() as usize;
        if n > 8 {
            return Err(Error::TooLarge { n, max: 8 });
        }
        let mut out = Self::zero(n);
        for x in 0..dim as u64 {
            for z in 0..dim as u64 {
                let p = PauliString { n, x, z };
                // Tr(P M) = sum_r P[r^x, r] M[r, r^x]
                let tr: C64 = (0..dim as u64)
                    .map(|r| {
                        let (row, ph) = p.apply_basis(r);
                        ph * m[(r as usize, row as usize)]
                    })
                    .sum();
                out.add_term(p, tr / dim as f64);
            }
        }
        Ok(out.simplified())
    }

    /// Dense matrix with qubit 0 as the least significant index bit.
    pub fn to_dense(&self) -> Result<DMatrix<C64>> {
        if self.n > MAX_DENSE_QUBITS {
            return Err(Error::TooLarge {
                n: self.n,
                max: MAX_DENSE_QUBITS,
            });
        }
        let dim = 1usize << self.n;
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        for (p, c) in &self.terms {
            for b in 0..dim {
                let (r, ph) = p.apply_basis(b as u64);
                m[(r as usize, b)] += ph * c;
            }
        }
        Ok(m)
    }

    /// Sparse matrix with qubit 0 as the least significant index bit.
    pub fn to_sparse(&self) -> Result<CsrMatrix> {
        if self.n > MAX_MATRIX_QUBITS {
            return Err(Error::TooLarge {
                n: self.n,
                max: MAX_MATRIX_QUBITS,
            });
        }
        Ok(CsrMatrix::from_pauli(&PauliOperator::new(self)))
    }

    /// Text form: one `<re> <im> <letters>` line per term.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (p, c) in &self.terms {
            s.push_str(&format!("{} {} {}\n", c.re, c.im, p.letters()));
        }
        s
    }

    /// Parses the text form. Blank lines and lines starting with `#` are skipped.
    /// An empty body needs `n` to fix the register size.
    pub fn parse_text(text: &str, n: Option<usize>) -> Result<Self> {
        let mut out: Option<Self> = n.map(Self::zero);
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(err(format!("expected 3 fields, found {}", f.len())));
            }
            let re: f64 = f[0].parse().map_err(|e| err(format!("{e}")))?;
            let im: f64 = f[1].parse().map_err(|e| err(format!("{e}")))?;
            let p = PauliString::from_letters(f[2]).map_err(|e| err(e.to_string()))?;
            let s = out.get_or_insert_with(|| Self::zero(p.n_qubits()));
            if s.n != p.n_qubits() {
                return Err(err(format!(
                    "string of length {} in a {}-qubit sum",
                    p.n_qubits(),
                    s.n
                )));
            }
            s.add_term(p, C64::new(re, im));
        }
        out.map(Self::simplified).ok_or(Error::Parse {
            line: 0,
            msg: "empty sum without register size".into(),
        })
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

// Operator impls panic on register mismatch; the checked_* methods return errors.
impl Add for &PauliSum {
    type Output = PauliSum;
    fn add(self, rhs: &PauliSum) -> PauliSum {
        self.checked_add(rhs).expect("PauliSum add")
    }
}

impl Sub for &PauliSum {
    type Output = PauliSum;
    fn sub(self, rhs: &PauliSum) -> PauliSum {
        self.checked_add(&-rhs).expect("PauliSum sub")
    }
}

impl Mul for &PauliSum {
    type Output = PauliSum;
    fn mul(self, rhs: &PauliSum) -> PauliSum {
        self.checked_mul(rhs).expect("PauliSum mul")
    }
}

impl Neg for &PauliSum {
    type Output = PauliSum;
    fn neg(self) -> PauliSum {
        self.scale(-1.0)
    }
}

impl AddAssign<&PauliSum> for PauliSum {
    fn add_assign(&mut self, rhs: &PauliSum) {
        assert_eq!(self.n, rhs.n, "register size mismatch");
        for (p, c) in &rhs.terms {
            self.add_term(*p, *c);
        }
        self.simplify();
    }
}

/// Pauli sum regrouped by X mask for fast application to state vectors.
///
/// `(H psi)[r] = sum_x psi[r ^ x] * sum_z c * (-1)^{|(r ^ x) & z|}`.
#[derive(Clone, Debug)]
pub struct PauliOperator {
    n: usize,
    groups: Vec<(u64, Vec<(u64, C64)>)>,
}

impl PauliOperator {
    pub fn new(h: &PauliSum) -> Self {
        let mut by_x: BTreeMap<u64, Vec<(u64, C64)>> = BTreeMap::new();
        for (p, c) in h.iter() {
            let (_, ph) = p.apply_basis(0);
            by_x.entry(p.x_mask()).or_default().push((p.z_mask(), ph * c));
        }
        Self {
            n: h.n_qubits(),
            groups: by_x.into_iter().collect(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// Groups of `(z mask, coefficient times i^{|x&z|})` keyed by X mask.
    pub fn groups(&self) -> &[(u64, Vec<(u64, C64)>)] {
        &self.groups
    }

    /// Matrix element `<row ^ x| H |row>` contributions for one row.
    #[inline]
    pub fn row_entry(&self, row: u64, x: u64, zs: &[(u64, C64)]) -> C64 {
        let col = row ^ x;
        zs.iter()
            .map(|(z, c)| if parity(col & z) { -c } else { *c })
            .sum()
    }

    /// `out = H psi`.
    pub fn apply_into(&self, psi: &[C64], out: &mut [C64]) {
        assert_eq!(psi.len(), 1usize << self.n);
        assert_eq!(out.len(), psi.len());
        crate::par::fill(out, |r| {
            let r = r as u64;
            self.groups
                .iter()
                .map(|(x, zs)| self.row_entry(r, *x, zs) * psi[(r ^ x) as usize])
                .sum()
        });
    }

    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::default(); psi.len()];
        self.apply_into(psi, &mut out);
        out
    }

    /// `<psi| H |psi>` without allocating the image.
    pub fn expectation(&self, psi: &[C64]) -> C64 {
        assert_eq!(psi.len(), 1usize << self.n);
        let rows = crate::par::map_range(psi.len().div_ceil(CHUNK), |k| {
            let lo = k * CHUNK;
            let hi = (lo + CHUNK).min(psi.len());
            let mut acc = C64::default();
            for r in lo..hi {
                let hr: C64 = self
                    .groups
                    .iter()
                    .map(|(x, zs)| self.row_entry(r as u64, *x, zs) * psi[r ^ *x as usize])
                    .sum();
                acc += psi[r].conj() * hr;
            }
            acc
        });
        rows.into_iter().sum()
    }
}

// Fixed chunking keeps reductions in a deterministic order.
const CHUNK: usize = 1024;
