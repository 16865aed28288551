//! State-vector simulation, exact expectations and shot sampling.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::encoding::{QubitLayout, SpinTruncation};
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::pauli::{Pauli, PauliOperator, PauliString, PauliSum};
use crate::C64;

/// Largest register the simulator accepts.
pub const MAX_SIM_QUBITS: usize = 26;

/// Normalized amplitude vector over `2^n` basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zero_state(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: u64) -> Result<Self> {
        if n > MAX_SIM_QUBITS {
            return Err(Error::TooLarge { n, max: MAX_SIM_QUBITS });
        }
        let mut amps = vec![C64::default(); 1usize << n];
        let i = usize::try_from(index).ok().filter(|&i| i < amps.len()).ok_or_else(|| {
            Error::InvalidParam(format!("basis index {index} outside {n}-qubit register"))
        })?;
        amps[i] = C64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Normalizes `amps`; fails on a zero vector or a length that is not `2^n`.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(Error::InvalidParam(format!("length {len} is not a power of two")));
        }
        let mut s = Self {
            n: len.trailing_zeros() as usize,
            amps,
        };
        let norm = s.norm();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParam("cannot normalize a zero vector".into()));
        }
        s.amps.iter_mut().for_each(|a| *a /= norm);
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|<self|other>|^2`.
    pub fn overlap(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check(&self, n: usize) -> Result<()> {
        if n != self.n {
            Err(Error::SizeMismatch { left: n, right: self.n })
        } else {
            Ok(())
        }
    }

    pub fn apply_gate(&mut self, g: &Gate, params: &[f64]) {
        match *g {
            Gate::X(q) => self.single(q, [[zero(), one()], [one(), zero()]]),
            Gate::H(q) => {
                let h = C64::new(FRAC_1_SQRT_2, 0.0);
                self.single(q, [[h, h], [h, -h]])
            }
            Gate::Rx(q, a) => {
                let t = a.value(params) / 2.0;
                let (c, s) = (C64::new(t.cos(), 0.0), C64::new(0.0, -t.sin()));
                self.single(q, [[c, s], [s, c]])
            }
            Gate::Ry(q, a) => {
                let t = a.value(params) / 2.0;
                let (c, s) = (C64::new(t.cos(), 0.0), C64::new(t.sin(), 0.0));
                self.single(q, [[c, -s], [s, c]])
            }
            Gate::Rz(q, a) => {
                let t = a.value(params) / 2.0;
                let (lo, hi) = (C64::from_polar(1.0, -t), C64::from_polar(1.0, t));
                let bit = 1usize << q;
                for (i, amp) in self.amps.iter_mut().enumerate() {
                    *amp *= if i & bit == 0 { lo } else { hi };
                }
            }
            Gate::Cnot(c, t) => {
                let (cb, tb) = (1usize << c, 1usize << t);
                for i in 0..self.amps.len() {
                    if i & cb != 0 && i & tb == 0 {
                        self.amps.swap(i, i | tb);
                    }
                }
            }
        }
    }

    fn single(&mut self, q: usize, m: [[C64; 2]; 2]) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a, b) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[i | bit] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    /// `exp(i phi P)` for a Pauli string `P`.
    pub fn apply_pauli_rotation(&mut self, p: &PauliString, phi: f64) {
        let (c, s) = (phi.cos(), phi.sin());
        if p.is_identity() {
            let ph = C64::from_polar(1.0, phi);
            self.amps.iter_mut().for_each(|a| *a *= ph);
            return;
        }
        let is = C64::new(0.0, s);
        if p.is_diagonal() {
            let (plus, minus) = (C64::new(c, s), C64::new(c, -s));
            let z = p.z_mask();
            for (i, a) in self.amps.iter_mut().enumerate() {
                *a *= if (i as u64 & z).count_ones().is_multiple_of(2) { plus } else { minus };
            }
            return;
        }
        let x = p.x_mask() as usize;
        let top = 1usize << (63 - (x as u64).leading_zeros());
        // P|b> = i^{#Y} (-1)^{|b&z|} |b^x>
        let (_, base) = p.apply_basis(0);
        let (ib, z) = (is * base, p.z_mask() as usize);
        for i in 0..self.amps.len() {
            if i & top != 0 {
                continue;
            }
            let j = i ^ x;
            let ph_i = if (i & z).count_ones() % 2 == 0 { ib } else { -ib };
            let ph_j = if (j & z).count_ones().is_multiple_of(2) { ib } else { -ib };
            let (ai, aj) = (self.amps[i], self.amps[j]);
            self.amps[i] = c * ai + ph_j * aj;
            self.amps[j] = c * aj + ph_i * ai;
        }
    }

    /// `sum_P c_P P |psi>`.
    pub fn apply_sum(&self, h: &PauliSum) -> Result<Vec<C64>> {
        self.check(h.n_qubits())?;
        Ok(PauliOperator::new(h).apply(&self.amps))
    }
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// Runs the circuit on a copy of `s`.
pub fn apply_circuit(c: &Circuit, s: &StateVector) -> Result<StateVector> {
    s.check(c.n_qubits)?;
    c.validate()?;
    let mut out = s.clone();
    for g in &c.gates {
        out.apply_gate(g, &c.params);
    }
    Ok(out)
}

/// Dense unitary of a circuit, column `j` being the image of `|j>`.
pub fn circuit_unitary(c: &Circuit) -> Result<DMatrix<C64>> {
    if c.n_qubits > 10 {
        return Err(Error::TooLarge { n: c.n_qubits, max: 10 });
    }
    let dim = 1usize << c.n_qubits;
    let mut m = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let s = apply_circuit(c, &StateVector::basis(c.n_qubits, j as u64)?)?;
        for (i, a) in s.amps.iter().enumerate() {
            m[(i, j)] = *a;
        }
    }
    Ok(m)
}

/// Real expectation `<s|h|s>`. Fails for non-Hermitian `h`.
pub fn expectation(h: &PauliSum, s: &StateVector) -> Result<f64> {
    h.ensure_hermitian(1e-10)?;
    s.check(h.n_qubits())?;
    Ok(expectation_op(&PauliOperator::new(h), s))
}

/// Expectation with a prebuilt operator; the Hermiticity check is the caller's.
pub fn expectation_op(op: &PauliOperator, s: &StateVector) -> f64 {
    op.expectation(&s.amps).re
}

/// `|| h |s> ||`.
pub fn residual_norm(h: &PauliSum, s: &StateVector) -> Result<f64> {
    let v = s.apply_sum(h)?;
    Ok(v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt())
}

/// `max_x || G_x |s> ||`.
pub fn gauge_violation(gauss: &[PauliSum], s: &StateVector) -> Result<f64> {
    gauss
        .iter()
        .map(|g| residual_norm(g, s))
        .try_fold(0.0f64, |acc, r| r.map(|v| acc.max(v)))
}

/// Basis index with the given fermion occupations and link fluxes.
///
/// `occupied[site][component]` lists occupations; `flux[link]` is the shifted
/// flux `E + theta`.
pub fn basis_index(
    layout: &QubitLayout,
    trunc: SpinTruncation,
    occupied: &[Vec<bool>],
    flux: &[f64],
) -> Result<u64> {
    if occupied.len() != layout.n_sites
        || occupied.iter().any(|o| o.len() != layout.spinor_components)
    {
        return Err(Error::IncompleteAssignment(format!(
            "expected {} sites with {} components",
            layout.n_sites, layout.spinor_components
        )));
    }
    if flux.len() != layout.n_links {
        return Err(Error::IncompleteAssignment(format!(
            "expected {} link fluxes, got {}",
            layout.n_links,
            flux.len()
        )));
    }
    let mut b = 0u64;
    for (s, occ) in occupied.iter().enumerate() {
        for (c, &o) in occ.iter().enumerate() {
            if !o {
                b |= 1 << layout.fermion(s, c)?;
            }
        }
    }
    for (l, &f) in flux.iter().enumerate() {
        let j = trunc
            .index_of_flux(f)
            .ok_or_else(|| Error::InvalidParam(format!("flux {f} not representable")))?;
        for (bit, &q) in layout.link_qubits(l)?.iter().enumerate() {
            if j >> bit & 1 == 1 {
                b |= 1 << q;
            }
        }
    }
    Ok(b)
}

/// Computational basis state for an occupation and flux assignment.
pub fn prepare_basis_state(
    layout: &QubitLayout,
    trunc: SpinTruncation,
    occupied: &[Vec<bool>],
    flux: &[f64],
) -> Result<StateVector> {
    StateVector::basis(layout.total_qubits, basis_index(layout, trunc, occupied, flux)?)
}

/// Occupations of the bare vacuum: upper component empty, lower filled.
pub fn vacuum_occupation(layout: &QubitLayout) -> Vec<Vec<bool>> {
    (0..layout.n_sites)
        .map(|_| (0..layout.spinor_components).map(|c| c > 0).collect())
        .collect()
}

/// Gauge-invariant bare vacuum: no particles, link fluxes fixed by Gauss's law.
pub fn bare_vacuum(lat: &Lattice, layout: &QubitLayout, trunc: SpinTruncation) -> Result<StateVector> {
    prepare_basis_state(layout, trunc, &vacuum_occupation(layout), &vacuum_fluxes(lat, trunc)?)
}

/// Bare vacuum with the flux string between sites `x` and `x + e_0` broken
/// by an antiparticle at `x` and a particle at `x + e_0`.
pub fn pair_state(lat: &Lattice, layout: &QubitLayout, trunc: SpinTruncation, x: usize) -> Result<StateVector> {
    let head = lat.shift(x, 0).ok_or(Error::UnknownSite(x))?;
    let link = lat.link_index(x, 0).ok_or(Error::UnknownLink(x))?;
    let mut occ = vacuum_occupation(layout);
    occ[x].iter_mut().for_each(|o| *o = false);
    occ[head].iter_mut().for_each(|o| *o = true);
    let mut flux = vacuum_fluxes(lat, trunc)?;
    flux[link] -= 1.0;
    prepare_basis_state(layout, trunc, &occ, &flux)
}

/// Link fluxes of the charge-free configuration.
///
/// Returns the first retained flux assignment, in little-endian counting
/// order over links, that satisfies the Gauss law with zero charge on every
/// site. Unique for chains and for a single plaquette with corner boundaries.
pub fn vacuum_fluxes(lat: &Lattice, trunc: SpinTruncation) -> Result<Vec<f64>> {
    use crate::lattice::{Side, VirtualLink};
    let values: Vec<f64> = (0..trunc.dim()).map(|j| trunc.sz(j) + trunc.theta).collect();
    let nl = lat.n_links();
    let total = (values.len() as u128).checked_pow(nl as u32).filter(|&t| t <= 1 << 22);
    let Some(total) = total else {
        return Err(Error::TooLarge { n: nl, max: 22 });
    };
    let bf = |site, dir, side| -> f64 {
        lat.boundary()
            .get(&VirtualLink { site, dir, side })
            .map(|&f| f64::from(f))
            .unwrap_or(0.0)
    };
    let mut flux = vec![0.0; nl];
    for code in 0..total {
        let mut c = code;
        for f in flux.iter_mut() {
            *f = values[(c % values.len() as u128) as usize];
            c /= values.len() as u128;
        }
        let ok = (0..lat.n_sites()).all(|s| {
            let div: f64 = (0..lat.dim())
                .map(|k| {
                    let (out, inc) = lat.site_links(s, k);
                    let o = out.map_or_else(|| bf(s, k, Side::Out), |l| flux[l]);
                    let i = inc.map_or_else(|| bf(s, k, Side::In), |l| flux[l]);
                    o - i
                })
                .sum();
            div.abs() < 1e-9
        });
        if ok {
            return Ok(flux);
        }
    }
    Err(Error::Boundary("no charge-free flux configuration is representable".into()))
}

/// Measurement strategy for sampled expectations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    /// Every string sampled separately with its own shots.
    PerTerm,
    /// Commuting strings share one measurement basis and its shots.
    Grouped,
}

impl std::str::FromStr for Grouping {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per_term" | "per-term" => Ok(Self::PerTerm),
            "grouped" => Ok(Self::Grouped),
            _ => Err(Error::InvalidParam(format!("unknown grouping {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotPlan {
    pub shots: u64,
    pub grouping: Grouping,
    pub seed: u64,
}

/// Sampled estimate and its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stddev: f64,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Cumulative distribution for inverse-transform sampling.
struct Sampler {
    cdf: Vec<f64>,
}

impl Sampler {
    fn new(probs: &[f64]) -> Self {
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Self { cdf }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        let total = *self.cdf.last().unwrap_or(&1.0);
        let u: f64 = rng.gen::<f64>() * total;
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }
}

/// Amplitudes after rotating every qubit of `basis` into the Z basis.
fn rotate_to_z(s: &StateVector, basis: &PauliString) -> StateVector {
    let mut out = s.clone();
    for q in 0..basis.n_qubits() {
        match basis.get(q) {
            Pauli::X => out.apply_gate(&Gate::H(q), &[]),
            // Rx(pi/2) maps the Y eigenbasis onto the Z eigenbasis.
            Pauli::Y => out.apply_gate(&Gate::Rx(q, crate::circuit::Angle::fixed(std::f64::consts::FRAC_PI_2)), &[]),
            _ => {}
        }
    }
    out
}

fn parity_sign(b: usize, mask: u64) -> f64 {
    if (b as u64 & mask).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Shot-based estimate of `<s|h|s>` with its standard error.
pub fn sampled_expectation(h: &PauliSum, s: &StateVector, plan: &ShotPlan) -> Result<Estimate> {
    h.ensure_hermitian(1e-10)?;
    s.check(h.n_qubits())?;
    if plan.shots == 0 {
        return Err(Error::InvalidParam("shots must be positive".into()));
    }
    let n = h.n_qubits();
    let terms: Vec<(PauliString, f64)> = h.iter().map(|(p, c)| (*p, c.re)).collect();
    let groups: Vec<Vec<(PauliString, f64)>> = match plan.grouping {
        Grouping::PerTerm => terms.iter().map(|t| vec![*t]).collect(),
        Grouping::Grouped => h
            .group_commuting()
            .into_iter()
            .map(|g| g.into_iter().map(|(p, c)| (p, c.re)).collect())
            .collect(),
    };
    let parts = crate::par::map_range(groups.len(), |gi| {
        sample_group(&groups[gi], s, n, plan.shots, rng_for(plan.seed, gi as u64))
    });
    let mut mean = 0.0;
    let mut var = 0.0;
    for p in parts {
        let (m, v) = p?;
        mean += m;
        var += v;
    }
    Ok(Estimate {
        mean,
        stddev: var.sqrt(),
    })
}

/// Mean and estimator variance of one jointly measured group.
fn sample_group(
    group: &[(PauliString, f64)],
    s: &StateVector,
    n: usize,
    shots: u64,
    mut rng: ChaCha8Rng,
) -> Result<(f64, f64)> {
    let constant: f64 = group.iter().filter(|(p, _)| p.is_identity()).map(|(_, c)| c).sum();
    let live: Vec<(PauliString, f64)> = group.iter().filter(|(p, _)| !p.is_identity()).copied().collect();
    if live.is_empty() {
        return Ok((constant, 0.0));
    }
    let qwc = live.iter().all(|(p, _)| live.iter().all(|(q, _)| p.qubitwise_commutes(q)));
    if qwc {
        let mut basis = PauliString::identity(n);
        for (p, _) in &live {
            for q in 0..n {
                if p.get(q) != Pauli::I {
                    basis = basis.with(q, p.get(q));
                }
            }
        }
        let sampler = Sampler::new(&rotate_to_z(s, &basis).probabilities());
        let masks: Vec<(u64, f64)> = live.iter().map(|(p, c)| (p.support(), *c)).collect();
        let value = |b: usize| masks.iter().map(|(m, c)| c * parity_sign(b, *m)).sum();
        Ok(draw_moments(&sampler, &value, shots, &mut rng, constant))
    } else {
        let op = PauliSum::from_terms(n, live.iter().map(|(p, c)| (*p, C64::new(*c, 0.0))))?;
        let (evals, probs) = joint_eigen_distribution(&op, s)?;
        let sampler = Sampler::new(&probs);
        Ok(draw_moments(&sampler, &|k: usize| evals[k], shots, &mut rng, constant))
    }
}

fn draw_moments(
    sampler: &Sampler,
    value: &dyn Fn(usize) -> f64,
    shots: u64,
    rng: &mut ChaCha8Rng,
    constant: f64,
) -> (f64, f64) {
    let mut sum = 0.0;
    let mut sq = 0.0;
    for _ in 0..shots {
        let v = value(sampler.draw(rng));
        sum += v;
        sq += v * v;
    }
    let k = shots as f64;
    let mean = sum / k;
    let sample_var = if shots > 1 {
        ((sq - k * mean * mean) / (k - 1.0)).max(0.0)
    } else {
        0.0
    };
    (mean + constant, sample_var / k)
}

/// Eigenvalues of a commuting group and the outcome distribution of `s`.
fn joint_eigen_distribution(op: &PauliSum, s: &StateVector) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = op.to_dense()?;
    let eig = nalgebra::linalg::SymmetricEigen::new(m);
    let v = nalgebra::DVector::from_column_slice(s.amplitudes());
    let probs: Vec<f64> = (0..eig.eigenvalues.len())
        .map(|k| eig.eigenvectors.column(k).dotc(&v).norm_sqr())
        .collect();
    Ok((eig.eigenvalues.iter().copied().collect(), probs))
}
