//! Qubit encodings of matter and gauge degrees of freedom.
//!
//! Fermionic modes use a Jordan-Wigner mapping in which `|0>` is occupied, so
//! `a = prod_{j<n}(-Z_j) (X_n - i Y_n)/2` and `a^dagger a = (I + Z_n)/2`.
//! Links carry a spin-S representation in binary: basis index `j` holds
//! `S^z = S - j`; indices at or above `2S+1` are unused.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::C64;

/// Spin-S truncation of one link together with the background field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinTruncation {
    two_s: u32,
    pub theta: f64,
}

impl SpinTruncation {
    pub fn new(spin: f64, theta: f64) -> Result<Self> {
        let two_s = 2.0 * spin;
        if !(two_s >= 1.0 && (two_s - two_s.round()).abs() < 1e-12 && two_s <= 63.0) {
            return Err(Error::InvalidSpin(spin));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidParam(format!("theta = {theta}")));
        }
        Ok(Self {
            two_s: two_s.round() as u32,
            theta,
        })
    }

    pub fn spin(&self) -> f64 {
        f64::from(self.two_s) / 2.0
    }

    /// Number of retained flux states, `2S + 1`.
    pub fn dim(&self) -> usize {
        self.two_s as usize + 1
    }

    pub fn qubits_per_link(&self) -> usize {
        self.dim().next_power_of_two().trailing_zeros() as usize
    }

    /// `S^z` for basis index `j`; zero on unused indices.
    pub fn sz(&self, j: usize) -> f64 {
        if j < self.dim() {
            self.spin() - j as f64
        } else {
            0.0
        }
    }

    /// Basis index holding shifted flux `L = S^z + theta`, if retained.
    pub fn index_of_flux(&self, flux: f64) -> Option<usize> {
        let j = self.spin() + self.theta - flux;
        let r = j.round();
        ((j - r).abs() < 1e-9 && r >= 0.0 && (r as usize) < self.dim()).then_some(r as usize)
    }
}

/// Electric field and link operator on the qubits of a single link.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkOperators {
    pub e: PauliSum,
    pub u: PauliSum,
}

/// `E = S^z` and `U = S^+ / sqrt(S(S+1))` in the binary link encoding.
pub fn link_operators(trunc: SpinTruncation) -> LinkOperators {
    let q = trunc.qubits_per_link();
    let full = 1usize << q;
    let s = trunc.spin();
    let norm = (s * (s + 1.0)).sqrt();
    let mut e = DMatrix::<C64>::zeros(full, full);
    let mut u = DMatrix::<C64>::zeros(full, full);
    for j in 0..trunc.dim() {
        let m = trunc.sz(j);
        e[(j, j)] = C64::new(m, 0.0);
        if j > 0 {
            // S^+ |m> = sqrt(S(S+1) - m(m+1)) |m+1>, and m+1 lives at index j-1.
            u[(j - 1, j)] = C64::new((s * (s + 1.0) - m * (m + 1.0)).sqrt() / norm, 0.0);
        }
    }
    LinkOperators {
        e: PauliSum::from_dense(&e).expect("link register is small"),
        u: PauliSum::from_dense(&u).expect("link register is small"),
    }
}

/// Assignment of lattice degrees of freedom to qubit indices.
///
/// Fermionic qubits come first, site-major with the upper spinor component
/// first; link qubits follow in link order, least significant bit first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitLayout {
    pub dim: usize,
    pub n_sites: usize,
    pub n_links: usize,
    pub spinor_components: usize,
    pub qubits_per_link: usize,
    pub total_qubits: usize,
    /// `fermion_qubit[site][component]`.
    pub fermion_qubit: Vec<Vec<usize>>,
    /// `link_qubit[link][bit]`.
    pub link_qubit: Vec<Vec<usize>>,
}

/// Default layout for `lat` with the given link truncation.
pub fn default_layout(lat: &Lattice, trunc: SpinTruncation) -> QubitLayout {
    let ns = 1usize << lat.dim().div_ceil(2);
    let qpl = trunc.qubits_per_link();
    let nf = lat.n_sites() * ns;
    let fermion_qubit = (0..lat.n_sites())
        .map(|s| (0..ns).map(|c| s * ns + c).collect())
        .collect();
    let link_qubit = (0..lat.n_links())
        .map(|l| (0..qpl).map(|b| nf + l * qpl + b).collect())
        .collect();
    QubitLayout {
        dim: lat.dim(),
        n_sites: lat.n_sites(),
        n_links: lat.n_links(),
        spinor_components: ns,
        qubits_per_link: qpl,
        total_qubits: nf + lat.n_links() * qpl,
        fermion_qubit,
        link_qubit,
    }
}

impl QubitLayout {
    pub fn matches(&self, lat: &Lattice) -> bool {
        self.dim == lat.dim() && self.n_sites == lat.n_sites() && self.n_links == lat.n_links()
    }

    pub fn n_fermion_qubits(&self) -> usize {
        self.n_sites * self.spinor_components
    }

    pub fn fermion(&self, site: usize, component: usize) -> Result<usize> {
        self.fermion_qubit
            .get(site)
            .and_then(|v| v.get(component))
            .copied()
            .ok_or(Error::UnknownMode { site, component })
    }

    pub fn link_qubits(&self, link: usize) -> Result<&[usize]> {
        self.link_qubit
            .get(link)
            .map(Vec::as_slice)
            .ok_or(Error::UnknownLink(link))
    }

    /// Embeds a single-link operator onto link `link`.
    pub fn on_link(&self, link: usize, op: &PauliSum) -> Result<PauliSum> {
        op.embed(self.total_qubits, self.link_qubits(link)?)
    }

    /// Jordan-Wigner ordering index of a mode; equals its qubit index.
    pub fn mode_index(&self, site: usize, component: usize) -> Result<usize> {
        self.fermion(site, component)
    }
}

/// Annihilation operator of JW mode `mode` on an `n`-qubit register.
pub fn jw_annihilation_mode(n: usize, mode: usize) -> Result<PauliSum> {
    if mode >= n {
        return Err(Error::UnknownMode {
            site: mode,
            component: 0,
        });
    }
    let mut string = PauliString::identity(n);
    for j in 0..mode {
        string = string.with(j, Pauli::Z);
    }
    let sign = if mode.is_multiple_of(2) { 0.5 } else { -0.5 };
    let x = string.with(mode, Pauli::X);
    let y = string.with(mode, Pauli::Y);
    PauliSum::from_terms(n, [(x, C64::new(sign, 0.0)), (y, C64::new(0.0, -sign))])
}

/// Annihilation operator of `(site, component)`.
pub fn jw_annihilation(layout: &QubitLayout, site: usize, component: usize) -> Result<PauliSum> {
    jw_annihilation_mode(layout.total_qubits, layout.mode_index(site, component)?)
}

/// Occupation `a^dagger a = (I + Z)/2` of a JW qubit.
pub fn number_operator(n: usize, qubit: usize) -> PauliSum {
    &PauliSum::scalar(n, 0.5) + &PauliSum::single(n, qubit, Pauli::Z, 0.5)
}
