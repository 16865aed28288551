//! Quantum-link-model Hamiltonians with Wilson fermions.
//!
//! Spinors have two components, `gamma^0 = diag(1, -1)`, `gamma^1 = i sigma_x`
//! and `gamma^2 = i sigma_y`. The electric term sums dynamical links only;
//! boundary fluxes enter the Gauss operators as constants.

use serde::{Deserialize, Serialize};

use crate::encoding::{jw_annihilation, link_operators, number_operator, QubitLayout, SpinTruncation};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, Side, VirtualLink};
use crate::pauli::PauliSum;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub m: f64,
    pub g: f64,
    pub a: f64,
    pub r: f64,
    pub lambda: f64,
    pub trunc: SpinTruncation,
}

impl ModelParams {
    /// `r = a = 1`, `g = 5 - d`, `S = theta = 1/2`, `lambda = 20`.
    pub fn standard(dim: usize, m: f64) -> Self {
        Self {
            m,
            g: 5.0 - dim as f64,
            a: 1.0,
            r: 1.0,
            lambda: 20.0,
            trunc: SpinTruncation::new(0.5, 0.5).expect("spin 1/2"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |s: &str| Err(Error::InvalidParam(s.into()));
        if self.a.is_nan() || self.a <= 0.0 {
            return bad("lattice spacing must be positive");
        }
        if self.g == 0.0 || !self.g.is_finite() {
            return bad("coupling must be finite and nonzero");
        }
        if self.lambda.is_nan() || self.lambda < 0.0 {
            return bad("penalty weight must be non-negative");
        }
        if !self.m.is_finite() || !self.r.is_finite() {
            return bad("mass and Wilson parameter must be finite");
        }
        Ok(())
    }

    /// Prefactor of `(E + theta)^2`.
    pub fn electric_coupling(&self, dim: usize) -> f64 {
        self.g * self.g * self.a.powi(2 - dim as i32) / 2.0
    }
}

/// Every Hamiltonian component, the total, and the Gauss operators.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSet {
    pub hopping: PauliSum,
    pub mass: PauliSum,
    pub wilson_shift: PauliSum,
    pub electric: PauliSum,
    pub plaquette: PauliSum,
    pub penalty: PauliSum,
    pub total: PauliSum,
    /// One operator per site.
    pub gauss: Vec<PauliSum>,
}

impl HamiltonianSet {
    /// Total Hamiltonian without the gauge penalty.
    pub fn physical(&self) -> PauliSum {
        &self.total - &self.penalty
    }

    /// Components in a fixed order with their names.
    pub fn components(&self) -> [(&'static str, &PauliSum); 7] {
        [
            ("hopping", &self.hopping),
            ("mass", &self.mass),
            ("wilson_shift", &self.wilson_shift),
            ("electric", &self.electric),
            ("plaquette", &self.plaquette),
            ("penalty", &self.penalty),
            ("total", &self.total),
        ]
    }

    /// `sum_x G_x^2`.
    pub fn gauss_squared(&self) -> PauliSum {
        let n = self.total.n_qubits();
        self.gauss
            .iter()
            .fold(PauliSum::zero(n), |acc, g| &acc + &(g * g))
    }
}

type Mat2 = [[C64; 2]; 2];

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `gamma^0 (i gamma^k + r)` for direction `k` (0-based).
pub fn hopping_matrix(k: usize, r: f64) -> Mat2 {
    let z = c(0.0, 0.0);
    // i gamma^1 = -sigma_x, i gamma^2 = -sigma_y
    let ig: Mat2 = match k {
        0 => [[z, c(-1.0, 0.0)], [c(-1.0, 0.0), z]],
        1 => [[z, c(0.0, 1.0)], [c(0.0, -1.0), z]],
        _ => panic!("direction {k} unsupported"),
    };
    let mut out = ig;
    for (i, row) in out.iter_mut().enumerate() {
        row[i] += r;
        let g0 = if i == 0 { 1.0 } else { -1.0 };
        for v in row.iter_mut() {
            *v *= g0;
        }
    }
    out
}

/// `psi-bar psi = n_upper - n_lower` at one site.
pub fn scalar_density(layout: &QubitLayout, site: usize) -> Result<PauliSum> {
    let n = layout.total_qubits;
    let up = number_operator(n, layout.fermion(site, 0)?);
    let dn = number_operator(n, layout.fermion(site, 1)?);
    Ok(&up - &dn)
}

/// Normal-ordered charge `sum_c n_c - n_spinor/2` at one site.
pub fn charge(layout: &QubitLayout, site: usize) -> Result<PauliSum> {
    let n = layout.total_qubits;
    let mut q = PauliSum::scalar(n, -(layout.spinor_components as f64) / 2.0);
    for comp in 0..layout.spinor_components {
        q += &number_operator(n, layout.fermion(site, comp)?);
    }
    Ok(q)
}

/// Shifted flux `E + theta` on a link.
pub fn link_flux_observable(link: usize, layout: &QubitLayout, trunc: SpinTruncation) -> Result<PauliSum> {
    let e = layout.on_link(link, &link_operators(trunc).e)?;
    Ok(&e + &PauliSum::scalar(layout.total_qubits, trunc.theta))
}

/// `N = sum_x (psi-bar psi + 1)`.
pub fn particle_number(lat: &Lattice, layout: &QubitLayout) -> Result<PauliSum> {
    check(lat, layout)?;
    let n = layout.total_qubits;
    let mut out = PauliSum::zero(n);
    for s in 0..lat.n_sites() {
        out += &scalar_density(layout, s)?;
        out += &PauliSum::scalar(n, 1.0);
    }
    Ok(out)
}

/// Gauss operator `G_x = sum_k (L_out - L_in) - Q_x` for every site.
pub fn gauss_operators(lat: &Lattice, layout: &QubitLayout, trunc: SpinTruncation) -> Result<Vec<PauliSum>> {
    check(lat, layout)?;
    let n = layout.total_qubits;
    let mut out = Vec::with_capacity(lat.n_sites());
    for s in 0..lat.n_sites() {
        let mut g = -&charge(layout, s)?;
        for k in 0..lat.dim() {
            let (lo, li) = lat.site_links(s, k);
            let boundary = |side| {
                let v = VirtualLink { site: s, dir: k, side };
                lat.boundary()
                    .get(&v)
                    .copied()
                    .ok_or_else(|| Error::Boundary(format!("missing {v:?}")))
            };
            let out_flux = match lo {
                Some(l) => link_flux_observable(l, layout, trunc)?,
                None => PauliSum::scalar(n, f64::from(boundary(Side::Out)?)),
            };
            let in_flux = match li {
                Some(l) => link_flux_observable(l, layout, trunc)?,
                None => PauliSum::scalar(n, f64::from(boundary(Side::In)?)),
            };
            g += &out_flux;
            g = &g - &in_flux;
        }
        out.push(g);
    }
    Ok(out)
}

fn check(lat: &Lattice, layout: &QubitLayout) -> Result<()> {
    if layout.matches(lat) {
        Ok(())
    } else {
        Err(Error::LayoutMismatch)
    }
}

/// Builds every term of the Hamiltonian.
pub fn build_hamiltonian(lat: &Lattice, layout: &QubitLayout, p: &ModelParams) -> Result<HamiltonianSet> {
    check(lat, layout)?;
    p.validate()?;
    if layout.qubits_per_link != p.trunc.qubits_per_link() {
        return Err(Error::LayoutMismatch);
    }
    let n = layout.total_qubits;
    let d = lat.dim();
    let link_ops = link_operators(p.trunc);
    let ann = |s, c| jw_annihilation(layout, s, c);

    let mut hopping = PauliSum::zero(n);
    for (l, link) in lat.links().iter().enumerate() {
        let u = layout.on_link(l, &link_ops.u)?;
        let mk = hopping_matrix(link.dir, p.r);
        let mut f = PauliSum::zero(n);
        for (i, row) in mk.iter().enumerate() {
            for (j, &mij) in row.iter().enumerate() {
                if mij.norm() == 0.0 {
                    continue;
                }
                let t = &(&ann(link.site, i)?.adjoint() * &u) * &ann(link.head, j)?;
                f += &t.scale(mij / (2.0 * p.a));
            }
        }
        hopping += &(&f + &f.adjoint());
    }

    let mut density = PauliSum::zero(n);
    for s in 0..lat.n_sites() {
        density += &scalar_density(layout, s)?;
    }
    let mass = density.scale(p.m);
    let wilson_shift = density.scale(p.r * d as f64 / p.a);

    let mut electric = PauliSum::zero(n);
    for l in 0..lat.n_links() {
        let f = link_flux_observable(l, layout, p.trunc)?;
        electric += &(&f * &f);
    }
    let electric = electric.scale(p.electric_coupling(d));

    let mut plaquette = PauliSum::zero(n);
    for pl in lat.plaquettes() {
        let mut u_sq = PauliSum::identity(n);
        for st in pl.steps {
            let u = layout.on_link(st.link, &link_ops.u)?;
            let u = if st.forward { u } else { u.adjoint() };
            u_sq = &u_sq * &u;
        }
        plaquette += &(&u_sq + &u_sq.adjoint());
    }
    let plaquette = plaquette.scale(-p.a.powi(d as i32 - 4) / (2.0 * p.g * p.g));

    let gauss = gauss_operators(lat, layout, p.trunc)?;
    let mut penalty = PauliSum::zero(n);
    if p.lambda > 0.0 {
        for g in &gauss {
            penalty += &(g * g);
        }
        penalty = penalty.scale(p.lambda);
    }

    let mut total = PauliSum::zero(n);
    for part in [&hopping, &mass, &wilson_shift, &electric, &plaquette, &penalty] {
        total += part;
    }
    Ok(HamiltonianSet {
        hopping,
        mass,
        wilson_shift,
        electric,
        plaquette,
        penalty,
        total,
        gauss,
    })
}

/// Mass at which an unbroken string over `string_links` links and a broken
/// pair have equal classical energy, for `S = theta = 1/2` in `dim` dimensions.
pub fn critical_mass(p: &ModelParams, string_links: usize, dim: usize) -> f64 {
    string_links as f64 * p.electric_coupling(dim) / 2.0 - p.r * dim as f64 / p.a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::default_layout;

    fn setup(dim: usize, ext: &[usize], m: f64) -> (Lattice, QubitLayout, HamiltonianSet) {
        let lat = Lattice::with_default_boundary(dim, ext).unwrap();
        let p = ModelParams::standard(dim, m);
        let layout = default_layout(&lat, p.trunc);
        let h = build_hamiltonian(&lat, &layout, &p).unwrap();
        (lat, layout, h)
    }

    #[test]
    fn components_are_hermitian_and_gauge_invariant() {
        for (dim, ext) in [(1, vec![2]), (1, vec![3]), (2, vec![2, 2])] {
            let (_, _, h) = setup(dim, &ext, 1.0);
            for (name, part) in h.components() {
                assert!(part.is_hermitian(1e-12), "{name} not Hermitian");
            }
            let phys = h.physical();
            for g in &h.gauss {
                assert!(phys.commutator(g).unwrap().is_empty());
            }
        }
    }

    #[test]
    fn hopping_matrices() {
        let m = hopping_matrix(0, 1.0);
        assert_eq!(m, [[c(1.0, 0.0), c(-1.0, 0.0)], [c(1.0, 0.0), c(-1.0, 0.0)]]);
        let m = hopping_matrix(1, 1.0);
        assert_eq!(m, [[c(1.0, 0.0), c(0.0, 1.0)], [c(0.0, 1.0), c(-1.0, 0.0)]]);
    }

    #[test]
    fn critical_masses() {
        let mut p = ModelParams::standard(1, 0.0);
        assert_eq!(critical_mass(&p, 1, 1), 3.0);
        p.g = 3.0;
        assert_eq!(critical_mass(&p, 2, 1), 3.5);
        assert_eq!(critical_mass(&p, 2, 2), 2.5);
        p.g = 2.0;
        assert_eq!(critical_mass(&p, 1, 1), 0.0);
    }

    #[test]
    fn zero_lambda_has_empty_penalty() {
        let lat = Lattice::with_default_boundary(1, &[2]).unwrap();
        let mut p = ModelParams::standard(1, 1.0);
        p.lambda = 0.0;
        let layout = default_layout(&lat, p.trunc);
        let h = build_hamiltonian(&lat, &layout, &p).unwrap();
        assert!(h.penalty.is_empty());
    }

    #[test]
    fn rejects_bad_params() {
        let lat = Lattice::with_default_boundary(1, &[2]).unwrap();
        let mut p = ModelParams::standard(1, 1.0);
        let layout = default_layout(&lat, p.trunc);
        p.a = 0.0;
        assert!(build_hamiltonian(&lat, &layout, &p).is_err());
        let other = Lattice::with_default_boundary(1, &[3]).unwrap();
        let p = ModelParams::standard(1, 1.0);
        assert_eq!(build_hamiltonian(&other, &layout, &p), Err(Error::LayoutMismatch));
    }
}
