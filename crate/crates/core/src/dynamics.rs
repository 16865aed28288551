//! Real-time representability: exact evolution tracked by the trial family.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ansatz::AnsatzSpec;
use crate::encoding::{QubitLayout, SpinTruncation};
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::model::{self, ModelParams};
use crate::oracle;
use crate::pauli::PauliSum;
use crate::statesim::{self, StateVector};
use crate::vqe::{self, OptimizerConfig};

/// Maximizes `|<phi(theta)|target>|^2` where `phi(theta) = U(theta) init`.
///
/// `warm` is tried first, before `cfg.restarts` random starts.
pub fn overlap_maximize(
    spec: &AnsatzSpec,
    init: &StateVector,
    target: &StateVector,
    cfg: &OptimizerConfig,
    warm: Option<&[f64]>,
) -> Result<(Vec<f64>, f64)> {
    if init.n_qubits() != target.n_qubits() || init.n_qubits() != spec.n_qubits {
        return Err(Error::SizeMismatch {
            left: spec.n_qubits,
            right: target.n_qubits(),
        });
    }
    let f = |x: &[f64]| match spec.apply(x, init) {
        Ok(s) => -s.overlap(target),
        Err(_) => f64::INFINITY,
    };
    let starts: Vec<Vec<f64>> = warm.map(|w| vec![w.to_vec()]).unwrap_or_default();
    let r = vqe::minimize_from(f, spec.n_params(), cfg, &starts)?;
    Ok((r.best_params, (-r.best_energy).clamp(0.0, 1.0)))
}

/// Symbol for one site given its spinor occupations (upper, lower).
///
/// Vacuum has the upper component empty and the lower one filled.
pub fn site_symbol(upper: bool, lower: bool) -> char {
    match (upper, lower) {
        (false, true) => 'o',
        (true, true) => 'p',
        (false, false) => 'a',
        (true, false) => 'b',
    }
}

fn link_symbol(flux: Option<f64>) -> char {
    match flux {
        Some(f) if f > 0.5 => '→',
        Some(f) if f < -0.5 => '←',
        Some(_) => '-',
        None => '?',
    }
}

/// Configuration label of a computational basis index.
///
/// Chains interleave sites and links (`"a-p→o"`); higher dimensions list the
/// sites, then `/`, then the links in index order.
pub fn configuration_label(index: usize, lat: &Lattice, layout: &QubitLayout, trunc: SpinTruncation) -> Result<String> {
    let occ = |q: usize| index >> q & 1 == 0;
    let mut sites = Vec::with_capacity(layout.n_sites);
    for s in 0..layout.n_sites {
        let upper = occ(layout.fermion(s, 0)?);
        let lower = layout.spinor_components < 2 || occ(layout.fermion(s, 1)?);
        sites.push(site_symbol(upper, lower));
    }
    let mut links = Vec::with_capacity(layout.n_links);
    for l in 0..layout.n_links {
        let j = layout
            .link_qubits(l)?
            .iter()
            .enumerate()
            .fold(0usize, |acc, (bit, &q)| acc | (index >> q & 1) << bit);
        let flux = (j < trunc.dim()).then(|| trunc.sz(j) + trunc.theta);
        links.push(link_symbol(flux));
    }
    if lat.dim() == 1 {
        let mut s = String::new();
        for (i, c) in sites.iter().enumerate() {
            s.push(*c);
            if let Some(l) = links.get(i) {
                s.push(*l);
            }
        }
        Ok(s)
    } else {
        let mut s: String = sites.into_iter().collect();
        s.push('/');
        s.extend(links);
        Ok(s)
    }
}

/// Marginal probability of every configuration label with nonzero weight.
pub fn configuration_probabilities(
    psi: &StateVector,
    lat: &Lattice,
    layout: &QubitLayout,
    trunc: SpinTruncation,
) -> Result<BTreeMap<String, f64>> {
    if psi.n_qubits() != layout.total_qubits {
        return Err(Error::SizeMismatch {
            left: layout.total_qubits,
            right: psi.n_qubits(),
        });
    }
    let mut out = BTreeMap::new();
    for (i, p) in psi.probabilities().into_iter().enumerate() {
        if p > 0.0 {
            *out.entry(configuration_label(i, lat, layout, trunc)?).or_insert(0.0) += p;
        }
    }
    Ok(out)
}

/// Model and initial state of a real-time run.
pub struct DynamicsSetup {
    pub lattice: Lattice,
    pub layout: QubitLayout,
    pub params: ModelParams,
    pub hamiltonian: PauliSum,
    pub gauss: Vec<PauliSum>,
    pub initial: StateVector,
}

impl DynamicsSetup {
    /// Chain of `sites` sites with default boundaries, started in the bare vacuum.
    pub fn chain(sites: usize, params: ModelParams) -> Result<Self> {
        let lattice = Lattice::with_default_boundary(1, &[sites])?;
        let layout = crate::encoding::default_layout(&lattice, params.trunc);
        let hs = model::build_hamiltonian(&lattice, &layout, &params)?;
        let initial = statesim::bare_vacuum(&lattice, &layout, params.trunc)?;
        Ok(Self {
            hamiltonian: hs.total.clone(),
            gauss: hs.gauss,
            lattice,
            layout,
            params,
            initial,
        })
    }

    /// Labels of every physical configuration, sorted.
    pub fn labels(&self) -> Result<Vec<String>> {
        let p = oracle::physical_projector(&self.gauss, self.layout.total_qubits)?;
        let mut labels = Vec::new();
        for s in p.states() {
            for (l, _) in configuration_probabilities(&s, &self.lattice, &self.layout, self.params.trunc)? {
                labels.push(l);
            }
        }
        labels.sort();
        labels.dedup();
        Ok(labels)
    }
}

/// One grid time of a representability run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicsRow {
    pub t: f64,
    pub overlap: f64,
    pub params: Vec<f64>,
    pub exact: BTreeMap<String, f64>,
    pub trial: BTreeMap<String, f64>,
    pub energy: f64,
    pub gauge_violation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicsRun {
    pub labels: Vec<String>,
    pub initial_label: String,
    pub rows: Vec<DynamicsRow>,
}

/// `0, dt, 2 dt, ...` up to `t_max` inclusive.
pub fn time_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && t_max >= 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidParam(format!("bad time grid t_max={t_max} dt={dt}")));
    }
    let n = (t_max / dt + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| k as f64 * dt).collect())
}

/// Exact evolution of the setup's initial state, with the trial family fitted
/// at every grid time. Each fit warm-starts from the previous optimum.
pub fn representability_run(
    setup: &DynamicsSetup,
    spec: &AnsatzSpec,
    t_max: f64,
    dt: f64,
    cfg: &OptimizerConfig,
) -> Result<DynamicsRun> {
    let times = time_grid(t_max, dt)?;
    let states = oracle::evolve(&setup.hamiltonian, &setup.initial, &times)?;
    let trunc = setup.params.trunc;
    let labels = setup.labels()?;
    let initial_label = {
        let probs = configuration_probabilities(&setup.initial, &setup.lattice, &setup.layout, trunc)?;
        probs.into_keys().next().unwrap_or_default()
    };
    let mut rows = Vec::with_capacity(times.len());
    let mut warm = vec![0.0; spec.n_params()];
    for (k, (&t, psi)) in times.iter().zip(&states).enumerate() {
        let step_cfg = OptimizerConfig {
            seed: cfg.seed.wrapping_add(k as u64),
            ..cfg.clone()
        };
        let (theta, overlap) = overlap_maximize(spec, &setup.initial, psi, &step_cfg, Some(&warm))?;
        let trial_state = spec.apply(&theta, &setup.initial)?;
        rows.push(DynamicsRow {
            t,
            overlap,
            exact: configuration_probabilities(psi, &setup.lattice, &setup.layout, trunc)?,
            trial: configuration_probabilities(&trial_state, &setup.lattice, &setup.layout, trunc)?,
            energy: statesim::expectation(&setup.hamiltonian, psi)?,
            gauge_violation: statesim::gauge_violation(&setup.gauss, psi)?,
            params: theta.clone(),
        });
        warm = theta;
    }
    Ok(DynamicsRun {
        labels,
        initial_label,
        rows,
    })
}

impl DynamicsRun {
    /// Probability of leaving the initial configuration, exact and trial.
    pub fn pair_probability(&self) -> (Vec<f64>, Vec<f64>) {
        let get = |m: &BTreeMap<String, f64>| 1.0 - m.get(&self.initial_label).copied().unwrap_or(0.0);
        (
            self.rows.iter().map(|r| get(&r.exact)).collect(),
            self.rows.iter().map(|r| get(&r.trial)).collect(),
        )
    }
}

/// Oscillation period from crossings of the series mean.
///
/// Returns twice the mean spacing of consecutive crossings, or `None` with
/// fewer than two crossings.
pub fn zero_crossing_period(t: &[f64], y: &[f64]) -> Option<f64> {
    if t.len() != y.len() || y.is_empty() {
        return None;
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let mut crossings = Vec::new();
    for i in 1..y.len() {
        let (a, b) = (y[i - 1] - mean, y[i] - mean);
        if a == 0.0 && i == 1 {
            crossings.push(t[0]);
        }
        if (a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0) {
            let frac = if b == a { 0.0 } else { a / (a - b) };
            crossings.push(t[i - 1] + frac * (t[i] - t[i - 1]));
        }
    }
    if crossings.len() < 2 {
        return None;
    }
    let span = crossings[crossings.len() - 1] - crossings[0];
    Some(2.0 * span / (crossings.len() - 1) as f64)
}

/// CNOTs of one first-order Trotter step: `2 (w - 1)` per string of weight `w`.
pub fn trotter_step_cnots(h: &PauliSum) -> usize {
    h.iter().map(|(p, _)| 2 * p.weight().saturating_sub(1)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn period_of_cosine() {
        let t: Vec<f64> = (0..400).map(|k| k as f64 * 0.05).collect();
        let y: Vec<f64> = t.iter().map(|x| (x * 2.0).cos()).collect();
        let p = zero_crossing_period(&t, &y).unwrap();
        assert!((p - std::f64::consts::PI).abs() < 1e-2, "{p}");
        assert!(zero_crossing_period(&t[..3], &[1.0, 1.0, 1.0]).is_none());
    }

    #[test]
    fn grid() {
        assert_eq!(time_grid(0.0, 0.1).unwrap(), vec![0.0]);
        assert_eq!(time_grid(1.0, 0.1).unwrap().len(), 11);
        assert!(time_grid(1.0, 0.0).is_err());
    }

    #[test]
    fn site_symbols() {
        assert_eq!(site_symbol(false, true), 'o');
        assert_eq!(site_symbol(true, false), 'b');
    }
}
