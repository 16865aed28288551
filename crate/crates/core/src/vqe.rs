//! Derivative-free variational optimization and mass sweeps.
//!
//! Restarts draw their initial points from a ChaCha8 stream keyed by
//! `(seed, restart)`, so results do not depend on the worker count.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::AnsatzSpec;
use crate::error::{Error, Result};
use crate::oracle::{self, PhysicalSubspace};
use crate::pauli::{PauliOperator, PauliSum};
use crate::sparse::CsrMatrix;
use crate::statesim::{self, ShotPlan, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Spsa,
    Simplex,
}

/// SPSA gains `a_k = a / (k + 1 + A)^alpha`, `c_k = c / (k + 1)^gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpsaParams {
    /// `None` picks `a` so the first step is about 0.1 rad per unit gradient.
    pub a: Option<f64>,
    pub c: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// Stability constant; `None` means `0.1 * max_iters`.
    pub big_a: Option<f64>,
}

impl Default for SpsaParams {
    fn default() -> Self {
        Self {
            a: None,
            c: 0.1,
            alpha: 0.602,
            gamma: 0.101,
            big_a: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub method: Method,
    pub max_iters: usize,
    pub restarts: usize,
    pub init_range: (f64, f64),
    pub seed: u64,
    #[serde(default)]
    pub spsa: SpsaParams,
    /// Initial simplex edge length.
    #[serde(default = "default_step")]
    pub simplex_step: f64,
}

fn default_step() -> f64 {
    0.5
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: Method::Simplex,
            max_iters: 2000,
            restarts: 5,
            init_range: (-PI, PI),
            seed: 0,
            spsa: SpsaParams::default(),
            simplex_step: default_step(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(Error::InvalidParam("restarts and max_iters must be at least 1".into()));
        }
        let (lo, hi) = self.init_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidParam(format!("bad init range ({lo}, {hi})")));
        }
        Ok(())
    }
}

/// One optimizer run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartTrace {
    pub initial: Vec<f64>,
    /// Objective at the current iterate after each iteration.
    pub energies: Vec<f64>,
    pub best_params: Vec<f64>,
    pub best_energy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimResult {
    pub best_params: Vec<f64>,
    pub best_energy: f64,
    pub restarts: Vec<RestartTrace>,
}

/// Best of `cfg.restarts` runs from uniform random starts.
pub fn minimize<F>(f: F, n_params: usize, cfg: &OptimizerConfig) -> Result<OptimResult>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    minimize_from(f, n_params, cfg, &[])
}

/// Like [`minimize`], with explicit starting points run before the random ones.
pub fn minimize_from<F>(f: F, n_params: usize, cfg: &OptimizerConfig, starts: &[Vec<f64>]) -> Result<OptimResult>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    cfg.validate()?;
    for s in starts {
        if s.len() != n_params {
            return Err(Error::ParamLength {
                got: s.len(),
                expected: n_params,
            });
        }
    }
    let total = starts.len() + cfg.restarts;
    let runs = crate::par::map_range(total, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(k as u64);
        let x0 = match starts.get(k) {
            Some(s) => s.clone(),
            None => {
                let (lo, hi) = cfg.init_range;
                (0..n_params)
                    .map(|_| if hi > lo { rng.gen_range(lo..hi) } else { lo })
                    .collect()
            }
        };
        match cfg.method {
            Method::Spsa => spsa(&f, x0, cfg, &mut rng),
            Method::Simplex => nelder_mead(&f, x0, cfg),
        }
    });
    let mut best = 0;
    for (k, r) in runs.iter().enumerate() {
        if r.best_energy < runs[best].best_energy {
            best = k;
        }
    }
    Ok(OptimResult {
        best_params: runs[best].best_params.clone(),
        best_energy: runs[best].best_energy,
        restarts: runs,
    })
}

fn spsa<F: Fn(&[f64]) -> f64>(f: &F, x0: Vec<f64>, cfg: &OptimizerConfig, rng: &mut ChaCha8Rng) -> RestartTrace {
    let p = cfg.spsa;
    let big_a = p.big_a.unwrap_or(0.1 * cfg.max_iters as f64);
    let a = p.a.unwrap_or(0.1 * (1.0 + big_a).powf(p.alpha));
    let mut x = x0.clone();
    let mut best_params = x.clone();
    let mut best_energy = f(&x);
    let mut energies = Vec::with_capacity(cfg.max_iters);
    for k in 0..cfg.max_iters {
        let ak = a / (k as f64 + 1.0 + big_a).powf(p.alpha);
        let ck = p.c / (k as f64 + 1.0).powf(p.gamma);
        let delta: Vec<f64> = x.iter().map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
        let plus: Vec<f64> = x.iter().zip(&delta).map(|(xi, d)| xi + ck * d).collect();
        let minus: Vec<f64> = x.iter().zip(&delta).map(|(xi, d)| xi - ck * d).collect();
        let diff = (f(&plus) - f(&minus)) / (2.0 * ck);
        for (xi, d) in x.iter_mut().zip(&delta) {
            *xi -= ak * diff / d;
        }
        let e = f(&x);
        energies.push(e);
        if e < best_energy {
            best_energy = e;
            best_params = x.clone();
        }
    }
    RestartTrace {
        initial: x0,
        energies,
        best_params,
        best_energy,
    }
}

/// Nelder-Mead with reflection 1, expansion 2, contraction 1/2, shrink 1/2.
fn nelder_mead<F: Fn(&[f64]) -> f64>(f: &F, x0: Vec<f64>, cfg: &OptimizerConfig) -> RestartTrace {
    const DIAMETER_TOL: f64 = 1e-6;
    let n = x0.len();
    if n == 0 {
        let e = f(&x0);
        return RestartTrace {
            initial: x0,
            energies: vec![e],
            best_params: vec![],
            best_energy: e,
        };
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x0.clone(), f(&x0))];
    for i in 0..n {
        let mut v = x0.clone();
        v[i] += cfg.simplex_step;
        let e = f(&v);
        simplex.push((v, e));
    }
    let mut energies = Vec::new();
    let lin = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(ai, bi)| ai + t * (bi - ai)).collect() };
    for _ in 0..cfg.max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        energies.push(simplex[0].1);
        let diameter = simplex[1..]
            .iter()
            .map(|(v, _)| v.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if diameter < DIAMETER_TOL {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (v, _) in &simplex[..n] {
            centroid.iter_mut().zip(v).for_each(|(c, x)| *c += x / n as f64);
        }
        let worst = simplex[n].clone();
        let xr = lin(&centroid, &worst.0, -1.0);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = lin(&centroid, &worst.0, -2.0);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let xc = lin(&centroid, &xr, 0.5);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = lin(&centroid, &worst.0, 0.5);
            let fc = f(&xc);
            (xc, fc)
        };
        if fc < fr.min(worst.1) {
            simplex[n] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for (v, e) in simplex.iter_mut().skip(1) {
            *v = lin(&best, v, 0.5);
            *e = f(v);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (best_params, best_energy) = simplex.swap_remove(0);
    RestartTrace {
        initial: x0,
        energies,
        best_params,
        best_energy,
    }
}

/// How the energy of a trial state is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum EnergyMode {
    Exact,
    /// Shot-based; the sampling seed mixes the plan seed with the parameter bits,
    /// so the objective is a deterministic function of its argument.
    Sampled(ShotPlan),
}

/// Everything needed to run VQE at one parameter point.
pub struct VqeProblem {
    pub hamiltonian: PauliSum,
    pub ansatz: AnsatzSpec,
    pub initial: StateVector,
    pub number: PauliSum,
    pub links: Vec<PauliSum>,
    pub physical: PhysicalSubspace,
}

/// Oracle values on the physical sector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub energy: f64,
    pub number: f64,
    pub links: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VqeResult {
    pub best_params: Vec<f64>,
    pub best_energy: f64,
    pub restarts: Vec<RestartTrace>,
    pub number: f64,
    pub links: Vec<f64>,
    pub reference: Reference,
    pub relative_error: f64,
}

fn mix(seed: u64, params: &[f64]) -> u64 {
    // FNV-1a over the parameter bit patterns.
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ seed;
    for p in params {
        for b in p.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100_0000_01b3);
        }
    }
    h
}

impl VqeProblem {
    pub fn state(&self, params: &[f64]) -> Result<StateVector> {
        self.ansatz.apply(params, &self.initial)
    }

    /// Objective for the optimizer. Errors map to `+inf`.
    pub fn energy_fn(&self, mode: EnergyMode) -> impl Fn(&[f64]) -> f64 + Sync + Send + '_ {
        let op = PauliOperator::new(&self.hamiltonian);
        let csr = (op.n_qubits() <= crate::pauli::MAX_MATRIX_QUBITS).then(|| CsrMatrix::from_pauli(&op));
        move |x: &[f64]| {
            let Ok(s) = self.state(x) else { return f64::INFINITY };
            match mode {
                EnergyMode::Exact => match &csr {
                    Some(m) => m.expectation(s.amplitudes()).re,
                    None => statesim::expectation_op(&op, &s),
                },
                EnergyMode::Sampled(plan) => {
                    let plan = ShotPlan {
                        seed: mix(plan.seed, x),
                        ..plan
                    };
                    statesim::sampled_expectation(&self.hamiltonian, &s, &plan)
                        .map(|e| e.mean)
                        .unwrap_or(f64::INFINITY)
                }
            }
        }
    }

    pub fn reference(&self) -> Result<Reference> {
        let (energy, gs) = oracle::physical_ground_state(&self.hamiltonian, &self.physical)?;
        Ok(Reference {
            energy,
            number: statesim::expectation(&self.number, &gs)?,
            links: self
                .links
                .iter()
                .map(|l| statesim::expectation(l, &gs))
                .collect::<Result<_>>()?,
        })
    }

    pub fn run(&self, mode: EnergyMode, cfg: &OptimizerConfig) -> Result<VqeResult> {
        let reference = self.reference()?;
        let opt = minimize(self.energy_fn(mode), self.ansatz.n_params(), cfg)?;
        let s = self.state(&opt.best_params)?;
        // Report the exact energy of the optimum even in sampled mode.
        let best_energy = statesim::expectation(&self.hamiltonian, &s)?;
        Ok(VqeResult {
            relative_error: (best_energy - reference.energy).abs() / reference.energy.abs(),
            number: statesim::expectation(&self.number, &s)?,
            links: self.links.iter().map(|l| statesim::expectation(l, &s)).collect::<Result<_>>()?,
            best_params: opt.best_params,
            best_energy,
            restarts: opt.restarts,
            reference,
        })
    }
}

/// One mass point of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub mass: f64,
    pub result: VqeResult,
}

/// Runs VQE at every mass; mass points run concurrently.
pub fn mass_sweep<B>(build: B, masses: &[f64], mode: EnergyMode, cfg: &OptimizerConfig) -> Result<Vec<SweepRow>>
where
    B: Fn(f64) -> Result<VqeProblem> + Sync + Send,
{
    crate::par::map(masses, |&m| {
        let p = build(m)?;
        Ok(SweepRow {
            mass: m,
            result: p.run(mode, cfg)?,
        })
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_finds_bowl_minimum() {
        let cfg = OptimizerConfig {
            max_iters: 200,
            restarts: 1,
            ..Default::default()
        };
        let r = minimize(|x: &[f64]| x.iter().map(|v| v * v).sum(), 3, &cfg).unwrap();
        let norm = r.best_params.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(norm < 1e-4, "{norm}");
    }

    #[test]
    fn spsa_descends() {
        let cfg = OptimizerConfig {
            method: Method::Spsa,
            max_iters: 300,
            restarts: 2,
            init_range: (-1.0, 1.0),
            ..Default::default()
        };
        let f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let r = minimize(f, 2, &cfg).unwrap();
        assert!(r.best_energy < 1e-2, "{}", r.best_energy);
        assert_eq!(r.restarts.len(), 2);
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = OptimizerConfig {
            restarts: 3,
            max_iters: 50,
            ..Default::default()
        };
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + x[1].sin();
        assert_eq!(minimize(f, 2, &cfg).unwrap(), minimize(f, 2, &cfg).unwrap());
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = OptimizerConfig {
            restarts: 0,
            ..Default::default()
        };
        assert!(minimize(|_: &[f64]| 0.0, 1, &cfg).is_err());
        assert!(minimize_from(|_: &[f64]| 0.0, 2, &OptimizerConfig::default(), &[vec![0.0]]).is_err());
    }
}
