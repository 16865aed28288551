//! Experiment drivers. Each returns the data it wrote so callers and tests
//! can inspect results without re-reading files.

use std::collections::BTreeMap;

use anyhow::{bail, Result};
use gauge_circuits::ansatz::{self, AnsatzSpec};
use gauge_circuits::dynamics::{self, DynamicsSetup};
use gauge_circuits::encoding::{default_layout, QubitLayout};
use gauge_circuits::lattice::Lattice;
use gauge_circuits::model::{self, HamiltonianSet, ModelParams};
use gauge_circuits::oracle;
use gauge_circuits::statesim::{self, ShotPlan, StateVector};
use gauge_circuits::vqe::{self, EnergyMode, OptimizerConfig, VqeProblem, VqeResult};
use gauge_circuits::{par, qasm, C64};
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{num, Output, Table};

/// Lattice, layout and Hamiltonian at one mass.
pub struct Model {
    pub lattice: Lattice,
    pub layout: QubitLayout,
    pub params: ModelParams,
    pub hs: HamiltonianSet,
}

type CoreResult<T> = gauge_circuits::Result<T>;

impl Model {
    pub fn new(cfg: &RunConfig, m: f64) -> CoreResult<Self> {
        Self::with_extents(cfg, &cfg.extents, m)
    }

    pub fn with_extents(cfg: &RunConfig, extents: &[usize], m: f64) -> CoreResult<Self> {
        let lattice = Lattice::with_default_boundary(extents.len(), extents)?;
        let params = cfg.model(m)?;
        let layout = default_layout(&lattice, params.trunc);
        let hs = model::build_hamiltonian(&lattice, &layout, &params)?;
        Ok(Self {
            lattice,
            layout,
            params,
            hs,
        })
    }

    /// Gauge-invariant form matching the lattice dimension.
    pub fn structured_ansatz(&self) -> CoreResult<AnsatzSpec> {
        match self.lattice.dim() {
            1 => ansatz::build_1d_ansatz(&self.lattice, &self.layout, self.params.trunc),
            2 => ansatz::build_2d_ansatz(&self.lattice, &self.layout, self.params.trunc),
            d => Err(gauge_circuits::Error::UnsupportedDim(d)),
        }
    }

    pub fn vacuum(&self) -> CoreResult<StateVector> {
        statesim::bare_vacuum(&self.lattice, &self.layout, self.params.trunc)
    }

    pub fn links(&self) -> CoreResult<Vec<gauge_circuits::pauli::PauliSum>> {
        (0..self.lattice.n_links())
            .map(|l| model::link_flux_observable(l, &self.layout, self.params.trunc))
            .collect()
    }

    pub fn problem(&self, ansatz: AnsatzSpec, initial: StateVector, physical: &oracle::PhysicalSubspace) -> CoreResult<VqeProblem> {
        Ok(VqeProblem {
            hamiltonian: self.hs.total.clone(),
            ansatz,
            initial,
            number: model::particle_number(&self.lattice, &self.layout)?,
            links: self.links()?,
            physical: physical.clone(),
        })
    }
}

fn energy_mode(cfg: &RunConfig) -> EnergyMode {
    match cfg.vqe_shots {
        Some(shots) => EnergyMode::Sampled(ShotPlan {
            shots,
            grouping: cfg.noise.grouping,
            seed: cfg.seed,
        }),
        None => EnergyMode::Exact,
    }
}

fn physical(cfg: &RunConfig) -> Result<oracle::PhysicalSubspace> {
    let m = Model::new(cfg, cfg.m)?;
    Ok(oracle::physical_projector(&m.hs.gauss, m.layout.total_qubits)?)
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub mass: f64,
    pub result: VqeResult,
}

pub fn gs_sweep(cfg: &RunConfig, out: &mut Output) -> Result<Vec<SweepPoint>> {
    let phys = physical(cfg)?;
    let opt = cfg.optimizer();
    let mode = energy_mode(cfg);
    let rows = vqe::mass_sweep(
        |m| {
            let model = Model::new(cfg, m)?;
            model.problem(model.structured_ansatz()?, model.vacuum()?, &phys)
        },
        &cfg.masses,
        mode,
        &opt,
    )?;
    let n_links = Model::new(cfg, cfg.m)?.lattice.n_links();
    let mut header: Vec<String> = ["mass", "E_vqe", "E_exact", "rel_err", "N_vqe", "N_exact"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((0..n_links).map(|l| format!("L_{l}")));
    header.extend((0..n_links).map(|l| format!("L_exact_{l}")));
    let mut t = Table::new(header);
    let mut traces = Table::new(["mass", "restart", "iteration", "energy"]);
    for r in &rows {
        let v = &r.result;
        let mut row = vec![
            num(r.mass),
            num(v.best_energy),
            num(v.reference.energy),
            num(v.relative_error),
            num(v.number),
            num(v.reference.number),
        ];
        row.extend(v.links.iter().map(|&x| num(x)));
        row.extend(v.reference.links.iter().map(|&x| num(x)));
        t.push(row);
        for (k, tr) in v.restarts.iter().enumerate() {
            for (i, e) in tr.energies.iter().enumerate() {
                traces.push(vec![num(r.mass), k.to_string(), i.to_string(), num(*e)]);
            }
        }
    }
    out.csv("gs_sweep.csv", &t)?;
    out.csv("gs_sweep_traces.csv", &traces)?;
    let points: Vec<SweepPoint> = rows
        .into_iter()
        .map(|r| SweepPoint {
            mass: r.mass,
            result: r.result,
        })
        .collect();
    let sidecar: Vec<_> = points
        .iter()
        .map(|p| {
            json!({
                "mass": p.mass,
                "best_params": p.result.best_params,
                "best_energy": p.result.best_energy,
                "restart_seeds": (0..p.result.restarts.len()).map(|k| json!([cfg.seed, k])).collect::<Vec<_>>(),
                "restart_initial": p.result.restarts.iter().map(|r| r.initial.clone()).collect::<Vec<_>>(),
                "restart_best": p.result.restarts.iter().map(|r| r.best_energy).collect::<Vec<_>>(),
            })
        })
        .collect();
    out.json("gs_sweep.json", &json!({ "config": cfg, "energy_mode": mode, "points": sidecar }))?;
    Ok(points)
}

#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    pub ansatz: String,
    pub n_params: usize,
    pub relative_errors: Vec<f64>,
    pub median: f64,
}

pub fn compare_ansatz(cfg: &RunConfig, out: &mut Output) -> Result<Vec<Comparison>> {
    let phys = physical(cfg)?;
    let mode = energy_mode(cfg);
    let n = Model::new(cfg, cfg.m)?.layout.total_qubits;
    let mut forms: Vec<(String, Option<ansatz::AnsatzSpec>, OptimizerConfig)> =
        vec![("structured".into(), None, cfg.optimizer())];
    for &k in &cfg.heuristic.kinds {
        let spec = ansatz::build_heuristic(k, n, cfg.heuristic.depth, cfg.heuristic.entanglement);
        let name = serde_json::to_value(k)?.as_str().unwrap_or("heuristic").to_string();
        let opt = OptimizerConfig {
            restarts: cfg.heuristic.restarts,
            ..cfg.optimizer()
        };
        forms.push((name, Some(spec), opt));
    }
    let runs: Vec<Result<Vec<VqeResult>>> = par::map(&cfg.masses, |&m| {
        let model = Model::new(cfg, m)?;
        forms
            .iter()
            .map(|(_, spec, opt)| {
                let (a, init) = match spec {
                    None => (model.structured_ansatz()?, model.vacuum()?),
                    Some(s) => (s.clone(), StateVector::zero_state(n)?),
                };
                Ok(model.problem(a, init, &phys)?.run(mode, opt)?)
            })
            .collect()
    });
    let runs: Vec<Vec<VqeResult>> = runs.into_iter().collect::<Result<_>>()?;
    let mut t = Table::new(["mass", "ansatz", "n_params", "E_vqe", "E_exact", "rel_err", "N_vqe", "N_exact"]);
    for (m, rs) in cfg.masses.iter().zip(&runs) {
        for ((name, spec, _), r) in forms.iter().zip(rs) {
            let np = match spec {
                Some(s) => s.n_params(),
                None => r.best_params.len(),
            };
            t.push(vec![
                num(*m),
                name.clone(),
                np.to_string(),
                num(r.best_energy),
                num(r.reference.energy),
                num(r.relative_error),
                num(r.number),
                num(r.reference.number),
            ]);
        }
    }
    out.csv("compare_ansatz.csv", &t)?;
    let summary: Vec<Comparison> = forms
        .iter()
        .enumerate()
        .map(|(k, (name, _, _))| {
            let errs: Vec<f64> = runs.iter().map(|rs| rs[k].relative_error).collect();
            Comparison {
                ansatz: name.clone(),
                n_params: runs.first().map_or(0, |rs| rs[k].best_params.len()),
                median: median(errs.clone()),
                relative_errors: errs,
            }
        })
        .collect();
    out.json("compare_ansatz.json", &json!({ "config": cfg, "summary": summary }))?;
    Ok(summary)
}

#[derive(Clone, Debug, Serialize)]
pub struct DynamicsSummary {
    pub labels: Vec<String>,
    pub initial_label: String,
    pub min_overlap: f64,
    pub period_exact: Option<f64>,
    pub period_trial: Option<f64>,
    pub max_energy_drift: f64,
    pub max_gauge_violation: f64,
    pub trotter_step_cnots: usize,
    pub final_params: Vec<f64>,
}

pub fn dynamics(cfg: &RunConfig, out: &mut Output) -> Result<(DynamicsSummary, dynamics::DynamicsRun)> {
    if cfg.dim != 1 {
        bail!("dynamics runs on chains only (dim 1)");
    }
    let setup = DynamicsSetup::chain(cfg.extents[0], cfg.model(cfg.m)?)?;
    let spec = ansatz::build_1d_ansatz(&setup.lattice, &setup.layout, setup.params.trunc)?;
    let run = dynamics::representability_run(&setup, &spec, cfg.dynamics.t_max, cfg.dynamics.dt, &cfg.optimizer())?;
    let mut header = vec!["t".to_string(), "overlap".to_string()];
    for l in &run.labels {
        header.push(format!("exact_p({l})"));
        header.push(format!("trial_p({l})"));
    }
    let mut t = Table::new(header);
    let mut params = Table::new(std::iter::once("t".to_string()).chain(spec.param_names.iter().cloned()));
    for r in &run.rows {
        let mut row = vec![num(r.t), num(r.overlap)];
        for l in &run.labels {
            row.push(num(r.exact.get(l).copied().unwrap_or(0.0)));
            row.push(num(r.trial.get(l).copied().unwrap_or(0.0)));
        }
        t.push(row);
        params.push(std::iter::once(num(r.t)).chain(r.params.iter().map(|&x| num(x))).collect());
    }
    out.csv("dynamics.csv", &t)?;
    out.csv("dynamics_params.csv", &params)?;
    let times: Vec<f64> = run.rows.iter().map(|r| r.t).collect();
    let (pe, pt) = run.pair_probability();
    let e0 = run.rows.first().map_or(0.0, |r| r.energy);
    let summary = DynamicsSummary {
        labels: run.labels.clone(),
        initial_label: run.initial_label.clone(),
        min_overlap: run.rows.iter().map(|r| r.overlap).fold(1.0, f64::min),
        period_exact: dynamics::zero_crossing_period(&times, &pe),
        period_trial: dynamics::zero_crossing_period(&times, &pt),
        max_energy_drift: run.rows.iter().map(|r| (r.energy - e0).abs()).fold(0.0, f64::max),
        max_gauge_violation: run.rows.iter().map(|r| r.gauge_violation).fold(0.0, f64::max),
        trotter_step_cnots: dynamics::trotter_step_cnots(&setup.hamiltonian),
        final_params: run.rows.last().map(|r| r.params.clone()).unwrap_or_default(),
    };
    out.json("dynamics.json", &json!({ "config": cfg, "summary": summary }))?;
    Ok((summary, run))
}

/// Equal superposition of every gauge-invariant basis configuration.
pub fn physical_superposition(model: &Model) -> Result<StateVector> {
    let idx = oracle::physical_configurations(&model.hs.gauss, model.layout.total_qubits)?;
    if idx.is_empty() {
        bail!("no gauge-invariant configuration");
    }
    let mut amps = vec![C64::default(); 1 << model.layout.total_qubits];
    for i in idx {
        amps[i] = C64::new(1.0, 0.0);
    }
    Ok(StateVector::from_amplitudes(amps)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct NoiseSummary {
    /// Least-squares slope of `ln sigma` against `ln shots`.
    pub slope: f64,
    /// Largest `|mean - exact| / sigma` over the shot list.
    pub max_z: f64,
    pub sigma_over_lambda: Vec<(usize, f64)>,
}

fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

pub fn noise_study(cfg: &RunConfig, out: &mut Output) -> Result<NoiseSummary> {
    let model = Model::new(cfg, cfg.m)?;
    let state = physical_superposition(&model)?;
    let exact = statesim::expectation(&model.hs.penalty, &state)?;
    let mut shots_t = Table::new(["shots", "mean", "stddev", "exact"]);
    let mut lx = vec![];
    let mut ly = vec![];
    let mut max_z: f64 = 0.0;
    for &shots in &cfg.noise.shots_list {
        let plan = ShotPlan {
            shots,
            grouping: cfg.noise.grouping,
            seed: cfg.seed,
        };
        let e = statesim::sampled_expectation(&model.hs.penalty, &state, &plan)?;
        shots_t.push(vec![shots.to_string(), num(e.mean), num(e.stddev), num(exact)]);
        lx.push((shots as f64).ln());
        ly.push(e.stddev.ln());
        if e.stddev > 0.0 {
            max_z = max_z.max((e.mean - exact).abs() / e.stddev);
        }
    }
    out.csv("noise_shots.csv", &shots_t)?;
    let mut size_t = Table::new(["sites", "qubits", "terms", "mean", "stddev", "sigma_over_lambda"]);
    let mut sol = vec![];
    for &sites in &cfg.noise.sites {
        let chain = RunConfig {
            dim: 1,
            extents: vec![sites],
            ..cfg.clone()
        };
        let mdl = Model::new(&chain, cfg.m)?;
        let s = physical_superposition(&mdl)?;
        let plan = ShotPlan {
            shots: cfg.noise.shots,
            grouping: cfg.noise.grouping,
            seed: cfg.seed,
        };
        let e = statesim::sampled_expectation(&mdl.hs.penalty, &s, &plan)?;
        let r = if cfg.lambda > 0.0 { e.stddev / cfg.lambda } else { f64::NAN };
        sol.push((sites, r));
        size_t.push(vec![
            sites.to_string(),
            mdl.layout.total_qubits.to_string(),
            mdl.hs.penalty.len().to_string(),
            num(e.mean),
            num(e.stddev),
            num(r),
        ]);
    }
    out.csv("noise_sizes.csv", &size_t)?;
    let summary = NoiseSummary {
        slope: if lx.len() >= 2 { fit_slope(&lx, &ly) } else { f64::NAN },
        max_z,
        sigma_over_lambda: sol,
    };
    out.json("noise_study.json", &json!({ "config": cfg, "summary": summary }))?;
    Ok(summary)
}

/// One line of the `verify` report.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: String,
    pub passed: bool,
}

fn check(name: &str, value: impl ToString, passed: bool) -> Check {
    Check {
        name: name.into(),
        value: value.to_string(),
        passed,
    }
}

pub fn verify(cfg: &RunConfig, out: &mut Output) -> Result<Vec<Check>> {
    let model = Model::new(cfg, cfg.m)?;
    let n = model.layout.total_qubits;
    let mut checks = vec![];
    let phys = oracle::physical_projector(&model.hs.gauss, n)?;
    let expected_kernel = match (cfg.dim, cfg.extents.as_slice()) {
        (1, [2]) => Some(5),
        _ => None,
    };
    checks.push(check("kernel_dim", phys.dim(), expected_kernel.map_or(phys.dim() > 0, |k| k == phys.dim())));
    let penalty_on_kernel = phys
        .states()
        .iter()
        .map(|s| statesim::expectation(&model.hs.penalty, s).map(f64::abs))
        .collect::<gauge_circuits::Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(check("penalty_on_kernel", num(penalty_on_kernel), penalty_on_kernel < 1e-9));
    let h_comm = model
        .hs
        .gauss
        .iter()
        .map(|g| model.hs.physical().commutator(g).map(|c| c.one_norm()))
        .collect::<gauge_circuits::Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(check("hamiltonian_gauss_commutator", num(h_comm), h_comm < 1e-10));
    let spec = model.structured_ansatz()?;
    let hop = &spec.factors[0];
    checks.push(check("hop_strings", hop.strings().len(), cfg.dim != 1 || hop.strings().len() == 4));
    checks.push(check("hop_strings_commute", hop.strings_commute(), hop.strings_commute()));
    let report = ansatz::verify_gauge_invariance(&spec, &model.hs.gauss, cfg.seed)?;
    checks.push(check("ansatz_gauss_commutator", num(report.max_norm), report.passed));
    let params: Vec<f64> = (0..spec.n_params()).map(|k| 0.3 + 0.17 * k as f64).collect();
    let circuit = ansatz::compile(&spec, &params)?;
    let expected_cnots = match (cfg.dim, cfg.extents.as_slice()) {
        (1, [2]) => Some((16, 3)),
        (1, [3]) => Some((32, 5)),
        _ => None,
    };
    checks.push(check(
        "cnot_count",
        circuit.cnot_count(),
        expected_cnots.is_none_or(|(c, _)| c == circuit.cnot_count()),
    ));
    checks.push(check(
        "n_params",
        spec.n_params(),
        expected_cnots.is_none_or(|(_, p)| p == spec.n_params()),
    ));
    if n <= oracle::DENSE_LIMIT {
        let err = oracle::phase_distance(
            &statesim::circuit_unitary(&circuit)?,
            &oracle::ansatz_unitary(&spec, &params)?,
        );
        checks.push(check("circuit_vs_exact", num(err), err < 1e-9));
    }
    let state = spec.apply(&params, &model.vacuum()?)?;
    let gv = statesim::gauge_violation(&model.hs.gauss, &state)?;
    checks.push(check("trial_state_gauss_residual", num(gv), gv < 1e-9));
    let mut t = Table::new(["check", "value", "passed"]);
    for c in &checks {
        t.push(vec![c.name.clone(), c.value.clone(), c.passed.to_string()]);
    }
    out.csv("verify.csv", &t)?;
    out.json("verify.json", &json!({ "config": cfg, "checks": checks }))?;
    Ok(checks)
}

/// Writes the Hamiltonian, its components and the Gauss operators as Pauli text.
pub fn dump_hamiltonian(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let model = Model::new(cfg, cfg.m)?;
    out.text("hamiltonian.txt", &model.hs.total.to_text())?;
    let comps: BTreeMap<&str, String> = model.hs.components().iter().map(|(k, v)| (*k, v.to_text())).collect();
    let gauss: Vec<String> = model.hs.gauss.iter().map(|g| g.to_text()).collect();
    out.json(
        "hamiltonian.json",
        &json!({
            "n_qubits": model.layout.total_qubits,
            "params": model.params,
            "components": comps,
            "gauss": gauss,
        }),
    )?;
    out.json("lattice.json", &model.lattice.manifest())?;
    out.json("layout.json", &model.layout)?;
    Ok(())
}

/// Writes the structured circuit as OpenQASM with a parameter sidecar.
pub fn export_circuit(cfg: &RunConfig, params: Option<&[f64]>, out: &mut Output) -> Result<()> {
    let model = Model::new(cfg, cfg.m)?;
    let spec = model.structured_ansatz()?;
    let p: Vec<f64> = match params.or(cfg.circuit_params.as_deref()) {
        Some(p) => p.to_vec(),
        None => vec![0.0; spec.n_params()],
    };
    let circuit = ansatz::compile(&spec, &p)?;
    out.text("circuit.qasm", &qasm::to_qasm(&circuit))?;
    out.json("circuit.meta.json", &qasm::circuit_meta(&circuit))?;
    Ok(())
}
