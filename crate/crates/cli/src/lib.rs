//! Command-line front end for the gauge-circuits experiments.
//!
//! Every subcommand writes CSV and JSON into `--out-dir` plus a
//! `<command>.manifest.json` listing the resolved configuration, seed and
//! output files. Given the same manifest, CSV output is byte-identical.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};
use gauge_circuits::statesim::Grouping;
use serde_json::json;

use config::{Preset, RunConfig};
use output::Output;

#[derive(Debug, Parser)]
#[command(name = "gauge-circuits", version, about = "Quantum-link lattice gauge experiments")]
pub struct Cli {
    /// JSON config overriding the preset.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base parameter set; defaults depend on the subcommand.
    #[arg(long, global = true, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// Shots per energy evaluation (sweeps) or per term (noise-study size scan).
    #[arg(long, global = true)]
    pub shots: Option<u64>,
    /// `per_term` or `grouped`.
    #[arg(long, global = true)]
    pub grouping: Option<Grouping>,
    /// Also write the Hamiltonian at the configured mass.
    #[arg(long, global = true)]
    pub dump_hamiltonian: bool,
    /// Also write the structured circuit as OpenQASM.
    #[arg(long, global = true)]
    pub export_circuit: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// VQE mass sweep against exact diagonalization.
    GsSweep {
        /// Lattice dimension; selects the fig2b (1) or fig2c (2) preset.
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Structured ansatz against hardware-style forms with the penalty term.
    CompareAnsatz,
    /// Real-time representability run.
    Dynamics,
    /// Shot-noise scaling of the penalty term.
    NoiseStudy,
    /// Gauge, projector and circuit checks.
    Verify,
    /// Hamiltonian and circuit export.
    Export {
        #[arg(long)]
        circuit: bool,
        #[arg(long)]
        hamiltonian: bool,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GsSweep { .. } => "gs-sweep",
            Command::CompareAnsatz => "compare-ansatz",
            Command::Dynamics => "dynamics",
            Command::NoiseStudy => "noise-study",
            Command::Verify => "verify",
            Command::Export { .. } => "export",
        }
    }

    fn default_preset(&self) -> Preset {
        match self {
            Command::GsSweep { dim: Some(2) } => Preset::Fig2c,
            Command::Dynamics => Preset::Fig3,
            Command::NoiseStudy => Preset::Fig8,
            _ => Preset::Fig2b,
        }
    }
}

/// Files produced by one invocation.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub command: String,
    pub out_dir: PathBuf,
    pub files: Vec<String>,
    /// Human-readable result lines.
    pub report: Vec<String>,
}

/// Preset, then file, then flags.
pub fn resolve(cli: &Cli) -> Result<RunConfig> {
    let (file_preset, file) = match &cli.config {
        Some(p) => {
            let (pr, v) = RunConfig::read_file(p)?;
            (pr, Some(v))
        }
        None => (None, None),
    };
    let base = cli.preset.or(file_preset).unwrap_or_else(|| cli.command.default_preset());
    let mut flags = serde_json::Map::new();
    if let Some(s) = cli.seed {
        flags.insert("seed".into(), json!(s));
    }
    if let Command::GsSweep { dim: Some(d) } = cli.command {
        flags.insert("dim".into(), json!(d));
    }
    if let Some(g) = cli.grouping {
        flags.insert("noise".into(), json!({ "grouping": g }));
    }
    if let Some(s) = cli.shots {
        match cli.command {
            Command::NoiseStudy => {
                let noise = flags.entry("noise").or_insert_with(|| json!({}));
                noise["shots"] = json!(s);
            }
            _ => {
                flags.insert("vqe_shots".into(), json!(s));
            }
        }
    }
    let mut merged = file.unwrap_or_else(|| json!({}));
    if let (Some(m), serde_json::Value::Object(f)) = (merged.as_object_mut(), serde_json::Value::Object(flags)) {
        for (k, v) in f {
            match (m.get_mut(&k), v) {
                (Some(serde_json::Value::Object(slot)), serde_json::Value::Object(o)) => slot.extend(o),
                (_, v) => {
                    m.insert(k, v);
                }
            }
        }
    }
    merged.as_object_mut().map(|m| m.insert("preset".into(), json!(base)));
    RunConfig::from_value(base, Some(merged))
}

/// Parses `args` and runs the subcommand.
pub fn run<I, T>(args: I) -> Result<RunSummary>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    execute(&cli)
}

pub fn execute(cli: &Cli) -> Result<RunSummary> {
    let cfg = resolve(cli)?;
    gauge_circuits::par::with_workers(cli.workers, || dispatch(cli, &cfg))
}

fn dispatch(cli: &Cli, cfg: &RunConfig) -> Result<RunSummary> {
    let mut out = Output::new(&cli.out_dir)?;
    let mut report = vec![];
    let mut circuit_params: Option<Vec<f64>> = None;
    let (mut dump, mut circuit) = (cli.dump_hamiltonian, cli.export_circuit);
    match &cli.command {
        Command::GsSweep { .. } => {
            let pts = commands::gs_sweep(cfg, &mut out)?;
            for p in &pts {
                report.push(format!(
                    "m={:.3} E_vqe={:.6} E_exact={:.6} rel_err={:.2e} N={:.3}",
                    p.mass, p.result.best_energy, p.result.reference.energy, p.result.relative_error, p.result.number
                ));
            }
            circuit_params = pts
                .iter()
                .min_by(|a, b| (a.mass - cfg.m).abs().total_cmp(&(b.mass - cfg.m).abs()))
                .map(|p| p.result.best_params.clone());
        }
        Command::CompareAnsatz => {
            for c in commands::compare_ansatz(cfg, &mut out)? {
                report.push(format!("{}: params={} median_rel_err={:.3e}", c.ansatz, c.n_params, c.median));
            }
        }
        Command::Dynamics => {
            let (s, _) = commands::dynamics(cfg, &mut out)?;
            report.push(format!(
                "min_overlap={:.4} period_exact={:?} period_trial={:?} energy_drift={:.1e} gauss={:.1e} trotter_cnots={}",
                s.min_overlap, s.period_exact, s.period_trial, s.max_energy_drift, s.max_gauge_violation, s.trotter_step_cnots
            ));
            circuit_params = Some(s.final_params);
        }
        Command::NoiseStudy => {
            let s = commands::noise_study(cfg, &mut out)?;
            report.push(format!("slope={:.4} max_z={:.2}", s.slope, s.max_z));
            for (m, r) in s.sigma_over_lambda {
                report.push(format!("sites={m} sigma/lambda={r:.5}"));
            }
        }
        Command::Verify => {
            for c in commands::verify(cfg, &mut out)? {
                report.push(format!("{:<28} {:>24} {}", c.name, c.value, if c.passed { "PASS" } else { "FAIL" }));
            }
        }
        Command::Export { circuit: c, hamiltonian: h } => {
            let both = !c && !h;
            dump |= *h || both;
            circuit |= *c || both;
        }
    }
    if dump {
        commands::dump_hamiltonian(cfg, &mut out)?;
    }
    if circuit {
        commands::export_circuit(cfg, circuit_params.as_deref(), &mut out)?;
    }
    let name = cli.command.name();
    let manifest = json!({
        "command": name,
        "version": env!("CARGO_PKG_VERSION"),
        "preset": cfg.preset,
        "seed": cfg.seed,
        "workers": cli.workers,
        "config": cfg,
        "outputs": out.files(),
    });
    out.json(&format!("{name}.manifest.json"), &manifest)?;
    Ok(RunSummary {
        command: name.into(),
        out_dir: out.dir().to_path_buf(),
        files: out.files().to_vec(),
        report,
    })
}
