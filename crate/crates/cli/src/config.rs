//! Run configuration: presets, JSON files and flag overrides.
//!
//! Resolution order is preset, then config file, then command-line flags.
//! The file is a JSON object whose keys are a subset of [`RunConfig`];
//! nested objects merge key by key.

use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use gauge_circuits::ansatz::{Entanglement, HeuristicKind};
use gauge_circuits::encoding::SpinTruncation;
use gauge_circuits::model::ModelParams;
use gauge_circuits::statesim::Grouping;
use gauge_circuits::vqe::OptimizerConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Named parameter sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Two-site chain mass sweep, `g = 4`.
    Fig2b,
    /// Single plaquette mass sweep, `g = 3`.
    Fig2c,
    /// Three-site real-time run, `g = 3`, `m = 1`.
    Fig3,
    /// Penalty sampling study.
    Fig8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeuristicConfig {
    pub kinds: Vec<HeuristicKind>,
    pub depth: usize,
    pub entanglement: Entanglement,
    pub restarts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    pub t_max: f64,
    pub dt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Shot counts of the scaling study on the configured lattice.
    pub shots_list: Vec<u64>,
    /// Chain lengths of the size study.
    pub sites: Vec<usize>,
    /// Shots per term in the size study.
    pub shots: u64,
    pub grouping: Grouping,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Preset,
    pub dim: usize,
    pub extents: Vec<usize>,
    /// Mass for single-point commands.
    pub m: f64,
    pub g: f64,
    pub a: f64,
    pub r: f64,
    pub lambda: f64,
    pub spin: f64,
    pub theta: f64,
    pub masses: Vec<f64>,
    pub optimizer: OptimizerConfig,
    pub heuristic: HeuristicConfig,
    pub dynamics: DynamicsConfig,
    pub noise: NoiseConfig,
    /// Shots per energy evaluation in sweeps; absent means exact energies.
    pub vqe_shots: Option<u64>,
    /// Circuit parameters for `export`; absent means zeros.
    pub circuit_params: Option<Vec<f64>>,
    pub seed: u64,
}

/// `lo, lo + step, ...` up to `hi` inclusive.
pub fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| lo + k as f64 * step).collect()
}

impl RunConfig {
    pub fn preset(p: Preset) -> Self {
        let base = RunConfig {
            preset: p,
            dim: 1,
            extents: vec![2],
            m: 0.0,
            g: 4.0,
            a: 1.0,
            r: 1.0,
            lambda: 20.0,
            spin: 0.5,
            theta: 0.5,
            masses: grid(0.0, 6.0, 0.25),
            optimizer: OptimizerConfig::default(),
            heuristic: HeuristicConfig {
                kinds: vec![HeuristicKind::Ry, HeuristicKind::Ryrz],
                depth: 1,
                entanglement: Entanglement::Full,
                restarts: 10,
            },
            dynamics: DynamicsConfig { t_max: 10.0, dt: 0.1 },
            noise: NoiseConfig {
                shots_list: vec![100, 316, 1000, 3162, 10_000, 31_623, 100_000],
                sites: vec![2, 3, 4, 5, 6],
                shots: 1000,
                grouping: Grouping::PerTerm,
            },
            vqe_shots: None,
            circuit_params: None,
            seed: 0,
        };
        match p {
            Preset::Fig2b | Preset::Fig8 => base,
            Preset::Fig2c => RunConfig {
                dim: 2,
                extents: vec![2, 2],
                g: 3.0,
                masses: grid(0.0, 5.0, 0.25),
                optimizer: OptimizerConfig {
                    restarts: 10,
                    ..base.optimizer.clone()
                },
                ..base
            },
            Preset::Fig3 => RunConfig {
                extents: vec![3],
                g: 3.0,
                m: 1.0,
                optimizer: OptimizerConfig {
                    restarts: 3,
                    max_iters: 3000,
                    ..base.optimizer.clone()
                },
                ..base
            },
        }
    }

    /// Preset overlaid with the JSON object `file`.
    pub fn from_value(base: Preset, file: Option<Value>) -> Result<Self> {
        let mut v = serde_json::to_value(RunConfig::preset(base))?;
        if let Some(f) = file {
            if !f.is_object() {
                bail!("config must be a JSON object");
            }
            merge(&mut v, f);
        }
        let cfg: RunConfig = serde_json::from_value(v).context("invalid config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file and returns it with its `preset` key, if any.
    /// A run manifest is accepted too; its embedded `config` is used.
    pub fn read_file(path: &Path) -> Result<(Option<Preset>, Value)> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let mut v: Value = serde_json::from_str(&text).with_context(|| format!("{} is not valid JSON", path.display()))?;
        if v.get("command").is_some() && v.get("config").is_some_and(Value::is_object) {
            v = v["config"].take();
        }
        let preset = match v.get("preset") {
            Some(p) => Some(serde_json::from_value(p.clone()).context("invalid preset")?),
            None => None,
        };
        Ok((preset, v))
    }

    pub fn validate(&self) -> Result<()> {
        if self.extents.len() != self.dim {
            bail!("extents {:?} do not match dim {}", self.extents, self.dim);
        }
        if self.dynamics.dt <= 0.0 || self.dynamics.t_max < 0.0 {
            bail!("dynamics needs dt > 0 and t_max >= 0");
        }
        if self.noise.shots == 0 || self.noise.shots_list.contains(&0) || self.vqe_shots == Some(0) {
            bail!("shot counts must be positive");
        }
        if self.heuristic.restarts == 0 {
            bail!("heuristic restarts must be at least 1");
        }
        self.optimizer.validate()?;
        self.model(self.m)?.validate()?;
        Ok(())
    }

    pub fn trunc(&self) -> gauge_circuits::Result<SpinTruncation> {
        SpinTruncation::new(self.spin, self.theta)
    }

    pub fn model(&self, m: f64) -> gauge_circuits::Result<ModelParams> {
        Ok(ModelParams {
            m,
            g: self.g,
            a: self.a,
            r: self.r,
            lambda: self.lambda,
            trunc: self.trunc()?,
        })
    }

    /// Optimizer settings with the run seed applied.
    pub fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig {
            seed: self.seed,
            ..self.optimizer.clone()
        }
    }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}
