//! Gate-level circuits over the alphabet `{X, H, Rx, Ry, Rz, CNOT}`.
//!
//! Rotations follow `R_a(phi) = exp(-i phi a / 2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gate angle `constant + scale * params[param]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Angle {
    pub constant: f64,
    pub param: Option<usize>,
    pub scale: f64,
}

impl Angle {
    pub fn fixed(v: f64) -> Self {
        Self {
            constant: v,
            param: None,
            scale: 0.0,
        }
    }

    pub fn param(index: usize, scale: f64) -> Self {
        Self {
            constant: 0.0,
            param: Some(index),
            scale,
        }
    }

    pub fn value(&self, params: &[f64]) -> f64 {
        match self.param {
            Some(i) => self.constant + self.scale * params[i],
            None => self.constant,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    X(usize),
    H(usize),
    Rx(usize, Angle),
    Ry(usize, Angle),
    Rz(usize, Angle),
    Cnot(usize, usize),
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::X(q) | Gate::H(q) | Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) => vec![q],
            Gate::Cnot(c, t) => vec![c, t],
        }
    }

    pub fn angle(&self) -> Option<&Angle> {
        match self {
            Gate::Rx(_, a) | Gate::Ry(_, a) | Gate::Rz(_, a) => Some(a),
            _ => None,
        }
    }

    /// Copy with the angle resolved against `params`.
    pub fn bind(&self, params: &[f64]) -> Gate {
        match *self {
            Gate::Rx(q, a) => Gate::Rx(q, Angle::fixed(a.value(params))),
            Gate::Ry(q, a) => Gate::Ry(q, Angle::fixed(a.value(params))),
            Gate::Rz(q, a) => Gate::Rz(q, Angle::fixed(a.value(params))),
            g => g,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::X(_) => "x",
            Gate::H(_) => "h",
            Gate::Rx(..) => "rx",
            Gate::Ry(..) => "ry",
            Gate::Rz(..) => "rz",
            Gate::Cnot(..) => "cx",
        }
    }
}

/// Gate list with its parameter vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    pub params: Vec<f64>,
    pub param_names: Vec<String>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: vec![],
            params: vec![],
            param_names: vec![],
        }
    }

    pub fn push(&mut self, g: Gate) {
        debug_assert!(g.qubits().iter().all(|&q| q < self.n_qubits));
        self.gates.push(g);
    }

    /// Checks qubit indices, CNOT distinctness and parameter references.
    pub fn validate(&self) -> Result<()> {
        for (i, g) in self.gates.iter().enumerate() {
            let qs = g.qubits();
            if qs.iter().any(|&q| q >= self.n_qubits) {
                return Err(Error::InvalidParam(format!("gate {i} addresses a missing qubit")));
            }
            if let Gate::Cnot(c, t) = g {
                if c == t {
                    return Err(Error::InvalidParam(format!("gate {i} has control equal to target")));
                }
            }
            if let Some(p) = g.angle().and_then(|a| a.param) {
                if p >= self.params.len() {
                    return Err(Error::InvalidParam(format!("gate {i} references parameter {p}")));
                }
            }
        }
        Ok(())
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Cnot(..))).count()
    }

    /// Qubits that take part in at least one CNOT.
    pub fn entangled_qubits(&self) -> Vec<usize> {
        let mut qs: Vec<usize> = self
            .gates
            .iter()
            .filter(|g| matches!(g, Gate::Cnot(..)))
            .flat_map(Gate::qubits)
            .collect();
        qs.sort_unstable();
        qs.dedup();
        qs
    }

    /// Gate list with every angle resolved.
    pub fn bound_gates(&self) -> Vec<Gate> {
        self.gates.iter().map(|g| g.bind(&self.params)).collect()
    }

    /// Same circuit with new parameter values.
    pub fn rebind(&self, params: &[f64]) -> Result<Self> {
        if params.len() != self.params.len() {
            return Err(Error::ParamLength {
                got: params.len(),
                expected: self.params.len(),
            });
        }
        let mut c = self.clone();
        c.params = params.to_vec();
        Ok(c)
    }

    /// Prepends X gates, e.g. to prepare a basis state from `|0...0>`.
    pub fn with_prefix_x(&self, qubits: &[usize]) -> Self {
        let mut c = self.clone();
        let mut gates: Vec<Gate> = qubits.iter().map(|&q| Gate::X(q)).collect();
        gates.append(&mut c.gates);
        c.gates = gates;
        c
    }
}
