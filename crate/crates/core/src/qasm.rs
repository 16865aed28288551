//! OpenQASM 2.0 export and a parser for the emitted subset.

use serde::{Deserialize, Serialize};

use crate::circuit::{Angle, Circuit, Gate};
use crate::error::{Error, Result};

/// Emits the bound circuit using `x, h, rx, ry, rz, cx` on register `q`.
pub fn to_qasm(c: &Circuit) -> String {
    let mut s = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    s.push_str(&format!("qreg q[{}];\n", c.n_qubits));
    for g in c.bound_gates() {
        let line = match g {
            Gate::X(q) | Gate::H(q) => format!("{} q[{q}];", g.name()),
            Gate::Rx(q, a) | Gate::Ry(q, a) | Gate::Rz(q, a) => {
                format!("{}({:?}) q[{q}];", g.name(), a.constant)
            }
            Gate::Cnot(ctl, t) => format!("cx q[{ctl}],q[{t}];"),
        };
        s.push_str(&line);
        s.push('\n');
    }
    s
}

/// Sidecar entry for one parametrized gate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateBinding {
    pub gate_index: usize,
    pub param: usize,
    pub name: String,
    pub scale: f64,
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitMeta {
    pub n_qubits: usize,
    pub param_names: Vec<String>,
    pub params: Vec<f64>,
    pub bindings: Vec<GateBinding>,
    pub cnot_count: usize,
}

/// Parameter names, values and per-gate scale factors.
pub fn circuit_meta(c: &Circuit) -> CircuitMeta {
    let bindings = c
        .gates
        .iter()
        .enumerate()
        .filter_map(|(i, g)| {
            let a = g.angle()?;
            let p = a.param?;
            Some(GateBinding {
                gate_index: i,
                param: p,
                name: c.param_names.get(p).cloned().unwrap_or_default(),
                scale: a.scale,
                offset: a.constant,
            })
        })
        .collect();
    CircuitMeta {
        n_qubits: c.n_qubits,
        param_names: c.param_names.clone(),
        params: c.params.clone(),
        bindings,
        cnot_count: c.cnot_count(),
    }
}

fn qubit(tok: &str, line: usize) -> Result<usize> {
    let err = || Error::Parse {
        line,
        msg: format!("bad qubit operand {tok:?}"),
    };
    let inner = tok.trim().strip_prefix("q[").and_then(|t| t.strip_suffix(']')).ok_or_else(err)?;
    inner.parse().map_err(|_| err())
}

/// Parses text produced by [`to_qasm`] into a circuit with fixed angles.
pub fn parse_qasm(text: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split("//").next().unwrap_or("").trim();
        if line.is_empty() || line.starts_with("OPENQASM") || line.starts_with("include") {
            continue;
        }
        let err = |msg: String| Error::Parse { line: ln, msg };
        let body = line.strip_suffix(';').ok_or_else(|| err("missing ';'".into()))?;
        if let Some(rest) = body.strip_prefix("qreg ") {
            let n = rest
                .trim()
                .strip_prefix("q[")
                .and_then(|t| t.strip_suffix(']'))
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| err(format!("bad register {rest:?}")))?;
            circuit = Some(Circuit::new(n));
            continue;
        }
        let c = circuit.as_mut().ok_or_else(|| err("gate before qreg".into()))?;
        let (head, operands) = body
            .split_once(' ')
            .ok_or_else(|| err(format!("cannot split {body:?}")))?;
        let (name, angle) = match head.split_once('(') {
            Some((n, a)) => {
                let a = a.strip_suffix(')').ok_or_else(|| err("unclosed angle".into()))?;
                let v: f64 = a.trim().parse().map_err(|_| err(format!("bad angle {a:?}")))?;
                (n, Some(Angle::fixed(v)))
            }
            None => (head, None),
        };
        let qs: Vec<&str> = operands.split(',').collect();
        let one = || -> Result<usize> {
            if qs.len() != 1 {
                return Err(err(format!("{name} takes one operand")));
            }
            qubit(qs[0], ln)
        };
        let need_angle = || angle.ok_or_else(|| err(format!("{name} needs an angle")));
        let g = match name {
            "x" => Gate::X(one()?),
            "h" => Gate::H(one()?),
            "rx" => Gate::Rx(one()?, need_angle()?),
            "ry" => Gate::Ry(one()?, need_angle()?),
            "rz" => Gate::Rz(one()?, need_angle()?),
            "cx" => {
                if qs.len() != 2 {
                    return Err(err("cx takes two operands".into()));
                }
                Gate::Cnot(qubit(qs[0], ln)?, qubit(qs[1], ln)?)
            }
            _ => return Err(err(format!("unsupported gate {name:?}"))),
        };
        c.gates.push(g);
    }
    let c = circuit.ok_or(Error::Parse {
        line: 0,
        msg: "no qreg declaration".into(),
    })?;
    c.validate()?;
    Ok(c)
}
