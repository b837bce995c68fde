//! Small pseudo-deterministic quantum circuits and their dense evaluation.
//!
//! A circuit acts on `n_qubits` qubits initialised to `|x 0..0>`, the input
//! occupying qubits `0..n_inputs`, and is read out by measuring `out_qubit`.

use serde::{Deserialize, Serialize};

use super::{PvError, Result};
use crate::densesim::{Gate, StateVector};

/// Largest circuit simulated here.
pub const MAX_CIRCUIT_QUBITS: usize = 8;

/// Required weight of the likely outcome on every input.
pub const PSEUDO_DET_MARGIN: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateSpec {
    pub kind: String,
    pub targets: Vec<usize>,
}

impl GateSpec {
    fn to_gate(&self) -> Result<Gate> {
        let t = &self.targets;
        let bad = || PvError::Circuit(format!("gate {} with targets {:?}", self.kind, t));
        let g = match (self.kind.as_str(), t.as_slice()) {
            ("h", &[a]) => Gate::H(a),
            ("x", &[a]) => Gate::X(a),
            ("y", &[a]) => Gate::Y(a),
            ("z", &[a]) => Gate::Z(a),
            ("s", &[a]) => Gate::S(a),
            ("sdg", &[a]) => Gate::Sdg(a),
            ("t", &[a]) => Gate::T(a),
            ("tdg", &[a]) => Gate::Tdg(a),
            ("cx", &[a, b]) if a != b => Gate::Cx(a, b),
            ("cz", &[a, b]) if a != b => Gate::Cz(a, b),
            ("swap", &[a, b]) if a != b => Gate::Swap(a, b),
            ("ccx", &[a, b, c]) if a != b && b != c && a != c => Gate::Ccx(a, b, c),
            _ => return Err(bad()),
        };
        Ok(g)
    }
}

/// On-disk circuit format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitFile {
    pub n_qubits: usize,
    #[serde(default)]
    pub n_inputs: Option<usize>,
    pub out_qubit: usize,
    pub gates: Vec<GateSpec>,
}

/// A circuit that was checked to be pseudo-deterministic on all inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct PseudoDetCircuit {
    file: CircuitFile,
    n_inputs: usize,
    gates: Vec<Gate>,
    /// `Pr[out = 1]` per input, indexed by the input read as a binary number
    /// with `x_0` most significant.
    p_one: Vec<f64>,
}

impl PseudoDetCircuit {
    pub fn new(file: CircuitFile) -> Result<Self> {
        let n = file.n_qubits;
        if n == 0 || n > MAX_CIRCUIT_QUBITS {
            return Err(PvError::Circuit(format!("{n} qubits, limit {MAX_CIRCUIT_QUBITS}")));
        }
        let n_inputs = file.n_inputs.unwrap_or(n);
        if n_inputs > n || file.out_qubit >= n {
            return Err(PvError::Circuit("input or output qubit out of range".into()));
        }
        let gates = file.gates.iter().map(GateSpec::to_gate).collect::<Result<Vec<_>>>()?;
        let mut p_one = Vec::with_capacity(1 << n_inputs);
        for x in 0..1u64 << n_inputs {
            let mut psi = StateVector::basis(n, x << (n - n_inputs))?;
            for &g in &gates {
                psi.apply_gate(g)?;
            }
            let p = psi.marginal(&[file.out_qubit])?.get(&1).copied().unwrap_or(0.0);
            if p.min(1.0 - p) > PSEUDO_DET_MARGIN {
                return Err(PvError::NotPseudoDeterministic { input: x, p_one: p });
            }
            p_one.push(p);
        }
        Ok(Self { file, n_inputs, gates, p_one })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::new(serde_json::from_str(s).map_err(|e| PvError::Circuit(e.to_string()))?)
    }

    /// Parses a canonical description `P_Q`.
    pub fn from_description(d: &[u8]) -> Result<Self> {
        Self::new(serde_json::from_slice(d).map_err(|e| PvError::Circuit(e.to_string()))?)
    }

    /// `P_Q`: canonical JSON of the circuit file.
    pub fn description(&self) -> Vec<u8> {
        serde_json::to_vec(&self.file).expect("circuit file serialises")
    }

    pub fn file(&self) -> &CircuitFile {
        &self.file
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_qubits(&self) -> usize {
        self.file.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// One layer per gate.
    pub fn depth(&self) -> u32 {
        self.gates.len() as u32
    }

    fn index(&self, x: &[bool]) -> Result<usize> {
        if x.len() != self.n_inputs {
            return Err(PvError::Input(format!("expected {} input bits, got {}", self.n_inputs, x.len())));
        }
        Ok(x.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize))
    }

    pub fn p_one(&self, x: &[bool]) -> Result<f64> {
        Ok(self.p_one[self.index(x)?])
    }

    /// `Q(x)`, the likely outcome.
    pub fn output(&self, x: &[bool]) -> Result<bool> {
        Ok(self.p_one(x)? > 0.5)
    }

    /// Full truth table in input order.
    pub fn truth_table(&self) -> Vec<bool> {
        self.p_one.iter().map(|&p| p > 0.5).collect()
    }
}

/// Parses a bit string such as `"0110"`.
pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(PvError::Input(format!("'{c}' is not a bit"))),
        })
        .collect()
}

/// All inputs of length `n`, `x_0` most significant.
pub fn all_inputs(n: usize) -> Vec<Vec<bool>> {
    (0..1u64 << n).map(|x| (0..n).map(|i| (x >> (n - 1 - i)) & 1 == 1).collect()).collect()
}

/// Bits as one byte each.
pub fn bits_to_bytes(x: &[bool]) -> Vec<u8> {
    x.iter().map(|&b| u8::from(b)).collect()
}

pub fn bytes_to_bits(x: &[u8]) -> Result<Vec<bool>> {
    x.iter()
        .map(|&b| match b {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(PvError::Input(format!("byte {b} is not a bit"))),
        })
        .collect()
}

/// The toy corpus shipped with the crate.
pub fn corpus() -> Vec<(&'static str, PseudoDetCircuit)> {
    [
        ("const0", include_str!("../../circuits/const0.json")),
        ("and", include_str!("../../circuits/and.json")),
        ("xor_kickback", include_str!("../../circuits/xor_kickback.json")),
    ]
    .into_iter()
    .map(|(name, js)| (name, PseudoDetCircuit::from_json(js).expect("corpus circuit is valid")))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_truth_tables() {
        let c = corpus();
        assert_eq!(c[0].1.truth_table(), vec![false, false]);
        assert_eq!(c[1].1.truth_table(), vec![false, false, false, true]);
        assert_eq!(c[2].1.truth_table(), vec![false, true, true, false]);
    }

    #[test]
    fn description_round_trips() {
        for (_, q) in corpus() {
            assert_eq!(PseudoDetCircuit::from_description(&q.description()).unwrap(), q);
        }
    }

    #[test]
    fn random_outcome_rejected() {
        let f = CircuitFile { n_qubits: 1, n_inputs: Some(0), out_qubit: 0, gates: vec![GateSpec { kind: "h".into(), targets: vec![0] }] };
        assert!(matches!(PseudoDetCircuit::new(f), Err(PvError::NotPseudoDeterministic { .. })));
    }

    #[test]
    fn malformed_gates_rejected() {
        let f = CircuitFile { n_qubits: 2, n_inputs: None, out_qubit: 0, gates: vec![GateSpec { kind: "cx".into(), targets: vec![1, 1] }] };
        assert!(PseudoDetCircuit::new(f).is_err());
        let f = CircuitFile { n_qubits: 2, n_inputs: None, out_qubit: 0, gates: vec![GateSpec { kind: "cx".into(), targets: vec![0, 5] }] };
        assert!(PseudoDetCircuit::new(f).is_err());
        assert_eq!(parse_bits("01").unwrap(), vec![false, true]);
        assert!(parse_bits("012").is_err());
    }
}
