//! Circuit intermediate representation.
//!
//! A circuit is a grid of moments over qubits. Every gate sits at an explicit
//! integer moment (`position`) and no two gates share a `(qubit, position)`
//! cell. Deleting a gate leaves a hole; positions are never compacted.

mod gate;
mod scope;

pub use gate::{unitary, FunctionCategory, GateKind, Matrix, SizeCategory};
pub use scope::{gates_in_scope, position_in_range, GateFilter, MutationScope};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    /// Controls precede targets.
    pub wires: Vec<usize>,
    /// Radians.
    pub params: Vec<f64>,
    pub position: usize,
    /// Index of an input feature added to `params[0]` at execution time.
    /// Set on angle-encoding gates only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature: Option<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, wires: &[usize], params: &[f64], position: usize) -> Self {
        Gate {
            kind,
            wires: wires.to_vec(),
            params: params.to_vec(),
            position,
            feature: None,
        }
    }

    pub fn min_wire(&self) -> usize {
        self.wires.iter().copied().min().unwrap_or(0)
    }

    fn sort_key(&self) -> (usize, usize) {
        (self.position, self.min_wire())
    }

    pub fn touches(&self, qubit: usize, position: usize) -> bool {
        self.position == position && self.wires.contains(&qubit)
    }
}

/// One invariant violation found by [`Circuit::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    WireOutOfRange {
        gate: usize,
        wire: usize,
    },
    DuplicateWires {
        gate: usize,
    },
    WrongArity {
        gate: usize,
        expected: usize,
        actual: usize,
    },
    ParamLength {
        gate: usize,
        expected: usize,
        actual: usize,
    },
    NonFiniteParam {
        gate: usize,
    },
    CellCollision {
        qubit: usize,
        position: usize,
        first: usize,
        second: usize,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::WireOutOfRange { gate, wire } => {
                write!(f, "gate {gate}: wire {wire} out of range")
            }
            Violation::DuplicateWires { gate } => write!(f, "gate {gate}: duplicate wires"),
            Violation::WrongArity {
                gate,
                expected,
                actual,
            } => {
                write!(f, "gate {gate}: expected {expected} wires, got {actual}")
            }
            Violation::ParamLength {
                gate,
                expected,
                actual,
            } => {
                write!(f, "gate {gate}: expected {expected} params, got {actual}")
            }
            Violation::NonFiniteParam { gate } => write!(f, "gate {gate}: non-finite parameter"),
            Violation::CellCollision {
                qubit,
                position,
                first,
                second,
            } => {
                write!(f, "cell collision at (qubit {qubit}, position {position}) between gates {first} and {second}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub num_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit {
            num_qubits,
            gates: Vec::new(),
        }
    }

    /// Builds a circuit from gates in any order; gates are kept sorted by
    /// `(position, min wire)`. No validation is performed.
    pub fn from_gates(num_qubits: usize, mut gates: Vec<Gate>) -> Self {
        gates.sort_by_key(Gate::sort_key);
        Circuit { num_qubits, gates }
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// `1 + max position`, or 0 for an empty circuit.
    pub fn depth(&self) -> usize {
        self.gates.iter().map(|g| g.position + 1).max().unwrap_or(0)
    }

    /// Inserts a gate keeping the canonical order and returns its index.
    pub fn insert(&mut self, gate: Gate) -> usize {
        let key = gate.sort_key();
        let idx = self.gates.partition_point(|g| g.sort_key() <= key);
        self.gates.insert(idx, gate);
        idx
    }

    pub fn remove(&mut self, index: usize) -> Gate {
        self.gates.remove(index)
    }

    /// Replaces the gate at `index`, re-sorting if its position changed.
    pub fn replace(&mut self, index: usize, gate: Gate) -> usize {
        self.gates.remove(index);
        self.insert(gate)
    }

    /// Mutable access to parameters only; structure stays sorted.
    pub fn params_mut(&mut self, index: usize) -> &mut Vec<f64> {
        &mut self.gates[index].params
    }

    pub fn find(&self, gate: &Gate) -> Option<usize> {
        self.gates.iter().position(|g| g == gate)
    }

    /// Index of the gate occupying `(qubit, position)`.
    pub fn occupant(&self, qubit: usize, position: usize) -> Option<usize> {
        self.gates.iter().position(|g| g.touches(qubit, position))
    }

    /// True when every `(wire, position)` cell is empty, ignoring gate `skip`.
    pub fn cells_free(&self, wires: &[usize], position: usize, skip: Option<usize>) -> bool {
        self.gates
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != skip)
            .all(|(_, g)| g.position != position || !wires.iter().any(|w| g.wires.contains(w)))
    }

    pub fn count_kind(&self, pred: impl Fn(GateKind) -> bool) -> usize {
        self.gates.iter().filter(|g| pred(g.kind)).count()
    }

    /// Every invariant violation; an empty vector means the circuit is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (i, g) in self.gates.iter().enumerate() {
            if g.wires.len() != g.kind.arity() {
                out.push(Violation::WrongArity {
                    gate: i,
                    expected: g.kind.arity(),
                    actual: g.wires.len(),
                });
            }
            for &w in &g.wires {
                if w >= self.num_qubits {
                    out.push(Violation::WireOutOfRange { gate: i, wire: w });
                }
            }
            let mut ws = g.wires.clone();
            ws.sort_unstable();
            ws.dedup();
            if ws.len() != g.wires.len() {
                out.push(Violation::DuplicateWires { gate: i });
            }
            if g.params.len() != g.kind.param_count() {
                out.push(Violation::ParamLength {
                    gate: i,
                    expected: g.kind.param_count(),
                    actual: g.params.len(),
                });
            }
            if g.params.iter().any(|p| !p.is_finite()) {
                out.push(Violation::NonFiniteParam { gate: i });
            }
        }
        let mut cells: std::collections::BTreeMap<(usize, usize), usize> = Default::default();
        for (i, g) in self.gates.iter().enumerate() {
            let mut ws = g.wires.clone();
            ws.sort_unstable();
            ws.dedup();
            for w in ws {
                if let Some(&first) = cells.get(&(w, g.position)) {
                    out.push(Violation::CellCollision {
                        qubit: w,
                        position: g.position,
                        first,
                        second: i,
                    });
                } else {
                    cells.insert((w, g.position), i);
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    pub fn ensure_valid(&self) -> Result<()> {
        match self.validate().first() {
            None => Ok(()),
            Some(v) => Err(Error::InvalidCircuit(v.to_string())),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serialization is infallible")
    }

    /// Parses the JSON circuit format, naming the first malformed entry.
    pub fn from_json(text: &str) -> Result<Circuit> {
        let root: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        let perr = |loc: String, msg: &str| Error::Parse {
            location: loc,
            message: msg.to_string(),
        };
        let num_qubits = root
            .get("num_qubits")
            .and_then(Value::as_u64)
            .ok_or_else(|| perr("num_qubits".into(), "missing or not a non-negative integer"))?
            as usize;
        let gates_v = root
            .get("gates")
            .and_then(Value::as_array)
            .ok_or_else(|| perr("gates".into(), "missing or not an array"))?;
        let mut gates = Vec::with_capacity(gates_v.len());
        for (i, g) in gates_v.iter().enumerate() {
            let loc = |field: &str| format!("gates[{i}].{field}");
            let kind_s = g
                .get("kind")
                .and_then(Value::as_str)
                .ok_or_else(|| perr(loc("kind"), "missing or not a string"))?;
            let kind: GateKind = kind_s
                .parse()
                .map_err(|_| perr(loc("kind"), &format!("unknown gate kind '{kind_s}'")))?;
            let wires = g
                .get("wires")
                .and_then(Value::as_array)
                .ok_or_else(|| perr(loc("wires"), "missing or not an array"))?
                .iter()
                .map(|w| w.as_u64().map(|w| w as usize))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| perr(loc("wires"), "entries must be non-negative integers"))?;
            let params = match g.get("params") {
                None => Vec::new(),
                Some(p) => p
                    .as_array()
                    .ok_or_else(|| perr(loc("params"), "not an array"))?
                    .iter()
                    .map(Value::as_f64)
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| perr(loc("params"), "entries must be numbers"))?,
            };
            let position = g
                .get("position")
                .and_then(Value::as_u64)
                .ok_or_else(|| perr(loc("position"), "missing or not a non-negative integer"))?
                as usize;
            let feature = match g.get("feature") {
                None | Some(Value::Null) => None,
                Some(v) => Some(
                    v.as_u64()
                        .ok_or_else(|| perr(loc("feature"), "not a non-negative integer"))?
                        as usize,
                ),
            };
            gates.push(Gate {
                kind,
                wires,
                params,
                position,
                feature,
            });
        }
        Ok(Circuit::from_gates(num_qubits, gates))
    }
}

/// Appends gates at the earliest moment after the last use of each wire.
#[derive(Debug, Clone)]
pub struct CircuitBuilder {
    circuit: Circuit,
    frontier: Vec<usize>,
}

impl CircuitBuilder {
    pub fn new(num_qubits: usize) -> Self {
        CircuitBuilder {
            circuit: Circuit::new(num_qubits),
            frontier: vec![0; num_qubits],
        }
    }

    /// Places the gate and returns the moment it landed on.
    pub fn push(&mut self, kind: GateKind, wires: &[usize], params: &[f64]) -> usize {
        self.push_gate(kind, wires, params, None)
    }

    pub fn push_feature(&mut self, kind: GateKind, wire: usize, feature: usize) -> usize {
        self.push_gate(kind, &[wire], &[0.0], Some(feature))
    }

    fn push_gate(
        &mut self,
        kind: GateKind,
        wires: &[usize],
        params: &[f64],
        feature: Option<usize>,
    ) -> usize {
        let pos = wires.iter().map(|&w| self.frontier[w]).max().unwrap_or(0);
        for &w in wires {
            self.frontier[w] = pos + 1;
        }
        self.circuit.insert(Gate {
            kind,
            wires: wires.to_vec(),
            params: params.to_vec(),
            position: pos,
            feature,
        });
        pos
    }

    /// Aligns all wires to a common moment boundary.
    pub fn barrier(&mut self) {
        let m = self.frontier.iter().copied().max().unwrap_or(0);
        self.frontier.iter_mut().for_each(|f| *f = m);
    }

    pub fn finish(self) -> Circuit {
        self.circuit
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_circuit_is_valid() {
        let c = Circuit::new(4);
        assert!(c.validate().is_empty());
        assert_eq!(c.depth(), 0);
    }

    #[test]
    fn duplicate_wires_detected() {
        let c = Circuit::from_gates(2, vec![Gate::new(GateKind::CNOT, &[0, 0], &[], 0)]);
        assert!(c
            .validate()
            .contains(&Violation::DuplicateWires { gate: 0 }));
    }

    #[test]
    fn cell_collision_detected() {
        let c = Circuit::from_gates(
            2,
            vec![
                Gate::new(GateKind::RX, &[1], &[0.1], 3),
                Gate::new(GateKind::RX, &[1], &[0.2], 3),
            ],
        );
        let v = c.validate();
        assert!(
            matches!(
                v.as_slice(),
                [Violation::CellCollision {
                    qubit: 1,
                    position: 3,
                    ..
                }]
            ),
            "{v:?}"
        );
    }

    #[test]
    fn out_of_range_and_param_length() {
        let c = Circuit::from_gates(2, vec![Gate::new(GateKind::RY, &[5], &[], 0)]);
        let v = c.validate();
        assert!(v.contains(&Violation::WireOutOfRange { gate: 0, wire: 5 }));
        assert!(v.contains(&Violation::ParamLength {
            gate: 0,
            expected: 1,
            actual: 0
        }));
    }

    #[test]
    fn deletion_leaves_holes() {
        let mut c = Circuit::from_gates(
            1,
            vec![
                Gate::new(GateKind::Hadamard, &[0], &[], 0),
                Gate::new(GateKind::PauliX, &[0], &[], 1),
                Gate::new(GateKind::PauliZ, &[0], &[], 2),
            ],
        );
        c.remove(1);
        assert_eq!(c.depth(), 3);
        assert_eq!(c.gates()[1].position, 2);
    }

    #[test]
    fn serialization_preserves_position_and_bits() {
        let c = Circuit::from_gates(
            4,
            vec![
                Gate::new(GateKind::PauliX, &[0], &[], 2),
                Gate::new(GateKind::RZ, &[3], &[0.1 + 0.2], 4),
                Gate::new(GateKind::CNOT, &[1, 2], &[], 1),
            ],
        );
        let back = Circuit::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert_eq!(
            back.gates()
                .iter()
                .find(|g| g.kind == GateKind::PauliX)
                .unwrap()
                .position,
            2
        );
        assert_eq!(
            back.gates()[2].params[0].to_bits(),
            (0.1f64 + 0.2).to_bits()
        );
    }

    #[test]
    fn malformed_kind_is_named() {
        let text = r#"{"num_qubits": 2, "gates": [
            {"kind": "RX", "wires": [0], "params": [0.5], "position": 0},
            {"kind": "Toffoli", "wires": [0, 1], "params": [], "position": 1}]}"#;
        match Circuit::from_json(text) {
            Err(Error::Parse { location, message }) => {
                assert_eq!(location, "gates[1].kind");
                assert!(message.contains("Toffoli"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn builder_packs_moments() {
        let mut b = CircuitBuilder::new(3);
        b.push(GateKind::Hadamard, &[0], &[]);
        b.push(GateKind::Hadamard, &[1], &[]);
        b.push(GateKind::CNOT, &[0, 1], &[]);
        b.push(GateKind::PauliX, &[2], &[]);
        let c = b.finish();
        let pos: Vec<_> = c.gates().iter().map(|g| (g.kind, g.position)).collect();
        assert_eq!(
            pos,
            vec![
                (GateKind::Hadamard, 0),
                (GateKind::Hadamard, 0),
                (GateKind::PauliX, 0),
                (GateKind::CNOT, 1)
            ]
        );
        assert!(c.is_valid());
    }
}
