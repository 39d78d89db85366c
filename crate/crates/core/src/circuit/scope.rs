use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Circuit, FunctionCategory, GateKind, SizeCategory};
use crate::error::{Error, Result};

/// Restricts which gate kinds a mutation may touch (or insert).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateFilter {
    Kinds(BTreeSet<GateKind>),
    Function(FunctionCategory),
    Size(SizeCategory),
}

impl GateFilter {
    pub fn matches(&self, kind: GateKind) -> bool {
        match self {
            GateFilter::Kinds(ks) => ks.contains(&kind),
            GateFilter::Function(c) => kind.in_category(*c),
            GateFilter::Size(s) => kind.size_category() == *s,
        }
    }
}

/// Where in a circuit a mutation operator is allowed to act.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationScope {
    /// `None` means every qubit.
    #[serde(default)]
    pub qubits: Option<BTreeSet<usize>>,
    /// Fractional depth interval in percent, inclusive on both ends.
    #[serde(default = "full_depth")]
    pub depth_range: (f64, f64),
    #[serde(default)]
    pub gate_types: Option<GateFilter>,
    #[serde(default = "default_percentage")]
    pub gate_percentage: f64,
}

fn full_depth() -> (f64, f64) {
    (0.0, 100.0)
}

fn default_percentage() -> f64 {
    0.1
}

impl Default for MutationScope {
    fn default() -> Self {
        MutationScope {
            qubits: None,
            depth_range: full_depth(),
            gate_types: None,
            gate_percentage: default_percentage(),
        }
    }
}

/// True when moment `position` of a `depth`-moment circuit falls in
/// `[lo, hi]` percent, using `100 * p / max(depth - 1, 1)`.
pub fn position_in_range(position: usize, depth: usize, (lo, hi): (f64, f64)) -> bool {
    let denom = depth.saturating_sub(1).max(1) as f64;
    let scaled = 100.0 * position as f64;
    lo * denom <= scaled && scaled <= hi * denom
}

impl MutationScope {
    pub fn with_percentage(mut self, p: f64) -> Self {
        self.gate_percentage = p;
        self
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        if let Some(qs) = &self.qubits {
            if let Some(&q) = qs.iter().find(|&&q| q >= num_qubits) {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    width: num_qubits,
                });
            }
            if qs.is_empty() {
                return Err(Error::Config("empty qubit range".into()));
            }
        }
        let (lo, hi) = self.depth_range;
        if !(0.0 <= lo && lo < hi && hi <= 100.0) {
            return Err(Error::Config(format!("invalid depth range [{lo}, {hi}]")));
        }
        if !(self.gate_percentage > 0.0 && self.gate_percentage <= 1.0) {
            return Err(Error::Config(format!(
                "gate percentage {} outside (0, 1]",
                self.gate_percentage
            )));
        }
        Ok(())
    }

    pub fn qubit_list(&self, num_qubits: usize) -> Vec<usize> {
        match &self.qubits {
            Some(qs) => qs.iter().copied().filter(|&q| q < num_qubits).collect(),
            None => (0..num_qubits).collect(),
        }
    }

    pub fn allows_qubit(&self, q: usize) -> bool {
        self.qubits.as_ref().is_none_or(|qs| qs.contains(&q))
    }

    pub fn allows_kind(&self, kind: GateKind) -> bool {
        self.gate_types.as_ref().is_none_or(|f| f.matches(kind))
    }

    /// Kinds that may be inserted under this scope.
    pub fn allowed_kinds(&self) -> Vec<GateKind> {
        GateKind::ALL
            .into_iter()
            .filter(|&k| self.allows_kind(k))
            .collect()
    }

    /// Whether a gate placement lies in the qubit and depth ranges, with depth
    /// measured on a circuit of `depth` moments.
    pub fn contains_cell(&self, wires: &[usize], position: usize, depth: usize) -> bool {
        wires.iter().all(|&w| self.allows_qubit(w))
            && position_in_range(position, depth, self.depth_range)
    }

    /// In-scope gate indices using an explicit reference depth, ordered by
    /// `(position, min wire)`.
    pub fn select(&self, circuit: &Circuit, depth: usize, check_kind: bool) -> Vec<usize> {
        circuit
            .gates()
            .iter()
            .enumerate()
            .filter(|(_, g)| self.contains_cell(&g.wires, g.position, depth))
            .filter(|(_, g)| !check_kind || self.allows_kind(g.kind))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Indices of gates inside `scope`, ordered by `(position, min wire)`.
pub fn gates_in_scope(circuit: &Circuit, scope: &MutationScope) -> Vec<usize> {
    scope.select(circuit, circuit.depth(), true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;

    fn ladder(depth: usize) -> Circuit {
        Circuit::from_gates(
            2,
            (0..depth)
                .map(|p| Gate::new(GateKind::CNOT, &[0, 1], &[], p))
                .collect(),
        )
    }

    #[test]
    fn full_scope_returns_everything() {
        let c = ladder(10);
        assert_eq!(gates_in_scope(&c, &MutationScope::default()).len(), 10);
    }

    #[test]
    fn half_depth_keeps_first_five_moments() {
        // Independent enumeration: p in [0, 9], keep p with 100 p / 9 <= 50.
        let expected: Vec<usize> = (0..10).filter(|p| 100 * p <= 50 * 9).collect();
        assert_eq!(expected, vec![0, 1, 2, 3, 4]);
        let c = ladder(10);
        let scope = MutationScope {
            depth_range: (0.0, 50.0),
            ..Default::default()
        };
        let got: Vec<usize> = gates_in_scope(&c, &scope)
            .into_iter()
            .map(|i| c.gates()[i].position)
            .collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn category_with_no_members_is_empty() {
        let mut c = ladder(3);
        c.insert(Gate::new(GateKind::Hadamard, &[0], &[], 3));
        let scope = MutationScope {
            gate_types: Some(GateFilter::Function(FunctionCategory::Rotation)),
            ..Default::default()
        };
        assert!(gates_in_scope(&c, &scope).is_empty());
    }

    #[test]
    fn single_moment_maps_to_zero_percent() {
        assert!(position_in_range(0, 1, (0.0, 10.0)));
        assert!(!position_in_range(0, 1, (10.0, 100.0)));
    }

    #[test]
    fn qubit_range_requires_all_wires() {
        let c = Circuit::from_gates(
            3,
            vec![
                Gate::new(GateKind::CNOT, &[0, 1], &[], 0),
                Gate::new(GateKind::RX, &[1], &[0.3], 1),
            ],
        );
        let scope = MutationScope {
            qubits: Some([1].into()),
            ..Default::default()
        };
        assert_eq!(gates_in_scope(&c, &scope), vec![1]);
    }
}
