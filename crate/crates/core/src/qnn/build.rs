use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, CircuitBuilder, GateKind};
use crate::error::{Error, Result};
use crate::sim::StateVector;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum EncodingSpec {
    /// Features become state amplitudes (zero-padded, normalized).
    Amplitude,
    /// Each scaled feature drives one single-qubit rotation.
    Angle {
        #[serde(default = "default_axis")]
        axis: GateKind,
    },
}

fn default_axis() -> GateKind {
    GateKind::RY
}

impl Default for EncodingSpec {
    fn default() -> Self {
        EncodingSpec::Angle { axis: GateKind::RY }
    }
}

impl EncodingSpec {
    /// Checks that `feature_dim` features fit into the circuit.
    pub fn validate(
        &self,
        feature_dim: usize,
        num_qubits: usize,
        ansatz: &AnsatzSpec,
    ) -> Result<()> {
        match *self {
            EncodingSpec::Amplitude => {
                if ansatz.family == AnsatzFamily::ReUploading {
                    return Err(Error::InvalidAnsatz(
                        "re-uploading needs angle encoding".into(),
                    ));
                }
                if feature_dim > 1usize << num_qubits {
                    return Err(Error::Encoding(format!(
                        "{feature_dim} features exceed 2^{num_qubits} amplitudes"
                    )));
                }
            }
            EncodingSpec::Angle { axis } => {
                if !matches!(axis, GateKind::RX | GateKind::RY | GateKind::RZ) {
                    return Err(Error::Encoding(format!(
                        "encoding axis must be RX, RY or RZ, got {axis}"
                    )));
                }
                let uploads = if ansatz.family == AnsatzFamily::ReUploading {
                    ansatz.layers.max(1)
                } else {
                    1
                };
                if feature_dim > num_qubits * uploads {
                    return Err(Error::Encoding(format!(
                        "{feature_dim} features exceed capacity {}",
                        num_qubits * uploads
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Amplitude-encoded input state: zero-pad to `2^n`, then normalize.
pub fn amplitude_state(features: &[f64], num_qubits: usize) -> Result<StateVector> {
    let dim = 1usize << num_qubits;
    if features.len() > dim {
        return Err(Error::Encoding(format!(
            "{} features exceed {dim} amplitudes",
            features.len()
        )));
    }
    let norm = features.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Encoding(
            "amplitude encoding needs a nonzero finite vector".into(),
        ));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    for (a, &v) in amps.iter_mut().zip(features) {
        *a = Complex64::new(v / norm, 0.0);
    }
    StateVector::from_amplitudes(amps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnsatzFamily {
    BlockStacking,
    Hierarchical,
    ReUploading,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Entangler {
    #[default]
    #[serde(rename = "ring-CNOT")]
    RingCnot,
    #[serde(rename = "ladder-CNOT")]
    LadderCnot,
    /// Trainable CRZ on each ring edge.
    #[serde(rename = "CRZ-ring")]
    CrzRing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub family: AnsatzFamily,
    pub layers: usize,
    #[serde(default)]
    pub entangler: Entangler,
}

impl AnsatzSpec {
    pub fn block_stacking(layers: usize) -> Self {
        AnsatzSpec {
            family: AnsatzFamily::BlockStacking,
            layers,
            entangler: Entangler::RingCnot,
        }
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        if num_qubits == 0 {
            return Err(Error::InvalidAnsatz("zero qubits".into()));
        }
        if self.family == AnsatzFamily::Hierarchical && !num_qubits.is_power_of_two() {
            return Err(Error::InvalidAnsatz(format!(
                "hierarchical ansatz needs a power-of-two width, got {num_qubits}"
            )));
        }
        Ok(())
    }
}

/// One trainable scalar: component `component` of gate `gate` (canonical
/// index in the template circuit).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub gate: usize,
    pub component: usize,
}

/// Circuit with placeholder parameters plus the slot map into `theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub circuit: Circuit,
    pub slots: Vec<Slot>,
}

impl Template {
    /// Circuit with `theta` written into the slots.
    pub fn bind(&self, theta: &[f64]) -> Result<Circuit> {
        if theta.len() != self.slots.len() {
            return Err(Error::DimensionMismatch {
                expected: self.slots.len(),
                actual: theta.len(),
            });
        }
        let mut c = self.circuit.clone();
        for (s, &t) in self.slots.iter().zip(theta) {
            c.params_mut(s.gate)[s.component] = t;
        }
        Ok(c)
    }
}

struct Assembler {
    b: CircuitBuilder,
    n: usize,
    /// (position, first wire, component) in slot order.
    pending: Vec<(usize, usize, usize)>,
}

impl Assembler {
    fn trainable(&mut self, kind: GateKind, wires: &[usize]) {
        let pos = self.b.push(kind, wires, &vec![0.0; kind.param_count()]);
        for c in 0..kind.param_count() {
            self.pending.push((pos, wires[0], c));
        }
    }

    fn fixed(&mut self, kind: GateKind, wires: &[usize]) {
        self.b.push(kind, wires, &[]);
    }

    fn entangle(&mut self, e: Entangler) {
        let n = self.n;
        if n < 2 {
            return;
        }
        let edges: Vec<(usize, usize)> = (0..n - 1)
            .map(|i| (i, i + 1))
            .chain((n > 2).then_some((n - 1, 0)))
            .collect();
        match e {
            Entangler::RingCnot => edges
                .iter()
                .for_each(|&(a, b)| self.fixed(GateKind::CNOT, &[a, b])),
            Entangler::LadderCnot => edges
                .iter()
                .take(n - 1)
                .for_each(|&(a, b)| self.fixed(GateKind::CNOT, &[a, b])),
            Entangler::CrzRing => edges
                .iter()
                .for_each(|&(a, b)| self.trainable(GateKind::CRZ, &[a, b])),
        }
    }

    fn encode(&mut self, axis: GateKind, features: &[usize]) {
        for (i, &f) in features.iter().enumerate() {
            self.b.push_feature(axis, i % self.n, f);
        }
    }

    fn finish(self) -> Template {
        let circuit = self.b.finish();
        let slots = self
            .pending
            .into_iter()
            .map(|(pos, w, component)| Slot {
                gate: circuit.occupant(w, pos).expect("slot gate was just placed"),
                component,
            })
            .collect();
        Template { circuit, slots }
    }
}

/// Builds the full model circuit: angle-encoding gates (if any) and the
/// ansatz, with all trainable parameters at 0.
pub fn build_template(
    num_qubits: usize,
    feature_dim: usize,
    encoding: EncodingSpec,
    ansatz: AnsatzSpec,
) -> Result<Template> {
    ansatz.validate(num_qubits)?;
    encoding.validate(feature_dim, num_qubits, &ansatz)?;
    let n = num_qubits;
    let mut a = Assembler {
        b: CircuitBuilder::new(n),
        n,
        pending: Vec::new(),
    };
    let axis = match encoding {
        EncodingSpec::Angle { axis } => Some(axis),
        EncodingSpec::Amplitude => None,
    };
    let all: Vec<usize> = (0..feature_dim).collect();
    if let (Some(axis), true) = (axis, ansatz.family != AnsatzFamily::ReUploading) {
        a.encode(axis, &all);
        a.b.barrier();
    }
    match ansatz.family {
        AnsatzFamily::BlockStacking => {
            for _ in 0..ansatz.layers {
                for q in 0..n {
                    a.trainable(GateKind::RX, &[q]);
                    a.trainable(GateKind::RZ, &[q]);
                }
                a.entangle(ansatz.entangler);
            }
        }
        AnsatzFamily::Hierarchical => {
            let mut active: Vec<usize> = (0..n).collect();
            while active.len() > 1 {
                let pairs: Vec<(usize, usize)> = active.chunks(2).map(|p| (p[0], p[1])).collect();
                for _ in 0..ansatz.layers {
                    for &(x, y) in &pairs {
                        a.trainable(GateKind::Rot, &[x]);
                        a.trainable(GateKind::Rot, &[y]);
                        a.fixed(GateKind::CNOT, &[x, y]);
                    }
                }
                for &(x, y) in &pairs {
                    a.trainable(GateKind::CRZ, &[y, x]);
                }
                active = pairs.iter().map(|p| p.0).collect();
            }
        }
        AnsatzFamily::ReUploading => {
            let chunks: Vec<&[usize]> = all.chunks(n).collect();
            for l in 0..ansatz.layers {
                if let (Some(axis), false) = (axis, chunks.is_empty()) {
                    // wider inputs are spread across layers
                    let chunk = if feature_dim <= n {
                        &all[..]
                    } else {
                        chunks[l % chunks.len()]
                    };
                    a.encode(axis, chunk);
                }
                for q in 0..n {
                    a.trainable(GateKind::Rot, &[q]);
                }
                a.entangle(ansatz.entangler);
            }
        }
    }
    Ok(a.finish())
}

/// Ansatz body only: the template for a model without angle-encoded inputs.
pub fn build_ansatz(spec: AnsatzSpec, num_qubits: usize) -> Result<Template> {
    build_template(num_qubits, 0, EncodingSpec::Amplitude, spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn amplitude_examples() {
        let s = amplitude_state(&[1.0, 0.0, 0.0, 0.0], 2).unwrap();
        assert_eq!(s.amplitudes()[0], Complex64::new(1.0, 0.0));
        let s = amplitude_state(&[3.0, 4.0], 2).unwrap();
        let re: Vec<f64> = s.amplitudes().iter().map(|a| a.re).collect();
        assert_eq!(re, vec![0.6, 0.8, 0.0, 0.0]);
        assert!(amplitude_state(&[0.0, 0.0], 1).is_err());
        assert!(amplitude_state(&[1.0; 5], 2).is_err());
    }

    #[test]
    fn block_stacking_counts() {
        let t = build_ansatz(AnsatzSpec::block_stacking(0), 4).unwrap();
        assert!(t.circuit.is_empty());
        assert!(t.slots.is_empty());
        let t = build_ansatz(AnsatzSpec::block_stacking(2), 4).unwrap();
        assert_eq!(t.slots.len(), 16);
        assert_eq!(t.circuit.len(), 24);
        assert!(t.circuit.is_valid());
    }

    #[test]
    fn hierarchical_halves_active_qubits() {
        let spec = AnsatzSpec {
            family: AnsatzFamily::Hierarchical,
            layers: 1,
            entangler: Entangler::RingCnot,
        };
        let t = build_ansatz(spec, 4).unwrap();
        let pools: Vec<_> = t
            .circuit
            .gates()
            .iter()
            .filter(|g| g.kind == GateKind::CRZ)
            .collect();
        assert_eq!(pools.len(), 3);
        // level 1 keeps {0, 2}; level 2 keeps {0}
        assert_eq!(
            pools.iter().map(|g| g.wires.clone()).collect::<Vec<_>>(),
            vec![vec![1, 0], vec![3, 2], vec![2, 0]]
        );
        assert_eq!(t.slots.len(), 3 * 6 + 3);
        assert!(build_ansatz(spec, 3).is_err());
    }

    #[test]
    fn slots_cover_every_component_once() {
        for family in [
            AnsatzFamily::BlockStacking,
            AnsatzFamily::Hierarchical,
            AnsatzFamily::ReUploading,
        ] {
            for entangler in [
                Entangler::RingCnot,
                Entangler::LadderCnot,
                Entangler::CrzRing,
            ] {
                let spec = AnsatzSpec {
                    family,
                    layers: 2,
                    entangler,
                };
                let t = build_template(4, 3, EncodingSpec::default(), spec).unwrap();
                let mut seen = std::collections::BTreeSet::new();
                for s in &t.slots {
                    assert!(seen.insert((s.gate, s.component)));
                }
                let trainable: usize = t
                    .circuit
                    .gates()
                    .iter()
                    .filter(|g| g.feature.is_none())
                    .map(|g| g.kind.param_count())
                    .sum();
                assert_eq!(seen.len(), trainable);
                assert!(t.circuit.is_valid());
            }
        }
    }

    #[test]
    fn reuploading_spreads_wide_inputs() {
        let spec = AnsatzSpec {
            family: AnsatzFamily::ReUploading,
            layers: 2,
            entangler: Entangler::RingCnot,
        };
        let t = build_template(2, 4, EncodingSpec::default(), spec).unwrap();
        let features: Vec<usize> = t.circuit.gates().iter().filter_map(|g| g.feature).collect();
        assert_eq!(features, vec![0, 1, 2, 3]);
        assert!(build_template(2, 5, EncodingSpec::default(), spec).is_err());
        let t = build_template(2, 2, EncodingSpec::default(), spec).unwrap();
        assert_eq!(
            t.circuit
                .gates()
                .iter()
                .filter(|g| g.feature.is_some())
                .count(),
            4
        );
    }

    #[test]
    fn encoding_capacity() {
        let bs = AnsatzSpec::block_stacking(1);
        assert!(EncodingSpec::Amplitude.validate(4, 2, &bs).is_ok());
        assert!(EncodingSpec::Amplitude.validate(5, 2, &bs).is_err());
        assert!(EncodingSpec::default().validate(3, 2, &bs).is_err());
        assert!(EncodingSpec::Angle {
            axis: GateKind::Hadamard
        }
        .validate(1, 2, &bs)
        .is_err());
    }
}
