use serde::{Deserialize, Serialize};

use super::build::{amplitude_state, build_template, AnsatzSpec, EncodingSpec, Slot, Template};
use super::data::FeatureScaling;
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::sim::{
    channel_acts, draw_firings, run_fired_from_pure, run_statevector_with, sample_z_from_prob,
    NoiseChannel, StateVector,
};

/// Measurement budget of one prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shots {
    /// Exact expectation values.
    Exact,
    Finite(u64),
}

/// Simulator a prediction runs on.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Backend {
    #[default]
    Noiseless,
    /// Density-matrix evolution with stochastic channel insertion; each
    /// execution draws a fresh insertion pattern.
    Noisy(Vec<(NoiseChannel, f64)>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub scores: Vec<f64>,
    pub label: usize,
    /// Top-1 minus top-2 score.
    pub confidence: f64,
}

impl Prediction {
    /// Argmax with lowest-index tie-break.
    pub fn from_scores(scores: Vec<f64>) -> Self {
        let mut label = 0;
        for (j, &s) in scores.iter().enumerate() {
            if s > scores[label] {
                label = j;
            }
        }
        let runner_up = scores
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != label)
            .map(|(_, &s)| s)
            .fold(f64::NEG_INFINITY, f64::max);
        let confidence = if runner_up.is_finite() {
            scores[label] - runner_up
        } else {
            0.0
        };
        Prediction {
            scores,
            label,
            confidence,
        }
    }
}

/// A QNN classifier. Trained models carry the template that maps `theta`
/// onto the circuit; mutants carry an edited circuit and no template.
#[derive(Debug, Clone, PartialEq)]
pub struct QnnModel {
    pub num_qubits: usize,
    pub encoding: EncodingSpec,
    pub ansatz: AnsatzSpec,
    pub output_qubits: Vec<usize>,
    pub num_classes: usize,
    pub feature_scaling: FeatureScaling,
    theta: Vec<f64>,
    template: Option<Template>,
    circuit: Circuit,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    num_qubits: usize,
    encoding: EncodingSpec,
    ansatz: AnsatzSpec,
    theta: Vec<f64>,
    output_qubits: Vec<usize>,
    num_classes: usize,
    feature_scaling: FeatureScaling,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    circuit: Option<Circuit>,
}

impl QnnModel {
    /// Builds the template for `feature_scaling.dim()` inputs and binds
    /// `theta`; an empty `theta` binds zeros.
    pub fn new(
        num_qubits: usize,
        encoding: EncodingSpec,
        ansatz: AnsatzSpec,
        output_qubits: Vec<usize>,
        num_classes: usize,
        feature_scaling: FeatureScaling,
        theta: Vec<f64>,
    ) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 classes, got {num_classes}"
            )));
        }
        let sign = output_qubits.len() == 1 && num_classes == 2;
        if !sign && output_qubits.len() != num_classes {
            return Err(Error::InvalidParameter(format!(
                "{} output qubits for {num_classes} classes",
                output_qubits.len()
            )));
        }
        if let Some(&q) = output_qubits.iter().find(|&&q| q >= num_qubits) {
            return Err(Error::QubitOutOfRange {
                qubit: q,
                width: num_qubits,
            });
        }
        if feature_scaling.min.len() != feature_scaling.max.len() {
            return Err(Error::InvalidParameter(
                "feature_scaling min/max length mismatch".into(),
            ));
        }
        let template = build_template(num_qubits, feature_scaling.dim(), encoding, ansatz)?;
        let theta = if theta.is_empty() {
            vec![0.0; template.slots.len()]
        } else {
            theta
        };
        let circuit = template.bind(&theta)?;
        Ok(QnnModel {
            num_qubits,
            encoding,
            ansatz,
            output_qubits,
            num_classes,
            feature_scaling,
            theta,
            template: Some(template),
            circuit,
        })
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Slot map, absent on mutants.
    pub fn slots(&self) -> Option<&[Slot]> {
        self.template.as_ref().map(|t| t.slots.as_slice())
    }

    pub fn is_mutant(&self) -> bool {
        self.template.is_none()
    }

    pub fn set_theta(&mut self, theta: Vec<f64>) -> Result<()> {
        let t = self
            .template
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("mutants have no parameter slots".into()))?;
        self.circuit = t.bind(&theta)?;
        self.theta = theta;
        Ok(())
    }

    /// Copy of this model running `circuit` instead of its own.
    pub fn with_circuit(&self, circuit: Circuit) -> QnnModel {
        QnnModel {
            template: None,
            circuit,
            ..self.clone()
        }
    }

    pub fn sign_readout(&self) -> bool {
        self.output_qubits.len() == 1 && self.num_classes == 2
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_scaling.dim()
    }

    /// Input state and execution-time feature values for `x`.
    pub(crate) fn prepare(&self, x: &[f64]) -> Result<(StateVector, Option<Vec<f64>>)> {
        if x.len() != self.feature_dim() {
            return Err(Error::Encoding(format!(
                "expected {} features, got {}",
                self.feature_dim(),
                x.len()
            )));
        }
        match self.encoding {
            EncodingSpec::Amplitude => Ok((amplitude_state(x, self.num_qubits)?, None)),
            EncodingSpec::Angle { .. } => Ok((
                StateVector::zero(self.num_qubits)?,
                Some(self.feature_scaling.scale(x)?),
            )),
        }
    }

    /// Per-class scores from per-output `⟨Z⟩`.
    pub fn readout(&self, z: &[f64]) -> Vec<f64> {
        if self.sign_readout() {
            vec![z[0], -z[0]]
        } else {
            z.to_vec()
        }
    }

    /// `p(1)` on each output qubit after running `circuit` on `x`.
    pub(crate) fn p_ones_with(&self, circuit: &Circuit, x: &[f64]) -> Result<Vec<f64>> {
        let (input, feats) = self.prepare(x)?;
        let out = run_statevector_with(circuit, &input, feats.as_deref())?;
        self.output_qubits
            .iter()
            .map(|&q| out.prob_one(q))
            .collect()
    }

    pub(crate) fn p_ones(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.p_ones_with(&self.circuit, x)
    }

    /// One noisy execution: a fresh insertion pattern, then output marginals.
    /// `noiseless` short-circuits executions where no channel acts.
    pub(crate) fn p_ones_noisy(
        &self,
        x: &[f64],
        noise: &[(NoiseChannel, f64)],
        noiseless: Option<&[f64]>,
        rng: &mut Rng,
    ) -> Result<Vec<f64>> {
        let fired = draw_firings(&self.circuit, noise, rng);
        let gates = self.circuit.gates();
        let acts = (0..gates.len()).any(|g| {
            noise
                .iter()
                .enumerate()
                .any(|(c, (ch, _))| fired[g * noise.len() + c] && channel_acts(ch, &gates[g]))
        });
        if !acts {
            return match noiseless {
                Some(p) => Ok(p.to_vec()),
                None => self.p_ones(x),
            };
        }
        let (input, feats) = self.prepare(x)?;
        let out = run_fired_from_pure(&self.circuit, noise, &input, feats.as_deref(), &fired)?;
        self.output_qubits
            .iter()
            .map(|&q| out.prob_one(q))
            .collect()
    }

    /// Exact noiseless class scores.
    pub fn exact_scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        let z: Vec<f64> = self.p_ones(x)?.iter().map(|p| 1.0 - 2.0 * p).collect();
        Ok(self.readout(&z))
    }

    pub(crate) fn exact_scores_with(&self, circuit: &Circuit, x: &[f64]) -> Result<Vec<f64>> {
        let z: Vec<f64> = self
            .p_ones_with(circuit, x)?
            .iter()
            .map(|p| 1.0 - 2.0 * p)
            .collect();
        Ok(self.readout(&z))
    }

    pub(crate) fn scores_from(
        &self,
        p_ones: &[f64],
        shots: Shots,
        rng: &mut Rng,
    ) -> Result<Vec<f64>> {
        let z: Vec<f64> = match shots {
            Shots::Exact => p_ones.iter().map(|p| 1.0 - 2.0 * p).collect(),
            Shots::Finite(0) => {
                return Err(Error::InvalidParameter("shots must be at least 1".into()))
            }
            Shots::Finite(s) => p_ones
                .iter()
                .map(|&p| sample_z_from_prob(p, s, rng))
                .collect(),
        };
        Ok(self.readout(&z))
    }

    pub fn predict(&self, x: &[f64], shots: Shots, rng: &mut Rng) -> Result<Prediction> {
        self.predict_on(x, shots, &Backend::Noiseless, rng)
    }

    pub fn predict_on(
        &self,
        x: &[f64],
        shots: Shots,
        backend: &Backend,
        rng: &mut Rng,
    ) -> Result<Prediction> {
        let p = match backend {
            Backend::Noiseless => self.p_ones(x)?,
            Backend::Noisy(noise) => self.p_ones_noisy(x, noise, None, rng)?,
        };
        Ok(Prediction::from_scores(self.scores_from(&p, shots, rng)?))
    }

    /// Deterministic noiseless prediction.
    pub fn predict_exact(&self, x: &[f64]) -> Result<Prediction> {
        Ok(Prediction::from_scores(self.exact_scores(x)?))
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            num_qubits: self.num_qubits,
            encoding: self.encoding,
            ansatz: self.ansatz,
            theta: self.theta.clone(),
            output_qubits: self.output_qubits.clone(),
            num_classes: self.num_classes,
            feature_scaling: self.feature_scaling.clone(),
            circuit: self.is_mutant().then(|| self.circuit.clone()),
        };
        serde_json::to_string_pretty(&file).expect("model serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: ModelFile = serde_json::from_str(text)?;
        let model = QnnModel::new(
            f.num_qubits,
            f.encoding,
            f.ansatz,
            f.output_qubits,
            f.num_classes,
            f.feature_scaling,
            f.theta,
        )?;
        match f.circuit {
            None => Ok(model),
            Some(c) => {
                let c = Circuit::from_gates(c.num_qubits, c.gates().to_vec());
                if c.num_qubits != model.num_qubits {
                    return Err(Error::InvalidCircuit(format!(
                        "circuit width {} differs from model width {}",
                        c.num_qubits, model.num_qubits
                    )));
                }
                c.ensure_valid()?;
                Ok(model.with_circuit(c))
            }
        }
    }
}
