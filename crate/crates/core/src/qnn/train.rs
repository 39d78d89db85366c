use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::Dataset;
use super::model::QnnModel;
use crate::circuit::{Circuit, GateKind};
use crate::error::{Error, Result};
use crate::rng::{seeded, stream};

/// Cross-entropy of `softmax(logit_scale · scores)` against the target class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossEntropy {
    pub logit_scale: f64,
}

impl Default for CrossEntropy {
    fn default() -> Self {
        CrossEntropy { logit_scale: 1.0 }
    }
}

impl CrossEntropy {
    fn softmax(&self, scores: &[f64]) -> Vec<f64> {
        let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = scores
            .iter()
            .map(|s| ((s - m) * self.logit_scale).exp())
            .collect();
        let z: f64 = e.iter().sum();
        e.into_iter().map(|v| v / z).collect()
    }

    pub fn value(&self, scores: &[f64], target: usize) -> f64 {
        -self.softmax(scores)[target].ln()
    }

    /// `∂L/∂scores`.
    pub fn grad(&self, scores: &[f64], target: usize) -> Vec<f64> {
        let mut p = self.softmax(scores);
        p[target] -= 1.0;
        p.iter_mut().for_each(|v| *v *= self.logit_scale);
        p
    }
}

fn shiftable(kind: GateKind) -> bool {
    use GateKind::*;
    matches!(
        kind,
        RX | RY | RZ | Rot | U3 | PhaseShift | ControlledPhaseShift | CRX | CRY | CRZ
    )
}

/// Derivative of `f(circuit)` with respect to `params[component]` of gate
/// `gate`, by the parameter-shift rule. Controlled rotations have generator
/// spectrum {0, ±1/2} and use the four-term rule.
fn shift_derivative(
    circuit: &Circuit,
    gate: usize,
    component: usize,
    f: impl Fn(&Circuit) -> Result<Vec<f64>>,
) -> Result<Vec<f64>> {
    let kind = circuit.gates()[gate].kind;
    if !shiftable(kind) {
        return Err(Error::NotShiftable(kind.to_string()));
    }
    let eval = |delta: f64| {
        let mut c = circuit.clone();
        c.params_mut(gate)[component] += delta;
        f(&c)
    };
    let diff = |delta: f64| -> Result<Vec<f64>> {
        let (p, m) = (eval(delta)?, eval(-delta)?);
        Ok(p.iter().zip(&m).map(|(a, b)| a - b).collect())
    };
    if kind.needs_four_term_shift() {
        let c_plus = (SQRT_2 + 1.0) / (4.0 * SQRT_2);
        let c_minus = (SQRT_2 - 1.0) / (4.0 * SQRT_2);
        let near = diff(FRAC_PI_2)?;
        let far = diff(3.0 * FRAC_PI_2)?;
        Ok(near
            .iter()
            .zip(&far)
            .map(|(a, b)| c_plus * a - c_minus * b)
            .collect())
    } else {
        Ok(diff(FRAC_PI_2)?.into_iter().map(|v| v / 2.0).collect())
    }
}

/// `∂scores/∂θ_k` for every slot `k`, on the exact simulator.
pub fn score_jacobian(model: &QnnModel, x: &[f64]) -> Result<Vec<Vec<f64>>> {
    let slots = model
        .slots()
        .ok_or_else(|| Error::InvalidParameter("mutants have no parameter slots".into()))?;
    let f = |c: &Circuit| model.exact_scores_with(c, x);
    slots
        .iter()
        .map(|s| shift_derivative(model.circuit(), s.gate, s.component, f))
        .collect()
}

/// Gradient of the loss at `(x, target)` with respect to `theta`.
pub fn parameter_shift_grad(
    model: &QnnModel,
    x: &[f64],
    target: usize,
    loss: &CrossEntropy,
) -> Result<Vec<f64>> {
    let dl = loss.grad(&model.exact_scores(x)?, target);
    Ok(score_jacobian(model, x)?
        .iter()
        .map(|row| row.iter().zip(&dl).map(|(a, b)| a * b).sum())
        .collect())
}

/// Gradient of the loss with respect to the raw input features, through
/// every feature-bound gate and the recorded feature scaling.
pub fn input_gradient(
    model: &QnnModel,
    x: &[f64],
    target: usize,
    loss: &CrossEntropy,
) -> Result<Vec<f64>> {
    if !matches!(model.encoding, super::EncodingSpec::Angle { .. }) {
        return Err(Error::Encoding(
            "input gradients need angle encoding".into(),
        ));
    }
    let dl = loss.grad(&model.exact_scores(x)?, target);
    let mut g = vec![0.0; x.len()];
    let f = |c: &Circuit| model.exact_scores_with(c, x);
    for (i, gate) in model.circuit().gates().iter().enumerate() {
        if let Some(feat) = gate.feature {
            if feat < g.len() {
                let ds = shift_derivative(model.circuit(), i, 0, f)?;
                g[feat] += ds.iter().zip(&dl).map(|(a, b)| a * b).sum::<f64>()
                    * model.feature_scaling.slope(feat);
            }
        }
    }
    Ok(g)
}

/// Mean loss over a dataset.
pub fn dataset_loss(model: &QnnModel, data: &Dataset, loss: &CrossEntropy) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let per: Vec<f64> = (0..data.len())
        .into_par_iter()
        .map(|i| Ok(loss.value(&model.exact_scores(&data.features[i])?, data.labels[i])))
        .collect::<Result<_>>()?;
    Ok(per.iter().sum::<f64>() / data.len() as f64)
}

/// Uniform initial parameters in `[-π, π)`.
pub fn random_theta(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed);
    (0..count).map(|_| rng.random_range(-PI..PI)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub momentum: f64,
    pub loss: CrossEntropy,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            lr: 0.2,
            batch_size: 16,
            momentum: 0.0,
            loss: CrossEntropy::default(),
            seed: 0,
        }
    }
}

/// Mini-batch gradient descent (optionally with momentum) on the exact
/// simulator. Returns the trained model and the mean loss before training
/// and after every epoch.
pub fn train(model: &QnnModel, data: &Dataset, cfg: &TrainConfig) -> Result<(QnnModel, Vec<f64>)> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if cfg.batch_size == 0 {
        return Err(Error::Config("batch_size must be at least 1".into()));
    }
    let mut model = model.clone();
    let mut velocity = vec![0.0; model.theta().len()];
    let mut history = vec![dataset_loss(&model, data, &cfg.loss)?];
    let mut order: Vec<usize> = (0..data.len()).collect();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut stream(cfg.seed, &[epoch as u64]));
        for batch in order.chunks(cfg.batch_size) {
            let grads: Vec<Vec<f64>> = batch
                .par_iter()
                .map(|&i| {
                    parameter_shift_grad(&model, &data.features[i], data.labels[i], &cfg.loss)
                })
                .collect::<Result<_>>()?;
            let mut theta = model.theta().to_vec();
            for (k, t) in theta.iter_mut().enumerate() {
                let g = grads.iter().map(|g| g[k]).sum::<f64>() / batch.len() as f64;
                velocity[k] = cfg.momentum * velocity[k] + g;
                *t -= cfg.lr * velocity[k];
            }
            model.set_theta(theta)?;
        }
        let l = dataset_loss(&model, data, &cfg.loss)?;
        if !l.is_finite() {
            return Err(Error::Diverged { epoch, loss: l });
        }
        log::debug!("epoch {epoch}: loss {l:.6}");
        history.push(l);
    }
    Ok((model, history))
}
