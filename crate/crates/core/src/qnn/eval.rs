use rayon::prelude::*;

use super::data::Dataset;
use super::model::{Backend, QnnModel, Shots};
use crate::error::{Error, Result};
use crate::rng::{derive, stream};
use crate::stats::AccuracyDistribution;

const NOISE_STREAM: u64 = 0x6e_6f69_7365;

/// True when no channel of the backend can ever fire.
fn is_effectively_noiseless(backend: &Backend) -> bool {
    match backend {
        Backend::Noiseless => true,
        Backend::Noisy(noise) => noise.iter().all(|(_, p)| *p <= 0.0),
    }
}

fn check(model: &QnnModel, data: &Dataset) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some(&l) = data.labels.iter().find(|&&l| l >= model.num_classes) {
        return Err(Error::InvalidParameter(format!(
            "label {l} outside 0..{}",
            model.num_classes
        )));
    }
    Ok(())
}

/// Noiseless output marginals of every sample, reusable across repetitions.
fn noiseless_marginals(model: &QnnModel, data: &Dataset) -> Result<Vec<Vec<f64>>> {
    data.features.par_iter().map(|x| model.p_ones(x)).collect()
}

fn accuracy_inner(
    model: &QnnModel,
    data: &Dataset,
    marginals: &[Vec<f64>],
    shots: Shots,
    backend: &Backend,
    seed: u64,
) -> Result<f64> {
    let correct: Vec<bool> = (0..data.len())
        .into_par_iter()
        .map(|s| {
            let mut rng = stream(seed, &[s as u64]);
            let p = match backend {
                Backend::Noisy(noise) if !is_effectively_noiseless(backend) => {
                    // insertion draws use their own stream so shot sampling
                    // matches the noiseless run when nothing fires
                    let mut noise_rng = stream(seed, &[s as u64, NOISE_STREAM]);
                    model.p_ones_noisy(
                        &data.features[s],
                        noise,
                        Some(&marginals[s]),
                        &mut noise_rng,
                    )?
                }
                _ => marginals[s].clone(),
            };
            let pred =
                super::model::Prediction::from_scores(model.scores_from(&p, shots, &mut rng)?);
            Ok(pred.label == data.labels[s])
        })
        .collect::<Result<_>>()?;
    Ok(correct.iter().filter(|&&c| c).count() as f64 / data.len() as f64)
}

/// Fraction of correct predictions. Sample `s` draws from the stream
/// `(seed, s)`, so distinct seeds give independent accuracy samples.
pub fn accuracy(
    model: &QnnModel,
    data: &Dataset,
    shots: Shots,
    backend: &Backend,
    seed: u64,
) -> Result<f64> {
    check(model, data)?;
    let marginals = noiseless_marginals(model, data)?;
    accuracy_inner(model, data, &marginals, shots, backend, seed)
}

/// `n` repeated accuracies; repetition `r` equals
/// `accuracy(.., derive(seed, [r]))`.
pub fn accuracy_distribution(
    model: &QnnModel,
    data: &Dataset,
    n: usize,
    shots: Shots,
    backend: &Backend,
    seed: u64,
) -> Result<AccuracyDistribution> {
    check(model, data)?;
    let marginals = noiseless_marginals(model, data)?;
    let values = (0..n)
        .map(|r| {
            accuracy_inner(
                model,
                data,
                &marginals,
                shots,
                backend,
                derive(seed, &[r as u64]),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AccuracyDistribution::new(values))
}

/// Indices of samples the model labels correctly in exact noiseless mode.
pub fn correctly_classified(model: &QnnModel, data: &Dataset) -> Result<Vec<usize>> {
    let ok: Vec<bool> = (0..data.len())
        .into_par_iter()
        .map(|i| Ok(model.predict_exact(&data.features[i])?.label == data.labels[i]))
        .collect::<Result<_>>()?;
    Ok((0..data.len()).filter(|&i| ok[i]).collect())
}
