use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{is_killed, AccuracyDistribution, KillVerdict, Thresholds};
use crate::error::{Error, Result};
use crate::qnn::{accuracy_distribution, Backend, Dataset, QnnModel, Shots};
use crate::rng::{derive, tag};

/// Per-(mutant, class) kill verdicts against one test suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassKills {
    pub original: Vec<AccuracyDistribution>,
    /// `verdicts[i][j]`: mutant `i` on class suite `j`.
    pub verdicts: Vec<Vec<KillVerdict>>,
    pub score: f64,
}

/// Repeats predictions of the original and every mutant on each class
/// suite and records whether the class kills the mutant. The score is the
/// mean of the kill indicators.
pub fn class_kill_matrix(
    mutants: &[QnnModel],
    original: &QnnModel,
    class_suites: &[Dataset],
    th: &Thresholds,
    shots: Shots,
    backend: &Backend,
    seed: u64,
) -> Result<ClassKills> {
    if mutants.is_empty() {
        return Err(Error::Stats(
            "mutation score over an empty mutant set".into(),
        ));
    }
    if let Some(j) = class_suites.iter().position(Dataset::is_empty) {
        return Err(Error::Stats(format!("class suite {j} is empty")));
    }
    let orig_tag = tag("original");
    let original_dists: Vec<AccuracyDistribution> = class_suites
        .par_iter()
        .enumerate()
        .map(|(j, t)| {
            accuracy_distribution(
                original,
                t,
                th.n,
                shots,
                backend,
                derive(seed, &[orig_tag, j as u64]),
            )
        })
        .collect::<Result<_>>()?;
    let verdicts: Vec<Vec<KillVerdict>> = mutants
        .par_iter()
        .enumerate()
        .map(|(i, m)| {
            class_suites
                .iter()
                .enumerate()
                .map(|(j, t)| {
                    let d = accuracy_distribution(
                        m,
                        t,
                        th.n,
                        shots,
                        backend,
                        derive(seed, &[i as u64, j as u64]),
                    )?;
                    is_killed(&original_dists[j], &d, th)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let cells = (mutants.len() * class_suites.len()) as f64;
    let killed = verdicts.iter().flatten().filter(|v| v.killed).count() as f64;
    Ok(ClassKills {
        original: original_dists,
        verdicts,
        score: killed / cells,
    })
}

/// `Σ_i |killed classes of mutant i| / (|mutants| · c)`.
pub fn mutation_score(
    mutants: &[QnnModel],
    original: &QnnModel,
    class_suites: &[Dataset],
    th: &Thresholds,
    shots: Shots,
    backend: &Backend,
    seed: u64,
) -> Result<f64> {
    Ok(class_kill_matrix(mutants, original, class_suites, th, shots, backend, seed)?.score)
}
