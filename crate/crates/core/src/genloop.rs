//! Binary-search generation of effective mutants.
//!
//! Each probe fixes a gate percentage `mid`, grows a batch until its
//! reference accuracies are stable (RSE gate), and then asks whether the
//! batch as a whole is killed. Killed batches pull the upper bound down and
//! contribute their killable, non-trivial members; survivors push the lower
//! bound up. Probing stops once the interval is narrower than one gate's
//! share of the scope.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mutops::{apply, scope_population, Mutant, MutationConfig};
use crate::qnn::{accuracy, accuracy_distribution, Backend, Dataset, QnnModel, Shots};
use crate::rng::{derive, tag};
use crate::stats::{is_killed, is_nontrivial, rse, AccuracyDistribution, KillVerdict, Thresholds};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub k_max: usize,
    /// Mutants added per stability iteration at the first probe.
    pub batch: usize,
    pub lb: f64,
    pub ub: f64,
    pub shots: Shots,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            k_max: 10,
            batch: 10,
            lb: 0.0,
            ub: 0.5,
            shots: Shots::Finite(1000),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_max == 0 || self.batch == 0 {
            return Err(Error::Config("k_max and batch must be at least 1".into()));
        }
        if !(0.0 <= self.lb && self.lb < self.ub && self.ub <= 1.0) {
            return Err(Error::Config(format!(
                "invalid bounds [{}, {}]",
                self.lb, self.ub
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundUpdate {
    /// `ub ← mid`.
    Upper,
    /// `lb ← mid`.
    Lower,
}

/// One probe of the search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub call: usize,
    pub mid: f64,
    pub lb: f64,
    pub ub: f64,
    /// Mutants per stability iteration at this probe.
    pub batch: usize,
    pub iterations: usize,
    pub generated: usize,
    pub rse: f64,
    pub stable: bool,
    pub set_verdict: Option<KillVerdict>,
    pub update: BoundUpdate,
    pub effective: usize,
}

/// Verdicts of one stable-batch mutant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutantVerdict {
    pub id: String,
    pub call: usize,
    pub percentage: f64,
    pub original: AccuracyDistribution,
    pub mutant: AccuracyDistribution,
    pub kill: KillVerdict,
    pub nontrivial: bool,
}

impl MutantVerdict {
    pub fn effective(&self) -> bool {
        self.kill.killed && self.nontrivial
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Totals {
    pub generated: usize,
    pub stable: usize,
    pub evaluated: usize,
    pub killable: usize,
    pub nontrivial: usize,
    pub effective: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub operator: String,
    pub seed: u64,
    pub scope_size: usize,
    pub calls: usize,
    pub call_bound: usize,
    pub trace: Vec<TraceRecord>,
    /// Members of set-killed batches, with their recorded distributions.
    pub verdicts: Vec<MutantVerdict>,
    pub effective_ids: Vec<String>,
    pub totals: Totals,
}

impl GenerationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}

pub struct Generation {
    pub report: GenerationReport,
    pub effective: Vec<Mutant>,
    /// Every member of every stable batch, effective ones included.
    pub stable: Vec<Mutant>,
}

/// Whether the bounds can still move `target_count`: `ub − lb ≥ 1/|scope|`.
pub fn can_refine(lb: f64, ub: f64, scope_size: usize) -> bool {
    scope_size > 0 && ub - lb >= 1.0 / scope_size as f64
}

/// Largest number of probes a search from width `w0` may make.
pub fn call_bound(w0: f64, scope_size: usize) -> usize {
    let g = 1.0 / scope_size.max(1) as f64;
    if w0 < g {
        1
    } else {
        (w0 / g).log2().ceil() as usize + 1
    }
}

/// Batch-level killing: the original's mean replicated once per mutant
/// against the mutants' mean accuracies.
pub fn is_set_killed(
    original_mean: f64,
    mutant_means: &[f64],
    th: &Thresholds,
) -> Result<KillVerdict> {
    if mutant_means.len() < 2 {
        return Err(Error::InsufficientSamples(format!(
            "set killing needs 2 mutants, got {}",
            mutant_means.len()
        )));
    }
    let a_o = AccuracyDistribution::constant(original_mean, mutant_means.len());
    is_killed(&a_o, &AccuracyDistribution::new(mutant_means.to_vec()), th)
}

/// Keeps the batch members that are both killed and non-trivial.
pub fn select_effective(
    original: &AccuracyDistribution,
    mutants: &[AccuracyDistribution],
    th: &Thresholds,
) -> Result<Vec<(KillVerdict, bool)>> {
    mutants
        .iter()
        .map(|d| Ok((is_killed(original, d, th)?, is_nontrivial(d, th))))
        .collect()
}

fn batch_rse(accs: &[f64]) -> f64 {
    if accs.len() < 2 {
        return f64::INFINITY;
    }
    rse(&AccuracyDistribution::new(accs.to_vec())).unwrap_or(f64::INFINITY)
}

/// Runs the search for one operator configuration. `template.scope`
/// supplies everything but the percentage, which the search sets.
pub fn generate_effective_mutants(
    original: &QnnModel,
    reference: &Dataset,
    template: &MutationConfig,
    th: &Thresholds,
    search: &SearchConfig,
    backend: &Backend,
    seed: u64,
) -> Result<Generation> {
    search.validate()?;
    th.validate()?;
    if reference.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let scope_size = scope_population(template.operator, &template.scope, original.circuit());
    if scope_size == 0 {
        return Err(Error::EmptyScope);
    }
    let bound = call_bound(search.ub - search.lb, scope_size);
    let (mut lb, mut ub, mut batch) = (search.lb, search.ub, search.batch);
    let mut trace = Vec::new();
    let mut verdicts = Vec::new();
    let mut effective = Vec::new();
    let mut stable_all = Vec::new();
    let mut totals = Totals::default();
    let (t_mut, t_rse, t_dist, t_orig) = (tag("mutant"), tag("rse"), tag("dist"), tag("original"));

    for call in 0.. {
        let mid = (lb + ub) / 2.0;
        let config = MutationConfig {
            scope: template.scope.clone().with_percentage(mid),
            ..template.clone()
        };
        let mut mutants: Vec<Mutant> = Vec::new();
        let mut accs: Vec<f64> = Vec::new();
        let mut iterations = 0;
        while iterations < search.k_max && batch_rse(&accs) > th.tau_rse {
            let it = iterations as u64;
            let fresh: Vec<(Mutant, f64)> = (0..batch)
                .into_par_iter()
                .map(|j| {
                    let m = apply(
                        original,
                        &config.with_seed(derive(seed, &[t_mut, call as u64, it, j as u64])),
                    )?;
                    let a = accuracy(
                        &m.model,
                        reference,
                        search.shots,
                        backend,
                        derive(seed, &[t_rse, call as u64, it, j as u64]),
                    )?;
                    Ok((m, a))
                })
                .collect::<Result<_>>()?;
            for (m, a) in fresh {
                mutants.push(m);
                accs.push(a);
            }
            iterations += 1;
        }
        totals.generated += mutants.len();
        let r = batch_rse(&accs);
        let stable = r <= th.tau_rse;
        let mut record = TraceRecord {
            call,
            mid,
            lb,
            ub,
            batch,
            iterations,
            generated: mutants.len(),
            rse: r,
            stable,
            set_verdict: None,
            update: BoundUpdate::Upper,
            effective: 0,
        };
        if !stable {
            ub = mid;
            batch = (1.5 * batch as f64).ceil() as usize;
        } else {
            totals.stable += mutants.len();
            let orig = accuracy_distribution(
                original,
                reference,
                th.n,
                search.shots,
                backend,
                derive(seed, &[t_orig, call as u64]),
            )?;
            let dists: Vec<AccuracyDistribution> = mutants
                .par_iter()
                .enumerate()
                .map(|(j, m)| {
                    accuracy_distribution(
                        &m.model,
                        reference,
                        th.n,
                        search.shots,
                        backend,
                        derive(seed, &[t_dist, call as u64, j as u64]),
                    )
                })
                .collect::<Result<_>>()?;
            let means: Vec<f64> = dists.iter().map(AccuracyDistribution::mean).collect();
            let set = is_set_killed(orig.mean(), &means, th)?;
            record.set_verdict = Some(set);
            if set.killed {
                ub = mid;
                let picked = select_effective(&orig, &dists, th)?;
                for ((m, d), (kill, nontrivial)) in mutants.iter().zip(dists).zip(picked) {
                    let v = MutantVerdict {
                        id: m.id.clone(),
                        call,
                        percentage: mid,
                        original: orig.clone(),
                        mutant: d,
                        kill,
                        nontrivial,
                    };
                    totals.evaluated += 1;
                    totals.killable += kill.killed as usize;
                    totals.nontrivial += nontrivial as usize;
                    if v.effective() {
                        record.effective += 1;
                        effective.push(m.clone());
                    }
                    verdicts.push(v);
                }
            } else {
                lb = mid;
                record.update = BoundUpdate::Lower;
            }
            stable_all.extend(mutants);
        }
        log::info!(
            "{} probe {call}: mid={mid:.4} rse={r:.4} stable={stable} effective={}",
            template.operator,
            record.effective
        );
        trace.push(record);
        if !can_refine(lb, ub, scope_size) {
            break;
        }
    }
    let calls = trace.len();
    assert!(calls <= bound, "search made {calls} probes, bound {bound}");
    totals.effective = effective.len();
    let report = GenerationReport {
        operator: template.operator.to_string(),
        seed,
        scope_size,
        calls,
        call_bound: bound,
        trace,
        effective_ids: effective.iter().map(|m| m.id.clone()).collect(),
        verdicts,
        totals,
    };
    Ok(Generation {
        report,
        effective,
        stable: stable_all,
    })
}
