use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::suites::{SuiteGroup, SuiteKind, TestSuite};
use crate::circuit::{FunctionCategory, GateFilter, MutationScope};
use crate::error::{Error, Result};
use crate::genloop::{generate_effective_mutants, Generation, GenerationReport, SearchConfig};
use crate::mutops::{MutationConfig, NoiseDist, OperatorKind};
use crate::qnn::{accuracy_distribution, Backend, Dataset, QnnModel};
use crate::rng::{derive, stream, tag};
use crate::sim::NoiseSpec;
use crate::stats::{is_killed, is_nontrivial, mutation_score, AccuracyDistribution, Thresholds};

/// Settings shared by every driver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub thresholds: Thresholds,
    pub search: SearchConfig,
    pub operators: Vec<OperatorKind>,
    /// Base scope; drivers override the parts they scan.
    pub scope: MutationScope,
    pub mutation_noise: NoiseDist,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            thresholds: Thresholds::default(),
            search: SearchConfig::default(),
            operators: OperatorKind::ALL.to_vec(),
            scope: MutationScope::default(),
            mutation_noise: NoiseDist::default(),
        }
    }
}

/// Hex SHA-256 of the value's JSON encoding.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("config serialization is infallible");
    Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

const OOD_NOTE: &str = "OOD members carry the original model's predicted label";

fn fmt(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        "NaN".into()
    }
}

fn csv_string(header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[allow(clippy::too_many_arguments)]
fn generate(
    model: &QnnModel,
    reference: &Dataset,
    op: OperatorKind,
    scope: MutationScope,
    search: &SearchConfig,
    cfg: &ExperimentConfig,
    backend: &Backend,
    seed: u64,
) -> Result<Option<Generation>> {
    let template = MutationConfig {
        operator: op,
        scope,
        noise: cfg.mutation_noise,
        seed: 0,
    };
    match generate_effective_mutants(
        model,
        reference,
        &template,
        &cfg.thresholds,
        search,
        backend,
        seed,
    ) {
        Ok(g) => Ok(Some(g)),
        Err(Error::Inapplicable { reason, .. }) => {
            log::warn!("{op}: inapplicable ({reason})");
            Ok(None)
        }
        Err(Error::EmptyScope) => {
            log::warn!("{op}: empty scope");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub operator: OperatorKind,
    pub effective: usize,
    /// One score per suite, in table order.
    pub scores: Vec<f64>,
}

/// Mutation scores per operator and suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub model: String,
    pub seed: u64,
    pub config_hash: String,
    pub suites: Vec<SuiteKind>,
    pub rows: Vec<ScoreRow>,
    /// Operators without effective mutants, left out of the mean.
    pub omitted: Vec<OperatorKind>,
    pub mean: Vec<f64>,
    pub generation: Vec<GenerationReport>,
    pub notes: Vec<String>,
}

impl ScoreTable {
    pub fn score(&self, kind: SuiteKind) -> Option<f64> {
        self.suites
            .iter()
            .position(|&k| k == kind)
            .map(|i| self.mean[i])
    }

    pub fn group_mean(&self, group: SuiteGroup) -> f64 {
        let v: Vec<f64> = self
            .suites
            .iter()
            .zip(&self.mean)
            .filter(|(k, _)| k.group() == group)
            .map(|(_, &s)| s)
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut header = vec!["model".to_string(), "operator".to_string()];
        header.extend(self.suites.iter().map(|k| k.to_string()));
        let mut rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let mut v = vec![self.model.clone(), r.operator.to_string()];
                v.extend(r.scores.iter().map(|&s| fmt(s)));
                v
            })
            .collect();
        let mut mean = vec![self.model.clone(), "mean".to_string()];
        mean.extend(self.mean.iter().map(|&s| fmt(s)));
        rows.push(mean);
        csv_string(&header, &rows)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}

#[derive(Serialize)]
struct ScoreConfig<'a> {
    driver: &'a str,
    experiment: &'a ExperimentConfig,
    model: String,
    reference: &'a Dataset,
    suites: &'a [TestSuite],
    noise: Option<&'a NoiseSpec>,
}

/// Generates effective mutants per operator on the reference data and
/// scores every suite against them.
pub fn run_rq1(
    model: &QnnModel,
    name: &str,
    reference: &Dataset,
    suites: &[TestSuite],
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<ScoreTable> {
    run_scores("rq1", model, name, reference, suites, cfg, None, seed)
}

/// [`run_rq1`] with every prediction, including the original's, on the
/// noisy density-matrix backend.
pub fn run_noisy(
    model: &QnnModel,
    name: &str,
    noise: &NoiseSpec,
    reference: &Dataset,
    suites: &[TestSuite],
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<ScoreTable> {
    run_scores(
        "noisy",
        model,
        name,
        reference,
        suites,
        cfg,
        Some(noise),
        seed,
    )
}

#[allow(clippy::too_many_arguments)]
fn run_scores(
    driver: &str,
    model: &QnnModel,
    name: &str,
    reference: &Dataset,
    suites: &[TestSuite],
    cfg: &ExperimentConfig,
    noise: Option<&NoiseSpec>,
    seed: u64,
) -> Result<ScoreTable> {
    let backend = match noise {
        None => Backend::Noiseless,
        Some(spec) => Backend::Noisy(spec.build()?),
    };
    let hash = config_hash(&ScoreConfig {
        driver,
        experiment: cfg,
        model: model.to_json(),
        reference,
        suites,
        noise,
    });
    let th = &cfg.thresholds;
    let mut rows = Vec::new();
    let mut omitted = Vec::new();
    let mut generation = Vec::new();
    for &op in &cfg.operators {
        let op_tag = tag(op.name());
        let gen = generate(
            model,
            reference,
            op,
            cfg.scope.clone(),
            &cfg.search,
            cfg,
            &backend,
            derive(seed, &[tag("gen"), op_tag]),
        )?;
        let Some(gen) = gen else {
            omitted.push(op);
            continue;
        };
        generation.push(gen.report.clone());
        if gen.effective.is_empty() {
            log::warn!("{op}: no effective mutants, left out of the mean");
            omitted.push(op);
            continue;
        }
        let mutants: Vec<QnnModel> = gen.effective.iter().map(|m| m.model.clone()).collect();
        let scores = suites
            .iter()
            .map(|s| {
                let sd = derive(seed, &[tag("score"), op_tag, tag(s.kind.name())]);
                mutation_score(
                    &mutants,
                    model,
                    &s.classes,
                    th,
                    cfg.search.shots,
                    &backend,
                    sd,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(ScoreRow {
            operator: op,
            effective: mutants.len(),
            scores,
        });
    }
    let mean = (0..suites.len())
        .map(|j| {
            if rows.is_empty() {
                f64::NAN
            } else {
                rows.iter().map(|r| r.scores[j]).sum::<f64>() / rows.len() as f64
            }
        })
        .collect();
    let mut notes = Vec::new();
    if suites.iter().any(|s| s.kind == SuiteKind::OOD) {
        notes.push(OOD_NOTE.to_string());
    }
    if noise.is_some() {
        notes.push("all predictions use the noisy density-matrix backend".into());
    }
    Ok(ScoreTable {
        model: name.to_string(),
        seed,
        config_hash: hash,
        suites: suites.iter().map(|s| s.kind).collect(),
        rows,
        omitted,
        mean,
        generation,
        notes,
    })
}

/// Mutation scope of one scanned region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub name: String,
    pub scope: MutationScope,
}

/// Parses `"0-25,25-50"` into percent intervals.
pub fn parse_partitions(spec: &str) -> Result<Vec<(f64, f64)>> {
    spec.split(',')
        .map(|part| {
            let (a, b) = part
                .trim()
                .split_once('-')
                .ok_or_else(|| Error::Config(format!("partition '{part}' must look like lo-hi")))?;
            let lo: f64 = a
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad bound '{a}'")))?;
            let hi: f64 = b
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad bound '{b}'")))?;
            if !(0.0 <= lo && lo < hi && hi <= 100.0) {
                return Err(Error::Config(format!("invalid partition {lo}-{hi}")));
            }
            Ok((lo, hi))
        })
        .collect()
}

pub fn depth_regions(base: &MutationScope, partitions: &[(f64, f64)]) -> Vec<Region> {
    partitions
        .iter()
        .map(|&(lo, hi)| Region {
            name: format!("depth {lo}-{hi}%"),
            scope: MutationScope {
                depth_range: (lo, hi),
                ..base.clone()
            },
        })
        .collect()
}

/// Output qubits against an equally sized random subset of the others.
pub fn qubit_regions(model: &QnnModel, base: &MutationScope, seed: u64) -> Result<Vec<Region>> {
    let outputs: BTreeSet<usize> = model.output_qubits.iter().copied().collect();
    let mut others: Vec<usize> = (0..model.num_qubits)
        .filter(|q| !outputs.contains(q))
        .collect();
    if others.len() < outputs.len() {
        return Err(Error::Config(format!(
            "{} non-output qubits cannot match {} output qubits",
            others.len(),
            outputs.len()
        )));
    }
    others.shuffle(&mut stream(seed, &[tag("qubit-region")]));
    let picked: BTreeSet<usize> = others.into_iter().take(outputs.len()).collect();
    Ok(vec![
        Region {
            name: "output".into(),
            scope: MutationScope {
                qubits: Some(outputs),
                ..base.clone()
            },
        },
        Region {
            name: "non-output".into(),
            scope: MutationScope {
                qubits: Some(picked),
                ..base.clone()
            },
        },
    ])
}

/// Accuracy and verdict rates of a mutant set on a fixed suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assessment {
    pub mutants: usize,
    pub mean_accuracy: f64,
    pub kr: f64,
    pub nr: f64,
}

/// Evaluates every mutant against the original on `suite` with the same
/// repeated-prediction protocol as killing on reference data.
pub fn assess(
    model: &QnnModel,
    mutants: &[QnnModel],
    suite: &Dataset,
    th: &Thresholds,
    search: &SearchConfig,
    backend: &Backend,
    seed: u64,
) -> Result<Assessment> {
    if mutants.is_empty() {
        return Ok(Assessment {
            mutants: 0,
            mean_accuracy: f64::NAN,
            kr: f64::NAN,
            nr: f64::NAN,
        });
    }
    let orig = accuracy_distribution(
        model,
        suite,
        th.n,
        search.shots,
        backend,
        derive(seed, &[tag("original")]),
    )?;
    let rows: Vec<(f64, bool, bool)> = mutants
        .par_iter()
        .enumerate()
        .map(|(i, m)| {
            let d: AccuracyDistribution = accuracy_distribution(
                m,
                suite,
                th.n,
                search.shots,
                backend,
                derive(seed, &[i as u64]),
            )?;
            Ok((
                d.mean(),
                is_killed(&orig, &d, th)?.killed,
                is_nontrivial(&d, th),
            ))
        })
        .collect::<Result<_>>()?;
    let n = rows.len() as f64;
    Ok(Assessment {
        mutants: rows.len(),
        mean_accuracy: rows.iter().map(|r| r.0).sum::<f64>() / n,
        kr: rows.iter().filter(|r| r.1).count() as f64 / n,
        nr: rows.iter().filter(|r| r.2).count() as f64 / n,
    })
}

impl Assessment {
    /// Mutant-weighted union of per-set assessments; exact because every
    /// field is a per-mutant mean.
    pub fn pool(parts: &[Assessment]) -> Assessment {
        let n: usize = parts.iter().map(|a| a.mutants).sum();
        if n == 0 {
            return Assessment {
                mutants: 0,
                mean_accuracy: f64::NAN,
                kr: f64::NAN,
                nr: f64::NAN,
            };
        }
        let avg = |f: fn(&Assessment) -> f64| {
            parts
                .iter()
                .filter(|a| a.mutants > 0)
                .map(|a| f(a) * a.mutants as f64)
                .sum::<f64>()
                / n as f64
        };
        Assessment {
            mutants: n,
            mean_accuracy: avg(|a| a.mean_accuracy),
            kr: avg(|a| a.kr),
            nr: avg(|a| a.nr),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub region: String,
    /// `None` on the per-region aggregate row.
    pub operator: Option<OperatorKind>,
    /// Category gate count for gate scans, scope size for region scans.
    pub gates: usize,
    pub initial_ub: f64,
    /// `None` marks an N/A cell.
    pub effective: Option<usize>,
    pub assessment: Option<Assessment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    pub model: String,
    pub seed: u64,
    pub config_hash: String,
    pub rows: Vec<ScanRow>,
    pub notes: Vec<String>,
}

impl ScanTable {
    pub fn row(&self, region: &str, operator: Option<OperatorKind>) -> Option<&ScanRow> {
        self.rows
            .iter()
            .find(|r| r.region == region && r.operator == operator)
    }

    pub fn to_csv(&self) -> Result<String> {
        let header: Vec<String> = [
            "model",
            "region",
            "operator",
            "gates",
            "initial_ub",
            "effective",
            "stable",
            "acc",
            "KR",
            "NR",
        ]
        .map(String::from)
        .to_vec();
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let op = r.operator.map_or("all".to_string(), |o| o.to_string());
                let mut v = vec![
                    self.model.clone(),
                    r.region.clone(),
                    op,
                    r.gates.to_string(),
                    fmt(r.initial_ub),
                ];
                match (&r.effective, &r.assessment) {
                    (Some(e), Some(a)) => v.extend([
                        e.to_string(),
                        a.mutants.to_string(),
                        fmt(a.mean_accuracy),
                        fmt(a.kr),
                        fmt(a.nr),
                    ]),
                    _ => v.extend(std::iter::repeat_n("N/A".to_string(), 5)),
                }
                v
            })
            .collect();
        csv_string(&header, &rows)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}

#[derive(Serialize)]
struct ScanConfig<'a> {
    driver: &'a str,
    experiment: &'a ExperimentConfig,
    model: String,
    reference: &'a Dataset,
    suite: &'a TestSuite,
    regions: &'a [Region],
}

/// One mutant search per (region, operator). Accuracy, KR and NR cover
/// every stable-batch mutant, measured on the same suite for all regions.
pub fn run_region_scan(
    model: &QnnModel,
    name: &str,
    reference: &Dataset,
    suite: &TestSuite,
    regions: &[Region],
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<ScanTable> {
    let hash = config_hash(&ScanConfig {
        driver: "region",
        experiment: cfg,
        model: model.to_json(),
        reference,
        suite,
        regions,
    });
    let backend = Backend::Noiseless;
    let data = suite.all();
    let mut rows = Vec::new();
    for region in regions {
        let mut parts: Vec<Assessment> = Vec::new();
        let mut effective = 0;
        let scope_size = region
            .scope
            .select(model.circuit(), model.circuit().depth(), true)
            .len();
        for &op in &cfg.operators {
            let op_tag = tag(op.name());
            let rtag = tag(&region.name);
            let gen = generate(
                model,
                reference,
                op,
                region.scope.clone(),
                &cfg.search,
                cfg,
                &backend,
                derive(seed, &[rtag, op_tag]),
            )?;
            let row = match gen {
                None => ScanRow {
                    region: region.name.clone(),
                    operator: Some(op),
                    gates: scope_size,
                    initial_ub: cfg.search.ub,
                    effective: None,
                    assessment: None,
                },
                Some(g) => {
                    let stable: Vec<QnnModel> = g.stable.iter().map(|m| m.model.clone()).collect();
                    let a = assess(
                        model,
                        &stable,
                        &data,
                        &cfg.thresholds,
                        &cfg.search,
                        &backend,
                        derive(seed, &[rtag, op_tag, tag("assess")]),
                    )?;
                    effective += g.effective.len();
                    parts.push(a.clone());
                    ScanRow {
                        region: region.name.clone(),
                        operator: Some(op),
                        gates: scope_size,
                        initial_ub: cfg.search.ub,
                        effective: Some(g.effective.len()),
                        assessment: Some(a),
                    }
                }
            };
            rows.push(row);
        }
        let a = Assessment::pool(&parts);
        rows.push(ScanRow {
            region: region.name.clone(),
            operator: None,
            gates: scope_size,
            initial_ub: cfg.search.ub,
            effective: Some(effective),
            assessment: Some(a),
        });
    }
    Ok(ScanTable {
        model: name.to_string(),
        seed,
        config_hash: hash,
        rows,
        notes: Vec::new(),
    })
}

/// One mutant search per (operator, function category). Categories absent
/// from the circuit are N/A except for insertion. Non-insertion operators
/// start from an upper bound scaled down by the category's population
/// relative to the rarest present category.
pub fn run_gate_scan(
    model: &QnnModel,
    name: &str,
    reference: &Dataset,
    suite: &TestSuite,
    categories: &[FunctionCategory],
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<ScanTable> {
    let regions: Vec<Region> = categories
        .iter()
        .map(|&c| Region {
            name: c.name().to_string(),
            scope: MutationScope {
                gate_types: Some(GateFilter::Function(c)),
                ..cfg.scope.clone()
            },
        })
        .collect();
    let hash = config_hash(&ScanConfig {
        driver: "gate",
        experiment: cfg,
        model: model.to_json(),
        reference,
        suite,
        regions: &regions,
    });
    let backend = Backend::Noiseless;
    let data = suite.all();
    let c = model.circuit();
    let counts: Vec<usize> = regions
        .iter()
        .map(|r| r.scope.select(c, c.depth(), true).len())
        .collect();
    let min_pop = counts.iter().copied().filter(|&n| n > 0).min().unwrap_or(0);
    let mut rows = Vec::new();
    for &op in &cfg.operators {
        for (region, &count) in regions.iter().zip(&counts) {
            let mut search = cfg.search.clone();
            if op != OperatorKind::RGA && count > 0 {
                search.ub =
                    (cfg.search.ub * min_pop as f64 / count as f64).max(search.lb + f64::EPSILON);
            }
            let na = ScanRow {
                region: region.name.clone(),
                operator: Some(op),
                gates: count,
                initial_ub: search.ub,
                effective: None,
                assessment: None,
            };
            if count == 0 && op != OperatorKind::RGA {
                rows.push(na);
                continue;
            }
            let sd = derive(seed, &[tag(&region.name), tag(op.name())]);
            match generate(
                model,
                reference,
                op,
                region.scope.clone(),
                &search,
                cfg,
                &backend,
                sd,
            )? {
                None => rows.push(na),
                Some(g) => {
                    let stable: Vec<QnnModel> = g.stable.iter().map(|m| m.model.clone()).collect();
                    let a = assess(
                        model,
                        &stable,
                        &data,
                        &cfg.thresholds,
                        &search,
                        &backend,
                        derive(sd, &[tag("assess")]),
                    )?;
                    rows.push(ScanRow {
                        effective: Some(g.effective.len()),
                        assessment: Some(a),
                        ..na
                    });
                }
            }
        }
    }
    Ok(ScanTable {
        model: name.to_string(),
        seed,
        config_hash: hash,
        rows,
        notes: vec!["gates: in-circuit gate count of the category".into()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitions_parse() {
        assert_eq!(
            parse_partitions("0-25,25-50, 50-100").unwrap(),
            vec![(0.0, 25.0), (25.0, 50.0), (50.0, 100.0)]
        );
        assert!(parse_partitions("50-25").is_err());
        assert!(parse_partitions("abc").is_err());
    }

    #[test]
    fn pooled_assessment_weights_by_mutants() {
        let a = Assessment {
            mutants: 1,
            mean_accuracy: 0.2,
            kr: 1.0,
            nr: 0.0,
        };
        let b = Assessment {
            mutants: 3,
            mean_accuracy: 0.6,
            kr: 0.0,
            nr: 1.0,
        };
        let empty = Assessment {
            mutants: 0,
            mean_accuracy: f64::NAN,
            kr: f64::NAN,
            nr: f64::NAN,
        };
        let p = Assessment::pool(&[a, b, empty]);
        assert_eq!(p.mutants, 4);
        assert!(
            (p.mean_accuracy - 0.5).abs() < 1e-15
                && (p.kr - 0.25).abs() < 1e-15
                && (p.nr - 0.75).abs() < 1e-15
        );
        assert!(Assessment::pool(&[]).mean_accuracy.is_nan());
    }

    #[test]
    fn hash_is_stable() {
        let c = ExperimentConfig::default();
        assert_eq!(config_hash(&c), config_hash(&c.clone()));
        assert_eq!(config_hash(&c).len(), 64);
    }
}
