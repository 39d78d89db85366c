use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::attack::{fgsm_step, nes_gradient};
use crate::error::{Error, Result};
use crate::qnn::{correctly_classified, Dataset, QnnModel};
use crate::rng::{stream, tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[allow(clippy::upper_case_acronyms)]
pub enum SuiteKind {
    Ori,
    HConf,
    Skewed,
    Small,
    LConf,
    OOD,
    Aug,
    Adv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SuiteGroup {
    Reference,
    Weak,
    Strong,
}

impl SuiteKind {
    /// Report column order.
    pub const ALL: [SuiteKind; 8] = [
        SuiteKind::Ori,
        SuiteKind::HConf,
        SuiteKind::Skewed,
        SuiteKind::Small,
        SuiteKind::LConf,
        SuiteKind::OOD,
        SuiteKind::Aug,
        SuiteKind::Adv,
    ];

    pub fn group(self) -> SuiteGroup {
        match self {
            SuiteKind::Ori => SuiteGroup::Reference,
            SuiteKind::HConf | SuiteKind::Skewed | SuiteKind::Small => SuiteGroup::Weak,
            SuiteKind::LConf | SuiteKind::OOD | SuiteKind::Aug | SuiteKind::Adv => {
                SuiteGroup::Strong
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SuiteKind::Ori => "Ori",
            SuiteKind::HConf => "HConf",
            SuiteKind::Skewed => "Skewed",
            SuiteKind::Small => "Small",
            SuiteKind::LConf => "LConf",
            SuiteKind::OOD => "OOD",
            SuiteKind::Aug => "Aug",
            SuiteKind::Adv => "Adv",
        }
    }
}

impl fmt::Display for SuiteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SuiteKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown suite kind '{s}'")))
    }
}

/// Where a suite member came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Origin {
    Pool {
        index: usize,
    },
    /// Unseen-class sample labeled with the original model's prediction.
    Heldout {
        index: usize,
        true_class: usize,
    },
    Augmented {
        index: usize,
        attempt: usize,
        salted: Vec<usize>,
    },
    Adversarial {
        index: usize,
        linf: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSuite {
    pub kind: SuiteKind,
    /// `classes[c]` holds the members labeled `c`.
    pub classes: Vec<Dataset>,
    pub provenance: Vec<Vec<Origin>>,
}

impl TestSuite {
    pub fn len(&self) -> usize {
        self.classes.iter().map(Dataset::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn all(&self) -> Dataset {
        Dataset::concat(&self.classes)
    }

    /// Suite from labeled data without provenance.
    pub fn from_dataset(kind: SuiteKind, data: &Dataset, num_classes: usize) -> Self {
        let classes = data.split_by_class(num_classes);
        let provenance = (0..num_classes)
            .map(|c| {
                data.indices_of(c)
                    .into_iter()
                    .map(|index| Origin::Pool { index })
                    .collect()
            })
            .collect();
        TestSuite {
            kind,
            classes,
            provenance,
        }
    }
}

/// Construction knobs; magnitudes are fractions of each feature's recorded
/// range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteParams {
    pub per_class: usize,
    pub aug_sigma: f64,
    pub salt_rate: f64,
    pub adv_eps: f64,
    pub nes_sigma: f64,
    pub nes_population: usize,
    /// Perturbation retries per source sample before moving on.
    pub max_attempts: usize,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams {
            per_class: 100,
            aug_sigma: 0.05,
            salt_rate: 0.05,
            adv_eps: 0.1,
            nes_sigma: 0.01,
            nes_population: 50,
            max_attempts: 20,
        }
    }
}

/// Correctly classified pool samples, shuffled per class by the suite seed,
/// with their exact predictions' confidence.
struct Ranked {
    order: Vec<Vec<usize>>,
    confidence: Vec<f64>,
}

fn rank(model: &QnnModel, pool: &Dataset, seed: u64) -> Result<Ranked> {
    let correct = correctly_classified(model, pool)?;
    let confidence: Vec<f64> = (0..pool.len())
        .into_par_iter()
        .map(|i| Ok(model.predict_exact(&pool.features[i])?.confidence))
        .collect::<Result<_>>()?;
    let order = (0..model.num_classes)
        .map(|c| {
            let mut v: Vec<usize> = correct
                .iter()
                .copied()
                .filter(|&i| pool.labels[i] == c)
                .collect();
            v.shuffle(&mut stream(seed, &[tag("ori"), c as u64]));
            v
        })
        .collect();
    Ok(Ranked { order, confidence })
}

fn need(have: usize, want: usize, what: &str) -> Result<()> {
    if have < want {
        return Err(Error::InsufficientSamples(format!(
            "{what}: need {want}, have {have}"
        )));
    }
    Ok(())
}

fn from_pool(pool: &Dataset, c: usize, idx: &[usize]) -> (Dataset, Vec<Origin>) {
    let mut d = Dataset::default();
    for &i in idx {
        d.push(pool.features[i].clone(), c);
    }
    (d, idx.iter().map(|&index| Origin::Pool { index }).collect())
}

/// Builds one suite from the candidate pool. `heldout` supplies unseen-class
/// samples for OOD and may be empty for other kinds.
pub fn build_suite(
    kind: SuiteKind,
    model: &QnnModel,
    pool: &Dataset,
    heldout: &Dataset,
    params: &SuiteParams,
    seed: u64,
) -> Result<TestSuite> {
    let c = model.num_classes;
    let k = params.per_class;
    if k == 0 {
        return Err(Error::Config("per_class must be at least 1".into()));
    }
    let ranked = rank(model, pool, seed)?;
    let mut classes = Vec::with_capacity(c);
    let mut provenance = Vec::with_capacity(c);
    let mut push = |(d, p): (Dataset, Vec<Origin>)| {
        classes.push(d);
        provenance.push(p);
    };
    match kind {
        SuiteKind::Ori | SuiteKind::Small => {
            let size = if kind == SuiteKind::Ori {
                k
            } else {
                (k / 2).max(1)
            };
            for (cls, order) in ranked.order.iter().enumerate() {
                need(order.len(), size, &format!("class {cls} correct pool"))?;
                push(from_pool(pool, cls, &order[..size]));
            }
        }
        SuiteKind::HConf | SuiteKind::LConf => {
            for (cls, order) in ranked.order.iter().enumerate() {
                need(order.len(), k, &format!("class {cls} correct pool"))?;
                let mut by_conf = order.clone();
                by_conf.sort_by(|&a, &b| {
                    ranked.confidence[b]
                        .total_cmp(&ranked.confidence[a])
                        .then(a.cmp(&b))
                });
                if kind == SuiteKind::LConf {
                    by_conf.reverse();
                }
                push(from_pool(pool, cls, &by_conf[..k]));
            }
        }
        SuiteKind::Skewed => {
            let total = k * c;
            // majority : minority = 10 : 1 per minority class
            let minority = ((total as f64) / (10.0 + (c - 1) as f64)).round() as usize;
            let majority = total - minority * (c - 1);
            for (cls, order) in ranked.order.iter().enumerate() {
                let size = if cls == 0 { majority } else { minority };
                need(order.len(), size, &format!("class {cls} correct pool"))?;
                push(from_pool(pool, cls, &order[..size]));
            }
        }
        SuiteKind::OOD => {
            let keep = k - k / 2;
            let mut hidx: Vec<usize> = (0..heldout.len()).collect();
            hidx.shuffle(&mut stream(seed, &[tag("ood")]));
            let predicted: Vec<usize> = hidx
                .par_iter()
                .map(|&i| Ok(model.predict_exact(&heldout.features[i])?.label))
                .collect::<Result<_>>()?;
            for (cls, order) in ranked.order.iter().enumerate() {
                need(order.len(), k, &format!("class {cls} correct pool"))?;
                let (mut d, mut p) = from_pool(pool, cls, &order[..keep]);
                let picks: Vec<usize> = hidx
                    .iter()
                    .zip(&predicted)
                    .filter(|(_, &l)| l == cls)
                    .map(|(&i, _)| i)
                    .take(k / 2)
                    .collect();
                need(
                    picks.len(),
                    k / 2,
                    &format!("held-out samples predicted as class {cls}"),
                )?;
                for i in picks {
                    d.push(heldout.features[i].clone(), cls);
                    p.push(Origin::Heldout {
                        index: i,
                        true_class: heldout.labels[i],
                    });
                }
                push((d, p));
            }
        }
        SuiteKind::Aug => {
            let fs = &model.feature_scaling;
            for (cls, order) in ranked.order.iter().enumerate() {
                let mut d = Dataset::default();
                let mut p = Vec::new();
                for &i in order {
                    if d.len() == k {
                        break;
                    }
                    let mut rng = stream(seed, &[tag("aug"), cls as u64, i as u64]);
                    for attempt in 0..params.max_attempts {
                        let mut x = pool.features[i].clone();
                        let mut salted = Vec::new();
                        for (j, v) in x.iter_mut().enumerate() {
                            let sd = params.aug_sigma * fs.range(j);
                            if sd > 0.0 {
                                *v += Normal::new(0.0, sd).expect("positive std").sample(&mut rng);
                            }
                            if rng.random::<f64>() < params.salt_rate {
                                *v = if rng.random::<bool>() {
                                    fs.max[j]
                                } else {
                                    fs.min[j]
                                };
                                salted.push(j);
                            }
                        }
                        if model.predict_exact(&x)?.label == cls {
                            d.push(x, cls);
                            p.push(Origin::Augmented {
                                index: i,
                                attempt,
                                salted,
                            });
                            break;
                        }
                    }
                }
                need(d.len(), k, &format!("class {cls} augmented samples"))?;
                push((d, p));
            }
        }
        SuiteKind::Adv => {
            let keep = k - k / 2;
            let fs = &model.feature_scaling;
            let range = |j: usize| if fs.range(j) > 0.0 { fs.range(j) } else { 1.0 };
            let sigma: Vec<f64> = (0..fs.dim()).map(|j| params.nes_sigma * range(j)).collect();
            let eps: Vec<f64> = (0..fs.dim()).map(|j| params.adv_eps * range(j)).collect();
            for (cls, order) in ranked.order.iter().enumerate() {
                need(order.len(), k, &format!("class {cls} correct pool"))?;
                let (mut d, mut p) = from_pool(pool, cls, &order[..keep]);
                let attacked: Vec<Option<(Vec<f64>, f64)>> = order[keep..]
                    .par_iter()
                    .map(|&i| {
                        let x = &pool.features[i];
                        let mut rng = stream(seed, &[tag("adv"), cls as u64, i as u64]);
                        let g =
                            nes_gradient(model, x, cls, &sigma, params.nes_population, &mut rng)?;
                        let y = fgsm_step(x, &g, &eps, fs);
                        let linf = x
                            .iter()
                            .zip(&y)
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0, f64::max);
                        // only failed attacks keep the label
                        Ok((model.predict_exact(&y)?.label == cls).then_some((y, linf)))
                    })
                    .collect::<Result<_>>()?;
                for (&i, a) in order[keep..].iter().zip(attacked) {
                    if d.len() == k {
                        break;
                    }
                    if let Some((y, linf)) = a {
                        d.push(y, cls);
                        p.push(Origin::Adversarial { index: i, linf });
                    }
                }
                need(d.len(), k, &format!("class {cls} adversarial samples"))?;
                push((d, p));
            }
        }
    }
    Ok(TestSuite {
        kind,
        classes,
        provenance,
    })
}

pub fn build_suites(
    kinds: &[SuiteKind],
    model: &QnnModel,
    pool: &Dataset,
    heldout: &Dataset,
    params: &SuiteParams,
    seed: u64,
) -> Result<Vec<TestSuite>> {
    kinds
        .iter()
        .map(|&k| build_suite(k, model, pool, heldout, params, seed))
        .collect()
}
