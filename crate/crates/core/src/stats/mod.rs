//! Statistical machinery: shot budgeting, relative standard error,
//! statistical killing, non-triviality, mutation score and the KR/NR rates.

mod scoring;

pub use scoring::{class_kill_matrix, mutation_score, ClassKills};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Every tunable of the statistical machinery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Significance level for the group coefficient.
    pub alpha: f64,
    /// Minimum Cohen's d.
    pub beta: f64,
    /// Ceiling on the relative standard error of a mutant batch.
    pub tau_rse: f64,
    /// Minimum mean accuracy of a non-trivial mutant.
    pub tau_trivial: f64,
    /// Repeated predictions per accuracy distribution.
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    /// Measurements per prediction.
    pub shots: u64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            alpha: 0.05,
            beta: 0.5,
            tau_rse: 0.05,
            tau_trivial: 0.75,
            n: 20,
            epsilon: 0.05,
            delta: 0.95,
            shots: 1000,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} = {v} must lie in (0, 1)")))
            }
        };
        unit("alpha", self.alpha)?;
        unit("beta", self.beta)?;
        unit("tau_rse", self.tau_rse)?;
        unit("tau_trivial", self.tau_trivial)?;
        unit("epsilon", self.epsilon)?;
        unit("delta", self.delta)?;
        if self.n < 2 {
            return Err(Error::Config(format!("n = {} must be at least 2", self.n)));
        }
        if self.shots == 0 {
            return Err(Error::Config("shots must be at least 1".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: Thresholds = serde_json::from_str(text)?;
        t.validate()?;
        Ok(t)
    }
}

/// Repeated-prediction accuracies of one model on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyDistribution {
    pub values: Vec<f64>,
}

impl AccuracyDistribution {
    pub fn new(values: Vec<f64>) -> Self {
        AccuracyDistribution { values }
    }

    /// `n` copies of one value.
    pub fn constant(value: f64, n: usize) -> Self {
        AccuracyDistribution {
            values: vec![value; n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            return f64::NAN;
        }
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Sample variance (n − 1 denominator); 0 for a single value.
    pub fn variance(&self) -> f64 {
        let n = self.values.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        self.values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64
    }

    pub fn std(&self) -> f64 {
        self.variance().sqrt()
    }

    fn is_constant(&self) -> bool {
        self.values.iter().all(|&v| v == self.values[0])
    }
}

/// Shots needed so every one of `q` output estimates is within `epsilon` of
/// its expectation with joint confidence `delta` (Hoeffding plus a union
/// bound): `ceil(ln(2q / (1 − δ)) / (2ε²))`.
pub fn required_shots(epsilon: f64, delta: f64, q: usize) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0) || q == 0 {
        return Err(Error::InvalidParameter(format!(
            "required_shots({epsilon}, {delta}, {q})"
        )));
    }
    Ok(((2.0 * q as f64 / (1.0 - delta)).ln() / (2.0 * epsilon * epsilon)).ceil() as u64)
}

/// Relative standard error `σ / (μ √n)`; infinite when `μ = 0`.
pub fn rse(acc: &AccuracyDistribution) -> Result<f64> {
    if acc.len() < 2 {
        return Err(Error::Stats(format!(
            "rse needs at least 2 values, got {}",
            acc.len()
        )));
    }
    let mu = acc.mean();
    if mu <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(acc.std() / (mu * (acc.len() as f64).sqrt()))
}

fn check_pair(a: &AccuracyDistribution, b: &AccuracyDistribution) -> Result<()> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Stats(format!(
            "need at least 2 values per group, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Degenerate outcome when both groups have zero spread.
fn degenerate(a: &AccuracyDistribution, b: &AccuracyDistribution) -> Option<bool> {
    (a.is_constant() && b.is_constant()).then(|| a.values[0] == b.values[0])
}

/// p-value of the group coefficient in a Gaussian, identity-link GLM of
/// accuracy on a 0/1 original-vs-mutant indicator, fitted by least squares.
pub fn glm_p_value(original: &AccuracyDistribution, mutant: &AccuracyDistribution) -> Result<f64> {
    check_pair(original, mutant)?;
    if let Some(equal) = degenerate(original, mutant) {
        return Ok(if equal { 1.0 } else { 0.0 });
    }
    // Least squares for y = b0 + b1 * g has b0 = mean(original) and
    // b1 = mean(mutant) - mean(original); residuals are deviations from the
    // group means, which keeps the fit symmetric in the two groups.
    let (n0, n1) = (original.len() as f64, mutant.len() as f64);
    let (m0, m1) = (original.mean(), mutant.mean());
    let b1 = m1 - m0;
    let rss = original
        .values
        .iter()
        .map(|y| (y - m0).powi(2))
        .sum::<f64>()
        + mutant.values.iter().map(|y| (y - m1).powi(2)).sum::<f64>();
    let df = n0 + n1 - 2.0;
    let se = (rss / df * (1.0 / n0 + 1.0 / n1)).sqrt();
    if b1 == 0.0 {
        return Ok(1.0);
    }
    let t = (b1 / se).abs();
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Stats(e.to_string()))?;
    Ok((2.0 * dist.sf(t)).min(1.0))
}

/// Cohen's d with pooled sample standard deviation.
pub fn cohens_d(original: &AccuracyDistribution, mutant: &AccuracyDistribution) -> Result<f64> {
    check_pair(original, mutant)?;
    let diff = (original.mean() - mutant.mean()).abs();
    if let Some(equal) = degenerate(original, mutant) {
        return Ok(if equal { 0.0 } else { f64::INFINITY });
    }
    let (n0, n1) = (original.len() as f64, mutant.len() as f64);
    let pooled = (((n0 - 1.0) * original.variance() + (n1 - 1.0) * mutant.variance())
        / (n0 + n1 - 2.0))
        .sqrt();
    Ok(diff / pooled)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KillVerdict {
    pub p_value: f64,
    pub effect_size: f64,
    pub killed: bool,
}

/// Statistical killing: `p < α` and `d ≥ β`.
pub fn is_killed(
    original: &AccuracyDistribution,
    mutant: &AccuracyDistribution,
    th: &Thresholds,
) -> Result<KillVerdict> {
    let p_value = glm_p_value(original, mutant)?;
    let effect_size = cohens_d(original, mutant)?;
    Ok(KillVerdict {
        p_value,
        effect_size,
        killed: p_value < th.alpha && effect_size >= th.beta,
    })
}

/// Mean accuracy at or above `tau_trivial`.
pub fn is_nontrivial(mutant: &AccuracyDistribution, th: &Thresholds) -> bool {
    !mutant.is_empty() && mutant.mean() >= th.tau_trivial
}

fn rate(flags: &[bool]) -> Result<f64> {
    if flags.is_empty() {
        return Err(Error::Stats("rate over an empty mutant set".into()));
    }
    Ok(flags.iter().filter(|&&f| f).count() as f64 / flags.len() as f64)
}

/// Fraction of mutants judged killable.
pub fn killability_rate(killed: &[bool]) -> Result<f64> {
    rate(killed)
}

/// Fraction of mutants judged non-trivial.
pub fn nontriviality_rate(nontrivial: &[bool]) -> Result<f64> {
    rate(nontrivial)
}
