use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Labeled feature vectors.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.len(),
                actual: labels.len(),
            });
        }
        if let Some(d) = features.first().map(Vec::len) {
            if let Some(bad) = features.iter().find(|f| f.len() != d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: bad.len(),
                });
            }
        }
        Ok(Dataset { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn push(&mut self, x: Vec<f64>, label: usize) {
        self.features.push(x);
        self.labels.push(label);
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Indices of samples carrying `label`, in order.
    pub fn indices_of(&self, label: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.labels[i] == label)
            .collect()
    }

    /// One dataset per class `0..num_classes`.
    pub fn split_by_class(&self, num_classes: usize) -> Vec<Dataset> {
        (0..num_classes)
            .map(|c| self.subset(&self.indices_of(c)))
            .collect()
    }

    pub fn concat(parts: &[Dataset]) -> Dataset {
        let mut out = Dataset::default();
        for p in parts {
            out.features.extend(p.features.iter().cloned());
            out.labels.extend(&p.labels);
        }
        out
    }
}

/// Per-feature affine map from the recorded `[min, max]` onto `[0, π]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaling {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl FeatureScaling {
    pub fn fit(data: &Dataset) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let d = data.feature_dim();
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for x in &data.features {
            for j in 0..d {
                min[j] = min[j].min(x[j]);
                max[j] = max[j].max(x[j]);
            }
        }
        Ok(FeatureScaling { min, max })
    }

    /// Identity-width scaling, i.e. `[0, π]` maps onto itself.
    pub fn unit(dim: usize) -> Self {
        FeatureScaling {
            min: vec![0.0; dim],
            max: vec![std::f64::consts::PI; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// Width of feature `j`; 0 for a constant feature.
    pub fn range(&self, j: usize) -> f64 {
        self.max[j] - self.min[j]
    }

    /// Derivative of the scaled value with respect to the raw feature.
    pub fn slope(&self, j: usize) -> f64 {
        let r = self.range(j);
        if r > 0.0 {
            std::f64::consts::PI / r
        } else {
            0.0
        }
    }

    pub fn scale(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::Encoding(format!(
                "expected {} features, got {}",
                self.dim(),
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Encoding("non-finite feature".into()));
        }
        Ok(x.iter()
            .enumerate()
            .map(|(j, &v)| (v - self.min[j]) * self.slope(j))
            .collect())
    }

    /// Clamps every feature into its recorded range.
    pub fn clip(&self, x: &mut [f64]) {
        for (j, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.min[j], self.max[j]);
        }
    }
}
