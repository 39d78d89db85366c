use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::qnn::{CrossEntropy, FeatureScaling, QnnModel};
use crate::rng::Rng;

/// Black-box gradient of the loss at `(x, label)` from antithetic Gaussian
/// probes: `ĝ_j = (1 / (P σ_j)) Σ L(x + σ∘u) u_j`, where each draw `u`
/// is paired with `−u`. `sigma` is per feature.
pub fn nes_gradient(
    model: &QnnModel,
    x: &[f64],
    label: usize,
    sigma: &[f64],
    population: usize,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    if population == 0 || !population.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "population {population} must be even and positive"
        )));
    }
    if sigma.len() != x.len() || sigma.iter().any(|&s| s.is_nan() || s <= 0.0) {
        return Err(Error::InvalidParameter(
            "sigma must be positive per feature".into(),
        ));
    }
    let loss = CrossEntropy::default();
    let mut g = vec![0.0; x.len()];
    for _ in 0..population / 2 {
        let u: Vec<f64> = (0..x.len()).map(|_| StandardNormal.sample(rng)).collect();
        for sign in [1.0, -1.0] {
            let probe: Vec<f64> = x
                .iter()
                .zip(&u)
                .zip(sigma)
                .map(|((v, u), s)| v + sign * s * u)
                .collect();
            let l = loss.value(&model.exact_scores(&probe)?, label);
            for j in 0..x.len() {
                g[j] += l * sign * u[j];
            }
        }
    }
    for j in 0..x.len() {
        g[j] /= population as f64 * sigma[j];
    }
    Ok(g)
}

/// `clip(x + eps ∘ sign(grad))` with `sign(0) = 0`, clipped to the recorded
/// feature range.
pub fn fgsm_step(x: &[f64], grad: &[f64], eps: &[f64], bounds: &FeatureScaling) -> Vec<f64> {
    let mut out: Vec<f64> = x
        .iter()
        .zip(grad)
        .zip(eps)
        .map(|((v, g), e)| {
            let s = if *g > 0.0 {
                1.0
            } else if *g < 0.0 {
                -1.0
            } else {
                0.0
            };
            v + e * s
        })
        .collect();
    bounds.clip(&mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qnn::{AnsatzSpec, EncodingSpec};
    use crate::rng::seeded;

    #[test]
    fn fgsm_examples() {
        let b = FeatureScaling {
            min: vec![0.0, 0.0],
            max: vec![1.0, 1.0],
        };
        assert_eq!(
            fgsm_step(&[0.5, 0.5], &[0.0, 0.0], &[0.1, 0.1], &b),
            vec![0.5, 0.5]
        );
        let y = fgsm_step(&[0.95, 0.5], &[1.0, -3.0], &[0.1, 0.1], &b);
        assert_eq!(y, vec![1.0, 0.4]);
    }

    #[test]
    fn symmetric_model_has_flat_loss() {
        let m = QnnModel::new(
            2,
            EncodingSpec::default(),
            AnsatzSpec::block_stacking(0),
            vec![0],
            2,
            FeatureScaling::unit(1),
            vec![],
        )
        .unwrap();
        let mut rng = seeded(3);
        // one amplitude-encoded feature always prepares |0⟩
        let flat = QnnModel::new(
            2,
            EncodingSpec::Amplitude,
            AnsatzSpec::block_stacking(0),
            vec![1],
            2,
            FeatureScaling::unit(1),
            vec![],
        )
        .unwrap();
        let g = nes_gradient(&flat, &[0.7], 0, &[0.01], 50, &mut rng).unwrap();
        assert!(g[0].abs() < 1e-9);
        assert!(nes_gradient(&m, &[0.7], 0, &[0.01], 3, &mut rng).is_err());
    }
}
