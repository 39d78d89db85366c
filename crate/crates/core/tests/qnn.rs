mod common;

use proptest::prelude::*;
use rand::Rng as _;

use qnnmut::harness::{build_dataset, DatasetSpec};
use qnnmut::qnn::{
    accuracy, random_theta, train, AnsatzFamily, AnsatzSpec, Backend, EncodingSpec, Entangler,
    FeatureScaling, Prediction, QnnModel, Shots, TrainConfig,
};
use qnnmut::rng::seeded;

fn model(
    family: AnsatzFamily,
    entangler: Entangler,
    n: usize,
    features: usize,
    seed: u64,
) -> QnnModel {
    let spec = AnsatzSpec {
        family,
        layers: 2,
        entangler,
    };
    let mut m = QnnModel::new(
        n,
        EncodingSpec::default(),
        spec,
        vec![0],
        2,
        FeatureScaling::unit(features),
        vec![],
    )
    .unwrap();
    m.set_theta(random_theta(m.theta().len(), seed)).unwrap();
    m
}

fn family_strategy() -> impl Strategy<Value = (AnsatzFamily, Entangler)> {
    (
        prop::sample::select(vec![
            AnsatzFamily::BlockStacking,
            AnsatzFamily::Hierarchical,
            AnsatzFamily::ReUploading,
        ]),
        prop::sample::select(vec![
            Entangler::RingCnot,
            Entangler::LadderCnot,
            Entangler::CrzRing,
        ]),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn argmax_survives_monotone_transforms(scores in prop::collection::vec(-1.0..=1.0f64, 1..6), a in 0.1..5.0f64, b in -3.0..3.0f64) {
        let base = Prediction::from_scores(scores.clone());
        let transforms: [&dyn Fn(f64) -> f64; 3] = [&|s| a * s + b, &|s| (a * s).exp(), &|s| (a * s).atan() + s.powi(3)];
        for f in transforms {
            prop_assert_eq!(Prediction::from_scores(scores.iter().map(|&s| f(s)).collect()).label, base.label);
        }
    }

    #[test]
    fn perturbing_a_slot_touches_only_its_gate(fe in family_strategy(), seed in any::<u64>(), delta in 0.01..1.0f64) {
        let m = model(fe.0, fe.1, 4, 4, seed);
        let slots = m.slots().unwrap().to_vec();
        let k = (seed % slots.len() as u64) as usize;
        let mut theta = m.theta().to_vec();
        theta[k] += delta;
        let mut moved = m.clone();
        moved.set_theta(theta).unwrap();
        for (i, (a, b)) in m.circuit().gates().iter().zip(moved.circuit().gates()).enumerate() {
            prop_assert_eq!(a == b, i != slots[k].gate, "gate {}", i);
        }
    }

    #[test]
    fn model_json_is_bit_exact(fe in family_strategy(), seed in any::<u64>()) {
        let m = model(fe.0, fe.1, 4, 4, seed);
        let back = QnnModel::from_json(&m.to_json()).unwrap();
        prop_assert_eq!(&back, &m);
    }

    #[test]
    fn exact_prediction_is_pure(fe in family_strategy(), seed in any::<u64>(), x in prop::array::uniform4(0.0..3.0f64)) {
        let m = model(fe.0, fe.1, 4, 4, seed);
        let first = m.predict_exact(&x).unwrap();
        prop_assert_eq!(m.clone().predict_exact(&x).unwrap(), first.clone());
        prop_assert_eq!(m.predict(&x, Shots::Exact, &mut seeded(seed)).unwrap(), first);
    }
}

#[test]
fn finite_shot_scores_converge_to_exact() {
    // Scores are <Z> values; the shot budget bounds the probability error
    // by 0.05, which is 0.1 on this scale.
    let mut rng = seeded(3);
    let (mut within, mut total) = (0, 0);
    for t in 0..200 {
        let m = model(AnsatzFamily::BlockStacking, Entangler::RingCnot, 3, 3, t);
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..3.0)).collect();
        let exact = m.exact_scores(&x).unwrap();
        let sampled = m.predict(&x, Shots::Finite(1000), &mut rng).unwrap().scores;
        for (e, s) in exact.iter().zip(&sampled) {
            within += ((e - s).abs() <= 0.1) as usize;
            total += 1;
        }
    }
    let rate = within as f64 / total as f64;
    assert!(rate >= 0.95, "{rate}");
}

#[test]
fn two_qubit_model_learns_separable_blobs() {
    let data = build_dataset(&DatasetSpec::blobs(2, 200, 0.0, 5)).unwrap();
    let scaling = FeatureScaling::fit(&data).unwrap();
    let mut init = QnnModel::new(
        2,
        EncodingSpec::default(),
        AnsatzSpec::block_stacking(2),
        vec![0],
        2,
        scaling,
        vec![],
    )
    .unwrap();
    init.set_theta(random_theta(init.theta().len(), 5)).unwrap();
    let cfg = TrainConfig {
        epochs: 20,
        lr: 0.3,
        batch_size: 16,
        seed: 5,
        ..Default::default()
    };
    let (trained, losses) = train(&init, &data, &cfg).unwrap();
    assert!(losses.last().unwrap() < losses.first().unwrap());
    let acc = accuracy(&trained, &data, Shots::Exact, &Backend::Noiseless, 0).unwrap();
    assert!(acc >= 0.95, "training accuracy {acc}");
}

#[test]
fn mutant_models_drop_the_slot_map() {
    let m = model(AnsatzFamily::BlockStacking, Entangler::RingCnot, 3, 3, 1);
    let mutant = m.with_circuit(m.circuit().clone());
    assert!(mutant.is_mutant() && mutant.slots().is_none());
    assert_eq!(
        mutant.exact_scores(&[0.1, 0.2, 0.3]).unwrap(),
        m.exact_scores(&[0.1, 0.2, 0.3]).unwrap()
    );
}
