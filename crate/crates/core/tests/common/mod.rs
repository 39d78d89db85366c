//! Builders shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng as _;

use qnnmut::circuit::{Circuit, CircuitBuilder, GateKind};
use qnnmut::harness::{build_dataset, build_heldout, split, DatasetSpec};
use qnnmut::qnn::{
    random_theta, train, AnsatzSpec, Dataset, EncodingSpec, FeatureScaling, QnnModel, TrainConfig,
};
use qnnmut::rng::{seeded, Rng};

pub fn random_wires(rng: &mut Rng, n: usize, arity: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    all.truncate(arity);
    all
}

/// Random valid circuit over every catalog kind that fits, packed into
/// moments as early as the wires allow.
pub fn random_circuit(seed: u64, n: usize, len: usize) -> Circuit {
    let mut rng = seeded(seed);
    let fits: Vec<GateKind> = GateKind::ALL
        .into_iter()
        .filter(|k| k.arity() <= n)
        .collect();
    let mut b = CircuitBuilder::new(n);
    for _ in 0..len {
        let kind = fits[rng.random_range(0..fits.len())];
        let wires = random_wires(&mut rng, n, kind.arity());
        let params: Vec<f64> = (0..kind.param_count())
            .map(|_| rng.random_range(-PI..PI))
            .collect();
        b.push(kind, &wires, &params);
    }
    b.finish()
}

pub struct Toy {
    pub model: QnnModel,
    pub train: Dataset,
    pub pool: Dataset,
    pub heldout: Dataset,
}

/// Small trained binary classifier: 4 qubits, two block-stacking layers,
/// angle encoding of two well-separated blobs.
pub fn toy(seed: u64) -> Toy {
    let spec = DatasetSpec::blobs(2, 240, 0.2, seed);
    let data = build_dataset(&spec).unwrap();
    let (train_set, pool) = split(&data, 0.5, seed);
    let heldout = build_heldout(&spec, 60).unwrap();
    let scaling = FeatureScaling::fit(&train_set).unwrap();
    let mut init = QnnModel::new(
        4,
        EncodingSpec::default(),
        AnsatzSpec::block_stacking(2),
        vec![0],
        2,
        scaling,
        vec![],
    )
    .unwrap();
    init.set_theta(random_theta(init.theta().len(), seed))
        .unwrap();
    let cfg = TrainConfig {
        epochs: 8,
        lr: 0.3,
        batch_size: 16,
        seed,
        ..Default::default()
    };
    let (model, _) = train(&init, &train_set, &cfg).unwrap();
    Toy {
        model,
        train: train_set,
        pool,
        heldout,
    }
}
