mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use qnnmut::circuit::{position_in_range, Circuit, Gate, MutationScope};
use qnnmut::mutops::{
    apply, apply_circuit, diff_from_json, diff_to_json, replay, MutationConfig, OperatorKind,
};
use qnnmut::qnn::{AnsatzSpec, EncodingSpec, FeatureScaling, QnnModel};
use qnnmut::rng::seeded;
use qnnmut::Error;

use common::random_circuit;

fn scope_strategy(n: usize) -> impl Strategy<Value = MutationScope> {
    let qubits = prop::option::of(prop::collection::btree_set(0..n, 1..=n));
    let range = prop_oneof![
        Just((0.0, 100.0)),
        Just((0.0, 50.0)),
        Just((50.0, 100.0)),
        (0.0..100.0f64, 0.0..100.0f64)
            .prop_filter_map("empty range", |(a, b)| (a < b).then_some((a, b))),
    ];
    (qubits, range, 0.01..=1.0f64).prop_map(|(qubits, depth_range, p)| {
        MutationScope {
            qubits,
            depth_range,
            ..MutationScope::default()
        }
        .with_percentage(p)
    })
}

fn case() -> impl Strategy<Value = (OperatorKind, Circuit, MutationScope, u64)> {
    (
        prop::sample::select(OperatorKind::ALL.to_vec()),
        any::<u64>(),
        2..6usize,
        1..30usize,
        any::<u64>(),
    )
        .prop_flat_map(|(op, cseed, n, len, seed)| {
            scope_strategy(n).prop_map(move |s| (op, random_circuit(cseed, n, len), s, seed))
        })
}

fn in_scope(g: &Gate, scope: &MutationScope, depth: usize, insertion: bool) -> bool {
    let trailing = insertion && g.position == depth && scope.depth_range.1 >= 100.0;
    g.wires.iter().all(|&w| scope.allows_qubit(w))
        && (position_in_range(g.position, depth, scope.depth_range) || trailing)
}

fn grid(c: &Circuit, with_kind: bool) -> Vec<String> {
    c.gates()
        .iter()
        .map(|g| {
            format!(
                "{:?} {:?} {} {:?}",
                with_kind.then_some(g.kind),
                g.wires,
                g.position,
                g.feature
            )
        })
        .collect()
}

fn param_bits(c: &Circuit) -> Vec<u64> {
    let mut v: Vec<u64> = c
        .gates()
        .iter()
        .flat_map(|g| g.params.iter().map(|p| p.to_bits()))
        .collect();
    v.sort_unstable();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn operator_laws_hold((op, circuit, scope, seed) in case()) {
        let config = MutationConfig::new(op, scope.clone()).with_seed(seed);
        let (mutant, diff, requested, done) = match apply_circuit(&circuit, &config, &mut seeded(seed)) {
            Ok(out) => out,
            Err(Error::EmptyScope | Error::Inapplicable { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        prop_assert!(1 <= done && done <= requested);
        prop_assert!(mutant.is_valid(), "{:?}", mutant.validate());

        let again = apply_circuit(&circuit, &config, &mut seeded(seed)).unwrap();
        prop_assert_eq!(&again.0, &mutant);
        prop_assert_eq!(&again.1, &diff);

        prop_assert_eq!(&replay(&circuit, &diff).unwrap(), &mutant);
        prop_assert_eq!(&replay(&circuit, &diff_from_json(&diff_to_json(&diff)).unwrap()).unwrap(), &mutant);

        let delta = mutant.len() as i64 - circuit.len() as i64;
        let expected = match op {
            OperatorKind::RGA => done as i64,
            OperatorKind::RGD => -(done as i64),
            _ => 0,
        };
        prop_assert_eq!(delta, expected);

        let depth = circuit.depth();
        let mut touched = BTreeSet::new();
        for e in &diff {
            prop_assert_eq!(e.op, op);
            if let Some(b) = &e.before {
                prop_assert!(in_scope(b, &scope, depth, false), "edited {:?}", b);
                prop_assert!(circuit.find(b).is_some());
            }
            if let Some(a) = &e.after {
                prop_assert!(in_scope(a, &scope, depth, op == OperatorKind::RGA), "inserted {:?}", a);
                prop_assert_eq!(a.params.len(), a.kind.param_count());
                touched.insert((a.position, a.wires.clone()));
            }
        }
        match op {
            OperatorKind::GR => prop_assert_eq!(grid(&mutant, false), grid(&circuit, false)),
            OperatorKind::PF | OperatorKind::PSF | OperatorKind::PS => prop_assert_eq!(grid(&mutant, true), grid(&circuit, true)),
            _ => {}
        }
        if op == OperatorKind::PS {
            prop_assert_eq!(param_bits(&mutant), param_bits(&circuit));
            prop_assert_eq!(diff.len(), 2 * done);
        } else {
            prop_assert_eq!(diff.len(), done);
        }
    }
}

#[test]
fn model_mutants_are_reproducible_and_replayable() {
    let mut m = QnnModel::new(
        4,
        EncodingSpec::default(),
        AnsatzSpec::block_stacking(2),
        vec![0],
        2,
        FeatureScaling::unit(4),
        vec![],
    )
    .unwrap();
    m.set_theta(qnnmut::qnn::random_theta(m.theta().len(), 9))
        .unwrap();
    for op in OperatorKind::ALL {
        let config =
            MutationConfig::new(op, MutationScope::default().with_percentage(0.2)).with_seed(42);
        let a = apply(&m, &config).unwrap();
        let b = apply(&m, &config).unwrap();
        assert_eq!(a, b, "{op}");
        assert!(a.model.is_mutant());
        assert_eq!(
            replay(m.circuit(), &a.diff).unwrap(),
            *a.model.circuit(),
            "{op}"
        );
        let reloaded = QnnModel::from_json(&a.model.to_json()).unwrap();
        assert_eq!(reloaded, a.model, "{op}");
    }
}

#[test]
fn operator_levels() {
    for op in OperatorKind::ALL {
        let parameter = matches!(op, OperatorKind::PF | OperatorKind::PSF | OperatorKind::PS);
        assert_eq!(
            op.level() == qnnmut::mutops::Level::Parameter,
            parameter,
            "{op}"
        );
        assert_eq!(op.name().parse::<OperatorKind>().unwrap(), op);
    }
}
