mod common;

use std::collections::BTreeSet;

use qnnmut::circuit::MutationScope;
use qnnmut::genloop::{call_bound, generate_effective_mutants, BoundUpdate, SearchConfig};
use qnnmut::mutops::{MutationConfig, OperatorKind};
use qnnmut::qnn::{Backend, Dataset, Shots};
use qnnmut::stats::{is_killed, is_nontrivial, Thresholds};

fn reference(toy: &common::Toy) -> Dataset {
    toy.train.subset(&(0..40).collect::<Vec<_>>())
}

#[test]
fn unstable_batches_grow_by_half() {
    let toy = common::toy(1);
    let template = MutationConfig::new(OperatorKind::PF, MutationScope::default());
    // an unreachable stability target keeps every probe unstable
    let th = Thresholds {
        tau_rse: 1e-12,
        ..Thresholds::default()
    };
    let search = SearchConfig {
        k_max: 1,
        ..SearchConfig::default()
    };
    let g = generate_effective_mutants(
        &toy.model,
        &reference(&toy),
        &template,
        &th,
        &search,
        &Backend::Noiseless,
        3,
    )
    .unwrap();
    let batches: Vec<usize> = g.report.trace.iter().map(|t| t.batch).collect();
    assert!(batches.len() >= 3, "{batches:?}");
    assert_eq!(&batches[..3], &[10, 15, 23]);
    for w in batches.windows(2) {
        assert_eq!(w[1], (1.5 * w[0] as f64).ceil() as usize);
    }
    assert!(g
        .report
        .trace
        .iter()
        .all(|t| !t.stable && t.update == BoundUpdate::Upper && t.iterations == 1));
    assert!(g.effective.is_empty() && g.stable.is_empty());
}

#[test]
fn search_is_bounded_sound_and_deterministic() {
    let toy = common::toy(1);
    let reference = reference(&toy);
    let th = Thresholds::default();
    let search = SearchConfig {
        shots: Shots::Finite(300),
        ..SearchConfig::default()
    };
    let mut judged = 0;
    for op in [OperatorKind::RGD, OperatorKind::GR, OperatorKind::PF] {
        let template = MutationConfig::new(op, MutationScope::default());
        let g = generate_effective_mutants(
            &toy.model,
            &reference,
            &template,
            &th,
            &search,
            &Backend::Noiseless,
            5,
        )
        .unwrap();
        let r = &g.report;
        assert!(
            r.calls <= call_bound(0.5, r.scope_size) && r.calls == r.trace.len(),
            "{op}: {} calls",
            r.calls
        );

        // probes are distinct and each one halves the interval
        let mids: BTreeSet<u64> = r.trace.iter().map(|t| t.mid.to_bits()).collect();
        assert_eq!(mids.len(), r.trace.len());
        for (i, t) in r.trace.iter().enumerate() {
            assert_eq!(t.call, i);
            assert_eq!(t.mid, (t.lb + t.ub) / 2.0);
            if let Some(next) = r.trace.get(i + 1) {
                assert!(((next.ub - next.lb) - 0.5 * (t.ub - t.lb)).abs() < 1e-15);
            }
        }

        // effective ⊆ killable ∩ non-trivial ⊆ stable-batch members
        let stable: BTreeSet<&str> = g.stable.iter().map(|m| m.id.as_str()).collect();
        let effective: BTreeSet<&str> = r.effective_ids.iter().map(String::as_str).collect();
        assert_eq!(effective.len(), g.effective.len());
        for v in &r.verdicts {
            assert!(stable.contains(v.id.as_str()));
            let kill = is_killed(&v.original, &v.mutant, &th).unwrap();
            assert_eq!(kill, v.kill);
            assert_eq!(is_nontrivial(&v.mutant, &th), v.nontrivial);
            assert_eq!(
                effective.contains(v.id.as_str()),
                kill.killed && v.nontrivial,
                "{}",
                v.id
            );
        }
        assert_eq!(r.totals.effective, effective.len());
        judged += r.verdicts.len();

        let again = generate_effective_mutants(
            &toy.model,
            &reference,
            &template,
            &th,
            &search,
            &Backend::Noiseless,
            5,
        )
        .unwrap();
        assert_eq!(again.report.to_json(), r.to_json(), "{op}");
    }
    assert!(judged > 0, "no probe reached mutant-level verdicts");
}

#[test]
fn empty_reference_is_rejected() {
    let toy = common::toy(1);
    let template = MutationConfig::new(OperatorKind::PF, MutationScope::default());
    let empty = Dataset::new(vec![], vec![]).unwrap();
    let out = generate_effective_mutants(
        &toy.model,
        &empty,
        &template,
        &Thresholds::default(),
        &SearchConfig::default(),
        &Backend::Noiseless,
        0,
    );
    assert!(out.is_err());
}
