//! End-to-end runs on a small synthetic binary task.
//!
//! `toy_pipeline <suites|region|noisy> [seed] [overlap] [per_class]`

use qnnmut::harness::{
    build_dataset, build_heldout, build_suite, build_suites, depth_regions, run_noisy,
    run_region_scan, run_rq1, split, DatasetSpec, ExperimentConfig, SuiteGroup, SuiteKind,
    SuiteParams,
};
use qnnmut::qnn::{
    accuracy, random_theta, train, AnsatzSpec, Backend, EncodingSpec, FeatureScaling, QnnModel,
    Shots, TrainConfig,
};
use qnnmut::sim::NoiseSpec;

fn main() -> qnnmut::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let mode = args.get(1).map_or("suites", String::as_str);
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);
    let overlap: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(0.3);
    let per_class: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(50);

    let spec = DatasetSpec::blobs(2, 800, overlap, seed);
    let data = build_dataset(&spec)?;
    let (train_set, pool) = split(&data, 0.5, seed);
    let heldout = build_heldout(&spec, 400)?;
    let mut m0 = QnnModel::new(
        4,
        EncodingSpec::default(),
        AnsatzSpec::block_stacking(2),
        vec![0],
        2,
        FeatureScaling::fit(&train_set)?,
        vec![],
    )?;
    m0.set_theta(random_theta(m0.theta().len(), seed))?;
    let (model, hist) = train(
        &m0,
        &train_set,
        &TrainConfig {
            epochs: 15,
            lr: 0.3,
            batch_size: 16,
            seed,
            ..Default::default()
        },
    )?;
    let acc = accuracy(&model, &train_set, Shots::Exact, &Backend::Noiseless, 0)?;
    println!(
        "train acc {acc:.3} loss {:.4} -> {:.4}",
        hist[0],
        hist.last().unwrap()
    );
    let params = SuiteParams {
        per_class,
        ..Default::default()
    };
    let reference = train_set.subset(&(0..100).collect::<Vec<_>>());
    let cfg = ExperimentConfig::default();
    let t = std::time::Instant::now();
    match mode {
        "region" => {
            let suite = build_suite(SuiteKind::Ori, &model, &pool, &heldout, &params, seed)?;
            let regions = depth_regions(&cfg.scope, &[(0.0, 50.0), (50.0, 100.0)]);
            let table = run_region_scan(&model, "toy", &reference, &suite, &regions, &cfg, seed)?;
            println!("{}", table.to_csv()?);
        }
        _ => {
            let suites = build_suites(&SuiteKind::ALL, &model, &pool, &heldout, &params, seed)?;
            let table = if mode == "noisy" {
                run_noisy(
                    &model,
                    "toy",
                    &NoiseSpec::representative(),
                    &reference,
                    &suites,
                    &cfg,
                    seed,
                )?
            } else {
                run_rq1(&model, "toy", &reference, &suites, &cfg, seed)?
            };
            println!("{}", table.to_csv()?);
            for g in &table.generation {
                println!("{} calls {} totals {:?}", g.operator, g.calls, g.totals);
            }
            println!(
                "strong {:.3} ori {:.3} weak {:.3}",
                table.group_mean(SuiteGroup::Strong),
                table.score(SuiteKind::Ori).unwrap_or(f64::NAN),
                table.group_mean(SuiteGroup::Weak)
            );
        }
    }
    println!("elapsed {:?}", t.elapsed());
    Ok(())
}
