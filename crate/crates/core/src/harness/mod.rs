//! Datasets, test-suite construction, black-box attacks and the experiment
//! drivers that tie generation and scoring together.

mod attack;
mod data;
mod drivers;
mod suites;

pub use attack::{fgsm_step, nes_gradient};
pub use data::{
    build_dataset, build_heldout, parse_csv, read_csv, split, to_csv_string, write_csv, DataSource,
    DatasetSpec,
};
pub use drivers::{
    assess, config_hash, depth_regions, parse_partitions, qubit_regions, run_gate_scan, run_noisy,
    run_region_scan, run_rq1, Assessment, ExperimentConfig, Region, ScanRow, ScanTable, ScoreRow,
    ScoreTable,
};
pub use suites::{
    build_suite, build_suites, Origin, SuiteGroup, SuiteKind, SuiteParams, TestSuite,
};
