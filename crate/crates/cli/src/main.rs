//! Command-line front end. Exit codes: 0 success, 1 configuration error,
//! 2 runtime error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use qnnmut::circuit::FunctionCategory;
use qnnmut::genloop::generate_effective_mutants;
use qnnmut::harness::{
    build_dataset, build_heldout, build_suite, build_suites, depth_regions, parse_partitions,
    qubit_regions, read_csv, run_gate_scan, run_noisy, run_region_scan, run_rq1, split, write_csv,
    DatasetSpec, ExperimentConfig, SuiteKind, SuiteParams, TestSuite,
};
use qnnmut::mutops::{diff_to_json, MutationConfig, OperatorKind};
use qnnmut::qnn::{
    accuracy, random_theta, train, AnsatzFamily, AnsatzSpec, Backend, Dataset, EncodingSpec,
    Entangler, FeatureScaling, QnnModel, Shots, TrainConfig,
};
use qnnmut::sim::NoiseSpec;
use qnnmut::stats::{class_kill_matrix, Thresholds};

#[derive(Parser)]
#[command(
    name = "qnnmut",
    version,
    about = "Mutation testing for quantum neural networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a classifier on a dataset spec and write the model.
    Train(TrainArgs),
    /// Search for effective mutants of one operator.
    GenMutants(GenArgs),
    /// Mutation score of one suite against a directory of mutants.
    Score(ScoreArgs),
    /// Build one test suite from a candidate pool.
    SuiteBuild(SuiteArgs),
    /// Mutation score of every suite kind for each operator and on average.
    ScoreSuites(ScoreRunArgs),
    /// Effectiveness of mutants confined to depth or qubit regions.
    RegionScan(RegionArgs),
    /// Effectiveness of mutants restricted to gate categories.
    GateScan(GateArgs),
    /// The suite scoring run under a noise model.
    NoisyRun(NoisyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    BlockStacking,
    Hierarchical,
    ReUploading,
}

#[derive(Clone, Copy, ValueEnum)]
enum EntanglerArg {
    RingCnot,
    LadderCnot,
    CrzRing,
}

#[derive(Clone, Copy, ValueEnum)]
enum Encoding {
    Angle,
    Amplitude,
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Depth,
    Qubit,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_enum, default_value = "block-stacking")]
    ansatz: Family,
    #[arg(long, value_enum, default_value = "ring-cnot")]
    entangler: EntanglerArg,
    #[arg(long, value_enum, default_value = "angle")]
    encoding: Encoding,
    #[arg(long, default_value_t = 2)]
    layers: usize,
    #[arg(long, default_value_t = 4)]
    qubits: usize,
    #[arg(long, default_value_t = 30)]
    epochs: usize,
    #[arg(long, default_value_t = 0.2)]
    lr: f64,
    #[arg(long, default_value_t = 16)]
    batch_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the training split as CSV.
    #[arg(long)]
    train_csv: Option<PathBuf>,
    /// Also write the held-back candidate pool as CSV.
    #[arg(long)]
    pool_csv: Option<PathBuf>,
    /// Also write unseen-class samples (synthetic blobs only) as CSV.
    #[arg(long)]
    heldout_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    heldout_size: usize,
}

/// Options shared by every command that runs the statistical pipeline.
#[derive(Args)]
struct Common {
    #[arg(long)]
    model: PathBuf,
    /// Experiment settings (thresholds, search, operators, scope) as JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Thresholds JSON; overrides the experiment config's.
    #[arg(long)]
    thresholds: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Common {
    fn experiment(&self) -> Result<ExperimentConfig, Failure> {
        let mut cfg: ExperimentConfig = match &self.config {
            Some(p) => serde_json::from_str(&read(p)?).map_err(qnnmut::Error::from)?,
            None => ExperimentConfig::default(),
        };
        if let Some(p) = &self.thresholds {
            cfg.thresholds = Thresholds::from_json(&read(p)?)?;
        }
        cfg.thresholds.validate()?;
        cfg.search.validate()?;
        Ok(cfg)
    }

    fn model(&self) -> Result<QnnModel, Failure> {
        Ok(QnnModel::from_json(&read(&self.model)?)?)
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    common: Common,
    /// Reference data, normally the training split.
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    operator: OperatorKind,
    /// Noise spec JSON; predictions then run on the density-matrix simulator.
    #[arg(long)]
    noise: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    mutants_dir: PathBuf,
    /// Write every stable-batch mutant, not only the effective ones.
    #[arg(long)]
    stable: bool,
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    mutants_dir: PathBuf,
    #[command(flatten)]
    suite: SuiteSource,
    #[arg(long)]
    out: PathBuf,
}

/// A suite given as a CSV file, or as a kind built from a pool.
#[derive(Args)]
struct SuiteSource {
    /// Suite kind (Ori, HConf, ...) or path to a suite CSV.
    #[arg(long)]
    suite: String,
    #[arg(long)]
    pool: Option<PathBuf>,
    #[arg(long)]
    heldout: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    per_class: usize,
}

impl SuiteSource {
    fn load(&self, model: &QnnModel, seed: u64) -> Result<TestSuite, Failure> {
        if let Ok(kind) = self.suite.parse::<SuiteKind>() {
            let pool = self.pool.as_deref().ok_or_else(|| {
                config_error(anyhow!("--pool is required to build a suite by kind"))
            })?;
            let heldout = load_optional(self.heldout.as_deref())?;
            let params = SuiteParams {
                per_class: self.per_class,
                ..SuiteParams::default()
            };
            return Ok(build_suite(
                kind,
                model,
                &read_csv(pool)?,
                &heldout,
                &params,
                seed,
            )?);
        }
        let data = read_csv(Path::new(&self.suite))?;
        Ok(TestSuite::from_dataset(
            SuiteKind::Ori,
            &data,
            model.num_classes,
        ))
    }
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    pool: PathBuf,
    /// Unseen-class samples, required for OOD.
    #[arg(long)]
    heldout: Option<PathBuf>,
    #[arg(long)]
    kind: SuiteKind,
    /// Samples per class.
    #[arg(long, default_value_t = 100)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Where each member came from, as JSON.
    #[arg(long)]
    provenance: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreRunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    pool: PathBuf,
    #[arg(long)]
    heldout: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    per_class: usize,
    /// Comma-separated operators; overrides the experiment config's.
    #[arg(long, value_delimiter = ',')]
    operators: Vec<OperatorKind>,
    #[arg(long, default_value = "model")]
    name: String,
    /// Score table as CSV.
    #[arg(long)]
    out: PathBuf,
    /// Full report (scores, generation traces, notes) as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

impl ScoreRunArgs {
    fn prepare(&self) -> Result<(QnnModel, ExperimentConfig, Dataset, Vec<TestSuite>), Failure> {
        let model = self.common.model()?;
        let mut cfg = self.common.experiment()?;
        if !self.operators.is_empty() {
            cfg.operators = self.operators.clone();
        }
        let reference = read_csv(&self.reference)?;
        let pool = read_csv(&self.pool)?;
        let heldout = load_optional(self.heldout.as_deref())?;
        let params = SuiteParams {
            per_class: self.per_class,
            ..SuiteParams::default()
        };
        let kinds: Vec<SuiteKind> = SuiteKind::ALL
            .into_iter()
            .filter(|k| *k != SuiteKind::OOD || !heldout.is_empty())
            .collect();
        if kinds.len() < SuiteKind::ALL.len() {
            log::warn!("no held-out samples given; skipping the OOD suite");
        }
        let suites = build_suites(&kinds, &model, &pool, &heldout, &params, self.common.seed)?;
        Ok((model, cfg, reference, suites))
    }
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long = "ref")]
    reference: PathBuf,
    #[command(flatten)]
    suite: SuiteSource,
    #[arg(long, value_delimiter = ',')]
    operators: Vec<OperatorKind>,
    #[arg(long, default_value = "model")]
    name: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    json: Option<PathBuf>,
}

impl ScanArgs {
    fn prepare(&self) -> Result<(QnnModel, ExperimentConfig, Dataset, TestSuite), Failure> {
        let model = self.common.model()?;
        let mut cfg = self.common.experiment()?;
        if !self.operators.is_empty() {
            cfg.operators = self.operators.clone();
        }
        let reference = read_csv(&self.reference)?;
        let suite = self.suite.load(&model, self.common.seed)?;
        Ok((model, cfg, reference, suite))
    }
}

#[derive(Args)]
struct RegionArgs {
    #[command(flatten)]
    scan: ScanArgs,
    #[arg(long, value_enum)]
    axis: Axis,
    /// Depth partitions in percent, e.g. "0-50,50-100".
    #[arg(long, default_value = "0-50,50-100")]
    partitions: String,
}

#[derive(Args)]
struct GateArgs {
    #[command(flatten)]
    scan: ScanArgs,
    /// Gate categories to scan; all six when omitted.
    #[arg(long = "category")]
    categories: Vec<FunctionCategory>,
}

#[derive(Args)]
struct NoisyArgs {
    #[command(flatten)]
    run: ScoreRunArgs,
    #[arg(long)]
    noise: PathBuf,
}

/// A failure tagged with the exit code it maps to.
enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

fn config_error(e: anyhow::Error) -> Failure {
    Failure::Config(e)
}

impl From<qnnmut::Error> for Failure {
    fn from(e: qnnmut::Error) -> Self {
        use qnnmut::Error::*;
        match e {
            Parse { .. }
            | InvalidParameter(_)
            | Encoding(_)
            | InvalidAnsatz(_)
            | InvalidCircuit(_)
            | QubitOutOfRange { .. }
            | TooWide { .. }
            | DimensionMismatch { .. }
            | EmptyScope
            | Config(_)
            | Io(_)
            | Json(_)
            | Csv(_) => Failure::Config(e.into()),
            _ => Failure::Runtime(e.into()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Config)
}

fn load_optional(path: Option<&Path>) -> Result<Dataset, Failure> {
    Ok(match path {
        Some(p) => read_csv(p)?,
        None => Dataset::default(),
    })
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::Runtime)
}

fn cmd_train(a: &TrainArgs) -> Result<(), Failure> {
    let spec = DatasetSpec::from_json(&read(&a.dataset)?)?;
    let data = build_dataset(&spec)?;
    let (train_set, pool) = split(&data, spec.train_fraction, a.seed);
    let family = match a.ansatz {
        Family::BlockStacking => AnsatzFamily::BlockStacking,
        Family::Hierarchical => AnsatzFamily::Hierarchical,
        Family::ReUploading => AnsatzFamily::ReUploading,
    };
    let entangler = match a.entangler {
        EntanglerArg::RingCnot => Entangler::RingCnot,
        EntanglerArg::LadderCnot => Entangler::LadderCnot,
        EntanglerArg::CrzRing => Entangler::CrzRing,
    };
    let encoding = match a.encoding {
        Encoding::Angle => EncodingSpec::default(),
        Encoding::Amplitude => EncodingSpec::Amplitude,
    };
    let classes = spec.num_classes;
    // sign readout on one qubit for binary tasks, one qubit per class otherwise
    let outputs: Vec<usize> = if classes == 2 {
        vec![0]
    } else {
        (0..classes).collect()
    };
    let ansatz = AnsatzSpec {
        family,
        layers: a.layers,
        entangler,
    };
    let scaling = FeatureScaling::fit(&train_set)?;
    let mut model = QnnModel::new(
        a.qubits,
        encoding,
        ansatz,
        outputs,
        classes,
        scaling,
        vec![],
    )?;
    model.set_theta(random_theta(model.theta().len(), a.seed))?;
    let cfg = TrainConfig {
        epochs: a.epochs,
        lr: a.lr,
        batch_size: a.batch_size,
        seed: a.seed,
        ..TrainConfig::default()
    };
    let (model, losses) = train(&model, &train_set, &cfg)?;
    let train_acc = accuracy(&model, &train_set, Shots::Exact, &Backend::Noiseless, 0)?;
    let pool_acc = if pool.is_empty() {
        f64::NAN
    } else {
        accuracy(&model, &pool, Shots::Exact, &Backend::Noiseless, 0)?
    };
    log::info!("loss {:.4} -> {:.4}", losses[0], losses[losses.len() - 1]);
    println!("train accuracy {train_acc:.4}, pool accuracy {pool_acc:.4}");
    write(&a.out, &model.to_json())?;
    if let Some(p) = &a.train_csv {
        write_csv(&train_set, p)?;
    }
    if let Some(p) = &a.pool_csv {
        write_csv(&pool, p)?;
    }
    if let Some(p) = &a.heldout_csv {
        write_csv(&build_heldout(&spec, a.heldout_size)?, p)?;
    }
    Ok(())
}

fn cmd_gen(a: &GenArgs) -> Result<(), Failure> {
    let model = a.common.model()?;
    let cfg = a.common.experiment()?;
    let reference = read_csv(&a.reference)?;
    let backend = match &a.noise {
        Some(p) => Backend::Noisy(NoiseSpec::from_json(&read(p)?)?.build()?),
        None => Backend::Noiseless,
    };
    let template = MutationConfig {
        operator: a.operator,
        scope: cfg.scope.clone(),
        noise: cfg.mutation_noise,
        seed: 0,
    };
    let g = generate_effective_mutants(
        &model,
        &reference,
        &template,
        &cfg.thresholds,
        &cfg.search,
        &backend,
        a.common.seed,
    )?;
    fs::create_dir_all(&a.mutants_dir)?;
    let keep = if a.stable { &g.stable } else { &g.effective };
    for m in keep {
        write(
            &a.mutants_dir.join(format!("{}.json", m.id)),
            &m.model.to_json(),
        )?;
        write(
            &a.mutants_dir.join(format!("{}.diff.json", m.id)),
            &diff_to_json(&m.diff),
        )?;
    }
    write(&a.out, &g.report.to_json())?;
    let t = &g.report.totals;
    println!(
        "{}: {} probes, {} stable, {} effective; wrote {} mutants",
        a.operator,
        g.report.calls,
        t.stable,
        t.effective,
        keep.len()
    );
    Ok(())
}

/// Mutant models in a directory, ordered by file name.
fn load_mutants(dir: &Path) -> Result<Vec<(String, QnnModel)>, Failure> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))
        .map_err(Failure::Config)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|x| x == "json")
                && !p.to_string_lossy().ends_with(".diff.json")
        })
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let id = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok((id, QnnModel::from_json(&read(&p)?)?))
        })
        .collect()
}

fn cmd_score(a: &ScoreArgs) -> Result<(), Failure> {
    let model = a.common.model()?;
    let cfg = a.common.experiment()?;
    let suite = a.suite.load(&model, a.common.seed)?;
    let mutants = load_mutants(&a.mutants_dir)?;
    if mutants.is_empty() {
        return Err(config_error(anyhow!(
            "no mutant models in {}",
            a.mutants_dir.display()
        )));
    }
    let models: Vec<QnnModel> = mutants.iter().map(|(_, m)| m.clone()).collect();
    let kills = class_kill_matrix(
        &models,
        &model,
        &suite.classes,
        &cfg.thresholds,
        cfg.search.shots,
        &Backend::Noiseless,
        a.common.seed,
    )?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Runtime(e.into());
    w.write_record(["mutant", "class", "p_value", "effect_size", "killed"])
        .map_err(io)?;
    for ((id, _), row) in mutants.iter().zip(&kills.verdicts) {
        for (c, v) in row.iter().enumerate() {
            let rec = [
                id.clone(),
                c.to_string(),
                format!("{:.6}", v.p_value),
                format!("{:.6}", v.effect_size),
                v.killed.to_string(),
            ];
            w.write_record(&rec).map_err(io)?;
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Failure::Runtime(anyhow!(e.to_string())))?;
    write(&a.out, &String::from_utf8_lossy(&bytes))?;
    println!(
        "mutation score {:.6} over {} mutants and {} classes",
        kills.score,
        mutants.len(),
        suite.classes.len()
    );
    Ok(())
}

fn cmd_suite(a: &SuiteArgs) -> Result<(), Failure> {
    let model = QnnModel::from_json(&read(&a.model)?)?;
    let pool = read_csv(&a.pool)?;
    let heldout = load_optional(a.heldout.as_deref())?;
    let params = SuiteParams {
        per_class: a.size,
        ..SuiteParams::default()
    };
    let suite = build_suite(a.kind, &model, &pool, &heldout, &params, a.seed)?;
    write_csv(&suite.all(), &a.out)?;
    if let Some(p) = &a.provenance {
        write(
            p,
            &serde_json::to_string_pretty(&suite.provenance).map_err(qnnmut::Error::from)?,
        )?;
    }
    println!("{} suite with {} samples", a.kind.name(), suite.len());
    Ok(())
}

fn cmd_scores(a: &ScoreRunArgs, noise: Option<&NoiseSpec>) -> Result<(), Failure> {
    let (model, cfg, reference, suites) = a.prepare()?;
    let table = match noise {
        Some(spec) => run_noisy(
            &model,
            &a.name,
            spec,
            &reference,
            &suites,
            &cfg,
            a.common.seed,
        )?,
        None => run_rq1(&model, &a.name, &reference, &suites, &cfg, a.common.seed)?,
    };
    let csv = table.to_csv()?;
    write(&a.out, &csv)?;
    if let Some(p) = &a.json {
        write(p, &table.to_json())?;
    }
    print!("{csv}");
    Ok(())
}

fn cmd_region(a: &RegionArgs) -> Result<(), Failure> {
    let s = &a.scan;
    let (model, cfg, reference, suite) = s.prepare()?;
    let regions = match a.axis {
        Axis::Depth => depth_regions(&cfg.scope, &parse_partitions(&a.partitions)?),
        Axis::Qubit => qubit_regions(&model, &cfg.scope, s.common.seed)?,
    };
    let table = run_region_scan(
        &model,
        &s.name,
        &reference,
        &suite,
        &regions,
        &cfg,
        s.common.seed,
    )?;
    let csv = table.to_csv()?;
    write(&s.out, &csv)?;
    if let Some(p) = &s.json {
        write(p, &table.to_json())?;
    }
    print!("{csv}");
    Ok(())
}

fn cmd_gate(a: &GateArgs) -> Result<(), Failure> {
    let s = &a.scan;
    let (model, cfg, reference, suite) = s.prepare()?;
    let categories = if a.categories.is_empty() {
        FunctionCategory::ALL.to_vec()
    } else {
        a.categories.clone()
    };
    let table = run_gate_scan(
        &model,
        &s.name,
        &reference,
        &suite,
        &categories,
        &cfg,
        s.common.seed,
    )?;
    let csv = table.to_csv()?;
    write(&s.out, &csv)?;
    if let Some(p) = &s.json {
        write(p, &table.to_json())?;
    }
    print!("{csv}");
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Train(a) => cmd_train(a),
        Command::GenMutants(a) => cmd_gen(a),
        Command::Score(a) => cmd_score(a),
        Command::SuiteBuild(a) => cmd_suite(a),
        Command::ScoreSuites(a) => cmd_scores(a, None),
        Command::RegionScan(a) => cmd_region(a),
        Command::GateScan(a) => cmd_gate(a),
        Command::NoisyRun(a) => {
            let spec = NoiseSpec::from_json(&read(&a.noise)?)?;
            cmd_scores(&a.run, Some(&spec))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
