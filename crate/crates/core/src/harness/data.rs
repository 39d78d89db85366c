use std::f64::consts::PI;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qnn::Dataset;
use crate::rng::{stream, tag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DataSource {
    /// Gaussian clusters with centers spaced on the unit circle of the first
    /// two features.
    SyntheticBlobs,
    /// Two classes by the sign of `x0 · x1` on `[-1, 1]²`.
    SyntheticXor,
    /// Two interleaved half circles.
    SyntheticMoons,
    Csv {
        path: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub source: DataSource,
    #[serde(default = "two")]
    pub num_classes: usize,
    #[serde(default = "two")]
    pub feature_dim: usize,
    #[serde(default = "default_size")]
    pub size: usize,
    #[serde(default)]
    pub seed: u64,
    /// 0 keeps classes well apart; larger values widen every cluster.
    #[serde(default)]
    pub overlap: f64,
    /// Extra blob centers reserved as unseen classes.
    #[serde(default = "two")]
    pub heldout_classes: usize,
    /// Fraction of samples used for training; the rest forms the suite pool.
    #[serde(default = "default_train")]
    pub train_fraction: f64,
}

fn two() -> usize {
    2
}

fn default_size() -> usize {
    400
}

fn default_train() -> f64 {
    0.5
}

impl DatasetSpec {
    pub fn blobs(num_classes: usize, size: usize, overlap: f64, seed: u64) -> Self {
        DatasetSpec {
            source: DataSource::SyntheticBlobs,
            num_classes,
            feature_dim: 2,
            size,
            seed,
            overlap,
            heldout_classes: 2,
            train_fraction: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::Config("need at least 2 classes".into()));
        }
        let synthetic = !matches!(self.source, DataSource::Csv { .. });
        if synthetic && self.feature_dim < 2 {
            return Err(Error::Config(
                "synthetic data needs at least 2 features".into(),
            ));
        }
        if matches!(
            self.source,
            DataSource::SyntheticXor | DataSource::SyntheticMoons
        ) && self.num_classes != 2
        {
            return Err(Error::Config("xor and moons are binary".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction {} outside (0, 1)",
                self.train_fraction
            )));
        }
        if !(self.overlap >= 0.0 && self.overlap.is_finite()) {
            return Err(Error::Config(format!("invalid overlap {}", self.overlap)));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: DatasetSpec = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }
}

fn blob_point(
    center: usize,
    centers: usize,
    dim: usize,
    std: f64,
    rng: &mut crate::rng::Rng,
) -> Vec<f64> {
    let angle = 2.0 * PI * center as f64 / centers as f64;
    let noise = Normal::new(0.0, std).expect("positive std");
    let mut x = vec![0.0; dim];
    x[0] = angle.cos();
    x[1] = angle.sin();
    x.iter_mut().for_each(|v| *v += noise.sample(rng));
    x
}

/// Builds the labeled dataset a `DatasetSpec` describes. Labels cycle through the
/// classes so every class has `size / c` samples (±1).
pub fn build_dataset(spec: &DatasetSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = stream(spec.seed, &[tag("dataset")]);
    let d = spec.feature_dim;
    let mut data = Dataset::default();
    match &spec.source {
        DataSource::SyntheticBlobs => {
            let std = 0.05 + 0.5 * spec.overlap;
            let centers = spec.num_classes + spec.heldout_classes;
            for i in 0..spec.size {
                let label = i % spec.num_classes;
                data.push(blob_point(label, centers, d, std, &mut rng), label);
            }
        }
        DataSource::SyntheticXor => {
            let noise = Normal::new(0.0, 0.02 + 0.3 * spec.overlap).expect("positive std");
            for i in 0..spec.size {
                let label = i % 2;
                let (a, b): (f64, f64) = (rng.random_range(0.1..1.0), rng.random_range(0.1..1.0));
                let sa = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let sb = if label == 0 { sa } else { -sa };
                let mut x = vec![0.0; d];
                x[0] = sa * a + noise.sample(&mut rng);
                x[1] = sb * b + noise.sample(&mut rng);
                data.push(x, label);
            }
        }
        DataSource::SyntheticMoons => {
            let noise = Normal::new(0.0, 0.05 + 0.3 * spec.overlap).expect("positive std");
            for i in 0..spec.size {
                let label = i % 2;
                let t = rng.random_range(0.0..PI);
                let (cx, cy) = if label == 0 {
                    (t.cos(), t.sin())
                } else {
                    (1.0 - t.cos(), 0.5 - t.sin())
                };
                let mut x = vec![0.0; d];
                x[0] = cx + noise.sample(&mut rng);
                x[1] = cy + noise.sample(&mut rng);
                data.push(x, label);
            }
        }
        DataSource::Csv { path } => {
            let data = read_csv(Path::new(path))?;
            if let Some(&l) = data.labels.iter().find(|&&l| l >= spec.num_classes) {
                return Err(Error::Config(format!(
                    "label {l} outside 0..{}",
                    spec.num_classes
                )));
            }
            return Ok(data);
        }
    }
    Ok(data)
}

/// Samples from the reserved blob centers, labeled by their center index
/// past the task classes. Empty for non-blob sources.
pub fn build_heldout(spec: &DatasetSpec, size: usize) -> Result<Dataset> {
    spec.validate()?;
    let mut data = Dataset::default();
    if spec.source != DataSource::SyntheticBlobs || spec.heldout_classes == 0 {
        return Ok(data);
    }
    let mut rng = stream(spec.seed, &[tag("heldout")]);
    let std = 0.05 + 0.5 * spec.overlap;
    let centers = spec.num_classes + spec.heldout_classes;
    for i in 0..size {
        let c = spec.num_classes + i % spec.heldout_classes;
        data.push(blob_point(c, centers, spec.feature_dim, std, &mut rng), c);
    }
    Ok(data)
}

/// Seeded shuffle split into `(train, pool)`.
pub fn split(data: &Dataset, train_fraction: f64, seed: u64) -> (Dataset, Dataset) {
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.shuffle(&mut stream(seed, &[tag("split")]));
    let cut = ((data.len() as f64) * train_fraction).round() as usize;
    (data.subset(&idx[..cut]), data.subset(&idx[cut..]))
}

/// Reads `f0..f{d-1},label` with a header row.
pub fn read_csv(path: &Path) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    parse_csv(file)
}

pub fn parse_csv(reader: impl std::io::Read) -> Result<Dataset> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = r.headers()?.clone();
    if headers.iter().next_back() != Some("label") {
        return Err(Error::Parse {
            location: "row 1".into(),
            message: "last column must be 'label'".into(),
        });
    }
    let d = headers.len() - 1;
    let mut data = Dataset::default();
    for (i, rec) in r.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| Error::Parse {
            location: format!("row {row}"),
            message: e.to_string(),
        })?;
        let perr = |m: String| Error::Parse {
            location: format!("row {row}"),
            message: m,
        };
        if rec.len() != d + 1 {
            return Err(perr(format!(
                "expected {} columns, got {}",
                d + 1,
                rec.len()
            )));
        }
        let x = rec
            .iter()
            .take(d)
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| perr(format!("'{v}': {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let label = rec[d]
            .trim()
            .parse::<usize>()
            .map_err(|e| perr(format!("label '{}': {e}", &rec[d])))?;
        data.push(x, label);
    }
    Ok(data)
}

pub fn write_csv(data: &Dataset, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    write_records(data, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(data: &Dataset) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    write_records(data, &mut w)?;
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn write_records<W: std::io::Write>(data: &Dataset, w: &mut csv::Writer<W>) -> Result<()> {
    let d = data.feature_dim();
    let mut header: Vec<String> = (0..d).map(|j| format!("f{j}")).collect();
    header.push("label".into());
    w.write_record(&header)?;
    for (x, l) in data.features.iter().zip(&data.labels) {
        let mut row: Vec<String> = x.iter().map(|v| format!("{v:?}")).collect();
        row.push(l.to_string());
        w.write_record(&row)?;
    }
    Ok(())
}
