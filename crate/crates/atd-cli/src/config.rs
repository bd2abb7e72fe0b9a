//! Run configuration: defaults, optional config file, command-line flags.
//!
//! Precedence is flags over config file over built-in defaults. The config
//! file is TOML with the same knobs as the flags:
//!
//! ```toml
//! [data]
//! path = "datasets/car.data"       # or "builtin:car" / "synthetic:C=4,..."
//! schema = "datasets/car.schema.toml"
//! test_fraction = 0.2
//! val_fraction = 0.2
//!
//! [network]
//! hidden = [64, 64]
//! embedding_dim = 100
//!
//! [train]
//! epochs = 50
//! batch_size = 64
//! batches_per_epoch = 100          # optional; omit to cover the set once
//! learning_rate = 1e-4
//! arccos_guard = 1e-7
//! seed = 0
//! validation_k = 3
//!
//! [eval]
//! k = [3]
//!
//! [output]
//! dir = "out"
//! ```

use std::path::{Path, PathBuf};

use atd::{Error, Result};
use serde::Deserialize;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "ATD_OUT_DIR";

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub network: NetworkSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub eval: EvalSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub path: Option<String>,
    pub schema: Option<PathBuf>,
    pub test_fraction: Option<f64>,
    pub val_fraction: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub hidden: Option<Vec<usize>>,
    pub embedding_dim: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub batches_per_epoch: Option<usize>,
    pub learning_rate: Option<f64>,
    pub arccos_guard: Option<f64>,
    pub seed: Option<u64>,
    pub validation_k: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    pub k: Option<Vec<usize>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(FileConfig::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
                    field: "config".into(),
                    message: format!("{}: {e}", path.display()),
                })?;
                toml::from_str(&text).map_err(|e| Error::Config {
                    field: "config".into(),
                    message: e.to_string(),
                })
            }
        }
    }
}

/// Pick the first present value: flag, then config file, then default.
pub fn pick<T: Clone>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Output directory resolution: flag, config file, environment, ".".
pub fn resolve_out_dir(flag: Option<PathBuf>, file: Option<PathBuf>) -> PathBuf {
    flag.or(file)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Parsed synthetic-dataset spec, e.g.
/// `synthetic:categories=4,per_class=100,dim=2,separation=4.0,sigma=0.25,seed=7`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub categories: usize,
    pub per_class: usize,
    pub dim: usize,
    pub separation: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn parse(spec: &str) -> Result<Self> {
        let mut out = SyntheticSpec {
            categories: 4,
            per_class: 100,
            dim: 2,
            separation: 4.0,
            sigma: 0.25,
            seed: 0,
        };
        for part in spec.split(',').filter(|p| !p.is_empty()) {
            let (key, value) = part.split_once('=').ok_or_else(|| Error::Config {
                field: "data".into(),
                message: format!("synthetic spec entry {part:?} is not key=value"),
            })?;
            let bad = |e: String| Error::Config {
                field: "data".into(),
                message: format!("synthetic spec {key}: {e}"),
            };
            match key {
                "categories" => out.categories = value.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?,
                "per_class" => out.per_class = value.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?,
                "dim" => out.dim = value.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?,
                "separation" => out.separation = value.parse().map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?,
                "sigma" => out.sigma = value.parse().map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?,
                "seed" => out.seed = value.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?,
                other => {
                    return Err(Error::Config {
                        field: "data".into(),
                        message: format!("unknown synthetic spec key {other:?}"),
                    })
                }
            }
        }
        Ok(out)
    }
}

/// Load a dataset named by a data argument: a file path (with schema),
/// `builtin:<name>`, or `synthetic:<spec>`.
pub fn load_dataset(data: &str, schema: Option<&Path>) -> Result<atd::data::OrdinalDataset> {
    if let Some(name) = data.strip_prefix("builtin:") {
        return match name {
            "car" => atd::data::car_evaluation(),
            "nursery" => atd::data::nursery(),
            "balance" => atd::data::balance_scale(),
            "hayes-roth" => atd::data::hayes_roth(0),
            other => Err(Error::Config {
                field: "data".into(),
                message: format!(
                    "unknown builtin dataset {other:?} \
                     (expected car, nursery, balance, or hayes-roth)"
                ),
            }),
        };
    }
    if let Some(spec) = data.strip_prefix("synthetic:") {
        let s = SyntheticSpec::parse(spec)?;
        return atd::data::make_synthetic_ordinal(
            s.categories,
            s.per_class,
            s.dim,
            s.separation,
            s.sigma,
            s.seed,
        );
    }
    let path = Path::new(data);
    if !path.exists() {
        return Err(Error::Config {
            field: "data".into(),
            message: format!("file {data:?} does not exist"),
        });
    }
    let schema_path = schema.ok_or_else(|| Error::Config {
        field: "schema".into(),
        message: "loading a data file requires --schema".into(),
    })?;
    if !schema_path.exists() {
        return Err(Error::Config {
            field: "schema".into(),
            message: format!("file {} does not exist", schema_path.display()),
        });
    }
    let schema = atd::data::DatasetSchema::from_path(schema_path)?;
    atd::data::load_csv_ordinal(path, &schema)
}
