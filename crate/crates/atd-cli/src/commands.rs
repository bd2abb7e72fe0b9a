//! Command implementations.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use atd::artifact::{load_model, save_model, ModelArtifact};
use atd::data::{split, OrdinalDataset};
use atd::error::{Error, Result};
use atd::eval::{
    category_distance_matrix_with, knn_accuracy, knn_classify_error,
    ordinal_monotonicity_score, CosineDistanceKind,
};
use atd::geometry::{check_metric_axioms, random_unit_triples};
use atd::net::NetworkParameters;
use atd::targets::triplet_templates;
use atd::train::{embed_dataset, train, TrainConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::config::load_dataset;

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

fn note_written(path: &Path) {
    eprintln!("wrote {}", path.display());
}

pub struct TrainArgs {
    pub data: String,
    pub schema: Option<PathBuf>,
    pub test_fraction: f64,
    pub val_fraction: f64,
    pub hidden: Vec<usize>,
    pub embedding_dim: usize,
    pub config: TrainConfig,
    pub out_dir: PathBuf,
    pub model_name: String,
}

pub fn run_train(args: TrainArgs) -> Result<()> {
    let dataset = load_dataset(&args.data, args.schema.as_deref())?;
    let (train_set, val_set, test_set) = split(
        &dataset,
        args.test_fraction,
        args.val_fraction,
        args.config.seed,
    )?;
    eprintln!(
        "dataset {}: {} rows ({} train / {} val / {} test), {} features, {} categories",
        dataset.provenance(),
        dataset.len(),
        train_set.len(),
        val_set.len(),
        test_set.len(),
        dataset.dim(),
        dataset.category_count()
    );

    let mut rng = ChaCha12Rng::seed_from_u64(args.config.seed);
    let initial = NetworkParameters::init(
        dataset.dim(),
        &args.hidden,
        args.embedding_dim,
        &mut rng,
    )?;
    let outcome = train(&train_set, &val_set, initial, &args.config, |record| {
        eprintln!(
            "epoch {:>4}  loss {:.6}  val acc {:.4}",
            record.epoch, record.mean_loss, record.validation_accuracy
        );
    })?;

    let mut history_csv = String::from("epoch,mean_loss,validation_accuracy\n");
    for rec in &outcome.history.epochs {
        let _ = writeln!(
            history_csv,
            "{},{},{}",
            rec.epoch, rec.mean_loss, rec.validation_accuracy
        );
    }
    note_written(&write_file(&args.out_dir, "history.csv", &history_csv)?);

    let artifact = ModelArtifact {
        parameters: outcome.parameters,
        category_count: dataset.category_count(),
        train_config: args.config.clone(),
        provenance: dataset.provenance().to_string(),
        seed: args.config.seed,
        split_fractions: (args.test_fraction, args.val_fraction),
    };
    let model_path = args.out_dir.join(&args.model_name);
    std::fs::create_dir_all(&args.out_dir)?;
    save_model(&artifact, &model_path)?;
    note_written(&model_path);

    match outcome.history.best_epoch {
        Some(best) => {
            let rec = outcome.history.epochs[best];
            println!(
                "best epoch {} with validation accuracy {:.4}",
                best, rec.validation_accuracy
            );
        }
        None => println!("no epochs ran; saved the initial parameters"),
    }
    Ok(())
}

/// Reconstruct the splits a model was trained with and embed them.
fn resplit_and_embed(
    artifact: &ModelArtifact,
    dataset: &OrdinalDataset,
) -> Result<(OrdinalDataset, OrdinalDataset, OrdinalDataset)> {
    if dataset.dim() != artifact.feature_dim() {
        return Err(Error::DimensionMismatch {
            left: dataset.dim(),
            right: artifact.feature_dim(),
        });
    }
    if dataset.category_count() != artifact.category_count {
        return Err(Error::InvalidArgument(format!(
            "dataset has {} categories, model was trained with {}",
            dataset.category_count(),
            artifact.category_count
        )));
    }
    split(
        dataset,
        artifact.split_fractions.0,
        artifact.split_fractions.1,
        artifact.seed,
    )
}

pub struct EvalArgs {
    pub model: PathBuf,
    pub data: String,
    pub schema: Option<PathBuf>,
    pub k: Vec<usize>,
    pub out_dir: PathBuf,
}

pub fn run_eval(args: EvalArgs) -> Result<()> {
    if args.k.is_empty() || args.k.contains(&0) {
        return Err(Error::Config {
            field: "k".into(),
            message: "needs at least one K value, all >= 1".into(),
        });
    }
    let artifact = load_model(&args.model)?;
    let dataset = load_dataset(&args.data, args.schema.as_deref())?;
    let (train_set, _, test_set) = resplit_and_embed(&artifact, &dataset)?;

    let train_embeddings = embed_dataset(&artifact.parameters, &train_set)?;
    let test_embeddings = embed_dataset(&artifact.parameters, &test_set)?;

    let mut csv = String::from("k,knn_accuracy,knn_classify_error\n");
    let mut kv = String::new();
    let _ = writeln!(kv, "model={}", args.model.display());
    let _ = writeln!(kv, "data={}", dataset.provenance());
    let _ = writeln!(kv, "train_rows={}", train_set.len());
    let _ = writeln!(kv, "test_rows={}", test_set.len());
    println!("evaluation of {} on {}", args.model.display(), dataset.provenance());
    for &k in &args.k {
        let accuracy = knn_accuracy(&test_embeddings, test_set.labels(), k)?;
        let error = knn_classify_error(
            &train_embeddings,
            train_set.labels(),
            &test_embeddings,
            test_set.labels(),
            k,
        )?;
        let _ = writeln!(csv, "{k},{accuracy},{error}");
        let _ = writeln!(kv, "knn_accuracy_k{k}={accuracy}");
        let _ = writeln!(kv, "knn_classify_error_k{k}={error}");
        println!(
            "K = {k}: retrieval accuracy {accuracy:.4}, classification error {:.2}%",
            error * 100.0
        );
    }
    note_written(&write_file(&args.out_dir, "metrics.csv", &csv)?);
    note_written(&write_file(&args.out_dir, "metrics.kv", &kv)?);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixSplit {
    Train,
    Val,
    Test,
    All,
}

impl std::str::FromStr for MatrixSplit {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "train" => Ok(MatrixSplit::Train),
            "val" => Ok(MatrixSplit::Val),
            "test" => Ok(MatrixSplit::Test),
            "all" => Ok(MatrixSplit::All),
            other => Err(format!("unknown split {other:?} (train, val, test, all)")),
        }
    }
}

pub struct MatrixArgs {
    pub model: PathBuf,
    pub data: String,
    pub schema: Option<PathBuf>,
    pub split: MatrixSplit,
    pub raw: bool,
    pub out_dir: PathBuf,
}

pub fn run_matrix(args: MatrixArgs) -> Result<()> {
    let artifact = load_model(&args.model)?;
    let dataset = load_dataset(&args.data, args.schema.as_deref())?;
    let subset = match args.split {
        MatrixSplit::All => dataset.clone(),
        other => {
            let (train_set, val_set, test_set) = resplit_and_embed(&artifact, &dataset)?;
            match other {
                MatrixSplit::Train => train_set,
                MatrixSplit::Val => val_set,
                MatrixSplit::Test => test_set,
                MatrixSplit::All => unreachable!(),
            }
        }
    };

    let embeddings = embed_dataset(&artifact.parameters, &subset)?;
    let kind = if args.raw {
        CosineDistanceKind::Raw
    } else {
        CosineDistanceKind::HalfRescaled
    };
    let matrix = category_distance_matrix_with(&embeddings, subset.labels(), kind)?;
    let score = ordinal_monotonicity_score(&matrix);

    print!("{}", matrix.to_csv());
    let mut kv = String::new();
    let _ = writeln!(kv, "model={}", args.model.display());
    let _ = writeln!(kv, "data={}", subset.provenance());
    let _ = writeln!(kv, "rows={}", subset.len());
    let _ = writeln!(kv, "distance_kind={}", if args.raw { "raw" } else { "half_rescaled" });
    match &score {
        Ok(s) => {
            println!("ordinal monotonicity score: {s:.6}");
            let _ = writeln!(kv, "monotonicity={s}");
        }
        Err(e) => {
            println!("ordinal monotonicity score undefined: {e}");
            let _ = writeln!(kv, "monotonicity=undefined");
        }
    }
    note_written(&write_file(
        &args.out_dir,
        "category_distance_matrix.csv",
        &matrix.to_csv(),
    )?);
    note_written(&write_file(&args.out_dir, "matrix.kv", &kv)?);
    score.map(|_| ())
}

pub struct VerifyMetricArgs {
    pub dim: usize,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub out_dir: PathBuf,
}

pub fn run_verify_metric(args: VerifyMetricArgs) -> Result<bool> {
    let mut rng = ChaCha12Rng::seed_from_u64(args.seed);
    let triples = random_unit_triples(args.dim, args.samples, &mut rng)?;
    let report = check_metric_axioms(&triples, args.tol)?;

    println!(
        "metric axioms over {} random unit triples in {} dimensions (tolerance {:e}):",
        report.samples, args.dim, report.tolerance
    );
    let mut kv = String::new();
    let _ = writeln!(kv, "dim={}", args.dim);
    let _ = writeln!(kv, "samples={}", report.samples);
    let _ = writeln!(kv, "seed={}", args.seed);
    let _ = writeln!(kv, "tolerance={}", report.tolerance);
    for (name, check) in report.checks() {
        println!(
            "  {name:<20} {}  worst violation {:.3e}",
            if check.pass { "pass" } else { "FAIL" },
            check.worst_violation
        );
        let _ = writeln!(kv, "{name}_pass={}", check.pass);
        let _ = writeln!(kv, "{name}_worst_violation={}", check.worst_violation);
    }
    let _ = writeln!(kv, "all_pass={}", report.all_pass());
    note_written(&write_file(&args.out_dir, "metric_axioms.kv", &kv)?);
    Ok(report.all_pass())
}

pub fn run_templates(categories: usize) -> Result<()> {
    let templates = triplet_templates(categories)?;
    println!(
        "{} triplet templates for {categories} categories (2C - 1):",
        templates.len()
    );
    println!("{:<20} {:>10} {:>10}  kind", "ranks (i, j, k)", "y_ij", "y_jk");
    for t in &templates {
        let kind = if t.is_inner() { "inner" } else { "boundary" };
        println!(
            "(l{}, l{}, l{}){:<8} {:>10.4} {:>10.4}  {kind}",
            t.ranks.0, t.ranks.1, t.ranks.2, "", t.targets.0, t.targets.1
        );
    }
    Ok(())
}
