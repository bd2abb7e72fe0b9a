//! Command-line driver: train ordinal triplet embeddings, evaluate them,
//! emit category distance matrices, verify the metric axioms, and list
//! triplet templates.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{
    run_eval, run_matrix, run_templates, run_train, run_verify_metric, EvalArgs, MatrixArgs,
    MatrixSplit, TrainArgs, VerifyMetricArgs,
};
use config::{pick, resolve_out_dir, FileConfig};

#[derive(Parser)]
#[command(
    name = "atd",
    about = "Ordinal metric learning with angular triangle distances",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DataFlags {
    /// Data source: a file path, builtin:<car|nursery|balance|hayes-roth>,
    /// or synthetic:<key=value,...>
    #[arg(long)]
    data: Option<String>,
    /// Schema TOML describing a data file's columns
    #[arg(long)]
    schema: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Train an embedding model and write the model file plus history CSV
    Train {
        #[command(flatten)]
        data: DataFlags,
        /// Optional config file; flags override its values
        #[arg(long)]
        config: Option<PathBuf>,
        /// Fraction of the data held out for testing
        #[arg(long)]
        test_fraction: Option<f64>,
        /// Fraction of the remaining training data held out for validation
        #[arg(long)]
        val_fraction: Option<f64>,
        /// Hidden layer widths, comma separated
        #[arg(long, value_delimiter = ',')]
        hidden: Option<Vec<usize>>,
        /// Embedding dimension |Z|
        #[arg(long)]
        embedding_dim: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        /// Batches per epoch; defaults to covering the training set once
        #[arg(long)]
        batches_per_epoch: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        /// Cosine clamp inside the loss gradient
        #[arg(long)]
        arccos_guard: Option<f64>,
        /// Master seed: weight init, splits, and batch sampling
        #[arg(long)]
        seed: Option<u64>,
        /// K for the per-epoch validation K-NN accuracy
        #[arg(long)]
        validation_k: Option<usize>,
        /// Output directory (also via ATD_OUT_DIR)
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// File name for the saved model
        #[arg(long, default_value = "model.atd")]
        model_name: String,
    },
    /// Evaluate a trained model: K-NN retrieval accuracy and classification error
    Eval {
        /// Path to a saved model file
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DataFlags,
        #[arg(long)]
        config: Option<PathBuf>,
        /// K values to evaluate, comma separated
        #[arg(long, value_delimiter = ',')]
        k: Option<Vec<usize>>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Emit the category distance matrix and its ordinal monotonicity score
    Matrix {
        /// Path to a saved model file
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DataFlags,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Which split to embed (train, val, test, all)
        #[arg(long, default_value = "test")]
        split: MatrixSplit,
        /// Emit raw cosine distance (1 - similarity) instead of the
        /// half-rescaled form
        #[arg(long)]
        raw: bool,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Verify the four metric axioms over random vector triples
    VerifyMetric {
        /// Vector dimension
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Number of random triples
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-axiom violation tolerance
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// List the 2C - 1 triplet templates with their target distances
    Templates {
        /// Number of ordinal categories (C >= 3)
        #[arg(long)]
        categories: usize,
    },
}

fn require_data(flag: Option<String>, file: Option<String>) -> atd::Result<String> {
    let name = pick(flag, file, String::new());
    if name.is_empty() {
        return Err(atd::Error::Config {
            field: "data".into(),
            message: "no data source given (flag --data or [data] path)".into(),
        });
    }
    Ok(name)
}

fn dispatch(cli: Cli) -> atd::Result<bool> {
    match cli.command {
        Command::Train {
            data,
            config,
            test_fraction,
            val_fraction,
            hidden,
            embedding_dim,
            epochs,
            batch_size,
            batches_per_epoch,
            learning_rate,
            arccos_guard,
            seed,
            validation_k,
            out_dir,
            model_name,
        } => {
            let file = FileConfig::load(config.as_deref())?;
            let defaults = atd::train::TrainConfig::default();
            run_train(TrainArgs {
                data: require_data(data.data, file.data.path)?,
                schema: data.schema.or(file.data.schema),
                test_fraction: pick(test_fraction, file.data.test_fraction, 0.2),
                val_fraction: pick(val_fraction, file.data.val_fraction, 0.2),
                hidden: pick(hidden, file.network.hidden, vec![64, 64]),
                embedding_dim: pick(embedding_dim, file.network.embedding_dim, 100),
                config: atd::train::TrainConfig {
                    epochs: pick(epochs, file.train.epochs, defaults.epochs),
                    batch_size: pick(batch_size, file.train.batch_size, defaults.batch_size),
                    batches_per_epoch: batches_per_epoch.or(file.train.batches_per_epoch),
                    learning_rate: pick(
                        learning_rate,
                        file.train.learning_rate,
                        defaults.learning_rate,
                    ),
                    arccos_guard: pick(
                        arccos_guard,
                        file.train.arccos_guard,
                        defaults.arccos_guard,
                    ),
                    seed: pick(seed, file.train.seed, defaults.seed),
                    validation_k: pick(
                        validation_k,
                        file.train.validation_k,
                        defaults.validation_k,
                    ),
                },
                out_dir: resolve_out_dir(out_dir, file.output.dir),
                model_name,
            })
            .map(|()| true)
        }
        Command::Eval {
            model,
            data,
            config,
            k,
            out_dir,
        } => {
            let file = FileConfig::load(config.as_deref())?;
            run_eval(EvalArgs {
                model,
                data: require_data(data.data, file.data.path)?,
                schema: data.schema.or(file.data.schema),
                k: pick(k, file.eval.k, vec![3]),
                out_dir: resolve_out_dir(out_dir, file.output.dir),
            })
            .map(|()| true)
        }
        Command::Matrix {
            model,
            data,
            config,
            split,
            raw,
            out_dir,
        } => {
            let file = FileConfig::load(config.as_deref())?;
            run_matrix(MatrixArgs {
                model,
                data: require_data(data.data, file.data.path)?,
                schema: data.schema.or(file.data.schema),
                split,
                raw,
                out_dir: resolve_out_dir(out_dir, file.output.dir),
            })
            .map(|()| true)
        }
        Command::VerifyMetric {
            dim,
            samples,
            seed,
            tol,
            out_dir,
        } => run_verify_metric(VerifyMetricArgs {
            dim,
            samples,
            seed,
            tol,
            out_dir: resolve_out_dir(out_dir, None),
        }),
        Command::Templates { categories } => run_templates(categories).map(|()| true),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        // Completed but the check itself failed (verify-metric).
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::FAILURE
        }
    }
}
