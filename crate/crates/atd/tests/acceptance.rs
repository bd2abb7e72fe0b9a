//! Acceptance suite: one test per criterion, each printing a pass line with
//! its measured numbers. Run with `cargo test --test acceptance -- --nocapture`
//! to see the lines.

use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use atd::data::{
    balance_scale, car_evaluation, hayes_roth, load_csv_ordinal, make_synthetic_ordinal, nursery,
    split, DatasetSchema, OrdinalDataset,
};
use atd::eval::{
    category_distance_matrix, knn_accuracy, knn_classify_error, ordinal_monotonicity_score,
};
use atd::geometry::{check_metric_axioms, random_unit_triples};
use atd::net::{backward, forward, NetworkParameters};
use atd::targets::{triplet_templates, OrdinalLabel};
use atd::train::{
    embed_dataset, loss_gradient_wrt_embeddings, predicted_distance, train, TrainConfig,
};

fn assert_runtime(name: &str, elapsed: Duration, limit: Duration) {
    assert!(
        elapsed <= limit,
        "{name} took {elapsed:.1?}, over the {limit:.1?} limit"
    );
}

#[test]
fn criterion_1_metric_axioms() {
    let start = Instant::now();
    let mut worst_identity: f64 = 0.0;
    let mut worst_triangle: f64 = 0.0;
    for (seed, dim) in [(11u64, 2usize), (12, 8), (13, 100)] {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let triples = random_unit_triples(dim, 10_000, &mut rng).unwrap();
        let report = check_metric_axioms(&triples, 1e-9).unwrap();
        assert_eq!(
            report.nonnegativity.worst_violation, 0.0,
            "d={dim}: non-negativity must hold exactly"
        );
        assert_eq!(
            report.symmetry.worst_violation, 0.0,
            "d={dim}: symmetry must hold exactly"
        );
        assert!(
            report.identity.worst_violation <= 1e-6,
            "d={dim}: identity violation {}",
            report.identity.worst_violation
        );
        assert!(
            report.triangle_inequality.worst_violation <= 1e-9,
            "d={dim}: triangle violation {}",
            report.triangle_inequality.worst_violation
        );
        worst_identity = worst_identity.max(report.identity.worst_violation);
        worst_triangle = worst_triangle.max(report.triangle_inequality.worst_violation);
    }
    let elapsed = start.elapsed();
    assert_runtime("criterion 1", elapsed, Duration::from_secs(10));
    println!(
        "criterion 1 (metric axioms): PASS \
         (30000 triples over d in {{2, 8, 100}}, worst identity {worst_identity:.2e}, \
         worst triangle {worst_triangle:.2e}, {elapsed:.2?})"
    );
}

#[test]
fn criterion_2_template_correctness() {
    for c in 3..=10 {
        let templates = triplet_templates(c).unwrap();
        assert_eq!(templates.len(), 2 * c - 1, "C={c}");
        for t in &templates {
            if t.is_inner() {
                assert_eq!(t.targets, (0.0, 0.0), "C={c} inner {:?}", t.ranks);
            }
        }
    }
    let five = triplet_templates(5).unwrap();
    let boundary: Vec<(f64, f64)> = five
        .iter()
        .filter(|t| !t.is_inner())
        .map(|t| t.targets)
        .collect();
    assert_eq!(
        boundary,
        vec![(0.25, 0.75), (0.5, 0.5), (0.75, 0.25), (1.0, 1.0)],
        "C=5 boundary targets must be exact"
    );
    println!(
        "criterion 2 (template correctness): PASS \
         (counts 2C-1 for C in 3..=10, C=5 boundary targets exact)"
    );
}

/// Full loss for one triple, from raw inputs through the network, the
/// normalization, and the guarded arccos.
fn triple_loss(
    params: &NetworkParameters,
    inputs: (&[f64], &[f64], &[f64]),
    targets: (f64, f64),
    guard: f64,
) -> f64 {
    let (zi, _) = forward(params, inputs.0).unwrap();
    let (zj, _) = forward(params, inputs.1).unwrap();
    let (zk, _) = forward(params, inputs.2).unwrap();
    let yhat_ij = predicted_distance(&zi, &zj, guard).unwrap();
    let yhat_jk = predicted_distance(&zj, &zk, guard).unwrap();
    (targets.0 - yhat_ij).powi(2) + (targets.1 - yhat_jk).powi(2)
}

#[test]
fn criterion_3_gradient_correctness() {
    let start = Instant::now();
    let guard = 1e-7;
    let step = 1e-5;
    let mut worst: f64 = 0.0;

    for config in 0..20u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(1000 + config);
        let input_dim = 3 + (config as usize % 4);
        let hidden = 5 + (config as usize % 5);
        let embedding_dim = 3 + (config as usize % 3);
        let params =
            NetworkParameters::init(input_dim, &[hidden], embedding_dim, &mut rng).unwrap();

        let mut sample = |rng: &mut ChaCha12Rng| -> Vec<f64> {
            (0..input_dim).map(|_| rng.random_range(0.05..1.0)).collect()
        };
        let xi = sample(&mut rng);
        let xj = sample(&mut rng);
        let xk = sample(&mut rng);
        let targets = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));

        // Analytic gradient of the full loss w.r.t. every parameter.
        let (zi, ti) = forward(&params, &xi).unwrap();
        let (zj, tj) = forward(&params, &xj).unwrap();
        let (zk, tk) = forward(&params, &xk).unwrap();
        let (gi, gj, gk) =
            loss_gradient_wrt_embeddings(&zi, &zj, &zk, targets, guard).unwrap();
        let mut analytic = backward(&params, &ti, &gi).unwrap();
        analytic.add_assign(&backward(&params, &tj, &gj).unwrap()).unwrap();
        analytic.add_assign(&backward(&params, &tk, &gk).unwrap()).unwrap();

        for l in 0..params.layers().len() {
            let n_weights = params.layers()[l].weights().len();
            let n_bias = params.layers()[l].bias().len();
            for idx in 0..n_weights + n_bias {
                let mut plus = params.clone();
                let mut minus = params.clone();
                for (net, delta) in [(&mut plus, step), (&mut minus, -step)] {
                    let layer = &mut net.layers_mut()[l];
                    if idx < n_weights {
                        layer.weights_mut()[idx] += delta;
                    } else {
                        layer.bias_mut()[idx - n_weights] += delta;
                    }
                }
                let numeric = (triple_loss(&plus, (&xi, &xj, &xk), targets, guard)
                    - triple_loss(&minus, (&xi, &xj, &xk), targets, guard))
                    / (2.0 * step);
                let exact = if idx < n_weights {
                    analytic.layers()[l].weights[idx]
                } else {
                    analytic.layers()[l].bias[idx - n_weights]
                };
                let scale = exact.abs().max(numeric.abs());
                if scale > 1e-7 {
                    worst = worst.max((exact - numeric).abs() / scale);
                }
            }
        }
    }
    assert!(worst < 1e-4, "max relative gradient error {worst:.3e}");
    let elapsed = start.elapsed();
    assert_runtime("criterion 3", elapsed, Duration::from_secs(30));
    println!(
        "criterion 3 (gradient correctness): PASS \
         (20 seeded configurations, max relative error {worst:.3e}, {elapsed:.2?})"
    );
}

#[test]
fn criterion_4_desk_scale_end_to_end() {
    let start = Instant::now();
    let dataset = make_synthetic_ordinal(4, 100, 2, 4.0, 0.25, 7).unwrap();
    let (train_set, val_set, test_set) = split(&dataset, 0.2, 0.2, 7).unwrap();

    // The raw features are themselves separable: the independent oracle that
    // makes the accuracy bound checkable before any training happens.
    let raw: Vec<Vec<f64>> = (0..dataset.len()).map(|i| dataset.row(i).to_vec()).collect();
    let raw_accuracy = knn_accuracy(&raw, dataset.labels(), 3).unwrap();
    assert!(
        raw_accuracy > 0.95,
        "synthetic set is not separable enough: raw accuracy {raw_accuracy}"
    );

    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let initial = NetworkParameters::init(2, &[32, 32], 16, &mut rng).unwrap();
    let config = TrainConfig {
        epochs: 120,
        batch_size: 64,
        learning_rate: 1e-3,
        seed: 7,
        ..TrainConfig::default()
    };
    assert!(config.epochs <= 200);
    let outcome = train(&train_set, &val_set, initial, &config, |_| {}).unwrap();

    let best = outcome.history.best_epoch.expect("epochs ran");
    let best_accuracy = outcome.history.epochs[best].validation_accuracy;
    assert!(
        best_accuracy > 0.95,
        "validation accuracy {best_accuracy} at best epoch {best}"
    );

    let test_embeddings = embed_dataset(&outcome.parameters, &test_set).unwrap();
    let matrix = category_distance_matrix(&test_embeddings, test_set.labels()).unwrap();
    let score = ordinal_monotonicity_score(&matrix).unwrap();
    assert_eq!(score, 1.0, "test-set category matrix must be fully ordinal");

    let elapsed = start.elapsed();
    assert_runtime("criterion 4", elapsed, Duration::from_secs(60));
    println!(
        "criterion 4 (desk-scale end-to-end): PASS \
         (val accuracy {best_accuracy:.4} at epoch {best}, monotonicity {score}, {elapsed:.2?})"
    );
}

/// Use the real data file when it has been fetched, otherwise the
/// rule-generated stand-in.
fn benchmark_dataset(name: &str) -> OrdinalDataset {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../datasets");
    let (data, schema, builtin): (_, _, fn() -> atd::Result<OrdinalDataset>) = match name {
        "car" => ("car.data", "car.schema.toml", car_evaluation),
        "nursery" => ("nursery.data", "nursery.schema.toml", nursery),
        "balance" => ("balance-scale.data", "balance.schema.toml", balance_scale),
        "hayes-roth" => ("hayes-roth.data", "hayes_roth.schema.toml", || hayes_roth(0)),
        other => panic!("unknown benchmark {other}"),
    };
    let data_path = dir.join(data);
    if data_path.exists() {
        let schema = DatasetSchema::from_path(&dir.join(schema)).unwrap();
        let ds = load_csv_ordinal(&data_path, &schema).unwrap();
        println!("  [{name}] using fetched file {}", data_path.display());
        ds
    } else {
        builtin().unwrap()
    }
}

/// Mean K-NN classification error over five seeded train/eval runs.
fn mean_benchmark_error(name: &str, epochs: usize, batch_size: usize) -> f64 {
    let dataset = benchmark_dataset(name);
    let mut total = 0.0;
    for seed in 1..=5u64 {
        let (train_set, val_set, test_set) = split(&dataset, 0.2, 0.2, seed).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let initial =
            NetworkParameters::init(dataset.dim(), &[64, 64], 100, &mut rng).unwrap();
        let config = TrainConfig {
            epochs,
            batch_size,
            learning_rate: 1e-3,
            seed,
            ..TrainConfig::default()
        };
        let outcome = train(&train_set, &val_set, initial, &config, |_| {}).unwrap();
        let train_embeddings = embed_dataset(&outcome.parameters, &train_set).unwrap();
        let test_embeddings = embed_dataset(&outcome.parameters, &test_set).unwrap();
        let error = knn_classify_error(
            &train_embeddings,
            train_set.labels(),
            &test_embeddings,
            test_set.labels(),
            3,
        )
        .unwrap();
        println!("  [{name}] seed {seed}: error {:.2}%", error * 100.0);
        total += error;
    }
    total / 5.0
}

#[test]
fn criterion_5_benchmark_regime() {
    // (name, epochs, batch, error bound, runtime bound in seconds)
    let cases = [
        ("car", 300, 64, 0.08, 300),
        ("balance", 300, 64, 0.12, 300),
        ("hayes-roth", 300, 32, 0.30, 300),
        ("nursery", 40, 64, 0.05, 900),
    ];
    for (name, epochs, batch, bound, limit) in cases {
        let start = Instant::now();
        let mean = mean_benchmark_error(name, epochs, batch);
        let elapsed = start.elapsed();
        assert!(
            mean <= bound,
            "{name}: mean error {:.2}% over the {:.0}% bound",
            mean * 100.0,
            bound * 100.0
        );
        assert_runtime(name, elapsed, Duration::from_secs(limit));
        println!(
            "criterion 5 ({name}): PASS (mean error {:.2}% <= {:.0}%, {elapsed:.1?})",
            mean * 100.0,
            bound * 100.0
        );
    }
}

#[test]
fn criterion_6_ordinal_semantics_on_car() {
    let dataset = benchmark_dataset("car");
    let (train_set, val_set, test_set) = split(&dataset, 0.2, 0.2, 1).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let initial = NetworkParameters::init(dataset.dim(), &[64, 64], 100, &mut rng).unwrap();
    let config = TrainConfig {
        epochs: 300,
        batch_size: 64,
        learning_rate: 1e-3,
        seed: 1,
        ..TrainConfig::default()
    };
    let outcome = train(&train_set, &val_set, initial, &config, |_| {}).unwrap();
    let test_embeddings = embed_dataset(&outcome.parameters, &test_set).unwrap();
    let matrix = category_distance_matrix(&test_embeddings, test_set.labels()).unwrap();
    let score = ordinal_monotonicity_score(&matrix).unwrap();
    assert!(score >= 0.95, "monotonicity {score} below 0.95");
    println!("criterion 6 (ordinal semantics): PASS (car test-set monotonicity {score:.4})");
}

/// Brute-force leave-one-out K-NN accuracy: full sort per query.
fn knn_accuracy_oracle(embeddings: &[Vec<f64>], ranks: &[usize], k: usize) -> f64 {
    let cos = |a: &[f64], b: &[f64]| {
        let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        d / (na * nb)
    };
    let n = embeddings.len();
    let mut hits = 0usize;
    for i in 0..n {
        let mut sims: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (cos(&embeddings[i], &embeddings[j]), j))
            .collect();
        sims.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        hits += sims[..k].iter().filter(|&&(_, j)| ranks[j] == ranks[i]).count();
    }
    hits as f64 / (n * k) as f64
}

/// Brute-force category distance matrix: all ordered pairs, double loop.
fn matrix_oracle(embeddings: &[Vec<f64>], ranks: &[usize], categories: usize) -> Vec<Vec<f64>> {
    let cos = |a: &[f64], b: &[f64]| {
        let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        d / (na * nb)
    };
    let mut out = vec![vec![0.0; categories]; categories];
    for r in 0..categories {
        for c in 0..categories {
            let mut sum = 0.0;
            let mut count = 0usize;
            for (i, &ri) in ranks.iter().enumerate() {
                for (j, &rj) in ranks.iter().enumerate() {
                    if ri == r && rj == c && i != j {
                        sum += (1.0 - cos(&embeddings[i], &embeddings[j])) / 2.0;
                        count += 1;
                    }
                }
            }
            out[r][c] = sum / count as f64;
        }
    }
    out
}

#[test]
fn criterion_7_oracle_equivalence() {
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(2000 + seed);
        let n = rng.random_range(20..=200);
        let dim = rng.random_range(2..=16);
        let categories = rng.random_range(3..=6);
        let k = rng.random_range(1..=5.min(n - 1));

        let embeddings: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let mut ranks: Vec<usize> = (0..n).map(|_| rng.random_range(0..categories)).collect();
        // Guarantee two samples per category for the matrix diagonal.
        for r in 0..categories {
            ranks[2 * r] = r;
            ranks[2 * r + 1] = r;
        }
        let labels: Vec<OrdinalLabel> = ranks
            .iter()
            .map(|&r| OrdinalLabel::new(r, categories).unwrap())
            .collect();

        let accuracy = knn_accuracy(&embeddings, &labels, k).unwrap();
        let expected = knn_accuracy_oracle(&embeddings, &ranks, k);
        worst = worst.max((accuracy - expected).abs());

        let matrix = category_distance_matrix(&embeddings, &labels).unwrap();
        let expected_matrix = matrix_oracle(&embeddings, &ranks, categories);
        for r in 0..categories {
            for c in 0..categories {
                worst = worst.max((matrix.get(r, c) - expected_matrix[r][c]).abs());
            }
        }
    }
    assert!(worst < 1e-12, "worst oracle deviation {worst:.3e}");
    println!(
        "criterion 7 (oracle equivalence): PASS \
         (50 seeded instances, worst deviation {worst:.3e})"
    );
}

fn history_csv(history: &atd::train::TrainHistory) -> String {
    let mut out = String::from("epoch,mean_loss,validation_accuracy\n");
    for rec in &history.epochs {
        out.push_str(&format!(
            "{},{},{}\n",
            rec.epoch, rec.mean_loss, rec.validation_accuracy
        ));
    }
    out
}

#[test]
fn criterion_8_determinism_and_persistence() {
    let dataset = make_synthetic_ordinal(4, 40, 3, 4.0, 0.2, 3).unwrap();
    let config = TrainConfig {
        epochs: 15,
        batch_size: 32,
        learning_rate: 1e-3,
        seed: 3,
        ..TrainConfig::default()
    };

    let run = || {
        let (train_set, val_set, test_set) = split(&dataset, 0.2, 0.2, 3).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let initial = NetworkParameters::init(3, &[16], 8, &mut rng).unwrap();
        let outcome = train(&train_set, &val_set, initial, &config, |_| {}).unwrap();
        let train_embeddings = embed_dataset(&outcome.parameters, &train_set).unwrap();
        let test_embeddings = embed_dataset(&outcome.parameters, &test_set).unwrap();
        let error = knn_classify_error(
            &train_embeddings,
            train_set.labels(),
            &test_embeddings,
            test_set.labels(),
            3,
        )
        .unwrap();
        let metrics = format!("k,knn_classify_error\n3,{error}\n");
        (history_csv(&outcome.history), metrics, outcome.parameters)
    };

    let (history_a, metrics_a, params_a) = run();
    let (history_b, metrics_b, params_b) = run();
    assert_eq!(history_a.as_bytes(), history_b.as_bytes());
    assert_eq!(metrics_a.as_bytes(), metrics_b.as_bytes());
    assert_eq!(params_a, params_b);

    // Save/load round trip: parameters and embeddings bitwise equal.
    let artifact = atd::artifact::ModelArtifact {
        parameters: params_a,
        category_count: 4,
        train_config: config,
        provenance: dataset.provenance().to_string(),
        seed: 3,
        split_fractions: (0.2, 0.2),
    };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.atd");
    atd::artifact::save_model(&artifact, &path).unwrap();
    let loaded = atd::artifact::load_model(&path).unwrap();
    assert_eq!(loaded.parameters, artifact.parameters);
    for i in 0..dataset.len() {
        let before = atd::net::embed(&artifact.parameters, dataset.row(i)).unwrap();
        let after = atd::net::embed(&loaded.parameters, dataset.row(i)).unwrap();
        for (a, b) in before.iter().zip(&after) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
    println!(
        "criterion 8 (determinism & persistence): PASS \
         (byte-identical CSVs across reruns, bitwise round-trip)"
    );
}
