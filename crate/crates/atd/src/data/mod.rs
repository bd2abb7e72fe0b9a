//! Ordinal tabular datasets: loading, encoding, splitting, generation.
//!
//! A dataset is a dense `N x d` feature matrix with one ordinal label per row.
//! Features are always finite and scaled to `[0, 1]`; labels are ranks below a
//! shared category count `C >= 3`. Categorical files are brought into this
//! form by [`load_csv_ordinal`] under a [`DatasetSchema`]: ordinal columns map
//! level position to `pos / (levels - 1)`, nominal columns are one-hot
//! encoded, and the target column maps to its position in the declared class
//! order.

mod builtin;
mod schema;
mod synthetic;

pub use builtin::{balance_scale, car_evaluation, hayes_roth, nursery};
pub use schema::{load_csv_ordinal, ColumnKind, ColumnSpec, DatasetSchema};
pub use synthetic::make_synthetic_ordinal;

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::targets::{OrdinalLabel, MIN_CATEGORIES};

/// Feature matrix plus ordinal labels.
///
/// Rows are stored contiguously; `row(i)` is the `i`-th feature vector.
/// Per-category row indices are precomputed for triplet sampling and
/// stratified splitting.
#[derive(Debug, Clone, PartialEq)]
pub struct OrdinalDataset {
    features: Vec<f64>,
    dim: usize,
    labels: Vec<OrdinalLabel>,
    category_count: usize,
    feature_names: Vec<String>,
    provenance: String,
    category_indices: Vec<Vec<usize>>,
}

impl OrdinalDataset {
    /// Build a dataset from per-row feature vectors and label ranks.
    ///
    /// Validates: `C >= 3`, `N >= C`, equal row lengths, ranks below `C`,
    /// and all features finite within `[0, 1]`.
    pub fn from_rows(
        rows: Vec<Vec<f64>>,
        ranks: Vec<usize>,
        category_count: usize,
        feature_names: Vec<String>,
        provenance: String,
    ) -> Result<Self> {
        if category_count < MIN_CATEGORIES {
            return Err(Error::UnsupportedCategoryCount {
                found: category_count,
            });
        }
        if rows.len() != ranks.len() {
            return Err(Error::InvalidArgument(format!(
                "{} feature rows but {} labels",
                rows.len(),
                ranks.len()
            )));
        }
        if rows.len() < category_count {
            return Err(Error::InvalidArgument(format!(
                "dataset has {} rows, fewer than the {} categories",
                rows.len(),
                category_count
            )));
        }
        let dim = rows[0].len();
        if dim < 1 {
            return Err(Error::InvalidArgument("feature dimension is zero".into()));
        }
        if feature_names.len() != dim {
            return Err(Error::InvalidArgument(format!(
                "{} feature names for dimension {dim}",
                feature_names.len()
            )));
        }

        let mut features = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: row.len(),
                });
            }
            for &x in row {
                if !x.is_finite() || !(0.0..=1.0).contains(&x) {
                    return Err(Error::InvalidArgument(format!(
                        "feature value {x} at row {i} outside [0, 1]"
                    )));
                }
            }
            features.extend_from_slice(row);
        }

        let mut labels = Vec::with_capacity(ranks.len());
        let mut category_indices = vec![Vec::new(); category_count];
        for (i, &rank) in ranks.iter().enumerate() {
            labels.push(OrdinalLabel::new(rank, category_count)?);
            category_indices[rank].push(i);
        }

        Ok(OrdinalDataset {
            features,
            dim,
            labels,
            category_count,
            feature_names,
            provenance,
            category_indices,
        })
    }

    /// Number of rows `N`.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Feature dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of categories `C`.
    pub fn category_count(&self) -> usize {
        self.category_count
    }

    /// The `i`-th feature row.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    /// All labels in row order.
    pub fn labels(&self) -> &[OrdinalLabel] {
        &self.labels
    }

    /// Label of row `i`.
    pub fn label(&self, i: usize) -> OrdinalLabel {
        self.labels[i]
    }

    /// Row indices belonging to the given category rank.
    pub fn indices_of(&self, rank: usize) -> &[usize] {
        &self.category_indices[rank]
    }

    /// Column names of the encoded feature matrix.
    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Where this dataset came from (file path, generator tag, ...).
    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// New dataset containing the given rows, in the given order.
    pub fn subset(&self, indices: &[usize], provenance: String) -> Result<Self> {
        let rows = indices.iter().map(|&i| self.row(i).to_vec()).collect();
        let ranks = indices.iter().map(|&i| self.labels[i].rank()).collect();
        OrdinalDataset::from_rows(
            rows,
            ranks,
            self.category_count,
            self.feature_names.clone(),
            provenance,
        )
    }

    /// Canonical encoded form: a comma-separated file with a header, one
    /// full-precision feature column per dimension, and the label rank last.
    pub fn to_encoded_csv(&self) -> String {
        let mut out = String::new();
        for name in &self.feature_names {
            let _ = write!(out, "{name},");
        }
        out.push_str("label\n");
        for i in 0..self.len() {
            for x in self.row(i) {
                let _ = write!(out, "{x},");
            }
            let _ = writeln!(out, "{}", self.labels[i].rank());
        }
        out
    }

    /// Write the canonical encoded form to a file.
    pub fn write_encoded_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_encoded_csv())?;
        Ok(())
    }

    /// Load a dataset previously written by [`Self::write_encoded_csv`].
    ///
    /// Feature values round-trip bitwise: the writer prints the shortest
    /// decimal that parses back to the same `f64`.
    pub fn read_encoded_csv(path: &Path, category_count: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let parse_err = |message: String| Error::Parse {
            path: path.display().to_string(),
            message,
        };
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| parse_err("empty file".into()))?;
        let mut names: Vec<String> = header.split(',').map(str::to_string).collect();
        if names.pop().as_deref() != Some("label") {
            return Err(parse_err("last header column must be \"label\"".into()));
        }
        let mut rows = Vec::new();
        let mut ranks = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != names.len() + 1 {
                return Err(parse_err(format!(
                    "row {}: expected {} cells, found {}",
                    lineno + 1,
                    names.len() + 1,
                    cells.len()
                )));
            }
            let mut row = Vec::with_capacity(names.len());
            for cell in &cells[..names.len()] {
                row.push(cell.parse::<f64>().map_err(|e| {
                    parse_err(format!("row {}: bad float {cell:?}: {e}", lineno + 1))
                })?);
            }
            rows.push(row);
            ranks.push(cells[names.len()].parse::<usize>().map_err(|e| {
                parse_err(format!("row {}: bad label: {e}", lineno + 1))
            })?);
        }
        OrdinalDataset::from_rows(
            rows,
            ranks,
            category_count,
            names,
            path.display().to_string(),
        )
    }
}

/// Row-index partition produced by [`split_indices`]. Each list is sorted
/// ascending; together they cover `0..N` exactly once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified three-way split of row indices.
///
/// Per category: `test` takes `round(n * test_fraction)` rows, `val` takes
/// `round(rest * val_fraction_of_train)` of the remainder, `train` the rest,
/// with every part clamped to at least one row. Shuffling is driven entirely
/// by the seed, so the partition is reproducible.
pub fn split_indices(
    dataset: &OrdinalDataset,
    test_fraction: f64,
    val_fraction_of_train: f64,
    seed: u64,
) -> Result<SplitIndices> {
    for (name, f) in [
        ("test_fraction", test_fraction),
        ("val_fraction_of_train", val_fraction_of_train),
    ] {
        if !(f.is_finite() && 0.0 < f && f < 1.0) {
            return Err(Error::Config {
                field: name.into(),
                message: format!("must lie strictly between 0 and 1, got {f}"),
            });
        }
    }

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = SplitIndices {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
    };
    for rank in 0..dataset.category_count() {
        let pool = dataset.indices_of(rank);
        let n = pool.len();
        if n < 3 {
            return Err(Error::InsufficientSamples {
                rank,
                found: n,
                needed: 3,
            });
        }
        let mut shuffled = pool.to_vec();
        shuffled.shuffle(&mut rng);

        let n_test = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 2);
        let rest = n - n_test;
        let n_val = ((rest as f64 * val_fraction_of_train).round() as usize).clamp(1, rest - 1);

        out.test.extend_from_slice(&shuffled[..n_test]);
        out.val.extend_from_slice(&shuffled[n_test..n_test + n_val]);
        out.train.extend_from_slice(&shuffled[n_test + n_val..]);
    }
    out.train.sort_unstable();
    out.val.sort_unstable();
    out.test.sort_unstable();
    Ok(out)
}

/// Stratified split into `(train, val, test)` datasets.
///
/// `test_fraction` is taken from the whole set, then
/// `val_fraction_of_train` from what remains.
pub fn split(
    dataset: &OrdinalDataset,
    test_fraction: f64,
    val_fraction_of_train: f64,
    seed: u64,
) -> Result<(OrdinalDataset, OrdinalDataset, OrdinalDataset)> {
    let idx = split_indices(dataset, test_fraction, val_fraction_of_train, seed)?;
    let tag = |part: &str| format!("{} [{part} split, seed {seed}]", dataset.provenance());
    Ok((
        dataset.subset(&idx.train, tag("train"))?,
        dataset.subset(&idx.val, tag("val"))?,
        dataset.subset(&idx.test, tag("test"))?,
    ))
}
