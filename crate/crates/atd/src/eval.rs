//! Evaluation protocols: K-NN retrieval accuracy, K-NN classification error,
//! category distance matrices, and an ordinal monotonicity score.
//!
//! All neighbor searches rank by cosine similarity, descending, with ties
//! broken by ascending sample index; the ordering is total, so results are
//! deterministic and independent of the embeddings' per-vector scale.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{dot, NORM_FLOOR};
use crate::targets::{OrdinalLabel, MIN_CATEGORIES};

fn squared_norms(embeddings: &[Vec<f64>]) -> Result<Vec<f64>> {
    let dim = embeddings
        .first()
        .ok_or_else(|| Error::InvalidArgument("embedding set is empty".into()))?
        .len();
    let mut norms = Vec::with_capacity(embeddings.len());
    for (i, z) in embeddings.iter().enumerate() {
        if z.len() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: z.len(),
            });
        }
        let n2 = dot(z, z);
        if !n2.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "embedding {i} contains non-finite entries"
            )));
        }
        if n2 < NORM_FLOOR * NORM_FLOOR {
            return Err(Error::DegenerateVector {
                norm: n2.sqrt(),
                floor: NORM_FLOOR,
            });
        }
        norms.push(n2);
    }
    Ok(norms)
}

/// Keep the `k` best candidates under (similarity desc, index asc) and
/// return them in that order.
fn top_k(mut candidates: Vec<(f64, usize)>, k: usize) -> Vec<usize> {
    let order =
        |a: &(f64, usize), b: &(f64, usize)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
    if k < candidates.len() {
        candidates.select_nth_unstable_by(k - 1, order);
        candidates.truncate(k);
    }
    candidates.sort_unstable_by(order);
    candidates.into_iter().map(|(_, i)| i).collect()
}

/// K nearest neighbors of every sample within one embedding set,
/// excluding the query itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborSet {
    k: usize,
    neighbors: Vec<Vec<usize>>,
}

impl NeighborSet {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Neighbor indices of query `i`, best first.
    pub fn of(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

/// Leave-one-out neighbor search over a single set.
///
/// Requires `1 <= k < N`. Neighbors are ordered by descending cosine
/// similarity with index ties ascending; the query never appears in its own
/// list.
pub fn nearest_neighbors(embeddings: &[Vec<f64>], k: usize) -> Result<NeighborSet> {
    let n = embeddings.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "k must satisfy 1 <= k < {n}, got {k}"
        )));
    }
    let norms = squared_norms(embeddings)?;
    let mut neighbors = Vec::with_capacity(n);
    for i in 0..n {
        let mut sims = Vec::with_capacity(n - 1);
        for j in 0..n {
            if j != i {
                let sim = dot(&embeddings[i], &embeddings[j]) / (norms[i] * norms[j]).sqrt();
                sims.push((sim, j));
            }
        }
        neighbors.push(top_k(sims, k));
    }
    Ok(NeighborSet { k, neighbors })
}

/// Leave-one-out K-NN retrieval accuracy over one embedded set.
///
/// The fraction of (query, neighbor) pairs sharing a label, out of `N * K`:
/// 1.0 means every neighbor of every sample has the sample's label.
pub fn knn_accuracy(embeddings: &[Vec<f64>], labels: &[OrdinalLabel], k: usize) -> Result<f64> {
    if embeddings.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            left: embeddings.len(),
            right: labels.len(),
        });
    }
    let neighbors = nearest_neighbors(embeddings, k)?;
    let mut hits = 0usize;
    for (i, label) in labels.iter().enumerate() {
        hits += neighbors
            .of(i)
            .iter()
            .filter(|&&j| labels[j].rank() == label.rank())
            .count();
    }
    Ok(hits as f64 / (labels.len() * k) as f64)
}

/// K-NN classification error of a test set against a training set.
///
/// Each test point takes the majority label of its `k` nearest training
/// points under cosine similarity; vote ties resolve to the smallest
/// category rank. Returns the misclassified fraction.
pub fn knn_classify_error(
    train_embeddings: &[Vec<f64>],
    train_labels: &[OrdinalLabel],
    test_embeddings: &[Vec<f64>],
    test_labels: &[OrdinalLabel],
    k: usize,
) -> Result<f64> {
    if train_embeddings.len() != train_labels.len() {
        return Err(Error::DimensionMismatch {
            left: train_embeddings.len(),
            right: train_labels.len(),
        });
    }
    if test_embeddings.len() != test_labels.len() {
        return Err(Error::DimensionMismatch {
            left: test_embeddings.len(),
            right: test_labels.len(),
        });
    }
    if train_embeddings.is_empty() || test_embeddings.is_empty() {
        return Err(Error::InvalidArgument(
            "train and test sets must be non-empty".into(),
        ));
    }
    if k == 0 || k > train_embeddings.len() {
        return Err(Error::InvalidArgument(format!(
            "k must satisfy 1 <= k <= {}, got {k}",
            train_embeddings.len()
        )));
    }
    let categories = train_labels[0].category_count();
    let train_norms = squared_norms(train_embeddings)?;
    let test_norms = squared_norms(test_embeddings)?;

    let mut errors = 0usize;
    for (t, query) in test_embeddings.iter().enumerate() {
        let sims: Vec<(f64, usize)> = train_embeddings
            .iter()
            .enumerate()
            .map(|(j, z)| (dot(query, z) / (test_norms[t] * train_norms[j]).sqrt(), j))
            .collect();
        let mut votes = vec![0usize; categories];
        for j in top_k(sims, k) {
            votes[train_labels[j].rank()] += 1;
        }
        // Vote ties resolve to the smallest rank.
        let predicted = votes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(rank, _)| rank)
            .expect("at least one category");
        if predicted != test_labels[t].rank() {
            errors += 1;
        }
    }
    Ok(errors as f64 / test_embeddings.len() as f64)
}

/// Which form of cosine distance a matrix holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CosineDistanceKind {
    /// `(1 - similarity) / 2`, valued in `[0, 1]`; the default, directly
    /// comparable with angular targets.
    HalfRescaled,
    /// `1 - similarity`, valued in `[0, 2]`.
    Raw,
}

impl CosineDistanceKind {
    fn apply(self, similarity: f64) -> f64 {
        match self {
            CosineDistanceKind::HalfRescaled => (1.0 - similarity) / 2.0,
            CosineDistanceKind::Raw => 1.0 - similarity,
        }
    }
}

/// `C x C` matrix of mean pairwise cosine distances between category latents.
///
/// Off-diagonal entries average over all cross pairs of the two categories;
/// diagonal entries average over distinct pairs within the category. The
/// matrix is symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryDistanceMatrix {
    categories: usize,
    values: Vec<f64>,
    kind: CosineDistanceKind,
}

impl CategoryDistanceMatrix {
    /// Wrap raw values (row-major `C x C`), checking shape and symmetry.
    pub fn from_values(values: Vec<f64>, kind: CosineDistanceKind) -> Result<Self> {
        let categories = (values.len() as f64).sqrt().round() as usize;
        if categories * categories != values.len() || categories < MIN_CATEGORIES {
            return Err(Error::InvalidArgument(format!(
                "need a square matrix with C >= 3, got {} values",
                values.len()
            )));
        }
        for r in 0..categories {
            for c in 0..r {
                if (values[r * categories + c] - values[c * categories + r]).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "matrix not symmetric at ({r}, {c})"
                    )));
                }
            }
        }
        Ok(CategoryDistanceMatrix {
            categories,
            values,
            kind,
        })
    }

    pub fn categories(&self) -> usize {
        self.categories
    }

    pub fn kind(&self) -> CosineDistanceKind {
        self.kind
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.categories + c]
    }

    /// CSV rendering with rank headers and full-precision values.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("category");
        for c in 0..self.categories {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
        for r in 0..self.categories {
            let _ = write!(out, "{r}");
            for c in 0..self.categories {
                let _ = write!(out, ",{}", self.get(r, c));
            }
            out.push('\n');
        }
        out
    }
}

/// Mean pairwise cosine-distance matrix between categories, in the given
/// distance form.
///
/// Every category needs at least two samples (the diagonal averages over
/// distinct pairs).
pub fn category_distance_matrix_with(
    embeddings: &[Vec<f64>],
    labels: &[OrdinalLabel],
    kind: CosineDistanceKind,
) -> Result<CategoryDistanceMatrix> {
    if embeddings.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            left: embeddings.len(),
            right: labels.len(),
        });
    }
    if labels.is_empty() {
        return Err(Error::InvalidArgument("embedding set is empty".into()));
    }
    let categories = labels[0].category_count();
    let norms = squared_norms(embeddings)?;

    let mut groups = vec![Vec::new(); categories];
    for (i, label) in labels.iter().enumerate() {
        groups[label.rank()].push(i);
    }
    for (rank, group) in groups.iter().enumerate() {
        if group.len() < 2 {
            return Err(Error::InsufficientSamples {
                rank,
                found: group.len(),
                needed: 2,
            });
        }
    }

    let distance = |i: usize, j: usize| {
        kind.apply(dot(&embeddings[i], &embeddings[j]) / (norms[i] * norms[j]).sqrt())
    };
    let mut values = vec![0.0; categories * categories];
    for r in 0..categories {
        for c in r..categories {
            let (sum, count) = if r == c {
                let group = &groups[r];
                let mut sum = 0.0;
                for (a, &i) in group.iter().enumerate() {
                    for &j in &group[a + 1..] {
                        sum += distance(i, j);
                    }
                }
                (sum, group.len() * (group.len() - 1) / 2)
            } else {
                let mut sum = 0.0;
                for &i in &groups[r] {
                    for &j in &groups[c] {
                        sum += distance(i, j);
                    }
                }
                (sum, groups[r].len() * groups[c].len())
            };
            let mean = sum / count as f64;
            values[r * categories + c] = mean;
            values[c * categories + r] = mean;
        }
    }
    CategoryDistanceMatrix::from_values(values, kind)
}

/// [`category_distance_matrix_with`] in the default half-rescaled form.
pub fn category_distance_matrix(
    embeddings: &[Vec<f64>],
    labels: &[OrdinalLabel],
) -> Result<CategoryDistanceMatrix> {
    category_distance_matrix_with(embeddings, labels, CosineDistanceKind::HalfRescaled)
}

/// Average ranks (1-based) of `values`, with exact ties sharing their
/// average rank. `keys` orders the entries; entries compare equal only when
/// their keys are identical.
fn average_ranks(keys: &[(f64, f64)]) -> Vec<f64> {
    let n = keys.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        keys[a]
            .0
            .total_cmp(&keys[b].0)
            .then(keys[a].1.total_cmp(&keys[b].1))
    });
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && keys[order[end]] == keys[order[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0; // mean of ranks start+1..=end
        for &idx in &order[start..end] {
            ranks[idx] = avg;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation between rank gap `|r - c|` and mean category
/// distance, over the strict upper triangle of the matrix.
///
/// Equal gaps carry no order constraint between themselves: entries tied on
/// gap are ordered by their distance value before ranking, so the score is
/// exactly 1.0 whenever every larger gap has strictly larger distances and
/// the matrix is otherwise free within a gap. A constant matrix has no
/// defined correlation and errors.
pub fn ordinal_monotonicity_score(matrix: &CategoryDistanceMatrix) -> Result<f64> {
    let c = matrix.categories();
    let mut gaps = Vec::new();
    let mut values = Vec::new();
    for r in 0..c {
        for s in r + 1..c {
            gaps.push((s - r) as f64);
            values.push(matrix.get(r, s));
        }
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Err(Error::UndefinedCorrelation);
    }

    // Gap ranks break gap ties by the observed distance; value ranks tie
    // only on exactly equal distances.
    let gap_keys: Vec<(f64, f64)> = gaps.iter().cloned().zip(values.iter().cloned()).collect();
    let value_keys: Vec<(f64, f64)> = values.iter().map(|&v| (v, 0.0)).collect();
    let x = average_ranks(&gap_keys);
    let y = average_ranks(&value_keys);

    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (a, b) in x.iter().zip(&y) {
        let (dx, dy) = (a - mean_x, b - mean_y);
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok(cov / (var_x * var_y).sqrt())
}
