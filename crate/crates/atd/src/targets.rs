//! Ordinal target angles and triplet templates.
//!
//! With `C` ordered categories, adjacent categories are placed a fixed angle
//! apart so that the normalized angular distance between ranks `r_a` and `r_b`
//! is `|r_a - r_b| / (C - 1)`: same category 0, extremes 1 (opposite
//! directions). Supervision comes from `2C - 1` triplet templates:
//!
//! * `C` inner templates `(r, r, r)` with targets `(0, 0)` — samples of one
//!   category collapse together;
//! * `C - 2` boundary templates `(0, r, C-1)` for `1 <= r <= C-2`, pinning
//!   each middle category between the two extremes;
//! * one full-rotation template `(0, C-1, 0)` with targets `(1, 1)`.
//!
//! [`sample_triplet_batch`] turns templates plus a dataset into concrete
//! training triples with their target distance pairs.

use rand::Rng;

use crate::data::OrdinalDataset;
use crate::error::{Error, Result};

/// Minimum number of categories; two categories is plain binary
/// classification and out of scope.
pub const MIN_CATEGORIES: usize = 3;

/// A category rank tied to its category count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OrdinalLabel {
    rank: usize,
    category_count: usize,
}

impl OrdinalLabel {
    /// Build a label, enforcing `C >= 3` and `rank < C`.
    pub fn new(rank: usize, category_count: usize) -> Result<Self> {
        if category_count < MIN_CATEGORIES {
            return Err(Error::UnsupportedCategoryCount {
                found: category_count,
            });
        }
        if rank >= category_count {
            return Err(Error::RankOutOfRange {
                rank,
                categories: category_count,
            });
        }
        Ok(OrdinalLabel {
            rank,
            category_count,
        })
    }

    /// Position in the category order, `0 <= rank < C`.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Total number of categories `C`.
    pub fn category_count(&self) -> usize {
        self.category_count
    }
}

/// A triple of category ranks with precomputed target angular distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripletTemplate {
    /// Category ranks `(r_i, r_j, r_k)` for the three triplet slots.
    pub ranks: (usize, usize, usize),
    /// Target normalized angles `(y_ij, y_jk)`, each in `[0, 1]`.
    pub targets: (f64, f64),
}

impl TripletTemplate {
    /// True for the `(r, r, r)` templates whose targets are `(0, 0)`.
    pub fn is_inner(&self) -> bool {
        self.ranks.0 == self.ranks.1 && self.ranks.1 == self.ranks.2
    }

    /// The template read in reverse order, `(r_k, r_j, r_i)` with swapped
    /// targets.
    pub fn reversed(&self) -> TripletTemplate {
        TripletTemplate {
            ranks: (self.ranks.2, self.ranks.1, self.ranks.0),
            targets: (self.targets.1, self.targets.0),
        }
    }
}

/// Target angular distance between two category ranks: `|r_a - r_b| / (C - 1)`.
pub fn target_distance(rank_a: usize, rank_b: usize, categories: usize) -> Result<f64> {
    if categories < MIN_CATEGORIES {
        return Err(Error::UnsupportedCategoryCount { found: categories });
    }
    for rank in [rank_a, rank_b] {
        if rank >= categories {
            return Err(Error::RankOutOfRange { rank, categories });
        }
    }
    Ok(rank_a.abs_diff(rank_b) as f64 / (categories - 1) as f64)
}

/// Enumerate the `2C - 1` triplet templates for `C` categories.
///
/// Order: the `C` inner templates by rank, then the `C - 2` boundary
/// templates `(0, r, C-1)` by middle rank, then the full rotation
/// `(0, C-1, 0)`.
pub fn triplet_templates(categories: usize) -> Result<Vec<TripletTemplate>> {
    if categories < MIN_CATEGORIES {
        return Err(Error::UnsupportedCategoryCount { found: categories });
    }
    let top = categories - 1;
    let mut templates = Vec::with_capacity(2 * categories - 1);
    for r in 0..categories {
        templates.push(TripletTemplate {
            ranks: (r, r, r),
            targets: (0.0, 0.0),
        });
    }
    for r in 1..top {
        templates.push(TripletTemplate {
            ranks: (0, r, top),
            targets: (
                target_distance(0, r, categories)?,
                target_distance(r, top, categories)?,
            ),
        });
    }
    templates.push(TripletTemplate {
        ranks: (0, top, 0),
        targets: (1.0, 1.0),
    });
    debug_assert_eq!(templates.len(), 2 * categories - 1);
    Ok(templates)
}

/// A batch of training triples drawn from a dataset.
///
/// Rows are referenced by index into the source dataset; `left[t]`,
/// `middle[t]`, `right[t]` are the three inputs of triple `t` and
/// `targets[t]` its two target angular distances (left-middle, middle-right).
#[derive(Debug, Clone, PartialEq)]
pub struct TripletBatch {
    pub left: Vec<usize>,
    pub middle: Vec<usize>,
    pub right: Vec<usize>,
    pub targets: Vec<(f64, f64)>,
}

impl TripletBatch {
    /// Number of triples in the batch.
    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    /// Target pair `(y_ij, y_jk)` of triple `t`.
    pub fn target(&self, t: usize) -> (f64, f64) {
        self.targets[t]
    }

    /// The three feature rows of triple `t`.
    pub fn rows<'a>(
        &self,
        dataset: &'a OrdinalDataset,
        t: usize,
    ) -> (&'a [f64], &'a [f64], &'a [f64]) {
        (
            dataset.row(self.left[t]),
            dataset.row(self.middle[t]),
            dataset.row(self.right[t]),
        )
    }
}

/// Draw a batch of `batch_size` triples.
///
/// Each triple picks a template uniformly at random, then picks instance
/// indices uniformly (with replacement) within the template's categories.
/// With replacement, categories with fewer than three samples can still
/// populate inner triples; the slots of a triple are therefore not guaranteed
/// distinct. All randomness flows through the injected `rng`, so a fixed seed
/// reproduces the batch bitwise.
pub fn sample_triplet_batch(
    dataset: &OrdinalDataset,
    templates: &[TripletTemplate],
    batch_size: usize,
    rng: &mut impl Rng,
) -> Result<TripletBatch> {
    if batch_size == 0 {
        return Err(Error::InvalidArgument("batch_size must be > 0".into()));
    }
    if templates.is_empty() {
        return Err(Error::InvalidArgument("template list is empty".into()));
    }
    for template in templates {
        for rank in [template.ranks.0, template.ranks.1, template.ranks.2] {
            if rank >= dataset.category_count() {
                return Err(Error::RankOutOfRange {
                    rank,
                    categories: dataset.category_count(),
                });
            }
            if dataset.indices_of(rank).is_empty() {
                return Err(Error::MissingCategory { rank });
            }
        }
    }

    let mut batch = TripletBatch {
        left: Vec::with_capacity(batch_size),
        middle: Vec::with_capacity(batch_size),
        right: Vec::with_capacity(batch_size),
        targets: Vec::with_capacity(batch_size),
    };
    for _ in 0..batch_size {
        let template = &templates[rng.random_range(0..templates.len())];
        let pick = |rank: usize, rng: &mut dyn rand::RngCore| {
            let pool = dataset.indices_of(rank);
            pool[rng.random_range(0..pool.len())]
        };
        batch.left.push(pick(template.ranks.0, rng));
        batch.middle.push(pick(template.ranks.1, rng));
        batch.right.push(pick(template.ranks.2, rng));
        batch.targets.push(template.targets);
    }
    Ok(batch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::OrdinalDataset;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn label_enforces_bounds() {
        assert!(OrdinalLabel::new(0, 3).is_ok());
        assert_eq!(
            OrdinalLabel::new(0, 2).unwrap_err().category(),
            "unsupported-category-count"
        );
        assert_eq!(
            OrdinalLabel::new(3, 3).unwrap_err().category(),
            "rank-out-of-range"
        );
    }

    #[test]
    fn target_distance_examples() {
        // Five categories space the extremes a half and a full rotation apart.
        assert_eq!(target_distance(0, 2, 5).unwrap(), 0.5);
        assert_eq!(target_distance(0, 4, 5).unwrap(), 1.0);
        for c in 3..10 {
            for r in 0..c {
                assert_eq!(target_distance(r, r, c).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn target_distance_rejects_bad_inputs() {
        assert_eq!(
            target_distance(0, 1, 2).unwrap_err().category(),
            "unsupported-category-count"
        );
        assert_eq!(
            target_distance(5, 0, 5).unwrap_err().category(),
            "rank-out-of-range"
        );
    }

    #[test]
    fn five_categories_give_nine_templates() {
        let templates = triplet_templates(5).unwrap();
        assert_eq!(templates.len(), 9);
        // Adjacent-to-lower-bound template carries 45 and 135 degrees.
        let t = templates
            .iter()
            .find(|t| t.ranks == (0, 1, 4))
            .expect("boundary template (0, 1, 4)");
        assert_eq!(t.targets, (0.25, 0.75));
    }

    /// Independent enumeration oracle: rebuild the template set from the
    /// stated rules, without reusing `triplet_templates`.
    fn template_oracle(c: usize) -> Vec<((usize, usize, usize), (f64, f64))> {
        let mut expected = Vec::new();
        for r in 0..c {
            expected.push(((r, r, r), (0.0, 0.0)));
        }
        for r in 1..c - 1 {
            let y_ij = r as f64 / (c - 1) as f64;
            let y_jk = (c - 1 - r) as f64 / (c - 1) as f64;
            expected.push(((0, r, c - 1), (y_ij, y_jk)));
        }
        expected.push(((0, c - 1, 0), (1.0, 1.0)));
        expected
    }

    #[test]
    fn three_categories_match_the_enumeration_oracle() {
        let templates = triplet_templates(3).unwrap();
        assert_eq!(templates.len(), 5);
        let expected = template_oracle(3);
        assert_eq!(templates.len(), expected.len());
        for (t, (ranks, targets)) in templates.iter().zip(&expected) {
            assert_eq!(t.ranks, *ranks);
            assert_eq!(t.targets, *targets);
        }
        // Boundary set for C=3: (0,1,2) at (0.5, 0.5) and (0,2,0) at (1,1).
        assert_eq!(templates[3].ranks, (0, 1, 2));
        assert_eq!(templates[3].targets, (0.5, 0.5));
        assert_eq!(templates[4].ranks, (0, 2, 0));
        assert_eq!(templates[4].targets, (1.0, 1.0));
    }

    #[test]
    fn template_count_is_2c_minus_1_for_c_in_3_to_20() {
        for c in 3..=20 {
            let templates = triplet_templates(c).unwrap();
            assert_eq!(templates.len(), 2 * c - 1, "C={c}");
            assert_eq!(template_oracle(c).len(), 2 * c - 1, "oracle C={c}");
        }
    }

    #[test]
    fn every_target_recomputes_from_its_ranks() {
        for c in 3..=20 {
            for t in triplet_templates(c).unwrap() {
                let (ri, rj, rk) = t.ranks;
                assert_eq!(t.targets.0, target_distance(ri, rj, c).unwrap());
                assert_eq!(t.targets.1, target_distance(rj, rk, c).unwrap());
            }
        }
    }

    #[test]
    fn reversal_swaps_targets() {
        for c in 3..=12 {
            for t in triplet_templates(c).unwrap() {
                let rev = t.reversed();
                assert_eq!(rev.targets.0, t.targets.1);
                assert_eq!(rev.targets.1, t.targets.0);
                let (ri, rj, rk) = rev.ranks;
                assert_eq!(rev.targets.0, target_distance(ri, rj, c).unwrap());
                assert_eq!(rev.targets.1, target_distance(rj, rk, c).unwrap());
            }
        }
    }

    #[test]
    fn inner_templates_always_target_zero() {
        for c in 3..=20 {
            for t in triplet_templates(c).unwrap() {
                if t.is_inner() {
                    assert_eq!(t.targets, (0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn unsupported_category_count_is_rejected() {
        for c in 0..3 {
            assert_eq!(
                triplet_templates(c).unwrap_err().category(),
                "unsupported-category-count"
            );
        }
    }

    fn tiny_dataset() -> OrdinalDataset {
        // One sample per category, C = 3, 2-d features.
        OrdinalDataset::from_rows(
            vec![vec![0.0, 0.1], vec![0.5, 0.5], vec![1.0, 0.9]],
            vec![0, 1, 2],
            3,
            vec!["f0".into(), "f1".into()],
            "test".into(),
        )
        .unwrap()
    }

    #[test]
    fn zero_batch_size_is_an_error() {
        let ds = tiny_dataset();
        let templates = triplet_templates(3).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let err = sample_triplet_batch(&ds, &templates, 0, &mut rng).unwrap_err();
        assert_eq!(err.category(), "invalid-argument");
    }

    #[test]
    fn single_sample_categories_yield_template_targets_only() {
        let ds = tiny_dataset();
        let templates = triplet_templates(3).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let batch = sample_triplet_batch(&ds, &templates, 10, &mut rng).unwrap();
        assert_eq!(batch.len(), 10);
        for t in 0..batch.len() {
            let pair = batch.target(t);
            assert!(
                [(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)].contains(&pair),
                "unexpected target pair {pair:?}"
            );
        }
    }

    #[test]
    fn same_seed_reproduces_the_batch_bitwise() {
        let ds = tiny_dataset();
        let templates = triplet_templates(3).unwrap();
        let mut rng_a = ChaCha12Rng::seed_from_u64(9);
        let mut rng_b = ChaCha12Rng::seed_from_u64(9);
        let a = sample_triplet_batch(&ds, &templates, 64, &mut rng_a).unwrap();
        let b = sample_triplet_batch(&ds, &templates, 64, &mut rng_b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn missing_category_is_reported_by_rank() {
        // Dataset with C = 4 but no samples of rank 3.
        let ds = OrdinalDataset::from_rows(
            vec![vec![0.0, 0.0], vec![0.4, 0.4], vec![0.8, 0.8], vec![0.9, 0.2]],
            vec![0, 1, 2, 2],
            4,
            vec!["f0".into(), "f1".into()],
            "test".into(),
        )
        .unwrap();
        let templates = triplet_templates(4).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        match sample_triplet_batch(&ds, &templates, 4, &mut rng) {
            Err(Error::MissingCategory { rank }) => assert_eq!(rank, 3),
            other => panic!("expected missing-category error, got {other:?}"),
        }
    }
}
