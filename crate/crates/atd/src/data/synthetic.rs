//! Synthetic ordinal datasets for tests and desk-scale experiments.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::OrdinalDataset;
use crate::error::{Error, Result};
use crate::targets::MIN_CATEGORIES;

/// Generate a separable ordinal dataset.
///
/// Class centers sit on a quarter-circle arc in the first two feature
/// dimensions, ordered by rank, with adjacent centers `class_separation`
/// apart; an arc rather than a line keeps the class *directions* distinct,
/// which the cosine-based evaluation requires. Samples add isotropic Gaussian
/// noise with standard deviation `noise_sigma`, and every feature column is
/// rescaled to `[0, 1]`. With `noise_sigma = 0` all samples of a class are
/// identical; with `class_separation` well above `noise_sigma` the classes
/// are cleanly separable.
///
/// The same seed always produces the same dataset.
pub fn make_synthetic_ordinal(
    categories: usize,
    samples_per_class: usize,
    dim: usize,
    class_separation: f64,
    noise_sigma: f64,
    seed: u64,
) -> Result<OrdinalDataset> {
    if categories < MIN_CATEGORIES {
        return Err(Error::UnsupportedCategoryCount { found: categories });
    }
    if dim < 2 {
        return Err(Error::InvalidArgument(format!(
            "dimension must be >= 2, got {dim}"
        )));
    }
    if samples_per_class < 3 {
        return Err(Error::InvalidArgument(format!(
            "samples_per_class must be >= 3, got {samples_per_class}"
        )));
    }
    if !(class_separation.is_finite() && class_separation > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "class_separation must be positive, got {class_separation}"
        )));
    }
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise_sigma must be non-negative, got {noise_sigma}"
        )));
    }

    // Radius such that adjacent centers are exactly class_separation apart:
    // chord = 2 R sin(step / 2).
    let step = std::f64::consts::FRAC_PI_2 / (categories - 1) as f64;
    let radius = class_separation / (2.0 * (step / 2.0).sin());

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let n = categories * samples_per_class;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut ranks = Vec::with_capacity(n);
    for rank in 0..categories {
        let angle = step * rank as f64;
        let center = (radius * angle.cos(), radius * angle.sin());
        for _ in 0..samples_per_class {
            let mut row = vec![0.0; dim];
            row[0] = center.0;
            row[1] = center.1;
            if noise_sigma > 0.0 {
                for x in row.iter_mut() {
                    let z: f64 = normal.sample(&mut rng);
                    *x += noise_sigma * z;
                }
            }
            rows.push(row);
            ranks.push(rank);
        }
    }

    // Per-column rescale to [0, 1]; order within a column is preserved.
    for col in 0..dim {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for row in &rows {
            lo = lo.min(row[col]);
            hi = hi.max(row[col]);
        }
        let range = hi - lo;
        for row in &mut rows {
            row[col] = if range > 0.0 {
                ((row[col] - lo) / range).clamp(0.0, 1.0)
            } else {
                0.0
            };
        }
    }

    let feature_names = (0..dim).map(|i| format!("f{i}")).collect();
    OrdinalDataset::from_rows(
        rows,
        ranks,
        categories,
        feature_names,
        format!(
            "synthetic(C={categories}, n={samples_per_class}, d={dim}, \
             sep={class_separation}, sigma={noise_sigma}, seed={seed})"
        ),
    )
}
