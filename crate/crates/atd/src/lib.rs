//! Angular triangle distance and ordinal triplet embeddings.
//!
//! Ordinal data carries an order between its categories but no known
//! distances: symptom severity, production quality grades, age groups. This
//! crate learns an embedding that makes those distances concrete: categories
//! are laid out by *angle*, with adjacent ranks a fixed angle apart and the
//! extreme ranks pointing in opposite directions, and a small network is
//! trained so that the angular distance between two embedded samples matches
//! the target implied by their ranks.
//!
//! The pieces, bottom to top:
//!
//! * [`geometry`] — cosine similarity, angular distance (a true metric on
//!   directions, valued in `[0, 1]`), the angular triangle distance over
//!   ordered triples (valued in `[0, 2]`), and a sampled verifier for the
//!   four metric axioms.
//! * [`targets`] — the `2C - 1` triplet templates that supervise training
//!   and the seeded batch sampler.
//! * [`net`] — a dense relu network with an L2-normalized output, exact
//!   analytic gradients, and Adam.
//! * [`train`] — the triplet training loop with validation-based model
//!   selection.
//! * [`eval`] — leave-one-out K-NN accuracy, train/test K-NN classification
//!   error, category distance matrices, and an ordinal monotonicity score.
//! * [`data`] — schema-driven CSV loading, stratified splits, a synthetic
//!   generator, and rule-generated benchmark datasets.
//! * [`artifact`] — versioned, checksummed model files.
//!
//! Everything is deterministic under a seed: all randomness flows through
//! seeded ChaCha generators, floats serialize losslessly, and repeated runs
//! produce byte-identical outputs.
//!
//! ```
//! use atd::geometry::angular_distance;
//!
//! // Orthogonal directions sit half a rotation apart.
//! let d = angular_distance(&[1.0, 0.0], &[0.0, 1.0])?;
//! assert!((d - 0.5).abs() < 1e-12);
//! # Ok::<(), atd::Error>(())
//! ```

pub mod artifact;
pub mod data;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod net;
pub mod targets;
pub mod train;

pub use error::{Error, Result};

// The guide's code blocks double as tests: each chapter is compiled and run
// by `cargo test --doc`.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/targets.md")]
    mod targets {}
    #[doc = include_str!("../../../book/src/network.md")]
    mod network {}
    #[doc = include_str!("../../../book/src/training.md")]
    mod training {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
