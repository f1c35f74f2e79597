//! Confidence polytopes for quantum state tomography.
//!
//! Measurement counts from an informationally complete POVM are turned
//! into a polytope of Bloch-space half-spaces that contains the unknown
//! state with a guaranteed confidence level. On top of that region the
//! crate offers membership tests, uniform sampling, bounding boxes and
//! Chebyshev balls, confidence intervals for figures of merit such as
//! fidelity and negativity, measurement-data simulation, and a
//! Bayesian-credibility comparison.
//!
//! ```
//! use tomopoly::polytope::{build_polytope, contains, EpsilonSplit};
//! use tomopoly::simulation::{sample_counts, standard_povm, PovmKind, RngSeed};
//! use tomopoly::quantum::DensityMatrix;
//!
//! let povm = standard_povm(&PovmKind::SicQubit)?;
//! let truth = DensityMatrix::maximally_mixed(2)?;
//! let counts = sample_counts(&truth, &povm, 5000, RngSeed(7))?;
//! let poly = build_polytope(&povm, &counts, 0.001, &EpsilonSplit::Uniform)?;
//! assert!(contains(&poly, &truth)?);
//! # Ok::<(), tomopoly::Error>(())
//! ```

pub mod clopper;
pub mod credibility;
pub mod error;
pub mod fom;
pub mod geometry;
pub mod polytope;
pub mod quantum;
pub mod simulation;

pub use error::{Error, Result};

/// Identifier of the deterministic RNG backing all sampling, pinned in
/// every artifact that records a seed.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha)";
