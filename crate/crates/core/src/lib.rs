//! Exact Bernoulli cylinder measures, certified concentration-bound
//! calculators, finite-depth evaluation of frequency-deviation and
//! checkpoint test families, and reproducible convergence-rate experiments
//! for the law of large numbers.
//!
//! The crate is organized around a few layers:
//!
//! - [`prob`]: finite probability spaces (exact rationals or computable
//!   reals), words, prefixes with incremental counters, prefix-free
//!   families, entropy, and the symbol-merge reduction.
//! - [`bounds`] / [`special`]: Chernoff, Hoeffding, geometric-tail and
//!   incomplete-gamma certificates, all rounded outward.
//! - [`testsets`]: exact measures of deviation sets, certified enclosures
//!   of the truncated frequency test family, and exact checkpoint joint
//!   probabilities by dynamic programming.
//! - [`witness`]: finite-depth witness scans (symbol frequencies, random
//!   variables, entropy rates) and the convergence-exponent dichotomy
//!   experiment.
//! - [`speedlimit`] / [`slln`]: checkpoint experiments at lengths `4^n`
//!   with bands `2^n`, for symbol counts and for bounded discrete i.i.d.
//!   variables.
//! - [`seqio`]: a documented counter-based generator and sequence file I/O.
//!
//! Everything seeded is deterministic: per-trial seeds are derived from
//! `(seed, trial index)`, so results are identical across worker counts.

pub mod bounds;
pub mod compreal;
pub mod numeric;
pub mod prob;
pub mod special;

pub use bounds::{BoundCertificate, Derivation};
pub use compreal::CompReal;
pub use prob::{
    Alphabet, FiniteProbabilitySpace, PrefixFreeFamily, RealRandomVariable, SequencePrefix,
    Symbol, Word,
};
pub mod testsets;
pub mod seqio;
pub mod stats;
pub mod witness;
pub mod slln;
pub mod speedlimit;
