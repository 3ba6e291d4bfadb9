//! Exact invariants of zero loci of general sections of homogeneous vector
//! bundles on products of Grassmannians and partial flag varieties.
//!
//! The crate is organised bottom-up:
//!
//! * [`combinat`]: partitions, Littlewood-Richardson coefficients, weights.
//! * [`bwb`]: ambient spaces and Bott's algorithm.
//! * [`bundlecalc`]: bundle expressions and their filtered normal forms.
//! * [`chow`]: intersection numbers and Riemann-Roch by torus localization.
//! * [`koszul`]: cohomology on zero loci with interval propagation.
//! * [`models`]: the model grammar, the embedded catalog and verification.

pub mod bundlecalc;
pub mod bwb;
pub mod chow;
pub mod combinat;
pub mod koszul;
pub mod models;
