//! Truncated hypercyclic-algebra generators for weighted backward shifts.
//!
//! The crate builds finite truncations of generators whose algebras consist of
//! hypercyclic vectors for a weighted backward shift `B_w` on concrete Fréchet
//! sequence algebras, under either the coordinatewise or the Cauchy product,
//! and re-checks every finite inequality the constructions rely on.
//!
//! Layout, bottom-up:
//! - [`wide`], [`seq`], [`weight`]: scalars, finite sequences, products and shifts.
//! - [`spaces`]: the seminorm families.
//! - [`criteria`]: finite-horizon witnesses for the hypotheses on `w` and the basis.
//! - [`schedule`], [`coord`], [`cauchy`]: the two constructions.
//! - [`element`], [`verify`], [`bundle`]: algebra elements, orbit reports and serialized runs.

pub mod bundle;
pub mod cauchy;
pub mod coord;
pub mod criteria;
pub mod element;
pub mod error;
pub mod schedule;
pub mod seq;
pub mod spaces;
pub mod verify;
pub mod weight;
pub mod wide;

pub use bundle::Bundle;
pub use element::AlgebraElement;
pub use error::{Error, Result};
pub use seq::FiniteSeq;
pub use spaces::{Product, SpaceId, SpaceSpec};
pub use weight::WeightSpec;
pub use wide::{LogMag, WideComplex};

/// Global cap on search budgets, read from `HYPERFORGE_BUDGET` when set.
pub fn budget_cap() -> Option<u64> {
    std::env::var("HYPERFORGE_BUDGET").ok()?.trim().parse().ok()
}

/// `requested` limited by [`budget_cap`].
pub fn capped(requested: u64) -> u64 {
    budget_cap().map_or(requested, |c| requested.min(c))
}
