//! De-anonymization toolkit for coordinated review fraud.
//!
//! The pipeline, end to end: load a review corpus ([`corpus`]), build
//! co-activity graphs over reviewer accounts ([`graph`]), split each
//! product's graph into dense components that look like single-operator
//! account pools ([`mcdense`], with [`dsg`] as a greedy baseline), learn the
//! writing style of known workers from their review instances ([`stylo`]),
//! attribute detected components to those workers ([`attribute`]), expand
//! known account sets over the union graph with random-walk embeddings
//! ([`embed`]), and score everything against ground truth ([`metrics`]).
//! [`synth`] generates seeded scenarios with known ground truth so the whole
//! chain can be validated quantitatively.

pub mod attribute;
pub mod classify;
pub mod embed;
pub mod corpus;
pub mod dsg;
pub mod graph;
pub mod mcdense;
pub mod stylo;

use thiserror::Error;

/// Exact ratio used for densities and coverage scores. `u128` keeps
/// cross-multiplied comparisons exact for graphs far beyond desk scale.
pub type Rational = num_rational::Ratio<u128>;

/// `n / d`, with the convention that an empty denominator means zero.
pub fn ratio(n: u128, d: u128) -> Rational {
    if d == 0 {
        Rational::from_integer(0)
    } else {
        Rational::new(n, d)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: duplicate review_id {review_id:?}")]
    DuplicateReviewId { line: usize, review_id: String },

    #[error("conflicting attribution for account {account_id:?}: {existing:?} vs {incoming:?}")]
    ConflictingAttribution {
        account_id: String,
        existing: String,
        incoming: String,
    },

    #[error("unknown product {0:?}")]
    UnknownProduct(String),

    #[error("product {0:?} has reviews without snapshot ids; longitudinal ops need snapshots, use single-snapshot mode")]
    MissingSnapshots(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
