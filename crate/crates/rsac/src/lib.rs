//! Counting and analytic tools for products of two proportional primes.
//!
//! An integer `pq` with primes `p < q <= r*p`, for a fixed rational bound
//! `r > 1`, is the kind of semiprime used in RSA moduli. This crate counts
//! them exactly from sieve tables, evaluates the variant of the logarithmic
//! integral that predicts those counts together with its exact expansion
//! coefficients, and measures how evenly the counts spread over residue
//! classes.
//!
//! ```
//! use rsac::counting::{count_rsa_exact, RatioParam};
//! use rsac::sieve::build_tables;
//!
//! let tables = build_tables(1000, &[4])?;
//! let r = RatioParam::new(2, 1)?;
//! // 6, 15, 35, 77, 91: the five products pq <= 100 with p < q <= 2p
//! assert_eq!(count_rsa_exact(&tables, 100, r)?, 5);
//! # Ok::<(), rsac::Error>(())
//! ```
//!
//! The five public modules mirror the pipeline: [`sieve`] builds immutable
//! prime tables, [`counting`] produces exact counts by two independent
//! routes, [`analytic`] evaluates the integrals and identity checks,
//! [`coefficients`] holds the exact rational expansion machinery, and
//! [`bias`] measures residue-class preferences. The `rsac` binary exposes
//! all of it on the command line.

pub mod analytic;
pub mod bias;
pub mod cli;
pub mod coefficients;
pub mod counting;
pub mod error;
pub mod quadrature;
pub mod sieve;

pub use error::{Error, Result};

// Run every fenced Rust block in the guide as a doc-test, so the book in
// book/ cannot drift from the library. One module per chapter keeps test
// failures attributable.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/prime-tables.md")]
    mod prime_tables {}
    #[doc = include_str!("../../../book/src/counting.md")]
    mod counting {}
    #[doc = include_str!("../../../book/src/logarithmic-integrals.md")]
    mod logarithmic_integrals {}
    #[doc = include_str!("../../../book/src/coefficients.md")]
    mod coefficients {}
    #[doc = include_str!("../../../book/src/bias.md")]
    mod bias {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
