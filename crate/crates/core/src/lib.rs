//! Averaged characteristic polynomials of products of Ginibre matrices.
//!
//! For an order `r` and offsets `nu_1, ..., nu_r` the polynomials
//! `F_n(x) = sum_k C(n, k) (-x)^k / prod_j (k + nu_j)!` have real positive
//! zeros which, after `x -> n^r x`, follow the Fuss-Catalan law. This crate
//! evaluates them exactly or in extended precision ([`poly`]), gives their
//! oscillatory asymptotics ([`asymptotics`]) in the angle coordinate of
//! [`saddle`], isolates their zeros ([`zeros`]), implements the limit law
//! ([`fuss_catalan`]) and samples the matrix model ([`rmt`]). The
//! [`contour`] module checks the asymptotics against the integral
//! representation.
//!
//! ```
//! use fctk::fuss_catalan::FussCatalanDist;
//! use fctk::poly::ModelParams;
//! use fctk::zeros::{default_tol, rescaled_zero_measure};
//!
//! let d = FussCatalanDist::new(2).unwrap();
//! let zeros = rescaled_zero_measure(&ModelParams::square(2, 40).unwrap(), &default_tol()).unwrap();
//! assert!(zeros.ks_distance(|x| d.cdf(x)) < 0.1);
//! ```

pub mod asymptotics;
pub mod bigfloat;
pub mod contour;
pub mod empirical;
pub mod error;
pub mod fuss_catalan;
pub mod poly;
pub mod quadrature;
pub mod rmt;
pub mod rng;
pub mod saddle;
pub mod table;
pub mod zeros;

pub use bigfloat::BigFloatValue;
pub use error::{Error, Result};

// The guide in book/ is compiled here so its snippets run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/polynomials.md")]
    mod polynomials {}
    #[doc = include_str!("../../../book/src/coordinates.md")]
    mod coordinates {}
    #[doc = include_str!("../../../book/src/asymptotics.md")]
    mod asymptotics {}
    #[doc = include_str!("../../../book/src/fuss_catalan.md")]
    mod fuss_catalan {}
    #[doc = include_str!("../../../book/src/zeros.md")]
    mod zeros {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
