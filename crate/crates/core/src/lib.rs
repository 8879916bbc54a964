//! Sparse moment-SOS relaxations for polynomial optimization.

pub mod certify;
pub mod error;
pub mod extract;
pub mod frontend;
pub mod polyring;
pub mod relax;
pub mod sdp;
pub mod sparsity;

pub use error::{Error, Result};
pub use polyring::{Exponent, MonomialBasis, Polynomial, Term};
pub use relax::{Model, SdpProblem, SparsePop};
pub use sparsity::SparsityPattern;

/// The guide's code listings, compiled and run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/problems.md")]
    mod problems {}
    #[doc = include_str!("../../../book/src/sparsity.md")]
    mod sparsity {}
    #[doc = include_str!("../../../book/src/relaxations.md")]
    mod relaxations {}
    #[doc = include_str!("../../../book/src/extraction.md")]
    mod extraction {}
    #[doc = include_str!("../../../book/src/certificates.md")]
    mod certificates {}
    #[doc = include_str!("../../../book/src/benchmarks.md")]
    mod benchmarks {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
