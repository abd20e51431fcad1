//! Curvature, first integrals and geodesic flows of Finsler metrics.
//!
//! Metrics are kernels `F(x, y)` built from formulas or from the built-in
//! families in [`metrics`]. Derivatives come from truncated Taylor jets
//! ([`jets`]); [`curvature`] and [`integrals`] evaluate tensors and
//! candidate first integrals at a point, and [`flow`] integrates geodesics
//! and produces theorem verdicts over sampled regions.
//!
//! The guide in `book/` walks through each module with runnable examples.

pub mod curvature;
pub mod error;
pub mod flow;
pub mod integrals;
pub mod jets;
pub mod linalg;
pub mod metrics;
pub mod sampling;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/jets.md")]
    mod jets {}
    #[doc = include_str!("../../../book/src/curvature.md")]
    mod curvature {}
    #[doc = include_str!("../../../book/src/integrals.md")]
    mod integrals {}
    #[doc = include_str!("../../../book/src/flow.md")]
    mod flow {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
