// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandwidth;
pub mod error;
pub mod estimators;
mod hull;
pub mod kernels;
pub mod mle;
pub mod quadrature;
pub mod sim;
pub mod smoothed;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/mle.md")]
    mod mle {}
    #[doc = include_str!("../../../book/src/smoothed.md")]
    mod smoothed {}
    #[doc = include_str!("../../../book/src/msle.md")]
    mod msle {}
    #[doc = include_str!("../../../book/src/smle.md")]
    mod smle {}
    #[doc = include_str!("../../../book/src/bandwidth.md")]
    mod bandwidth {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
