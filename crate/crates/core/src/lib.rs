#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cohomology;
pub mod error;
pub mod geodesics;
pub mod magnetics;
pub mod quad;
pub mod spectrum;
pub mod traces;
pub mod verify;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/spectrum.md")]
    mod spectrum {}
    #[doc = include_str!("../../../book/src/traces.md")]
    mod traces {}
    #[doc = include_str!("../../../book/src/geodesics.md")]
    mod geodesics {}
    #[doc = include_str!("../../../book/src/magnetics.md")]
    mod magnetics {}
    #[doc = include_str!("../../../book/src/cohomology.md")]
    mod cohomology {}
    #[doc = include_str!("../../../book/src/verify.md")]
    mod verify {}
}
