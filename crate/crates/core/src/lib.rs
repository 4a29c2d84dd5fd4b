//! Query-performance prediction from optimizer plan cost.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod plan;
pub mod regress;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/plans.md")]
    mod plans {}
    #[doc = include_str!("../../../book/src/regressors.md")]
    mod regressors {}
    #[doc = include_str!("../../../book/src/operator_level.md")]
    mod operator_level {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/corpus.md")]
    mod corpus {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
