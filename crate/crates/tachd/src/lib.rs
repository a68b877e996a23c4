//! Hyperdimensional computing for heavy-drinking detection from smartphone
//! accelerometer traces.

pub mod config;
pub mod dataset;
pub mod encoding;
pub mod error;
pub mod features;
pub mod hv;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};

// The guide's code fences double as doctests: each chapter rides along as a
// doc comment on an empty module, so `cargo test --doc` compiles and runs
// every snippet and the book can't drift from the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/hyperspace.md")]
    mod hyperspace {}
    #[doc = include_str!("../../../book/src/encodings.md")]
    mod encodings {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/features.md")]
    mod features {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
