//! Associative-memory classifier and its training rules.

pub mod memory;
pub mod train;

pub use memory::AssociativeMemory;
pub use train::{
    train, train_encoded, EncodingSource, FixedEncodings, ModelKind, TrainConfig, TrainOutcome,
};
