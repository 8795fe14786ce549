//! Discrete independent-source factor-graph engine.
//!
//! A bank of independent discrete sources feeds a product-space diverter
//! through fixed marginalizer tables; learnable conditional probability
//! tables hang off the diverter toward the visible variables and an
//! optional class label. The crate provides exact belief-propagation
//! inference on this tree (generation, encoding, completion, correction,
//! classification, prototypes), localized EM learning of the tables and
//! priors, MNIST-style IDX ingestion, model persistence and PGM rendering.
//!
//! The `dica` binary exposes the same functionality as a command line; see
//! the crate README for the workflows.

pub mod cli;
pub mod data;
pub mod error;
pub mod graph;
pub mod learn;
pub mod message;

pub use error::{DicaError, Result};
pub use graph::{
    marginalizer, mean_image, product_coords, product_index, Classification, CompletedVar,
    Completion, DicaModel, Evidence, MessageState, ModelConfig, Prototype, VarEvidence,
};
pub use learn::{
    collect_stats, train, update_cpt, update_prior, BatchStats, BlockStats, Sample, TrainConfig,
    TrainReport,
};
pub use message::{combine, posterior, Cpt, Message};
