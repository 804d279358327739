//! Autoregressive graph generation conditioned on a dataset seed.
//!
//! A graph is built node by node: decide whether to add a node (and its
//! type) or stop, then repeatedly decide whether to add an edge into the new
//! node and which existing node it comes from. Node states come from
//! message passing re-run after every structural change.

pub mod generate;
pub mod io;
pub mod model;
pub mod params;
pub mod tape;
pub mod trace;
pub mod train;

pub use generate::{generate, GenerateError, GenerateOptions, GeneratedGraph, GenerationResult, Mode};
pub use model::{propagate, trace_loss, trace_nll, Decision, GeneratorModel, GraphState, ModelError, Policy};
pub use trace::{canonicalize_trace, replay, GenerationTrace, Step, TraceError};
pub use train::{train, EpochLog, TrainConfig, TrainError};
