//! Core library for ranking relational layouts of RDF data by measured query
//! latency.
//!
//! The pipeline: enumerate a configuration space of (schema, partitioning,
//! storage) choices, materialize each configuration from an N-Triples file,
//! time a SQL workload over it, aggregate the timing logs into a result
//! matrix, and rank configurations with single-dimensional scores, Pareto
//! fronts, or a triangle-area composite — then sanity-check a ranking with
//! conformance, coherence, and replicability metrics.

pub mod config;
mod csvio;
pub mod error;
pub mod evaluation;
pub mod ntriples;
pub mod partition;
pub mod pipeline;
pub mod plot;
pub mod ranking;
pub mod results;
pub mod schema;
pub mod space;
pub mod sql;
pub mod storage;
pub mod workload;

pub use error::{Error, Result};
