//! Corpus-scale detection of alternative monetization strategies in video
//! description text.
//!
//! The pipeline: ingest line-delimited video/channel records ([`corpus`]),
//! scan descriptions for URLs, context words, and cryptocurrency addresses
//! ([`textscan`]), accumulate a word-domain co-occurrence graph ([`cograph`]),
//! propagate seed labels over it ([`labelprop`]), assemble the domain lexicon
//! ([`taxonomy`]), and compute the measurement suite ([`analytics`]).
//!
//! The propagation engine is generic over the scalar type; the aliases below
//! fix `f64` for the pipeline.

pub mod analytics;
pub mod cograph;
pub mod corpus;
pub mod labelprop;
pub mod taxonomy;
pub mod textscan;

/// Scalar type used by the `f64` pipeline aliases.
pub type Score = f64;

/// Word-by-domain co-occurrence matrix at pipeline precision.
pub type Matrix = labelprop::SparseMatrix<Score>;
/// Propagation state at pipeline precision.
pub type Arrays = labelprop::LabelArrays<Score>;
/// Propagation settings at pipeline precision.
pub type Config = labelprop::PropagationConfig<Score>;
/// Propagation outcome at pipeline precision.
pub type Propagation = labelprop::PropagationResult<Score>;
