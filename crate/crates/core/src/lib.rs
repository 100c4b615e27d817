//! Propaganda technique classification pipeline.
//!
//! The crate ingests span-annotated news articles, rewrites fragments by
//! mapping gazetteer phrases and named entities to class tags (`NATION`,
//! `RELIGION`, `POLITICS`, `SLOGANS`, `PERSON`), normalizes text, and trains
//! TF-IDF + linear classifiers scored by micro-averaged F1. It also exports
//! WordPiece-encoded datasets for transformer fine-tuning.
//!
//! Each capability has a runnable program under `examples/`; the `propmap`
//! binary wraps the end-to-end pipeline.

pub mod bertprep;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod gazetteer;
pub mod linmod;
pub mod nermap;
pub mod rewrite;
pub mod pipeline;
pub mod sparse;
pub mod synth;
pub mod textprep;

pub use error::{Error, Result};
