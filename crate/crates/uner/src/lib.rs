//! IO, file formats, the SPARQL client and the command line for building
//! UNER corpora. The algorithms themselves live in `uner_core`.

pub mod cli;
pub mod config;
pub mod conll;
pub mod dump;
pub mod error;
pub mod fsutil;
pub mod manifest;
pub mod pipeline;
pub mod report;
pub mod sparql;
pub mod tables;

pub use uner_core as core;
