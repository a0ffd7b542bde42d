//! Core types and algorithms for building UNER-annotated corpora from
//! hyperlinked encyclopedia text.
//!
//! Everything here is pure and allocation-only; reading dumps, talking to a
//! SPARQL endpoint and writing files live in the `uner` crate.

#![no_std]
extern crate alloc;

pub mod annotate;
pub mod catalog;
pub mod enrich;
pub mod eval;
pub mod iob;
pub mod label;
pub mod links;
pub mod mapping;
pub mod stats;
pub mod text;
pub mod uri;
