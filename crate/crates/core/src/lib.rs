//! Mining and informativeness classification of security patch commit messages.
//!
//! The pipeline runs in stages:
//!
//! 1. [`ingest`] parses OSV and NVD dumps and merges them into one record set.
//! 2. [`refs`] pulls patch commit references out of record reference URLs.
//! 3. [`acquire`] resolves commit hashes against an archive or a local store.
//! 4. [`clean`] drops backport duplicates, bot commits and non-English text.
//! 5. [`entity`] and [`level`] turn each message into an informativeness level.
//! 6. [`ccs`] and [`stats`] feed the comparison reports built by [`pipeline`].
//!
//! Per-record work fans out over rayon when the `parallel` feature is on; see
//! [`Execution`].

pub mod acquire;
pub mod ccs;
pub mod clean;
pub mod entity;
mod error;
pub mod ingest;
pub mod jsonl;
pub mod level;
mod par;
pub mod pipeline;
pub mod refs;
pub mod stats;

pub use error::{Error, Result};
pub use par::Execution;
