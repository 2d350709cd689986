//! OSV and NVD dump ingestion, normalization and cross-source merging.

mod dump;
mod merge;
mod nvd;
mod osv;
mod severity;

use std::collections::BTreeSet;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub use dump::{DumpEntry, ParseWarning, Parsed};
pub use merge::{merge_dedup, MergedDataset, SourceTally};
pub use nvd::parse_nvd_dump;
pub use osv::parse_osv_dump;
pub use severity::{SeverityDescriptor, SeverityLevel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Source {
    #[serde(rename = "OSV")]
    Osv,
    #[serde(rename = "NVD")]
    Nvd,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Osv => "OSV",
            Source::Nvd => "NVD",
        })
    }
}

/// One normalized OSV or NVD entry.
///
/// Serialized field order is the JSONL order of `records.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VulnerabilityRecord {
    pub id: String,
    pub source: Source,
    pub aliases: BTreeSet<String>,
    pub references: Vec<String>,
    pub ecosystems: Vec<String>,
    pub severity: Option<SeverityDescriptor>,
    pub published: Option<DateTime<Utc>>,
    pub modified: Option<DateTime<Utc>>,
}

impl VulnerabilityRecord {
    pub fn new(id: &str, source: Source) -> Self {
        VulnerabilityRecord {
            id: normalize_id(id),
            source,
            aliases: BTreeSet::new(),
            references: Vec::new(),
            ecosystems: Vec::new(),
            severity: None,
            published: None,
            modified: None,
        }
    }

    /// Adds aliases, normalizing them and skipping the record's own id.
    pub fn add_aliases<'a>(&mut self, aliases: impl IntoIterator<Item = &'a str>) {
        for alias in aliases {
            let alias = normalize_id(alias);
            if !alias.is_empty() && alias != self.id {
                self.aliases.insert(alias);
            }
        }
    }

    /// Appends a reference if it is an absolute URL not already present.
    /// Returns false when the URL was rejected as malformed.
    pub fn add_reference(&mut self, raw: &str) -> bool {
        let raw = raw.trim();
        match url::Url::parse(raw) {
            Ok(u) if u.has_host() => {
                if !self.references.iter().any(|r| r == raw) {
                    self.references.push(raw.to_string());
                }
                true
            }
            _ => false,
        }
    }

    /// Identifiers this record answers to: its id and every alias.
    pub fn identifiers(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.id.as_str()).chain(self.aliases.iter().map(String::as_str))
    }
}

/// Trims and upper-cases the scheme prefix (`cve-2016-1` becomes `CVE-2016-1`).
///
/// Only the part before the first `-` is touched; the remainder keeps its case.
pub fn normalize_id(raw: &str) -> String {
    let raw = raw.trim();
    match raw.split_once('-') {
        Some((scheme, rest)) => format!("{}-{}", scheme.to_ascii_uppercase(), rest),
        None => raw.to_string(),
    }
}

/// Keeps records with at least one reference, in input order.
pub fn drop_referenceless(records: Vec<VulnerabilityRecord>) -> Vec<VulnerabilityRecord> {
    records.into_iter().filter(|r| !r.references.is_empty()).collect()
}
