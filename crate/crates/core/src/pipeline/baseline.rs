use std::path::Path;

use crate::refs::version_comment;
use crate::stats::GroupSummary;
use crate::{Error, Result};

pub const DEFAULT_BASELINE: &str = include_str!("../../data/baseline.tsv");

/// Published level distributions keyed by (table, label).
#[derive(Debug, Clone)]
pub struct Baseline {
    pub version: String,
    columns: Vec<(String, GroupSummary)>,
}

impl Baseline {
    pub fn bundled() -> Self {
        Self::parse(DEFAULT_BASELINE, Path::new("<bundled baseline>")).expect("bundled baseline is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Count columns run Excellent first, as in the published tables.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut version = None;
        let mut columns = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if trimmed.starts_with('#') {
                version = version.or(version_comment(trimmed).map(str::to_string));
                continue;
            }
            let syntax = |message: String| Error::Syntax { path: path.to_path_buf(), line: i + 1, message };
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 8 {
                return Err(syntax(format!("expected 8 tab-separated columns, found {}", cols.len())));
            }
            let mut counts = [0usize; 6];
            for (k, raw) in cols[2..].iter().enumerate() {
                counts[5 - k] = raw.trim().parse().map_err(|_| syntax(format!("bad count {raw:?}")))?;
            }
            let summary = GroupSummary::from_counts(cols[1].trim(), counts)
                .ok_or_else(|| syntax("baseline column has no messages".into()))?;
            columns.push((cols[0].trim().to_string(), summary));
        }
        Ok(Baseline { version: version.unwrap_or_else(|| "unversioned".into()), columns })
    }

    pub fn table<'a>(&'a self, table: &'a str) -> impl Iterator<Item = &'a GroupSummary> + 'a {
        self.columns.iter().filter(move |(t, _)| t == table).map(|(_, s)| s)
    }

    pub fn get(&self, table: &str, label: &str) -> Option<&GroupSummary> {
        self.columns.iter().find(|(t, s)| t == table && s.label == label).map(|(_, s)| s)
    }
}
