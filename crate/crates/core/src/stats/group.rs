use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::level::InformativenessLevel;

const ECOSYSTEM_ALIASES: &[(&str, &str)] = &[
    ("almalinux", "AlmaLinux"),
    ("alpine", "Alpine"),
    ("android", "Android"),
    ("bitnami", "Bitnami"),
    ("crates.io", "Crates.io"),
    ("cran", "CRAN"),
    ("debian", "Debian"),
    ("github actions", "GitHub Actions"),
    ("go", "Go"),
    ("hackage", "Hackage"),
    ("hex", "Hex"),
    ("linux", "Linux"),
    ("maven", "Maven"),
    ("npm", "npm"),
    ("nuget", "NuGet"),
    ("oss-fuzz", "OSS-Fuzz"),
    ("packagist", "Packagist"),
    ("pub", "Pub"),
    ("pypi", "PyPI"),
    ("rocky linux", "Rocky Linux"),
    ("rubygems", "RubyGems"),
    ("swifturl", "SwiftURL"),
    ("ubuntu", "Ubuntu"),
];

/// Drops any release suffix after ':' and fixes capitalization. `None` means
/// nothing usable was left.
pub fn normalize_ecosystem(raw: &str) -> Option<String> {
    let head = raw.split(':').next().unwrap_or_default().trim();
    if head.is_empty() {
        tracing::warn!(raw, "empty ecosystem name discarded");
        return None;
    }
    let lower = head.to_lowercase();
    Some(
        ECOSYSTEM_ALIASES
            .iter()
            .find(|(k, _)| *k == lower)
            .map(|(_, v)| v.to_string())
            .unwrap_or_else(|| head.to_string()),
    )
}

/// Counts and percentages are indexed by ordinal score, Very Poor first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub label: String,
    pub total: usize,
    pub counts: [usize; 6],
    pub percentages: [f64; 6],
    pub mean_score: f64,
}

impl GroupSummary {
    /// `None` for an empty group.
    pub fn from_counts(label: impl Into<String>, counts: [usize; 6]) -> Option<Self> {
        let total: usize = counts.iter().sum();
        if total == 0 {
            return None;
        }
        let percentages = counts.map(|c| 100.0 * c as f64 / total as f64);
        let mean_score = counts.iter().enumerate().map(|(s, &c)| (s * c) as f64).sum::<f64>() / total as f64;
        Some(GroupSummary { label: label.into(), total, counts, percentages, mean_score })
    }

    pub fn from_levels(
        label: impl Into<String>,
        levels: impl IntoIterator<Item = InformativenessLevel>,
    ) -> Option<Self> {
        let mut counts = [0usize; 6];
        for l in levels {
            counts[l.score() as usize] += 1;
        }
        Self::from_counts(label, counts)
    }

    pub fn count(&self, level: InformativenessLevel) -> usize {
        self.counts[level.score() as usize]
    }

    pub fn percentage(&self, level: InformativenessLevel) -> f64 {
        self.percentages[level.score() as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grouped {
    /// Ranked by mean score, best first; ties by label.
    pub kept: Vec<GroupSummary>,
    /// Groups under the size floor with their sizes, by label.
    pub excluded: Vec<(String, usize)>,
}

pub fn group_and_filter(items: impl IntoIterator<Item = (String, InformativenessLevel)>, min_size: usize) -> Grouped {
    let mut counts: BTreeMap<String, [usize; 6]> = BTreeMap::new();
    for (key, level) in items {
        counts.entry(key).or_default()[level.score() as usize] += 1;
    }
    let mut kept = Vec::new();
    let mut excluded = Vec::new();
    for (label, c) in counts {
        let total: usize = c.iter().sum();
        if total < min_size {
            excluded.push((label, total));
        } else if let Some(s) = GroupSummary::from_counts(label, c) {
            kept.push(s);
        }
    }
    kept.sort_by(|a, b| b.mean_score.total_cmp(&a.mean_score).then_with(|| a.label.cmp(&b.label)));
    Grouped { kept, excluded }
}
