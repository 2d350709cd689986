//! Rank-based comparison of ordinal informativeness scores.

mod group;
mod kw;
mod mwu;
pub mod special;

use serde::{Deserialize, Serialize};

pub use group::{group_and_filter, normalize_ecosystem, GroupSummary, Grouped};
pub use kw::kruskal_wallis;
pub use mwu::{mann_whitney_u, MwuOptions, EXACT_THRESHOLD};

use crate::level::InformativenessLevel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrdinalSample {
    pub label: String,
    pub values: Vec<f64>,
}

impl OrdinalSample {
    pub fn new(label: impl Into<String>, values: impl IntoIterator<Item = f64>) -> Self {
        OrdinalSample { label: label.into(), values: values.into_iter().collect() }
    }

    pub fn from_levels(label: impl Into<String>, levels: impl IntoIterator<Item = InformativenessLevel>) -> Self {
        Self::new(label, levels.into_iter().map(|l| f64::from(l.score())))
    }

    /// Expands per-level counts, indexed by score, into one value per message.
    pub fn from_counts(label: impl Into<String>, counts: &[usize; 6]) -> Self {
        Self::new(label, counts.iter().enumerate().flat_map(|(score, &n)| std::iter::repeat_n(score as f64, n)))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestKind {
    MannWhitneyU,
    KruskalWallisH,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactEnumeration,
    TieCorrectedNormal,
    TieCorrectedChiSquare,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ExactEnumeration => "exact-enumeration",
            Method::TieCorrectedNormal => "tie-corrected-normal",
            Method::TieCorrectedChiSquare => "tie-corrected-chi-square",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatTestResult {
    pub test: TestKind,
    /// U of the first sample, or H.
    pub statistic: f64,
    pub p_value: f64,
    pub n_per_group: Vec<usize>,
    pub method: Method,
    /// Tie-corrected normal deviate of U without continuity correction.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub z: Option<f64>,
}

/// Midranks (1-based) of `values`, and the tie term Σ(t³ − t).
pub(crate) fn midranks(values: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        let t = (j - i + 1) as f64;
        ties += t * t * t - t;
        i = j + 1;
    }
    (ranks, ties)
}
