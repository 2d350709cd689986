use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeverityLevel {
    Low,
    Medium,
    High,
    Critical,
}

impl fmt::Display for SeverityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeverityLevel::Low => "low",
            SeverityLevel::Medium => "medium",
            SeverityLevel::High => "high",
            SeverityLevel::Critical => "critical",
        })
    }
}

impl SeverityLevel {
    /// CVSS v3 qualitative bands. A score of 0.0 ("none") has no level.
    pub fn from_score(score: f64) -> Option<Self> {
        match score {
            s if !(0.0..=10.0).contains(&s) => None,
            s if s >= 9.0 => Some(SeverityLevel::Critical),
            s if s >= 7.0 => Some(SeverityLevel::High),
            s if s >= 4.0 => Some(SeverityLevel::Medium),
            s if s >= 0.1 => Some(SeverityLevel::Low),
            _ => None,
        }
    }

    pub fn from_word(word: &str) -> Option<Self> {
        match word.trim().to_ascii_lowercase().as_str() {
            "low" => Some(SeverityLevel::Low),
            "medium" | "moderate" => Some(SeverityLevel::Medium),
            "high" | "important" => Some(SeverityLevel::High),
            "critical" => Some(SeverityLevel::Critical),
            _ => None,
        }
    }
}

/// A severity as found in the dump plus its banded level.
///
/// `raw` may be a level word, a numeric base score, or a CVSS vector. Vectors
/// are kept verbatim and left unbanded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeverityDescriptor {
    pub raw: String,
    pub normalized_level: Option<SeverityLevel>,
}

impl SeverityDescriptor {
    pub fn new(raw: &str) -> Self {
        let raw = raw.trim().to_string();
        let normalized_level =
            SeverityLevel::from_word(&raw).or_else(|| raw.parse::<f64>().ok().and_then(SeverityLevel::from_score));
        SeverityDescriptor { raw, normalized_level }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_edges() {
        assert_eq!(SeverityLevel::from_score(0.0), None);
        assert_eq!(SeverityLevel::from_score(0.1), Some(SeverityLevel::Low));
        assert_eq!(SeverityLevel::from_score(3.9), Some(SeverityLevel::Low));
        assert_eq!(SeverityLevel::from_score(4.0), Some(SeverityLevel::Medium));
        assert_eq!(SeverityLevel::from_score(6.9), Some(SeverityLevel::Medium));
        assert_eq!(SeverityLevel::from_score(7.0), Some(SeverityLevel::High));
        assert_eq!(SeverityLevel::from_score(8.9), Some(SeverityLevel::High));
        assert_eq!(SeverityLevel::from_score(9.0), Some(SeverityLevel::Critical));
        assert_eq!(SeverityLevel::from_score(10.0), Some(SeverityLevel::Critical));
        assert_eq!(SeverityLevel::from_score(10.5), None);
    }

    #[test]
    fn descriptor_normalization() {
        assert_eq!(SeverityDescriptor::new("HIGH").normalized_level, Some(SeverityLevel::High));
        assert_eq!(SeverityDescriptor::new("Moderate").normalized_level, Some(SeverityLevel::Medium));
        assert_eq!(SeverityDescriptor::new("9.8").normalized_level, Some(SeverityLevel::Critical));
        let vector = SeverityDescriptor::new("CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H");
        assert_eq!(vector.normalized_level, None);
        assert!(vector.raw.starts_with("CVSS:3.1"));
    }
}
