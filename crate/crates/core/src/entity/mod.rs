//! Dictionary-driven extraction of security entities from message text.

mod dictionary;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_segmentation::UnicodeSegmentation;

pub use dictionary::{EntityDictionary, NamedPattern, DEFAULT_DICTIONARY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityCategory {
    #[serde(rename = "VULNID")]
    Vulnid,
    #[serde(rename = "CWEID")]
    Cweid,
    #[serde(rename = "SEVERITY")]
    Severity,
    #[serde(rename = "SECWORD")]
    Secword,
    #[serde(rename = "ACTION")]
    Action,
    #[serde(rename = "FLAW")]
    Flaw,
}

impl EntityCategory {
    pub const ALL: [EntityCategory; 6] = [
        EntityCategory::Vulnid,
        EntityCategory::Cweid,
        EntityCategory::Severity,
        EntityCategory::Secword,
        EntityCategory::Action,
        EntityCategory::Flaw,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityCategory::Vulnid => "VULNID",
            EntityCategory::Cweid => "CWEID",
            EntityCategory::Severity => "SEVERITY",
            EntityCategory::Secword => "SECWORD",
            EntityCategory::Action => "ACTION",
            EntityCategory::Flaw => "FLAW",
        }
    }
}

impl fmt::Display for EntityCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        EntityCategory::ALL.into_iter().find(|c| c.as_str().eq_ignore_ascii_case(s)).ok_or_else(|| s.to_string())
    }
}

/// Offsets count chars, not bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMatch {
    pub category: EntityCategory,
    pub surface: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityProfile {
    pub present: BTreeSet<EntityCategory>,
    pub matches: Vec<EntityMatch>,
}

/// UAX#29 words, lowercased, with their byte ranges.
pub(crate) fn tokenize(text: &str) -> Vec<((usize, usize), String)> {
    text.unicode_word_indices().map(|(i, w)| ((i, i + w.len()), w.to_lowercase())).collect()
}

pub fn match_entities(message: &str, dict: &EntityDictionary) -> EntityProfile {
    let tokens = tokenize(message);
    // (category, byte start, byte end)
    let mut candidates: Vec<(EntityCategory, usize, usize)> = Vec::new();
    for (i, (_, tok)) in tokens.iter().enumerate() {
        let Some(entries) = dict.index.get(tok) else { continue };
        for (cat, phrase) in entries {
            let end = i + phrase.len();
            if end <= tokens.len() && tokens[i..end].iter().zip(phrase).all(|((_, t), p)| t == p) {
                candidates.push((*cat, tokens[i].0 .0, tokens[end - 1].0 .1));
            }
        }
    }
    for cat in EntityCategory::ALL {
        for p in dict.patterns(cat) {
            candidates.extend(p.regex.find_iter(message).filter(|m| !m.is_empty()).map(|m| (cat, m.start(), m.end())));
        }
    }
    // Leftmost-longest, non-overlapping within each category.
    candidates.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(b.2.cmp(&a.2)));
    candidates.dedup();

    let char_at = char_offsets(message);
    let mut profile = EntityProfile::default();
    let mut last: Option<(EntityCategory, usize)> = None;
    for (cat, start, end) in candidates {
        if let Some((c, e)) = last {
            if c == cat && start < e {
                continue;
            }
        }
        last = Some((cat, end));
        profile.present.insert(cat);
        profile.matches.push(EntityMatch {
            category: cat,
            surface: message[start..end].to_string(),
            start: char_at[start],
            end: char_at[end],
        });
    }
    profile.matches.sort_by_key(|m| (m.start, m.end, m.category));
    profile
}

/// Maps each byte boundary to its char index.
fn char_offsets(text: &str) -> Vec<usize> {
    let mut map = vec![0; text.len() + 1];
    let mut n = 0;
    for (b, c) in text.char_indices() {
        map[b] = n;
        n += 1;
        for k in 1..c.len_utf8() {
            map[b + k] = n;
        }
    }
    map[text.len()] = n;
    map
}
