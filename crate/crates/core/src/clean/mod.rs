//! Cleaning passes over resolved commit messages, applied in a fixed order:
//! identical-text duplicates, then bot commits, then non-English text.

mod bots;
mod lang;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use bots::{BotRules, DEFAULT_BOT_LIST, DEFAULT_TEMPLATES};
pub use lang::{detect_language, strip_for_detection, Content, LanguageVerdict, DEFAULT_REVIEW_THRESHOLD, MIN_LETTERS};

use crate::acquire::CommitMessage;
use crate::Execution;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningReport {
    pub input_count: usize,
    pub removed_duplicates: usize,
    pub removed_bots: usize,
    pub removed_non_english: usize,
    pub output_count: usize,
}

impl CleaningReport {
    pub fn is_consistent(&self) -> bool {
        self.removed_duplicates + self.removed_bots + self.removed_non_english + self.output_count == self.input_count
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pass {
    Duplicate,
    Bot,
    Language,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Removal {
    pub hash: String,
    pub pass: Pass,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct CleanConfig {
    pub bots: BotRules,
    pub review_threshold: f64,
}

impl Default for CleanConfig {
    fn default() -> Self {
        CleanConfig { bots: BotRules::bundled(), review_threshold: DEFAULT_REVIEW_THRESHOLD }
    }
}

#[derive(Debug, Clone)]
pub struct Cleaned {
    pub messages: Vec<CommitMessage>,
    pub report: CleaningReport,
    pub removals: Vec<Removal>,
}

pub fn normalize_text(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Keeps one message per normalized text: earliest author_date, then the
/// smallest hash. Survivors stay in input order.
pub fn dedup_identical(messages: Vec<CommitMessage>) -> Vec<CommitMessage> {
    dedup_with_removals(messages).0
}

fn dedup_with_removals(messages: Vec<CommitMessage>) -> (Vec<CommitMessage>, Vec<Removal>) {
    let keys: Vec<String> = messages.iter().map(|m| normalize_text(&m.message)).collect();
    let mut winner: HashMap<&str, usize> = HashMap::new();
    for (i, key) in keys.iter().enumerate() {
        winner
            .entry(key.as_str())
            .and_modify(|w| {
                let (a, b) = (&messages[i], &messages[*w]);
                if (a.author_date, &a.hash) < (b.author_date, &b.hash) {
                    *w = i;
                }
            })
            .or_insert(i);
    }
    let mut removals = Vec::new();
    let keep: Vec<bool> = keys
        .iter()
        .enumerate()
        .map(|(i, key)| {
            let w = winner[key.as_str()];
            if w != i {
                removals.push(Removal {
                    hash: messages[i].hash.clone(),
                    pass: Pass::Duplicate,
                    detail: format!("same text as {}", messages[w].hash),
                });
            }
            w == i
        })
        .collect();
    let survivors = messages.into_iter().zip(keep).filter_map(|(m, k)| k.then_some(m)).collect();
    (survivors, removals)
}

pub fn is_bot(message: &CommitMessage, rules: &BotRules) -> bool {
    rules.is_bot(message)
}

pub fn clean(messages: Vec<CommitMessage>, config: &CleanConfig, exec: Execution) -> Cleaned {
    let input_count = messages.len();
    let (deduped, mut removals) = dedup_with_removals(messages);
    let removed_duplicates = input_count - deduped.len();

    let bot_flags = exec.map(&deduped, |m| config.bots.is_bot(m));
    let mut humans = Vec::with_capacity(deduped.len());
    for (m, bot) in deduped.into_iter().zip(bot_flags) {
        if bot {
            removals.push(Removal { hash: m.hash, pass: Pass::Bot, detail: m.author });
        } else {
            humans.push(m);
        }
    }
    let removed_bots = input_count - removed_duplicates - humans.len();

    let verdicts = exec.map(&humans, |m| detect_language(&m.message, config.review_threshold));
    let mut kept = Vec::with_capacity(humans.len());
    for (m, v) in humans.into_iter().zip(verdicts) {
        if v.should_remove() {
            let detail = match v.content {
                Content::StandaloneLink => "standalone link".to_string(),
                Content::Empty => "empty".to_string(),
                _ => format!("{} ({:.3})", v.language_tag, v.confidence),
            };
            removals.push(Removal { hash: m.hash, pass: Pass::Language, detail });
        } else {
            kept.push(m);
        }
    }
    let report = CleaningReport {
        input_count,
        removed_duplicates,
        removed_bots,
        removed_non_english: input_count - removed_duplicates - removed_bots - kept.len(),
        output_count: kept.len(),
    };
    tracing::info!(?report, "cleaning finished");
    Cleaned { messages: kept, report, removals }
}
