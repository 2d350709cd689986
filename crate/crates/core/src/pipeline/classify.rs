use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::acquire::{CommitMessage, Forge};
use crate::ccs::{parse_ccs, CcsTypes, NonCompliance};
use crate::entity::{match_entities, EntityCategory, EntityDictionary, EntityMatch};
use crate::ingest::VulnerabilityRecord;
use crate::level::{capabilities, classify, InformativenessLevel};
use crate::stats::normalize_ecosystem;
use crate::Execution;

/// One line of `classified.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifiedMessage {
    pub hash: String,
    pub origin: String,
    pub forge: Forge,
    pub author_date: DateTime<Utc>,
    pub vuln_ids: Vec<String>,
    /// Normalized, sorted, deduplicated.
    pub ecosystems: Vec<String>,
    pub present: BTreeSet<EntityCategory>,
    pub entities: Vec<EntityMatch>,
    pub level: InformativenessLevel,
    pub score: u8,
    pub detection: bool,
    pub assessment: bool,
    pub prioritization: bool,
    pub ccs_compliant: bool,
    pub ccs_type: Option<String>,
    pub ccs_reason: Option<NonCompliance>,
    pub dictionary_version: String,
    pub pattern_version: String,
    pub message: String,
}

pub struct Classifier {
    pub dictionary: EntityDictionary,
    pub ccs_types: CcsTypes,
    pub pattern_version: String,
}

impl Classifier {
    pub fn classify(&self, msg: &CommitMessage, ecosystems: Vec<String>) -> ClassifiedMessage {
        let profile = match_entities(&msg.message, &self.dictionary);
        let level = classify(&profile.present);
        let caps = capabilities(&profile.present);
        let ccs = parse_ccs(&msg.message, &self.ccs_types);
        ClassifiedMessage {
            hash: msg.hash.clone(),
            origin: msg.origin.clone(),
            forge: msg.forge,
            author_date: msg.author_date,
            vuln_ids: msg.vuln_ids.clone(),
            ecosystems,
            present: profile.present,
            entities: profile.matches,
            level,
            score: level.score(),
            detection: caps.detection,
            assessment: caps.assessment,
            prioritization: caps.prioritization,
            ccs_compliant: ccs.compliant,
            ccs_type: ccs.ty,
            ccs_reason: ccs.reason,
            dictionary_version: self.dictionary.version().to_string(),
            pattern_version: self.pattern_version.clone(),
            message: msg.message.clone(),
        }
    }

    /// Ecosystems come from the records that cited each commit.
    pub fn classify_all(
        &self,
        messages: &[CommitMessage],
        records: &[VulnerabilityRecord],
        exec: Execution,
    ) -> Vec<ClassifiedMessage> {
        let by_id: BTreeMap<&str, &VulnerabilityRecord> = records.iter().map(|r| (r.id.as_str(), r)).collect();
        exec.map(messages, |m| {
            let ecosystems: BTreeSet<String> = m
                .vuln_ids
                .iter()
                .filter_map(|id| by_id.get(id.as_str()))
                .flat_map(|r| r.ecosystems.iter())
                .filter_map(|e| normalize_ecosystem(e))
                .collect();
            self.classify(m, ecosystems.into_iter().collect())
        })
    }
}
