#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use secmsg_core::acquire::{CommitMessage, Forge, SourceBackend};
use secmsg_core::ccs::NonCompliance;
use secmsg_core::entity::EntityCategory;
use secmsg_core::ingest::{Source, VulnerabilityRecord};
use secmsg_core::jsonl;
use secmsg_core::level::InformativenessLevel;
use secmsg_core::pipeline::{artifacts, ExtractSummary};
use serde::Deserialize;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// One hand-labelled message of the annotated corpus.
#[derive(Debug, Clone, Deserialize)]
pub struct Annotated {
    pub id: u32,
    pub message: String,
    pub categories: BTreeSet<EntityCategory>,
    pub level: InformativenessLevel,
    /// The declared type when the header is Conventional Commits compliant.
    pub ccs_type: Option<String>,
    pub forge: Forge,
    pub author_date: DateTime<Utc>,
    pub ecosystem: Option<String>,
}

pub fn annotated() -> Vec<Annotated> {
    jsonl::read(&fixtures().join("annotated/corpus.jsonl")).expect("annotated corpus parses")
}

/// Every annotated message gets its own synthetic record so ecosystems attach.
pub fn annotated_inputs(rows: &[Annotated]) -> (Vec<CommitMessage>, Vec<VulnerabilityRecord>) {
    let mut messages = Vec::new();
    let mut records = Vec::new();
    for row in rows {
        let vuln_id = format!("OSV-2000-{}", row.id);
        let origin = match row.forge {
            Forge::GitHub => format!("https://github.com/corpus/repo{}", row.id),
            Forge::Other => format!("https://gitlab.com/corpus/repo{}", row.id),
        };
        let hash = format!("{:040x}", row.id);
        let mut record = VulnerabilityRecord::new(&vuln_id, Source::Osv);
        record.add_reference(&format!("{origin}/commit/{hash}"));
        record.ecosystems.extend(row.ecosystem.clone());
        records.push(record);
        messages.push(CommitMessage {
            hash,
            message: row.message.clone(),
            author: format!("dev{}", row.id),
            author_date: row.author_date,
            origin,
            forge: row.forge,
            source_backend: SourceBackend::LocalStore,
            vuln_ids: vec![vuln_id],
        });
    }
    (messages, records)
}

/// Writes the artifacts `classify` needs, as if earlier stages had run.
pub fn stage_annotated(out: &Path) {
    let (messages, records) = annotated_inputs(&annotated());
    std::fs::create_dir_all(out).unwrap();
    jsonl::write(&out.join(artifacts::CLEANED), &messages).unwrap();
    jsonl::write(&out.join(artifacts::RECORDS), &records).unwrap();
    let extract = ExtractSummary {
        pattern_version: "2026.1".into(),
        records: records.len(),
        records_with_patch_refs: records.len(),
        patch_refs: records.len(),
        unique_hashes: messages.len(),
        short_hashes: 0,
        by_platform: Default::default(),
    };
    jsonl::write_summary(&out.join(artifacts::EXTRACT_SUMMARY), &extract).unwrap();
}

#[derive(Debug, Clone, Deserialize)]
pub struct CcsCase {
    pub message: String,
    pub compliant: bool,
    #[serde(rename = "type")]
    pub ty: Option<String>,
    pub scope: Option<String>,
    pub breaking: bool,
    pub reason: Option<NonCompliance>,
    /// How the header grammar walk reaches the verdict.
    pub walk: String,
}

pub fn ccs_cases() -> Vec<CcsCase> {
    jsonl::read(&fixtures().join("ccs_cases.jsonl")).expect("CCS cases parse")
}

/// Copies the miniature dataset so a run can write next to it.
pub fn mini_config(out: &Path) -> secmsg_core::pipeline::PipelineConfig {
    let mut cfg = secmsg_core::pipeline::PipelineConfig::load(&fixtures().join("mini/config.toml")).unwrap();
    cfg.out = out.to_path_buf();
    cfg
}

/// Every file in `dir`, sorted by name, with contents.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}
