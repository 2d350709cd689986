//! Stage orchestration. Each stage reads the previous stage's files from the
//! output directory and writes its own JSONL artifact plus a summary.

mod baseline;
mod classify;
mod config;
mod report;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

pub use baseline::{Baseline, DEFAULT_BASELINE};
pub use classify::{ClassifiedMessage, Classifier};
pub use config::{parse_cutoff, BackendKind, PipelineConfig, DEFAULT_CUTOFFS, DEFAULT_MIN_GROUP_SIZE};
pub use report::{
    analyze, csv_rq1_rq2, csv_rq3, csv_rq4, format_p, render_rq1_rq2, render_rq3, render_rq4, Analysis,
    AnalysisOptions, CcsAnalysis, Column, EcosystemAnalysis, TestOutcome, TimelineAnalysis,
};

use crate::acquire::{resolve_all, CommitMessage, ResolutionReport};
use crate::clean::{clean, CleaningReport, Removal};
use crate::ingest::{
    drop_referenceless, merge_dedup, parse_nvd_dump, parse_osv_dump, ParseWarning, VulnerabilityRecord,
};
use crate::refs::{collect_hashes, HashEntry, HashSet, PatchReference};
use crate::stats::GroupSummary;
use crate::{jsonl, Error, Execution, Result};

pub mod artifacts {
    pub const RECORDS: &str = "records.jsonl";
    pub const INGEST_SUMMARY: &str = "ingest.summary.json";
    pub const PATCH_REFS: &str = "patch_refs.jsonl";
    pub const HASHES: &str = "hashes.jsonl";
    pub const EXTRACT_SUMMARY: &str = "extract.summary.json";
    pub const COMMITS: &str = "commits.jsonl";
    pub const RESOLVE_SUMMARY: &str = "resolve.summary.json";
    pub const CLEANED: &str = "cleaned.jsonl";
    pub const CLEAN_SUMMARY: &str = "clean.summary.json";
    pub const CLASSIFIED: &str = "classified.jsonl";
    pub const CLASSIFY_SUMMARY: &str = "classify.summary.json";
    pub const RQ1_RQ2_TXT: &str = "rq1_rq2.txt";
    pub const RQ1_RQ2_CSV: &str = "rq1_rq2.csv";
    pub const RQ3_TXT: &str = "rq3.txt";
    pub const RQ3_CSV: &str = "rq3.csv";
    pub const RQ4_TXT: &str = "rq4.txt";
    pub const RQ4_CSV: &str = "rq4.csv";
    pub const ANALYZE_SUMMARY: &str = "analyze.summary.json";
    pub const RUN_MANIFEST: &str = "run_manifest.json";
}

use artifacts::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Ingest,
    Extract,
    Resolve,
    Clean,
    Classify,
    Analyze,
}

impl Stage {
    pub const ALL: [Stage; 6] =
        [Stage::Ingest, Stage::Extract, Stage::Resolve, Stage::Clean, Stage::Classify, Stage::Analyze];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Extract => "extract",
            Stage::Resolve => "resolve",
            Stage::Clean => "clean",
            Stage::Classify => "classify",
            Stage::Analyze => "analyze",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Stage::ALL.into_iter().find(|st| st.name() == s).ok_or_else(|| format!("unknown stage {s:?}"))
    }
}

/// What a stage did, for the CLI to print.
#[derive(Debug, Clone)]
pub struct StageOutcome {
    pub stage: Stage,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub osv_records: usize,
    pub nvd_records: usize,
    pub warnings: Vec<ParseWarningLine>,
    pub merged_records: usize,
    /// Output records that absorbed more than one input variant.
    pub merged_groups: usize,
    pub dropped_referenceless: usize,
    pub output_records: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseWarningLine {
    pub locator: String,
    pub message: String,
}

impl From<ParseWarning> for ParseWarningLine {
    fn from(w: ParseWarning) -> Self {
        ParseWarningLine { locator: w.locator, message: w.message }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractSummary {
    pub pattern_version: String,
    pub records: usize,
    pub records_with_patch_refs: usize,
    pub patch_refs: usize,
    pub unique_hashes: usize,
    pub short_hashes: usize,
    pub by_platform: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolveSummary {
    pub backend: String,
    pub messages: usize,
    pub report: ResolutionReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanSummary {
    pub report: CleaningReport,
    pub bot_list_version: String,
    pub template_list_version: String,
    pub lang_threshold: f64,
    pub removals: Vec<Removal>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifySummary {
    pub dictionary_version: String,
    pub pattern_version: String,
    pub ccs_types: Vec<String>,
    pub messages: usize,
    pub ccs_compliant: usize,
    pub levels: Option<GroupSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_sha256: Option<String>,
    pub data_versions: BTreeMap<String, String>,
    pub cutoffs: Vec<String>,
    pub stages: Vec<Stage>,
    pub generated_at: String,
}

fn require(out: &Path, file: &str, stage: &'static str) -> Result<PathBuf> {
    let path = out.join(file);
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::MissingPrerequisite { stage, path })
    }
}

fn read_summary<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_path_buf(), line: source.line(), source })
}

fn write_text(path: PathBuf, text: &str) -> Result<PathBuf> {
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

pub fn run_stage(stage: Stage, cfg: &PipelineConfig, exec: Execution) -> Result<StageOutcome> {
    cfg.validate()?;
    let out = cfg.out.as_path();
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let _span = tracing::info_span!("stage", name = stage.name()).entered();
    match stage {
        Stage::Ingest => ingest(cfg, out, exec),
        Stage::Extract => extract(cfg, out, exec),
        Stage::Resolve => resolve(cfg, out, exec),
        Stage::Clean => clean_stage(cfg, out, exec),
        Stage::Classify => classify_stage(cfg, out, exec),
        Stage::Analyze => analyze_stage(cfg, out),
    }
}

/// Runs every stage in order, then writes the run manifest.
pub fn run_all(cfg: &PipelineConfig, exec: Execution) -> Result<Vec<StageOutcome>> {
    let mut outcomes = Vec::new();
    for stage in Stage::ALL {
        outcomes.push(run_stage(stage, cfg, exec)?);
    }
    let manifest = run_manifest(cfg)?;
    let path = cfg.out.join(RUN_MANIFEST);
    jsonl::write_summary(&path, &manifest)?;
    if let Some(last) = outcomes.last_mut() {
        last.files.push(path);
    }
    Ok(outcomes)
}

/// `SOURCE_DATE_EPOCH` pins the timestamp for reproducible manifests.
fn generated_at() -> String {
    let now = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|s| DateTime::<Utc>::from_timestamp(s, 0))
        .unwrap_or_else(Utc::now);
    now.to_rfc3339_opts(SecondsFormat::Secs, true)
}

pub fn run_manifest(cfg: &PipelineConfig) -> Result<RunManifest> {
    let clean = cfg.clean_config()?;
    let (bots, templates) = clean.bots.versions();
    let data_versions = BTreeMap::from([
        ("dictionary".to_string(), cfg.dictionary()?.version().to_string()),
        ("patterns".to_string(), cfg.patterns()?.version().to_string()),
        ("bot_list".to_string(), bots.to_string()),
        ("template_list".to_string(), templates.to_string()),
        ("baseline".to_string(), cfg.baseline()?.version),
    ]);
    Ok(RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: cfg.manifest_sha256.clone(),
        data_versions,
        cutoffs: cfg.cutoffs.iter().map(|c| c.to_rfc3339_opts(SecondsFormat::Secs, true)).collect(),
        stages: Stage::ALL.to_vec(),
        generated_at: generated_at(),
    })
}

fn ingest(cfg: &PipelineConfig, out: &Path, exec: Execution) -> Result<StageOutcome> {
    if cfg.osv_dump.is_none() && cfg.nvd_dump.is_none() {
        return Err(Error::Config("ingest needs osv_dump or nvd_dump".into()));
    }
    let osv = cfg.osv_dump.as_deref().map(|p| parse_osv_dump(p, exec)).transpose()?.unwrap_or_default();
    let nvd = cfg.nvd_dump.as_deref().map(|p| parse_nvd_dump(p, exec)).transpose()?.unwrap_or_default();
    let (osv_records, nvd_records) = (osv.records.len(), nvd.records.len());
    let warnings: Vec<ParseWarningLine> = osv.warnings.into_iter().chain(nvd.warnings).map(Into::into).collect();
    let merged = merge_dedup(osv.records, nvd.records);
    let merged_records = merged.records.len();
    let merged_groups = merged.provenance.iter().filter(|p| p.osv + p.nvd > 1).count();
    let records = drop_referenceless(merged.records);
    let summary = IngestSummary {
        osv_records,
        nvd_records,
        warnings,
        merged_records,
        merged_groups,
        dropped_referenceless: merged_records - records.len(),
        output_records: records.len(),
    };
    let records_path = out.join(RECORDS);
    jsonl::write(&records_path, &records)?;
    let summary_path = out.join(INGEST_SUMMARY);
    jsonl::write_summary(&summary_path, &summary)?;
    Ok(StageOutcome {
        stage: Stage::Ingest,
        summary: format!(
            "{} OSV + {} NVD records, {} after merging, {} with references ({} warnings)",
            osv_records,
            nvd_records,
            merged_records,
            records.len(),
            summary.warnings.len()
        ),
        files: vec![records_path, summary_path],
    })
}

fn extract(cfg: &PipelineConfig, out: &Path, exec: Execution) -> Result<StageOutcome> {
    let records: Vec<VulnerabilityRecord> = jsonl::read(&require(out, RECORDS, "ingest")?)?;
    let patterns = cfg.patterns()?;
    let per_record = exec.map(&records, |r| patterns.extract_patch_refs(r));
    let records_with_patch_refs = per_record.iter().filter(|r| !r.is_empty()).count();
    let refs: Vec<PatchReference> = per_record.into_iter().flatten().collect();
    let hashes = collect_hashes(&refs);
    let mut by_platform = BTreeMap::new();
    for r in &refs {
        *by_platform.entry(r.platform.to_string()).or_insert(0) += 1;
    }
    let summary = ExtractSummary {
        pattern_version: patterns.version().to_string(),
        records: records.len(),
        records_with_patch_refs,
        patch_refs: refs.len(),
        unique_hashes: hashes.len(),
        short_hashes: hashes.short_count(),
        by_platform,
    };
    let refs_path = out.join(PATCH_REFS);
    jsonl::write(&refs_path, &refs)?;
    let hashes_path = out.join(HASHES);
    jsonl::write(&hashes_path, &hashes.to_entries())?;
    let summary_path = out.join(EXTRACT_SUMMARY);
    jsonl::write_summary(&summary_path, &summary)?;
    Ok(StageOutcome {
        stage: Stage::Extract,
        summary: format!(
            "{} patch references from {} records, {} unique hashes ({} short)",
            refs.len(),
            records_with_patch_refs,
            summary.unique_hashes,
            summary.short_hashes
        ),
        files: vec![refs_path, hashes_path, summary_path],
    })
}

fn resolve(cfg: &PipelineConfig, out: &Path, exec: Execution) -> Result<StageOutcome> {
    let entries: Vec<HashEntry> = jsonl::read(&require(out, HASHES, "extract")?)?;
    let hashes = HashSet::from_entries(entries);
    let backend = cfg.backend()?;
    let (messages, report) = resolve_all(backend.as_ref(), &hashes, exec)?;
    let backend_name =
        serde_json::to_value(backend.kind()).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
    let summary = ResolveSummary { backend: backend_name, messages: messages.len(), report };
    let commits_path = out.join(COMMITS);
    jsonl::write(&commits_path, &messages)?;
    let summary_path = out.join(RESOLVE_SUMMARY);
    jsonl::write_summary(&summary_path, &summary)?;
    let r = &summary.report;
    Ok(StageOutcome {
        stage: Stage::Resolve,
        summary: format!(
            "{} hashes: {} resolved, {} missing, {} ambiguous short; {} commit messages",
            r.input,
            r.resolved,
            r.missing,
            r.ambiguous_short,
            messages.len()
        ),
        files: vec![commits_path, summary_path],
    })
}

fn clean_stage(cfg: &PipelineConfig, out: &Path, exec: Execution) -> Result<StageOutcome> {
    let messages: Vec<CommitMessage> = jsonl::read(&require(out, COMMITS, "resolve")?)?;
    let config = cfg.clean_config()?;
    let cleaned = clean(messages, &config, exec);
    let (bots, templates) = config.bots.versions();
    let summary = CleanSummary {
        report: cleaned.report,
        bot_list_version: bots.to_string(),
        template_list_version: templates.to_string(),
        lang_threshold: config.review_threshold,
        removals: cleaned.removals,
    };
    let cleaned_path = out.join(CLEANED);
    jsonl::write(&cleaned_path, &cleaned.messages)?;
    let summary_path = out.join(CLEAN_SUMMARY);
    jsonl::write_summary(&summary_path, &summary)?;
    let r = &summary.report;
    Ok(StageOutcome {
        stage: Stage::Clean,
        summary: format!(
            "{} in, {} duplicates, {} bots, {} non-English or link-only removed, {} kept",
            r.input_count, r.removed_duplicates, r.removed_bots, r.removed_non_english, r.output_count
        ),
        files: vec![cleaned_path, summary_path],
    })
}

fn classify_stage(cfg: &PipelineConfig, out: &Path, exec: Execution) -> Result<StageOutcome> {
    let messages: Vec<CommitMessage> = jsonl::read(&require(out, CLEANED, "clean")?)?;
    let records: Vec<VulnerabilityRecord> = jsonl::read(&require(out, RECORDS, "ingest")?)?;
    let extract: ExtractSummary = read_summary(&require(out, EXTRACT_SUMMARY, "extract")?)?;
    let classifier = Classifier {
        dictionary: cfg.dictionary()?,
        ccs_types: cfg.ccs_types()?,
        pattern_version: extract.pattern_version,
    };
    let classified = classifier.classify_all(&messages, &records, exec);
    let levels = GroupSummary::from_levels("all", classified.iter().map(|m| m.level));
    let summary = ClassifySummary {
        dictionary_version: classifier.dictionary.version().to_string(),
        pattern_version: classifier.pattern_version.clone(),
        ccs_types: classifier.ccs_types.iter().map(str::to_string).collect(),
        messages: classified.len(),
        ccs_compliant: classified.iter().filter(|m| m.ccs_compliant).count(),
        levels,
    };
    let classified_path = out.join(CLASSIFIED);
    jsonl::write(&classified_path, &classified)?;
    let summary_path = out.join(CLASSIFY_SUMMARY);
    jsonl::write_summary(&summary_path, &summary)?;
    Ok(StageOutcome {
        stage: Stage::Classify,
        summary: format!(
            "{} messages classified with dictionary {}, {} CCS-compliant",
            summary.messages, summary.dictionary_version, summary.ccs_compliant
        ),
        files: vec![classified_path, summary_path],
    })
}

fn analyze_stage(cfg: &PipelineConfig, out: &Path) -> Result<StageOutcome> {
    let messages: Vec<ClassifiedMessage> = jsonl::read(&require(out, CLASSIFIED, "classify")?)?;
    let baseline = cfg.baseline()?;
    let analysis = analyze(
        &messages,
        &AnalysisOptions { cutoffs: &cfg.cutoffs, min_group_size: cfg.min_group_size, baseline: &baseline },
    );
    let files = vec![
        write_text(out.join(RQ1_RQ2_TXT), &render_rq1_rq2(&analysis))?,
        write_text(out.join(RQ1_RQ2_CSV), &csv_rq1_rq2(&analysis))?,
        write_text(out.join(RQ3_TXT), &render_rq3(&analysis))?,
        write_text(out.join(RQ3_CSV), &csv_rq3(&analysis))?,
        write_text(out.join(RQ4_TXT), &render_rq4(&analysis))?,
        write_text(out.join(RQ4_CSV), &csv_rq4(&analysis))?,
    ];
    let summary_path = out.join(ANALYZE_SUMMARY);
    jsonl::write_summary(&summary_path, &analysis)?;
    let mut files = files;
    files.push(summary_path);
    Ok(StageOutcome {
        stage: Stage::Analyze,
        summary: format!(
            "{} messages, {} ecosystems ranked, reports written",
            analysis.messages,
            analysis.ecosystems.ranked.len()
        ),
        files,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_names() {
        for s in Stage::ALL {
            assert_eq!(s.name().parse::<Stage>(), Ok(s));
        }
        assert!("report".parse::<Stage>().is_err());
    }

    #[test]
    fn missing_prerequisite_names_stage() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = PipelineConfig { out: dir.path().to_path_buf(), ..Default::default() };
        for (stage, needed) in [
            (Stage::Extract, "ingest"),
            (Stage::Resolve, "extract"),
            (Stage::Clean, "resolve"),
            (Stage::Classify, "clean"),
            (Stage::Analyze, "classify"),
        ] {
            match run_stage(stage, &cfg, Execution::Sequential) {
                Err(Error::MissingPrerequisite { stage, .. }) => assert_eq!(stage, needed),
                other => panic!("{other:?}"),
            }
        }
        assert!(matches!(run_stage(Stage::Ingest, &cfg, Execution::Sequential), Err(Error::Config(_))));
    }

    #[test]
    fn manifest_timestamp_is_pinnable() {
        // Only checks the format; the env var is process-global.
        let m = run_manifest(&PipelineConfig::default()).unwrap();
        assert!(m.generated_at.ends_with('Z'));
        assert_eq!(m.data_versions["dictionary"], "2026.1");
    }
}
