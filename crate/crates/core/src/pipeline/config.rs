use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, Utc};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use super::baseline::Baseline;
use crate::acquire::{ArchiveClient, ArchiveConfig, LocalStore, RevisionBackend};
use crate::ccs::CcsTypes;
use crate::clean::{BotRules, CleanConfig, DEFAULT_REVIEW_THRESHOLD};
use crate::entity::EntityDictionary;
use crate::refs::PatternSet;
use crate::{Error, Result};

pub const DEFAULT_CUTOFFS: [&str; 2] = ["2022-08-12", "2025-10-07"];
pub const DEFAULT_MIN_GROUP_SIZE: usize = 100;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Local,
    Archive,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum TypeList {
    Joined(String),
    List(Vec<String>),
}

/// On-disk manifest. Relative paths resolve against the manifest's directory.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    osv_dump: Option<PathBuf>,
    nvd_dump: Option<PathBuf>,
    backend: Option<BackendKind>,
    local_store: Option<PathBuf>,
    archive_url: Option<String>,
    dictionary: Option<PathBuf>,
    bot_list: Option<PathBuf>,
    template_list: Option<PathBuf>,
    patterns: Option<PathBuf>,
    baseline: Option<PathBuf>,
    ccs_types: Option<TypeList>,
    cutoffs: Option<Vec<String>>,
    min_group_size: Option<usize>,
    lang_threshold: Option<f64>,
    out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub osv_dump: Option<PathBuf>,
    pub nvd_dump: Option<PathBuf>,
    pub backend: BackendKind,
    /// A JSONL revision file or a directory of git repositories.
    pub local_store: Option<PathBuf>,
    pub archive_url: Option<String>,
    pub dictionary: Option<PathBuf>,
    pub bot_list: Option<PathBuf>,
    pub template_list: Option<PathBuf>,
    pub patterns: Option<PathBuf>,
    pub baseline: Option<PathBuf>,
    /// Comma-separated; `None` keeps the default type set.
    pub ccs_types: Option<String>,
    /// Exclusive upper bounds on author_date, strictly increasing.
    pub cutoffs: Vec<DateTime<Utc>>,
    pub min_group_size: usize,
    pub lang_threshold: f64,
    pub out: PathBuf,
    /// SHA-256 of the manifest bytes, if loaded from a file.
    pub manifest_sha256: Option<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            osv_dump: None,
            nvd_dump: None,
            backend: BackendKind::Local,
            local_store: None,
            archive_url: None,
            dictionary: None,
            bot_list: None,
            template_list: None,
            patterns: None,
            baseline: None,
            ccs_types: None,
            cutoffs: DEFAULT_CUTOFFS.iter().map(|c| parse_cutoff(c).unwrap()).collect(),
            min_group_size: DEFAULT_MIN_GROUP_SIZE,
            lang_threshold: DEFAULT_REVIEW_THRESHOLD,
            out: PathBuf::from("out"),
            manifest_sha256: None,
        }
    }
}

/// `YYYY-MM-DD` (midnight UTC) or RFC 3339.
pub fn parse_cutoff(raw: &str) -> Result<DateTime<Utc>> {
    let raw = raw.trim();
    if let Ok(d) = NaiveDate::parse_from_str(raw, "%Y-%m-%d") {
        return Ok(d.and_hms_opt(0, 0, 0).unwrap().and_utc());
    }
    DateTime::parse_from_rfc3339(raw)
        .map(|d| d.with_timezone(&Utc))
        .map_err(|_| Error::Config(format!("cutoff {raw:?} is neither YYYY-MM-DD nor RFC 3339")))
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: Manifest =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rel = |p: Option<PathBuf>| p.map(|p| if p.is_absolute() { p } else { base.join(p) });
        let defaults = PipelineConfig::default();
        let cutoffs = match manifest.cutoffs {
            Some(list) => list.iter().map(|c| parse_cutoff(c)).collect::<Result<_>>()?,
            None => defaults.cutoffs,
        };
        Ok(PipelineConfig {
            osv_dump: rel(manifest.osv_dump),
            nvd_dump: rel(manifest.nvd_dump),
            backend: manifest.backend.unwrap_or_default(),
            local_store: rel(manifest.local_store),
            archive_url: manifest.archive_url,
            dictionary: rel(manifest.dictionary),
            bot_list: rel(manifest.bot_list),
            template_list: rel(manifest.template_list),
            patterns: rel(manifest.patterns),
            baseline: rel(manifest.baseline),
            ccs_types: manifest.ccs_types.map(|t| match t {
                TypeList::Joined(s) => s,
                TypeList::List(v) => v.join(","),
            }),
            cutoffs,
            min_group_size: manifest.min_group_size.unwrap_or(defaults.min_group_size),
            lang_threshold: manifest.lang_threshold.unwrap_or(defaults.lang_threshold),
            out: rel(manifest.out).unwrap_or(defaults.out),
            manifest_sha256: Some(format!("{:x}", Sha256::digest(text.as_bytes()))),
        })
    }

    /// Checks that referenced files exist and values are in range.
    pub fn validate(&self) -> Result<()> {
        for (key, path) in [
            ("osv_dump", &self.osv_dump),
            ("nvd_dump", &self.nvd_dump),
            ("local_store", &self.local_store),
            ("dictionary", &self.dictionary),
            ("bot_list", &self.bot_list),
            ("template_list", &self.template_list),
            ("patterns", &self.patterns),
            ("baseline", &self.baseline),
        ] {
            if let Some(p) = path {
                if !p.exists() {
                    return Err(Error::Config(format!("{key}: {} does not exist", p.display())));
                }
            }
        }
        if self.cutoffs.is_empty() {
            return Err(Error::Config("at least one cutoff is required".into()));
        }
        if self.cutoffs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("cutoffs must be strictly increasing".into()));
        }
        if !(self.lang_threshold > 0.0 && self.lang_threshold <= 1.0) {
            return Err(Error::Config(format!("lang_threshold {} is outside (0, 1]", self.lang_threshold)));
        }
        if self.min_group_size == 0 {
            return Err(Error::Config("min_group_size must be at least 1".into()));
        }
        self.ccs_types()?;
        Ok(())
    }

    pub fn dictionary(&self) -> Result<EntityDictionary> {
        self.dictionary.as_deref().map_or_else(|| Ok(EntityDictionary::bundled()), EntityDictionary::load)
    }

    pub fn patterns(&self) -> Result<PatternSet> {
        self.patterns.as_deref().map_or_else(|| Ok(PatternSet::bundled()), PatternSet::load)
    }

    pub fn clean_config(&self) -> Result<CleanConfig> {
        Ok(CleanConfig {
            bots: BotRules::load(self.bot_list.as_deref(), self.template_list.as_deref())?,
            review_threshold: self.lang_threshold,
        })
    }

    pub fn ccs_types(&self) -> Result<CcsTypes> {
        self.ccs_types.as_deref().map_or_else(|| Ok(CcsTypes::default()), CcsTypes::parse_list)
    }

    pub fn baseline(&self) -> Result<Baseline> {
        self.baseline.as_deref().map_or_else(|| Ok(Baseline::bundled()), Baseline::load)
    }

    pub fn backend(&self) -> Result<Box<dyn RevisionBackend>> {
        match self.backend {
            BackendKind::Local => {
                let path = self
                    .local_store
                    .as_deref()
                    .ok_or_else(|| Error::Config("backend \"local\" needs local_store".into()))?;
                let store = if path.is_dir() { LocalStore::from_git_dir(path)? } else { LocalStore::from_jsonl(path)? };
                Ok(Box::new(store))
            }
            BackendKind::Archive => {
                let mut cfg = ArchiveConfig::from_env();
                if let Some(url) = &self.archive_url {
                    cfg.base_url = url.trim_end_matches('/').to_string();
                }
                Ok(Box::new(ArchiveClient::new(cfg)))
            }
        }
    }
}
