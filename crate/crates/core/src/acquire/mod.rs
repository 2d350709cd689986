//! Resolution of patch hashes to commit messages.
//!
//! Two backends share one contract ([`RevisionBackend`]): an HTTP client for a
//! source-code archive API and an offline [`LocalStore`]. Short hashes are
//! prefix lookups; a prefix with more than one distinct revision is reported
//! as ambiguous and never resolved.

mod archive;
mod local;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub use archive::{ArchiveClient, ArchiveConfig};
pub use local::LocalStore;

use crate::refs::{HashSet, FULL_HASH_LEN, MIN_HASH_LEN};
use crate::{Error, Execution, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Forge {
    GitHub,
    Other,
}

impl fmt::Display for Forge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Forge::GitHub => "GitHub",
            Forge::Other => "Other",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceBackend {
    ArchiveApi,
    LocalStore,
}

/// A revision as a backend returns it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Revision {
    pub hash: String,
    pub message: String,
    #[serde(default)]
    pub author: String,
    pub author_date: DateTime<Utc>,
    #[serde(default)]
    pub origin: Option<String>,
}

/// A resolved commit. One line of `commits.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitMessage {
    pub hash: String,
    pub message: String,
    pub author: String,
    pub author_date: DateTime<Utc>,
    pub origin: String,
    pub forge: Forge,
    pub source_backend: SourceBackend,
    /// Vulnerability records that cited this commit.
    #[serde(default)]
    pub vuln_ids: Vec<String>,
}

/// Decodes raw message bytes as UTF-8 with replacement characters, dropping
/// only trailing whitespace of the whole text.
pub fn decode_message(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).trim_end().to_string()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendError {
    /// Network or server failure; retrying later may succeed.
    Transport(String),
    /// The backend asked us to slow down and retries ran out.
    RateLimited(String),
}

impl fmt::Display for BackendError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendError::Transport(m) => write!(f, "transport error: {m}"),
            BackendError::RateLimited(m) => write!(f, "rate limited: {m}"),
        }
    }
}

pub trait RevisionBackend: Send + Sync {
    fn kind(&self) -> SourceBackend;

    /// Exact lookup by full hash.
    fn get(&self, hash: &str) -> std::result::Result<Option<Revision>, BackendError>;

    /// Every revision whose hash starts with `prefix`.
    fn find_prefix(&self, prefix: &str) -> std::result::Result<Vec<Revision>, BackendError>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution {
    Found(Revision),
    Missing,
    /// Number of distinct revisions sharing the prefix.
    Ambiguous(usize),
}

fn valid_hash(hash: &str) -> bool {
    (MIN_HASH_LEN..=FULL_HASH_LEN).contains(&hash.len())
        && hash.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
}

pub fn resolve_hash(
    backend: &dyn RevisionBackend,
    hash: &str,
    is_short: bool,
) -> Result<std::result::Result<Resolution, BackendError>> {
    if !valid_hash(hash) {
        return Err(Error::InvalidHash(hash.to_string()));
    }
    if !is_short && hash.len() == FULL_HASH_LEN {
        return Ok(backend.get(hash).map(|found| found.map_or(Resolution::Missing, Resolution::Found)));
    }
    Ok(backend.find_prefix(hash).map(|mut candidates| {
        candidates.retain(|r| r.hash.starts_with(hash));
        candidates.sort_by(|a, b| a.hash.cmp(&b.hash));
        candidates.dedup_by(|a, b| a.hash == b.hash);
        match candidates.len() {
            0 => Resolution::Missing,
            1 => Resolution::Found(candidates.pop().expect("one candidate")),
            n => Resolution::Ambiguous(n),
        }
    }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum ExclusionReason {
    Missing,
    AmbiguousShort { candidates: usize },
    Unreachable { error: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub hash: String,
    #[serde(flatten)]
    pub reason: ExclusionReason,
}

/// Tallies per input hash. Unreachable hashes count as missing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionReport {
    pub input: usize,
    pub resolved: usize,
    pub missing: usize,
    pub ambiguous_short: usize,
    pub excluded: Vec<Exclusion>,
}

/// Maps an origin URL to GitHub (github.com or any subdomain) or other.
pub fn classify_forge(origin: &str) -> Forge {
    let host = match url::Url::parse(origin.trim()) {
        Ok(u) => u.host_str().map(str::to_ascii_lowercase),
        Err(_) => scp_host(origin),
    };
    match host {
        Some(h) if h == "github.com" || h.ends_with(".github.com") => Forge::GitHub,
        Some(_) => Forge::Other,
        None => {
            tracing::warn!(origin, "unparseable origin, classified as other forge");
            Forge::Other
        }
    }
}

/// Host of an scp-like remote such as `git@github.com:owner/repo.git`.
fn scp_host(origin: &str) -> Option<String> {
    let (user_host, _) = origin.trim().split_once(':')?;
    let host = user_host.rsplit_once('@').map_or(user_host, |(_, h)| h);
    (!host.is_empty() && !host.contains('/')).then(|| host.to_ascii_lowercase())
}

/// Resolves every hash. Output is sorted by full hash and deduplicated when
/// several inputs expand to the same commit.
///
/// Fails only when the set is non-empty and every lookup hit a backend error.
pub fn resolve_all(
    backend: &dyn RevisionBackend,
    hashes: &HashSet,
    exec: Execution,
) -> Result<(Vec<CommitMessage>, ResolutionReport)> {
    let inputs: Vec<(&String, _)> = hashes.entries.iter().collect();
    let outcomes = exec.map(&inputs, |(hash, _)| resolve_hash(backend, hash, hash.len() < FULL_HASH_LEN));

    let mut report = ResolutionReport { input: inputs.len(), ..Default::default() };
    let mut found: BTreeMap<String, (Revision, BTreeSet<String>, BTreeSet<String>)> = BTreeMap::new();
    let mut failures = 0;
    let mut last_failure = String::new();

    for ((hash, sources), outcome) in inputs.iter().zip(outcomes) {
        match outcome? {
            Ok(Resolution::Found(rev)) => {
                report.resolved += 1;
                let entry = found.entry(rev.hash.clone()).or_insert_with(|| (rev, BTreeSet::new(), BTreeSet::new()));
                for s in sources.iter() {
                    entry.1.insert(s.vuln_id.clone());
                    entry.2.insert(s.origin.clone());
                }
            }
            Ok(Resolution::Missing) => {
                report.missing += 1;
                report.excluded.push(Exclusion { hash: hash.to_string(), reason: ExclusionReason::Missing });
            }
            Ok(Resolution::Ambiguous(n)) => {
                report.ambiguous_short += 1;
                report.excluded.push(Exclusion {
                    hash: hash.to_string(),
                    reason: ExclusionReason::AmbiguousShort { candidates: n },
                });
            }
            Err(e) => {
                failures += 1;
                last_failure = e.to_string();
                report.missing += 1;
                report.excluded.push(Exclusion {
                    hash: hash.to_string(),
                    reason: ExclusionReason::Unreachable { error: e.to_string() },
                });
            }
        }
    }
    if failures > 0 && failures == inputs.len() {
        return Err(Error::BackendUnusable(last_failure));
    }

    let kind = backend.kind();
    let messages = found
        .into_values()
        .map(|(rev, vuln_ids, origins)| {
            let origin = rev.origin.clone().or_else(|| origins.into_iter().next()).unwrap_or_default();
            CommitMessage {
                forge: classify_forge(&origin),
                message: rev.message.trim_end().to_string(),
                hash: rev.hash,
                author: rev.author,
                author_date: rev.author_date,
                origin,
                source_backend: kind,
                vuln_ids: vuln_ids.into_iter().collect(),
            }
        })
        .collect();
    Ok((messages, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refs::HashSource;
    use chrono::TimeZone;

    pub(crate) fn rev(hash: &str, origin: Option<&str>) -> Revision {
        Revision {
            hash: hash.into(),
            message: format!("Fix bug {hash}\n\n"),
            author: "alice".into(),
            author_date: Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap(),
            origin: origin.map(str::to_string),
        }
    }

    fn h(prefix: &str) -> String {
        format!("{prefix:0<40}")
    }

    fn set_of(hashes: &[&str]) -> HashSet {
        let mut set = HashSet::default();
        for hash in hashes {
            set.entries
                .entry(hash.to_string())
                .or_default()
                .insert(HashSource { vuln_id: "CVE-2020-1".into(), origin: "https://gitlab.com/x/y".into() });
        }
        set
    }

    #[test]
    fn forge_classification() {
        assert_eq!(classify_forge("https://github.com/x/y"), Forge::GitHub);
        assert_eq!(classify_forge("https://www.github.com/x/y"), Forge::GitHub);
        assert_eq!(classify_forge("git@github.com:x/y.git"), Forge::GitHub);
        assert_eq!(classify_forge("https://git.kernel.org/pub/scm/linux"), Forge::Other);
        assert_eq!(classify_forge("https://gitlab.com/x/y"), Forge::Other);
        assert_eq!(classify_forge("https://notgithub.com/x"), Forge::Other);
        assert_eq!(classify_forge("???"), Forge::Other);
    }

    #[test]
    fn resolve_single_hashes() {
        let store = LocalStore::from_revisions([
            rev(&h("aaaa1111"), None),
            rev(&h("bbbb2222a"), None),
            rev(&h("bbbb2222b"), None),
        ]);
        let full = resolve_hash(&store, &h("aaaa1111"), false).unwrap().unwrap();
        assert!(matches!(full, Resolution::Found(r) if r.hash == h("aaaa1111")));
        let short = resolve_hash(&store, "aaaa111", true).unwrap().unwrap();
        assert!(matches!(short, Resolution::Found(_)));
        let amb = resolve_hash(&store, "bbbb2222", true).unwrap().unwrap();
        assert_eq!(amb, Resolution::Ambiguous(2));
        let missing = resolve_hash(&store, &h("cccc"), false).unwrap().unwrap();
        assert_eq!(missing, Resolution::Missing);
        assert!(matches!(resolve_hash(&store, "xyz", true), Err(Error::InvalidHash(_))));
        assert!(matches!(resolve_hash(&store, "ABCDEF12", true), Err(Error::InvalidHash(_))));
    }

    #[test]
    fn report_tallies() {
        let store = LocalStore::from_revisions([
            rev(&h("aaaa1111"), None),
            rev(&h("bbbb2222a"), None),
            rev(&h("bbbb2222b"), None),
        ]);
        let set = set_of(&[&h("aaaa1111"), &h("dddd"), "bbbb2222"]);
        let (msgs, report) = resolve_all(&store, &set, Execution::Sequential).unwrap();
        assert_eq!((report.resolved, report.missing, report.ambiguous_short), (1, 1, 1));
        assert_eq!(report.input, 3);
        assert_eq!(msgs.len(), 1);
        assert_eq!(msgs[0].origin, "https://gitlab.com/x/y");
        assert_eq!(msgs[0].forge, Forge::Other);
        assert_eq!(msgs[0].vuln_ids, vec!["CVE-2020-1"]);
        assert!(!msgs[0].message.ends_with('\n'));

        let (msgs, report) = resolve_all(&store, &HashSet::default(), Execution::Parallel).unwrap();
        assert!(msgs.is_empty());
        assert_eq!(report, ResolutionReport::default());
    }

    #[test]
    fn ten_full_hashes() {
        let hashes: Vec<String> = (0..10).map(|i| h(&format!("{i:x}{i:x}{i:x}abc"))).collect();
        let store = LocalStore::from_revisions(hashes.iter().map(|x| rev(x, Some("https://github.com/o/r"))));
        let refs: Vec<&str> = hashes.iter().map(String::as_str).collect();
        let (msgs, report) = resolve_all(&store, &set_of(&refs), Execution::Parallel).unwrap();
        assert_eq!(msgs.len(), 10);
        assert_eq!((report.resolved, report.missing, report.ambiguous_short), (10, 0, 0));
        assert!(msgs.windows(2).all(|w| w[0].hash < w[1].hash));
        assert!(msgs.iter().all(|m| m.forge == Forge::GitHub));
    }

    #[test]
    fn short_and_full_inputs_for_one_commit_yield_one_message() {
        let store = LocalStore::from_revisions([rev(&h("abcdef1"), None)]);
        let set = set_of(&["abcdef1", &h("abcdef1")]);
        let (msgs, report) = resolve_all(&store, &set, Execution::Sequential).unwrap();
        assert_eq!(msgs.len(), 1);
        assert_eq!(report.resolved, 2);
    }

    struct Down;
    impl RevisionBackend for Down {
        fn kind(&self) -> SourceBackend {
            SourceBackend::ArchiveApi
        }
        fn get(&self, _: &str) -> std::result::Result<Option<Revision>, BackendError> {
            Err(BackendError::Transport("connection refused".into()))
        }
        fn find_prefix(&self, _: &str) -> std::result::Result<Vec<Revision>, BackendError> {
            Err(BackendError::Transport("connection refused".into()))
        }
    }

    #[test]
    fn unusable_backend_is_an_aggregate_error() {
        let err = resolve_all(&Down, &set_of(&[&h("aaaa")]), Execution::Sequential).unwrap_err();
        assert!(matches!(err, Error::BackendUnusable(_)));
    }
}
