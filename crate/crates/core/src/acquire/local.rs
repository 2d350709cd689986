use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use chrono::{DateTime, Utc};
use serde::Deserialize;

use super::{decode_message, BackendError, Revision, RevisionBackend, SourceBackend};
use crate::refs::FULL_HASH_LEN;
use crate::{Error, Result};

/// Read-only, in-memory revision index keyed by full hash.
///
/// When the same hash occurs in several repositories the first one loaded
/// wins; forks share history, so the message is the same.
#[derive(Debug, Clone, Default)]
pub struct LocalStore {
    revisions: BTreeMap<String, Revision>,
}

#[derive(Deserialize)]
struct StoreLine {
    hash: String,
    message: String,
    author_date: String,
    origin: String,
    #[serde(default)]
    author: String,
}

impl LocalStore {
    pub fn from_revisions(revisions: impl IntoIterator<Item = Revision>) -> Self {
        let mut store = LocalStore::default();
        for rev in revisions {
            store.insert(rev);
        }
        store
    }

    fn insert(&mut self, mut rev: Revision) {
        rev.hash = rev.hash.to_ascii_lowercase();
        rev.message = rev.message.trim_end().to_string();
        self.revisions.entry(rev.hash.clone()).or_insert(rev);
    }

    pub fn len(&self) -> usize {
        self.revisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.revisions.is_empty()
    }

    /// Loads `{hash, message, author_date, origin[, author]}` lines.
    pub fn from_jsonl(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut store = LocalStore::default();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let syntax = |message: String| Error::Syntax { path: path.to_path_buf(), line: idx + 1, message };
            let raw: StoreLine = serde_json::from_str(line).map_err(|source| Error::Json {
                path: path.to_path_buf(),
                line: idx + 1,
                source,
            })?;
            if raw.hash.len() != FULL_HASH_LEN || !raw.hash.bytes().all(|b| b.is_ascii_hexdigit()) {
                return Err(syntax(format!("{:?} is not a full commit hash", raw.hash)));
            }
            let author_date = DateTime::parse_from_rfc3339(&raw.author_date)
                .map_err(|e| syntax(format!("bad author_date: {e}")))?
                .with_timezone(&Utc);
            store.insert(Revision {
                hash: raw.hash,
                message: raw.message,
                author: raw.author,
                author_date,
                origin: Some(raw.origin),
            });
        }
        Ok(store)
    }

    /// Indexes every git repository directly under `dir` (or `dir` itself).
    ///
    /// Needs a `git` executable on `PATH`. The origin is `remote.origin.url`
    /// when set, else a `file://` URL of the repository path.
    pub fn from_git_dir(dir: &Path) -> Result<Self> {
        if !dir.is_dir() {
            return Err(Error::NotFound { path: dir.to_path_buf() });
        }
        let mut repos: Vec<PathBuf> = Vec::new();
        if is_git_repo(dir) {
            repos.push(dir.to_path_buf());
        } else {
            let mut children: Vec<PathBuf> = std::fs::read_dir(dir)
                .map_err(|e| Error::io(dir, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_dir())
                .collect();
            children.sort();
            repos.extend(children.into_iter().filter(|p| is_git_repo(p)));
        }
        let mut store = LocalStore::default();
        for repo in repos {
            for rev in read_repo(&repo)? {
                store.insert(rev);
            }
        }
        Ok(store)
    }
}

fn git(repo: &Path) -> Command {
    let mut cmd = Command::new("git");
    cmd.arg("-C").arg(repo);
    cmd
}

fn is_git_repo(path: &Path) -> bool {
    git(path).args(["rev-parse", "--git-dir"]).output().map(|o| o.status.success()).unwrap_or(false)
}

const FIELD: u8 = 0x1f;
const RECORD: u8 = 0x1e;

fn read_repo(repo: &Path) -> Result<Vec<Revision>> {
    let origin = git(repo)
        .args(["config", "--get", "remote.origin.url"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| {
            let abs = repo.canonicalize().unwrap_or_else(|_| repo.to_path_buf());
            format!("file://{}", abs.display())
        });

    let out = git(repo)
        .args(["log", "--all", "--format=%H%x1f%an%x1f%aI%x1f%B%x1e"])
        .output()
        .map_err(|e| Error::io(repo, e))?;
    if !out.status.success() {
        // An empty repository has no HEAD; treat it as having no commits.
        return Ok(Vec::new());
    }

    let mut revisions = Vec::new();
    for record in out.stdout.split(|&b| b == RECORD) {
        let record = record.strip_prefix(b"\n").unwrap_or(record);
        if record.is_empty() {
            continue;
        }
        let fields: Vec<&[u8]> = record.splitn(4, |&b| b == FIELD).collect();
        let [hash, author, date, body] = fields[..] else {
            continue;
        };
        let date = String::from_utf8_lossy(date);
        let Ok(author_date) = DateTime::parse_from_rfc3339(date.trim()) else {
            tracing::warn!(repo = %repo.display(), "skipping commit with unparseable author date {date:?}");
            continue;
        };
        revisions.push(Revision {
            hash: String::from_utf8_lossy(hash).trim().to_string(),
            message: decode_message(body),
            author: String::from_utf8_lossy(author).into_owned(),
            author_date: author_date.with_timezone(&Utc),
            origin: Some(origin.clone()),
        });
    }
    Ok(revisions)
}

impl RevisionBackend for LocalStore {
    fn kind(&self) -> SourceBackend {
        SourceBackend::LocalStore
    }

    fn get(&self, hash: &str) -> std::result::Result<Option<Revision>, BackendError> {
        Ok(self.revisions.get(hash).cloned())
    }

    fn find_prefix(&self, prefix: &str) -> std::result::Result<Vec<Revision>, BackendError> {
        Ok(self
            .revisions
            .range(prefix.to_string()..)
            .take_while(|(k, _)| k.starts_with(prefix))
            .map(|(_, v)| v.clone())
            .collect())
    }
}
