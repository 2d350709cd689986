//! Patch commit references pulled out of vulnerability reference URLs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::ingest::VulnerabilityRecord;
use crate::{Error, Result};

pub const DEFAULT_PATTERNS: &str = include_str!("../../data/patterns.tsv");

/// Git's usual minimum abbreviation; shorter hex runs are not treated as hashes.
pub const MIN_HASH_LEN: usize = 7;
pub const FULL_HASH_LEN: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Platform {
    GitHub,
    GitLab,
    /// cgit or gitweb front ends, as run by git.kernel.org.
    Cgit,
    Bitbucket,
    GenericGit,
    Unknown,
}

impl Platform {
    fn from_pattern_name(name: &str) -> Self {
        let prefix = name.split(['-', '_']).next().unwrap_or_default().to_ascii_lowercase();
        match prefix.as_str() {
            "github" => Platform::GitHub,
            "gitlab" => Platform::GitLab,
            "cgit" | "gitweb" | "kernel" => Platform::Cgit,
            "bitbucket" => Platform::Bitbucket,
            "generic" => Platform::GenericGit,
            _ => Platform::Unknown,
        }
    }
}

impl fmt::Display for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Platform::GitHub => "github",
            Platform::GitLab => "gitlab",
            Platform::Cgit => "cgit",
            Platform::Bitbucket => "bitbucket",
            Platform::GenericGit => "generic-git",
            Platform::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchReference {
    pub vuln_id: String,
    pub url: String,
    pub platform: Platform,
    pub origin: String,
    pub hash: String,
    pub is_short: bool,
}

#[derive(Debug, Clone)]
struct UrlPattern {
    name: String,
    platform: Platform,
    regex: Regex,
}

/// An ordered, named set of URL patterns.
#[derive(Debug, Clone)]
pub struct PatternSet {
    patterns: Vec<UrlPattern>,
    version: String,
}

/// Pulls `version: X` out of a `#` comment line, if that is what it holds.
pub(crate) fn version_comment(line: &str) -> Option<&str> {
    let body = line.strip_prefix('#')?.trim();
    body.strip_prefix("version:").map(str::trim)
}

impl PatternSet {
    pub fn bundled() -> Self {
        Self::parse(DEFAULT_PATTERNS, Path::new("<bundled patterns>")).expect("bundled pattern file is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut patterns: Vec<UrlPattern> = Vec::new();
        let mut version = String::from("unversioned");
        for (idx, line) in text.lines().enumerate() {
            let syntax = |message: String| Error::Syntax { path: path.to_path_buf(), line: idx + 1, message };
            if let Some(v) = version_comment(line) {
                version = v.to_string();
                continue;
            }
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (name, regex) = line.split_once('\t').ok_or_else(|| syntax("expected `name<TAB>regex`".into()))?;
            let name = name.trim();
            if name.is_empty() {
                return Err(syntax("empty pattern name".into()));
            }
            if patterns.iter().any(|p| p.name == name) {
                return Err(syntax(format!("duplicate pattern name {name:?}")));
            }
            let regex = Regex::new(regex.trim()).map_err(|e| syntax(e.to_string()))?;
            let groups: Vec<_> = regex.capture_names().flatten().collect();
            if !groups.contains(&"origin") || !groups.contains(&"hash") {
                return Err(syntax("pattern must define `origin` and `hash` groups".into()));
            }
            patterns.push(UrlPattern { platform: Platform::from_pattern_name(name), name: name.to_string(), regex });
        }
        Ok(PatternSet { patterns, version })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// Matches a single URL: `(pattern name, platform, origin, lowercase hash)`.
    pub fn match_url(&self, url: &str) -> Option<(&str, Platform, String, String)> {
        let cleaned = clean_url(url);
        self.patterns.iter().find_map(|p| {
            let caps = p.regex.captures(cleaned)?;
            let origin = caps.name("origin")?;
            let hash = caps.name("hash")?.as_str();
            // Reject hex runs that continue past the captured group.
            let end = caps.name("hash")?.end();
            if cleaned[end..].starts_with(|c: char| c.is_ascii_hexdigit()) {
                return None;
            }
            if !(MIN_HASH_LEN..=FULL_HASH_LEN).contains(&hash.len()) {
                return None;
            }
            let origin = origin.as_str().trim_end_matches('/').to_string();
            Some((p.name.as_str(), p.platform, origin, hash.to_ascii_lowercase()))
        })
    }

    /// One reference per matching URL of `record`; repeated URLs collapse.
    pub fn extract_patch_refs(&self, record: &VulnerabilityRecord) -> Vec<PatchReference> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for url in &record.references {
            if !seen.insert(url.as_str()) {
                continue;
            }
            if let Some((_, platform, origin, hash)) = self.match_url(url) {
                out.push(PatchReference {
                    vuln_id: record.id.clone(),
                    url: url.clone(),
                    platform,
                    is_short: hash.len() < FULL_HASH_LEN,
                    origin,
                    hash,
                });
            }
        }
        out
    }
}

/// Drops any `#fragment` and a trailing `.patch`/`.diff`.
fn clean_url(url: &str) -> &str {
    let url = url.trim();
    let url = url.split_once('#').map_or(url, |(head, _)| head);
    url.strip_suffix(".patch").or_else(|| url.strip_suffix(".diff")).unwrap_or(url)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HashSource {
    pub vuln_id: String,
    pub origin: String,
}

/// One line of `hashes.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashEntry {
    pub hash: String,
    pub is_short: bool,
    pub sources: Vec<HashSource>,
}

/// Global set of patch hashes with every (vulnerability, origin) that cited it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HashSet {
    pub entries: BTreeMap<String, BTreeSet<HashSource>>,
}

impl HashSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn short_count(&self) -> usize {
        self.entries.keys().filter(|h| h.len() < FULL_HASH_LEN).count()
    }

    pub fn to_entries(&self) -> Vec<HashEntry> {
        self.entries
            .iter()
            .map(|(hash, sources)| HashEntry {
                hash: hash.clone(),
                is_short: hash.len() < FULL_HASH_LEN,
                sources: sources.iter().cloned().collect(),
            })
            .collect()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = HashEntry>) -> Self {
        let mut set = HashSet::default();
        for e in entries {
            set.entries.entry(e.hash.to_ascii_lowercase()).or_default().extend(e.sources);
        }
        set
    }
}

/// Deduplicates by lowercase hash, keeping all provenance pairs.
pub fn collect_hashes<'a>(refs: impl IntoIterator<Item = &'a PatchReference>) -> HashSet {
    let mut set = HashSet::default();
    for r in refs {
        set.entries
            .entry(r.hash.to_ascii_lowercase())
            .or_default()
            .insert(HashSource { vuln_id: r.vuln_id.clone(), origin: r.origin.clone() });
    }
    set
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Source;

    fn m(url: &str) -> Option<(Platform, String, String)> {
        PatternSet::bundled().match_url(url).map(|(_, p, o, h)| (p, o, h))
    }

    #[test]
    fn github_full_hash() {
        let (p, o, h) = m("https://github.com/OWNER/REPO/commit/0123456789abcdef0123456789abcdef01234567").unwrap();
        assert_eq!(p, Platform::GitHub);
        assert_eq!(o, "https://github.com/OWNER/REPO");
        assert_eq!(h.len(), 40);
    }

    #[test]
    fn non_commit_url_is_ignored() {
        assert!(m("https://example.org/advisory.html").is_none());
        assert!(m("https://github.com/OWNER/REPO/issues/12").is_none());
        assert!(m("https://github.com/OWNER/REPO/commit/abc12").is_none(), "shorter than 7 hex digits");
    }

    #[test]
    fn kernel_cgit_short_hash() {
        let (p, o, h) =
            m("https://git.kernel.org/pub/scm/linux/kernel/git/torvalds/linux.git/commit/?id=abc1234").unwrap();
        assert_eq!(p, Platform::Cgit);
        assert_eq!(o, "https://git.kernel.org/pub/scm/linux/kernel/git/torvalds/linux.git");
        assert_eq!(h, "abc1234");

        let (p, _, h) =
            m("https://git.kernel.org/cgit/linux/kernel/git/torvalds/linux.git/commit/?h=v4.9&id=0123abcd0123")
                .unwrap();
        assert_eq!(p, Platform::Cgit);
        assert_eq!(h, "0123abcd0123");
    }

    #[test]
    fn other_platforms() {
        let (p, o, _) =
            m("https://gitlab.com/gnutls/gnutls/-/commit/3f4a3e0b1e9a8b7c6d5e4f3a2b1c0d9e8f7a6b5c").unwrap();
        assert_eq!((p, o.as_str()), (Platform::GitLab, "https://gitlab.com/gnutls/gnutls"));
        let (p, o, _) = m("https://salsa.debian.org/debian/foo/-/commit/3f4a3e0b1e9a").unwrap();
        assert_eq!((p, o.as_str()), (Platform::GitLab, "https://salsa.debian.org/debian/foo"));
        let (p, _, _) = m("https://bitbucket.org/team/repo/commits/3f4a3e0b1e9a").unwrap();
        assert_eq!(p, Platform::Bitbucket);
        let (p, o, h) = m("https://git.example.org/?p=proj.git;a=commit;h=3f4a3e0b1e9a").unwrap();
        assert_eq!(
            (p, o.as_str(), h.as_str()),
            (Platform::Cgit, "https://git.example.org/?p=proj.git", "3f4a3e0b1e9a")
        );
        let (p, o, _) = m("https://code.example.net/proj/commit/3F4A3E0B1E9A").unwrap();
        assert_eq!((p, o.as_str()), (Platform::GenericGit, "https://code.example.net/proj"));
        let (p, _, h) = m("https://github.com/a/b/pull/77/commits/3f4a3e0b1e9a8b7c").unwrap();
        assert_eq!((p, h.as_str()), (Platform::GitHub, "3f4a3e0b1e9a8b7c"));
    }

    #[test]
    fn fragments_and_patch_suffixes_are_stripped() {
        let (_, _, h) = m("https://github.com/a/b/commit/3f4a3e0b1e9a8b7c#diff-1234abcd").unwrap();
        assert_eq!(h, "3f4a3e0b1e9a8b7c");
        let (_, _, h) = m("https://github.com/a/b/commit/3f4a3e0b1e9a8b7c.patch").unwrap();
        assert_eq!(h, "3f4a3e0b1e9a8b7c");
    }

    #[test]
    fn extraction_collapses_duplicate_urls() {
        let mut r = VulnerabilityRecord::new("GHSA-f5pm-c4cw-563p", Source::Osv);
        r.references = vec![
            "https://github.com/a/b/commit/1111111111111111111111111111111111111111".into(),
            "https://github.com/a/b/commit/1111111111111111111111111111111111111111".into(),
            "https://github.com/a/b/commit/2222222".into(),
            "https://example.org/advisory".into(),
        ];
        let refs = PatternSet::bundled().extract_patch_refs(&r);
        assert_eq!(refs.len(), 2);
        assert!(!refs[0].is_short);
        assert!(refs[1].is_short);
        assert!(refs.iter().all(|x| x.vuln_id == "GHSA-f5pm-c4cw-563p"));
    }

    fn pref(vuln: &str, hash: &str) -> PatchReference {
        PatchReference {
            vuln_id: vuln.into(),
            url: format!("https://github.com/a/b/commit/{hash}"),
            platform: Platform::GitHub,
            origin: "https://github.com/a/b".into(),
            hash: hash.into(),
            is_short: hash.len() < 40,
        }
    }

    #[test]
    fn hash_collection() {
        let set = collect_hashes(&[pref("CVE-1-1", "abcdef12"), pref("GHSA-x", "abcdef12")]);
        assert_eq!(set.len(), 1);
        assert_eq!(set.entries["abcdef12"].len(), 2);

        assert!(collect_hashes(&[]).is_empty());

        let set = collect_hashes(&[pref("CVE-1-1", "ABCDEF12"), pref("CVE-1-1", "abcdef12")]);
        assert_eq!(set.entries.keys().collect::<Vec<_>>(), vec!["abcdef12"]);

        let round = HashSet::from_entries(set.to_entries());
        assert_eq!(round, set);
    }

    #[test]
    fn pattern_file_errors() {
        let p = Path::new("p.tsv");
        assert!(matches!(PatternSet::parse("no-tab-here", p), Err(Error::Syntax { line: 1, .. })));
        assert!(PatternSet::parse("a\t(?P<origin>x)", p).is_err());
        assert!(PatternSet::parse("a\t(?P<origin>x)(?P<hash>y)\na\t(?P<origin>x)(?P<hash>y)", p).is_err());
        let ok = PatternSet::parse("# version: 7\nx-y\t(?P<origin>x)(?P<hash>y)", p).unwrap();
        assert_eq!(ok.version(), "7");
        assert_eq!(ok.len(), 1);
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn emitted_hash_is_substring_of_url(
            host in "(github\\.com|gitlab\\.com|git\\.kernel\\.org|code\\.example\\.org)",
            path in "[a-z]{1,8}/[a-z]{1,8}",
            sep in "(/commit/|/-/commit/|/commit/\\?id=|/commits/)",
            hash in "[0-9a-fA-F]{1,45}",
            tail in "(|/|\\?w=1|#diff-00|\\.patch)",
        ) {
            let url = format!("https://{host}/{path}{sep}{hash}{tail}");
            let set = PatternSet::bundled();
            let first = set.match_url(&url);
            prop_assert_eq!(&first, &set.match_url(&url));
            if let Some((_, _, origin, h)) = first {
                prop_assert!(url.to_ascii_lowercase().contains(&h));
                prop_assert!(url.starts_with(&origin));
                prop_assert!((MIN_HASH_LEN..=FULL_HASH_LEN).contains(&h.len()));
                prop_assert!(h.chars().all(|c| c.is_ascii_digit() || ('a'..='f').contains(&c)));
            }
        }
    }
}
