use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;

use super::{tokenize, EntityCategory};
use crate::refs::version_comment;
use crate::{Error, Result};

pub const DEFAULT_DICTIONARY: &str = include_str!("../../data/dictionary.tsv");

#[derive(Debug, Clone)]
pub struct NamedPattern {
    pub name: String,
    pub regex: Regex,
}

/// Immutable once built; share it across threads by reference.
#[derive(Debug, Clone)]
pub struct EntityDictionary {
    phrases: BTreeMap<EntityCategory, BTreeSet<String>>,
    patterns: BTreeMap<EntityCategory, Vec<NamedPattern>>,
    version: String,
    /// First token to (category, phrase tokens), longest phrases first.
    pub(super) index: HashMap<String, Vec<(EntityCategory, Vec<String>)>>,
}

impl EntityDictionary {
    pub fn bundled() -> Self {
        static BUNDLED: OnceLock<EntityDictionary> = OnceLock::new();
        BUNDLED
            .get_or_init(|| {
                Self::parse(DEFAULT_DICTIONARY, Path::new("<bundled dictionary>")).expect("bundled dictionary is valid")
            })
            .clone()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let syntax = |line: usize, message: String| Error::Syntax { path: path.to_path_buf(), line, message };
        let mut phrases: BTreeMap<EntityCategory, BTreeSet<String>> =
            EntityCategory::ALL.iter().map(|c| (*c, BTreeSet::new())).collect();
        let mut patterns: BTreeMap<EntityCategory, Vec<NamedPattern>> =
            EntityCategory::ALL.iter().map(|c| (*c, Vec::new())).collect();
        let mut owner: BTreeMap<String, EntityCategory> = BTreeMap::new();
        let mut conflicts = BTreeSet::new();
        let mut names = BTreeSet::new();
        let mut version = None;

        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            if trimmed.starts_with('#') {
                if let Some(v) = version_comment(trimmed) {
                    version = Some(v.to_string());
                }
                continue;
            }
            let mut cols = raw.split('\t');
            let (Some(cat), Some(entry)) = (cols.next(), cols.next()) else {
                return Err(syntax(line, "expected CATEGORY<TAB>entry".into()));
            };
            let category: EntityCategory =
                cat.trim().parse().map_err(|_| syntax(line, format!("unknown category {:?}", cat.trim())))?;
            let entry = entry.trim();
            let name = cols.next().map(str::trim).filter(|n| !n.is_empty());
            if cols.next().is_some() {
                return Err(syntax(line, "too many columns".into()));
            }

            if let Some(body) = entry.strip_prefix('/').and_then(|e| e.strip_suffix('/')).filter(|b| !b.is_empty()) {
                let regex = Regex::new(body).map_err(|e| syntax(line, e.to_string()))?;
                let name =
                    name.map(str::to_string).unwrap_or_else(|| format!("{}-{line}", category.as_str().to_lowercase()));
                if !names.insert(name.clone()) {
                    return Err(syntax(line, format!("duplicate pattern name {name:?}")));
                }
                patterns.get_mut(&category).unwrap().push(NamedPattern { name, regex });
                continue;
            }
            if name.is_some() {
                return Err(syntax(line, "only patterns take a name column".into()));
            }
            let tokens = tokenize(entry).into_iter().map(|(_, t)| t).collect::<Vec<_>>();
            if tokens.is_empty() {
                return Err(syntax(line, format!("phrase {entry:?} has no word tokens")));
            }
            let phrase = tokens.join(" ");
            match owner.get(&phrase) {
                Some(prev) if *prev != category => {
                    conflicts.insert(format!("{phrase:?} in {} and {}", prev.as_str(), category.as_str()));
                }
                _ => {
                    owner.insert(phrase.clone(), category);
                    phrases.get_mut(&category).unwrap().insert(phrase);
                }
            }
        }
        if !conflicts.is_empty() {
            return Err(Error::DictionaryConflict(conflicts.into_iter().collect()));
        }
        if phrases.values().all(BTreeSet::is_empty) && patterns.values().all(Vec::is_empty) {
            tracing::warn!(path = %path.display(), "entity dictionary is empty");
        }
        Ok(Self::build(phrases, patterns, version.unwrap_or_else(|| "unversioned".into())))
    }

    fn build(
        phrases: BTreeMap<EntityCategory, BTreeSet<String>>,
        patterns: BTreeMap<EntityCategory, Vec<NamedPattern>>,
        version: String,
    ) -> Self {
        let mut index: HashMap<String, Vec<(EntityCategory, Vec<String>)>> = HashMap::new();
        for (cat, set) in &phrases {
            for phrase in set {
                let tokens: Vec<String> = phrase.split(' ').map(str::to_string).collect();
                index.entry(tokens[0].clone()).or_default().push((*cat, tokens));
            }
        }
        for candidates in index.values_mut() {
            candidates.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.cmp(b)));
        }
        EntityDictionary { phrases, patterns, version, index }
    }

    /// Returns a copy with one more phrase; fails on a cross-category clash.
    pub fn with_phrase(&self, category: EntityCategory, phrase: &str) -> Result<Self> {
        let tokens = tokenize(phrase).into_iter().map(|(_, t)| t).collect::<Vec<_>>();
        if tokens.is_empty() {
            return Err(Error::Contract(format!("phrase {phrase:?} has no word tokens")));
        }
        let phrase = tokens.join(" ");
        if let Some((other, _)) = self.phrases.iter().find(|(c, s)| **c != category && s.contains(&phrase)) {
            return Err(Error::DictionaryConflict(vec![format!(
                "{phrase:?} in {} and {}",
                other.as_str(),
                category.as_str()
            )]));
        }
        let mut phrases = self.phrases.clone();
        phrases.get_mut(&category).unwrap().insert(phrase);
        Ok(Self::build(phrases, self.patterns.clone(), self.version.clone()))
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn phrases(&self, category: EntityCategory) -> &BTreeSet<String> {
        &self.phrases[&category]
    }

    pub fn patterns(&self, category: EntityCategory) -> &[NamedPattern] {
        &self.patterns[&category]
    }
}
