//! Conventional Commits header checking, as a measurement rather than a lint.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DEFAULT_TYPES: [&str; 11] =
    ["build", "chore", "ci", "docs", "feat", "fix", "perf", "refactor", "revert", "style", "test"];

/// Lowercase type tokens accepted as a header type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CcsTypes(BTreeSet<String>);

impl Default for CcsTypes {
    fn default() -> Self {
        CcsTypes(DEFAULT_TYPES.iter().map(|t| t.to_string()).collect())
    }
}

impl CcsTypes {
    /// Parses a comma-separated list; must name at least one type.
    pub fn parse_list(list: &str) -> Result<Self> {
        let set: BTreeSet<String> =
            list.split(',').map(|t| t.trim().to_lowercase()).filter(|t| !t.is_empty()).collect();
        if set.is_empty() {
            return Err(Error::Config("commit type list is empty".into()));
        }
        if let Some(bad) = set.iter().find(|t| !t.chars().all(is_type_char)) {
            return Err(Error::Config(format!("invalid commit type {bad:?}")));
        }
        Ok(CcsTypes(set))
    }

    pub fn contains(&self, ty: &str) -> bool {
        self.0.contains(&ty.to_lowercase())
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "detail")]
pub enum NonCompliance {
    Empty,
    LeadingWhitespace,
    MergeHeader,
    /// No `type:` prefix at all.
    NoHeader,
    MalformedScope,
    /// The colon is not followed by exactly one space.
    Spacing,
    EmptyDescription,
    UnknownType(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CcsResult {
    pub compliant: bool,
    #[serde(rename = "type")]
    pub ty: Option<String>,
    pub scope: Option<String>,
    pub breaking: bool,
    pub description: Option<String>,
    pub reason: Option<NonCompliance>,
}

impl CcsResult {
    fn reject(reason: NonCompliance) -> Self {
        CcsResult { compliant: false, ty: None, scope: None, breaking: false, description: None, reason: Some(reason) }
    }

    /// `type(scope)!: description`, for compliant results.
    pub fn header(&self) -> Option<String> {
        let ty = self.ty.as_deref().filter(|_| self.compliant)?;
        let scope = self.scope.as_deref().map(|s| format!("({s})")).unwrap_or_default();
        let bang = if self.breaking { "!" } else { "" };
        Some(format!("{ty}{scope}{bang}: {}", self.description.as_deref().unwrap_or_default()))
    }
}

fn is_type_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

/// Only the first line decides compliance.
pub fn parse_ccs(message: &str, types: &CcsTypes) -> CcsResult {
    let header = message.split('\n').next().unwrap_or_default().trim_end_matches('\r');
    if header.trim().is_empty() {
        return CcsResult::reject(NonCompliance::Empty);
    }
    if header.starts_with(char::is_whitespace) {
        return CcsResult::reject(NonCompliance::LeadingWhitespace);
    }
    if header.starts_with("Merge ") {
        return CcsResult::reject(NonCompliance::MergeHeader);
    }

    let type_end = header.find(|c: char| !is_type_char(c)).unwrap_or(header.len());
    let ty = &header[..type_end];
    let mut rest = &header[type_end..];
    if ty.is_empty() || !rest.starts_with(['(', '!', ':']) {
        return CcsResult::reject(NonCompliance::NoHeader);
    }

    let mut scope = None;
    if let Some(after) = rest.strip_prefix('(') {
        let Some(close) = after.find(')') else {
            return CcsResult::reject(NonCompliance::MalformedScope);
        };
        let s = &after[..close];
        if s.trim().is_empty() || s.contains('(') {
            return CcsResult::reject(NonCompliance::MalformedScope);
        }
        scope = Some(s.to_string());
        rest = &after[close + 1..];
    }
    let breaking = rest.starts_with('!');
    if breaking {
        rest = &rest[1..];
    }
    let Some(rest) = rest.strip_prefix(':') else {
        return CcsResult::reject(NonCompliance::NoHeader);
    };
    if rest.trim().is_empty() {
        return CcsResult::reject(NonCompliance::EmptyDescription);
    }
    let Some(description) = rest.strip_prefix(' ').filter(|d| !d.starts_with(char::is_whitespace)) else {
        return CcsResult::reject(NonCompliance::Spacing);
    };

    let known = types.contains(ty);
    CcsResult {
        compliant: known,
        ty: Some(ty.to_string()),
        scope,
        breaking,
        description: Some(description.to_string()),
        reason: (!known).then(|| NonCompliance::UnknownType(ty.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn parse(m: &str) -> CcsResult {
        parse_ccs(m, &CcsTypes::default())
    }

    #[test]
    fn examples() {
        let r = parse("fix: prevent ldap injection in search endpoint");
        assert!(r.compliant);
        assert_eq!(r.ty.as_deref(), Some("fix"));
        assert_eq!(parse("Fixed LDAP injection").reason, Some(NonCompliance::NoHeader));
        let r = parse("feat(parser)!: drop legacy escaping");
        assert!(r.compliant && r.breaking);
        assert_eq!(r.scope.as_deref(), Some("parser"));
    }

    #[test]
    fn reasons() {
        for (m, reason) in [
            ("", NonCompliance::Empty),
            (" fix: x", NonCompliance::LeadingWhitespace),
            ("Merge pull request #3 from a/b", NonCompliance::MergeHeader),
            ("fix:x", NonCompliance::Spacing),
            ("fix:  x", NonCompliance::Spacing),
            ("fix: ", NonCompliance::EmptyDescription),
            ("fix(: x", NonCompliance::MalformedScope),
            ("fix(): x", NonCompliance::MalformedScope),
            ("fix(a) x", NonCompliance::NoHeader),
            ("security: x", NonCompliance::UnknownType("security".into())),
        ] {
            assert_eq!(parse(m).reason, Some(reason), "{m:?}");
            assert!(!parse(m).compliant);
        }
    }

    #[test]
    fn case_insensitive_type_and_custom_set() {
        assert!(parse("FIX: upper").compliant);
        let types = CcsTypes::parse_list("security, fix").unwrap();
        assert!(parse_ccs("security: x", &types).compliant);
        assert!(!parse_ccs("feat: x", &types).compliant);
        assert!(CcsTypes::parse_list(" , ").is_err());
        assert!(CcsTypes::parse_list("a b").is_err());
    }

    #[test]
    fn body_is_ignored() {
        assert!(parse("fix: a\n\nlong body\n\nBREAKING CHANGE: x").compliant);
        assert!(parse("fix: a\r\n\r\nbody").compliant);
    }

    proptest! {
        #[test]
        fn partition_body_and_round_trip(
            header in "[ a-zA-Z()!:#-]{0,30}",
            body in "[ a-z:\n]{0,40}",
        ) {
            let types = CcsTypes::default();
            let r = parse_ccs(&header, &types);
            prop_assert_eq!(r.compliant, r.reason.is_none());
            if r.compliant {
                prop_assert!(types.contains(r.ty.as_deref().unwrap()));
                prop_assert!(!r.description.as_deref().unwrap().trim().is_empty());
                prop_assert!(r.header().unwrap().eq_ignore_ascii_case(&header));
            }
            let header_line = header.split('\n').next().unwrap().to_string();
            let with_body = parse_ccs(&format!("{header_line}\n\n{body}"), &types);
            prop_assert_eq!(with_body.compliant, parse_ccs(&header_line, &types).compliant);
        }

        #[test]
        fn generated_headers_round_trip(
            ty in prop::sample::select(DEFAULT_TYPES.to_vec()),
            upper in any::<bool>(),
            scope in prop::option::of("[a-z][a-z/ ,-]{0,8}"),
            bang in any::<bool>(),
            desc in "[a-zA-Z][a-zA-Z0-9 .:()-]{0,30}",
        ) {
            let ty = if upper { ty.to_uppercase() } else { ty.to_string() };
            let header = format!(
                "{ty}{}{}: {desc}",
                scope.as_deref().map(|s| format!("({s})")).unwrap_or_default(),
                if bang { "!" } else { "" },
            );
            let r = parse_ccs(&header, &CcsTypes::default());
            prop_assert!(r.compliant, "{header:?}");
            prop_assert_eq!(r.breaking, bang);
            prop_assert_eq!(r.header().unwrap(), header);
        }
    }
}
