use std::collections::HashSet;
use std::path::Path;

use regex::Regex;

use crate::acquire::CommitMessage;
use crate::refs::version_comment;
use crate::{Error, Result};

pub const DEFAULT_BOT_LIST: &str = include_str!("../../data/bots.txt");
pub const DEFAULT_TEMPLATES: &str = include_str!("../../data/bot_templates.txt");

/// Bot author names plus non-human message templates.
#[derive(Debug, Clone)]
pub struct BotRules {
    names: HashSet<String>,
    templates: Vec<Regex>,
    names_version: String,
    templates_version: String,
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn file_version(text: &str) -> String {
    text.lines().find_map(version_comment).unwrap_or("unversioned").to_string()
}

impl BotRules {
    pub fn bundled() -> Self {
        Self::parse(DEFAULT_BOT_LIST, DEFAULT_TEMPLATES, Path::new("<bundled templates>"))
            .expect("bundled bot templates are valid")
    }

    pub fn parse(names: &str, templates: &str, templates_path: &Path) -> Result<Self> {
        let mut compiled = Vec::new();
        for (line, pattern) in content_lines(templates) {
            compiled.push(Regex::new(pattern).map_err(|e| Error::Syntax {
                path: templates_path.to_path_buf(),
                line,
                message: e.to_string(),
            })?);
        }
        Ok(BotRules {
            names: content_lines(names).map(|(_, n)| n.to_lowercase()).collect(),
            templates: compiled,
            names_version: file_version(names),
            templates_version: file_version(templates),
        })
    }

    /// Either file may be overridden; `None` keeps the bundled one.
    pub fn load(names: Option<&Path>, templates: Option<&Path>) -> Result<Self> {
        let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| Error::io(p, e));
        let names_text = names.map(read).transpose()?;
        let templates_text = templates.map(read).transpose()?;
        Self::parse(
            names_text.as_deref().unwrap_or(DEFAULT_BOT_LIST),
            templates_text.as_deref().unwrap_or(DEFAULT_TEMPLATES),
            templates.unwrap_or(Path::new("<bundled templates>")),
        )
    }

    pub fn versions(&self) -> (&str, &str) {
        (&self.names_version, &self.templates_version)
    }

    pub fn is_bot_author(&self, author: &str) -> bool {
        let author = author.trim().to_lowercase();
        author.ends_with("[bot]") || self.names.contains(&author)
    }

    pub fn is_template_message(&self, message: &str) -> bool {
        let first = message.lines().next().unwrap_or_default().trim();
        self.templates.iter().any(|t| t.is_match(first))
    }

    pub fn is_bot(&self, message: &CommitMessage) -> bool {
        self.is_bot_author(&message.author) || self.is_template_message(&message.message)
    }
}
