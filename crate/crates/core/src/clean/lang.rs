use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use whatlang::{Detector, Lang};

/// Texts with fewer letters than this after stripping are kept unjudged.
pub const MIN_LETTERS: usize = 20;
pub const DEFAULT_REVIEW_THRESHOLD: f64 = 0.5;

const PROFILES: [(Lang, &str); 13] = [
    (Lang::Eng, "en"),
    (Lang::Deu, "de"),
    (Lang::Fra, "fr"),
    (Lang::Spa, "es"),
    (Lang::Por, "pt"),
    (Lang::Ita, "it"),
    (Lang::Nld, "nl"),
    (Lang::Pol, "pl"),
    (Lang::Tur, "tr"),
    (Lang::Rus, "ru"),
    (Lang::Cmn, "zh"),
    (Lang::Jpn, "ja"),
    (Lang::Kor, "ko"),
];

/// What remained of the text once links, identifiers and code were stripped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Content {
    Prose,
    /// Under [`MIN_LETTERS`] letters; no detection attempted.
    Short,
    /// Nothing but one or more links.
    StandaloneLink,
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageVerdict {
    /// ISO 639-1 code, or "und" when detection was skipped or inconclusive.
    pub language_tag: String,
    pub confidence: f64,
    pub is_english: bool,
    pub content: Content,
}

impl LanguageVerdict {
    /// Link-only and empty texts go in the language pass even though they
    /// count as English.
    pub fn should_remove(&self) -> bool {
        !self.is_english || matches!(self.content, Content::StandaloneLink | Content::Empty)
    }
}

struct Strippers {
    fenced: Regex,
    inline_code: Regex,
    trailers: Regex,
    urls: Regex,
    emails: Regex,
    vuln_ids: Regex,
    hex: Regex,
}

fn strippers() -> &'static Strippers {
    static S: OnceLock<Strippers> = OnceLock::new();
    S.get_or_init(|| Strippers {
        fenced: Regex::new(r"(?s)```.*?(?:```|\z)").unwrap(),
        inline_code: Regex::new(r"`[^`\n]*`").unwrap(),
        trailers: Regex::new(
            r"(?mi)^[ \t]*(?:[a-z-]+-by|cc|link|fixes|closes|bug|change-id|reviewed-on|git-svn-id|cherry picked from commit)[ \t]*:?.*$",
        )
        .unwrap(),
        urls: Regex::new(r"(?i)\b(?:[a-z][a-z0-9+.-]*://|www\.)\S+").unwrap(),
        emails: Regex::new(r"<?[\w.+-]+@[\w-]+(?:\.[\w-]+)+>?").unwrap(),
        vuln_ids: Regex::new(r"(?i)\b(?:[a-z]+-\d{4}-[0-9a-z-]+|ghsa(?:-[0-9a-z]{4}){3}|cwe-\d+)\b").unwrap(),
        hex: Regex::new(r"(?i)\b(?:0x)?[0-9a-f]{7,64}\b").unwrap(),
    })
}

fn detector() -> &'static Detector {
    static D: OnceLock<Detector> = OnceLock::new();
    D.get_or_init(|| Detector::with_allowlist(PROFILES.iter().map(|(l, _)| *l).collect()))
}

/// Returns the text left for detection and whether any link was removed.
pub fn strip_for_detection(text: &str) -> (String, bool) {
    let s = strippers();
    let text = s.fenced.replace_all(text, " ");
    let text = s.inline_code.replace_all(&text, " ");
    let text = s.trailers.replace_all(&text, " ");
    let had_link = s.urls.is_match(&text);
    let text = s.urls.replace_all(&text, " ");
    let text = s.emails.replace_all(&text, " ");
    let text = s.vuln_ids.replace_all(&text, " ");
    let text = s.hex.replace_all(&text, " ");
    (text.split_whitespace().collect::<Vec<_>>().join(" "), had_link)
}

/// `review_threshold` must lie in (0, 1]; below it a non-English guess is
/// overruled and the message kept.
pub fn detect_language(text: &str, review_threshold: f64) -> LanguageVerdict {
    let (stripped, had_link) = strip_for_detection(text);
    let letters = stripped.chars().filter(|c| c.is_alphabetic()).count();
    let unjudged =
        |content| LanguageVerdict { language_tag: "und".to_string(), confidence: 0.0, is_english: true, content };
    if letters == 0 {
        let has_symbols = stripped.chars().any(|c| !c.is_whitespace());
        return unjudged(if had_link && !has_symbols {
            Content::StandaloneLink
        } else if stripped.is_empty() && !had_link {
            Content::Empty
        } else {
            Content::Short
        });
    }
    if letters < MIN_LETTERS {
        return unjudged(Content::Short);
    }
    let Some(info) = detector().detect(&stripped) else {
        return unjudged(Content::Prose);
    };
    let tag = PROFILES.iter().find(|(l, _)| *l == info.lang()).map(|(_, t)| *t).unwrap_or("und");
    let confidence = info.confidence().clamp(0.0, 1.0);
    LanguageVerdict {
        language_tag: tag.to_string(),
        confidence,
        is_english: tag == "en" || confidence < review_threshold,
        content: Content::Prose,
    }
}
