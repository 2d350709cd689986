use std::fs::File;
use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;
use serde::Serialize;
use walkdir::WalkDir;

use super::VulnerabilityRecord;
use crate::{Error, Execution, Result};

/// One raw JSON document pulled out of a dump, with a locator for warnings.
#[derive(Debug, Clone)]
pub struct DumpEntry {
    pub locator: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseWarning {
    pub locator: String,
    pub message: String,
}

/// Output of a dump parser. Skipped entries are reported, never fatal.
#[derive(Debug, Default)]
pub struct Parsed {
    pub records: Vec<VulnerabilityRecord>,
    pub warnings: Vec<ParseWarning>,
}

fn is_json_name(name: &str) -> bool {
    name.ends_with(".json") || name.ends_with(".json.gz")
}

fn decode(name: &str, raw: Vec<u8>) -> std::io::Result<Vec<u8>> {
    if name.ends_with(".gz") {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice()).read_to_end(&mut out)?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

/// Collects every JSON document under `path`.
///
/// `path` may be a directory (walked recursively, sorted), a `.zip` archive,
/// or a single `.json`/`.json.gz` file.
pub(crate) fn read_entries(path: &Path) -> Result<Vec<DumpEntry>> {
    let meta = std::fs::metadata(path).map_err(|e| Error::io(path, e))?;
    if meta.is_dir() {
        let mut files: Vec<_> = WalkDir::new(path)
            .sort_by_file_name()
            .into_iter()
            .filter_map(|e| e.ok())
            .filter(|e| e.file_type().is_file())
            .map(|e| e.into_path())
            .collect();
        files
            .retain(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| is_json_name(n) || n.ends_with(".zip")));
        let mut entries = Vec::new();
        for file in files {
            entries.extend(read_file_entries(&file)?);
        }
        Ok(entries)
    } else {
        read_file_entries(path)
    }
}

fn read_file_entries(path: &Path) -> Result<Vec<DumpEntry>> {
    let name = path.to_string_lossy().into_owned();
    if name.ends_with(".zip") {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut archive = zip::ZipArchive::new(file).map_err(|e| Error::io(path, std::io::Error::other(e)))?;
        let mut entries = Vec::new();
        for i in 0..archive.len() {
            let mut member = archive.by_index(i).map_err(|e| Error::io(path, std::io::Error::other(e)))?;
            if !member.is_file() || !is_json_name(member.name()) {
                continue;
            }
            let member_name = member.name().to_string();
            let mut raw = Vec::new();
            member.read_to_end(&mut raw).map_err(|e| Error::io(path, e))?;
            let bytes = decode(&member_name, raw).map_err(|e| Error::io(path, e))?;
            entries.push(DumpEntry { locator: format!("{name}!{member_name}"), bytes });
        }
        Ok(entries)
    } else {
        let raw = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let bytes = decode(&name, raw).map_err(|e| Error::io(path, e))?;
        Ok(vec![DumpEntry { locator: name, bytes }])
    }
}

/// Parses entries independently, then concatenates in entry order.
pub(crate) fn parse_entries<F>(entries: &[DumpEntry], exec: Execution, parse: F) -> Parsed
where
    F: Fn(&DumpEntry) -> Parsed + Sync + Send,
{
    let parts = exec.map(entries, parse);
    let mut out = Parsed::default();
    for part in parts {
        out.records.extend(part.records);
        out.warnings.extend(part.warnings);
    }
    for w in &out.warnings {
        tracing::warn!(locator = %w.locator, "{}", w.message);
    }
    out
}

/// RFC 3339, or a naive ISO timestamp taken as UTC (NVD omits the offset).
pub(crate) fn parse_timestamp(raw: &str) -> Option<chrono::DateTime<chrono::Utc>> {
    use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
    let raw = raw.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(raw) {
        return Some(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%dT%H:%MZ", "%Y-%m-%dT%H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Some(t.and_utc());
        }
    }
    NaiveDate::parse_from_str(raw, "%Y-%m-%d").ok().and_then(|d| d.and_hms_opt(0, 0, 0)).map(|t| t.and_utc())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timestamps() {
        let a = parse_timestamp("2016-04-08T15:59:00.123").unwrap();
        assert_eq!(a.to_rfc3339(), "2016-04-08T15:59:00.123+00:00");
        let b = parse_timestamp("2021-05-01T10:00:00Z").unwrap();
        assert_eq!(b.to_rfc3339(), "2021-05-01T10:00:00+00:00");
        assert!(parse_timestamp("2016-04-08T15:59Z").is_some());
        assert!(parse_timestamp("2016-04-08").is_some());
        assert!(parse_timestamp("yesterday").is_none());
    }
}
