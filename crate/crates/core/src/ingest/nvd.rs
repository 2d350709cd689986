use std::path::Path;

use serde_json::Value;

use super::dump::{parse_entries, parse_timestamp, read_entries, DumpEntry, ParseWarning, Parsed};
use super::{SeverityDescriptor, Source, VulnerabilityRecord};
use crate::{Execution, Result};

/// Parses NVD CVE JSON feeds.
///
/// Accepts the 2.0 feed/API layout (`vulnerabilities[].cve`), a bare 2.0 `cve`
/// object per file, and the legacy 1.1 layout (`CVE_Items[]`).
pub fn parse_nvd_dump(path: &Path, exec: Execution) -> Result<Parsed> {
    let entries = read_entries(path)?;
    Ok(parse_entries(&entries, exec, parse_entry))
}

fn parse_entry(entry: &DumpEntry) -> Parsed {
    let mut out = Parsed::default();
    let doc: Value = match serde_json::from_slice(&entry.bytes) {
        Ok(v) => v,
        Err(e) => {
            out.warnings.push(ParseWarning { locator: entry.locator.clone(), message: format!("malformed JSON: {e}") });
            return out;
        }
    };

    let mut push = |idx: Option<usize>, parsed: Option<VulnerabilityRecord>, warnings: Vec<String>| {
        let locator = match idx {
            Some(i) => format!("{}[{i}]", entry.locator),
            None => entry.locator.clone(),
        };
        for message in warnings {
            out.warnings.push(ParseWarning { locator: locator.clone(), message });
        }
        match parsed {
            Some(r) => out.records.push(r),
            None => out.warnings.push(ParseWarning { locator, message: "entry has no CVE id".into() }),
        }
    };

    if let Some(items) = doc.get("vulnerabilities").and_then(Value::as_array) {
        for (i, item) in items.iter().enumerate() {
            let cve = item.get("cve").unwrap_or(item);
            let (r, w) = from_v2(cve);
            push(Some(i), r, w);
        }
    } else if let Some(items) = doc.get("CVE_Items").and_then(Value::as_array) {
        for (i, item) in items.iter().enumerate() {
            let (r, w) = from_v11(item);
            push(Some(i), r, w);
        }
    } else {
        let cve = doc.get("cve").unwrap_or(&doc);
        let (r, w) = from_v2(cve);
        push(None, r, w);
    }
    out
}

fn add_refs(record: &mut VulnerabilityRecord, urls: impl Iterator<Item = String>, warnings: &mut Vec<String>) {
    for url in urls {
        if !record.add_reference(&url) {
            warnings.push(format!("dropped malformed reference URL {url:?}"));
        }
    }
}

fn from_v2(cve: &Value) -> (Option<VulnerabilityRecord>, Vec<String>) {
    let mut warnings = Vec::new();
    let Some(id) = cve.get("id").and_then(Value::as_str).filter(|s| !s.trim().is_empty()) else {
        return (None, warnings);
    };
    let mut record = VulnerabilityRecord::new(id, Source::Nvd);
    let urls = cve
        .get("references")
        .and_then(Value::as_array)
        .into_iter()
        .flatten()
        .filter_map(|r| r.get("url").and_then(Value::as_str).map(str::to_string));
    add_refs(&mut record, urls, &mut warnings);

    record.severity = cve.get("metrics").and_then(v2_severity);
    record.published = cve.get("published").and_then(Value::as_str).and_then(parse_timestamp);
    record.modified = cve.get("lastModified").and_then(Value::as_str).and_then(parse_timestamp);
    (Some(record), warnings)
}

/// Newest CVSS version first; the qualitative rating wins over the number.
fn v2_severity(metrics: &Value) -> Option<SeverityDescriptor> {
    for key in ["cvssMetricV40", "cvssMetricV31", "cvssMetricV30", "cvssMetricV2"] {
        let Some(first) = metrics.get(key).and_then(Value::as_array).and_then(|l| l.first()) else {
            continue;
        };
        let word =
            first.pointer("/cvssData/baseSeverity").or_else(|| first.get("baseSeverity")).and_then(Value::as_str);
        if let Some(word) = word {
            return Some(SeverityDescriptor::new(word));
        }
        if let Some(score) = first.pointer("/cvssData/baseScore").and_then(Value::as_f64) {
            return Some(SeverityDescriptor::new(&score.to_string()));
        }
    }
    None
}

fn from_v11(item: &Value) -> (Option<VulnerabilityRecord>, Vec<String>) {
    let mut warnings = Vec::new();
    let Some(id) = item.pointer("/cve/CVE_data_meta/ID").and_then(Value::as_str).filter(|s| !s.trim().is_empty())
    else {
        return (None, warnings);
    };
    let mut record = VulnerabilityRecord::new(id, Source::Nvd);
    let urls = item
        .pointer("/cve/references/reference_data")
        .and_then(Value::as_array)
        .into_iter()
        .flatten()
        .filter_map(|r| r.get("url").and_then(Value::as_str).map(str::to_string));
    add_refs(&mut record, urls, &mut warnings);

    record.severity = item
        .pointer("/impact/baseMetricV3/cvssV3/baseSeverity")
        .or_else(|| item.pointer("/impact/baseMetricV2/severity"))
        .and_then(Value::as_str)
        .map(SeverityDescriptor::new)
        .or_else(|| {
            item.pointer("/impact/baseMetricV3/cvssV3/baseScore")
                .and_then(Value::as_f64)
                .map(|s| SeverityDescriptor::new(&s.to_string()))
        });
    record.published = item.get("publishedDate").and_then(Value::as_str).and_then(parse_timestamp);
    record.modified = item.get("lastModifiedDate").and_then(Value::as_str).and_then(parse_timestamp);
    (Some(record), warnings)
}
