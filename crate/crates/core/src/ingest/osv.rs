use std::path::Path;

use serde_json::Value;

use super::dump::{parse_entries, parse_timestamp, read_entries, DumpEntry, ParseWarning, Parsed};
use super::{SeverityDescriptor, Source, VulnerabilityRecord};
use crate::{Execution, Result};

/// Parses an OSV dump (directory, zip archive, or single file).
///
/// A document may hold one record or an array of records. Entries without an
/// `id` are skipped with a warning.
pub fn parse_osv_dump(path: &Path, exec: Execution) -> Result<Parsed> {
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
    let items: Vec<&Value> = match &doc {
        Value::Array(items) => items.iter().collect(),
        other => vec![other],
    };
    for (idx, item) in items.into_iter().enumerate() {
        let locator = if doc.is_array() { format!("{}[{idx}]", entry.locator) } else { entry.locator.clone() };
        match record_from_value(item, &locator, &mut out.warnings) {
            Some(r) => out.records.push(r),
            None => out.warnings.push(ParseWarning { locator, message: "entry has no usable `id`".into() }),
        }
    }
    out
}

fn record_from_value(v: &Value, locator: &str, warnings: &mut Vec<ParseWarning>) -> Option<VulnerabilityRecord> {
    let id = v.get("id")?.as_str()?.trim();
    if id.is_empty() {
        return None;
    }
    let mut record = VulnerabilityRecord::new(id, Source::Osv);

    if let Some(aliases) = v.get("aliases").and_then(Value::as_array) {
        record.add_aliases(aliases.iter().filter_map(Value::as_str));
    }

    for reference in v.get("references").and_then(Value::as_array).into_iter().flatten() {
        if let Some(url) = reference.get("url").and_then(Value::as_str) {
            if !record.add_reference(url) {
                warnings.push(ParseWarning {
                    locator: locator.to_string(),
                    message: format!("dropped malformed reference URL {url:?}"),
                });
            }
        }
    }

    for affected in v.get("affected").and_then(Value::as_array).into_iter().flatten() {
        if let Some(eco) = affected.pointer("/package/ecosystem").and_then(Value::as_str) {
            let eco = eco.trim();
            if !eco.is_empty() && !record.ecosystems.iter().any(|e| e == eco) {
                record.ecosystems.push(eco.to_string());
            }
        }
    }

    record.severity = osv_severity(v);
    record.published = v.get("published").and_then(Value::as_str).and_then(parse_timestamp);
    record.modified = v.get("modified").and_then(Value::as_str).and_then(parse_timestamp);
    Some(record)
}

/// Prefers a qualitative level from `database_specific`, then the first
/// `severity[].score` entry.
fn osv_severity(v: &Value) -> Option<SeverityDescriptor> {
    let qualitative = v.pointer("/database_specific/severity").and_then(Value::as_str).filter(|s| !s.trim().is_empty());
    if let Some(s) = qualitative {
        return Some(SeverityDescriptor::new(s));
    }
    v.get("severity").and_then(Value::as_array).and_then(|list| list.iter().find_map(|s| s.get("score"))).and_then(
        |score| match score {
            Value::String(s) if !s.trim().is_empty() => Some(SeverityDescriptor::new(s)),
            Value::Number(n) => Some(SeverityDescriptor::new(&n.to_string())),
            _ => None,
        },
    )
}
