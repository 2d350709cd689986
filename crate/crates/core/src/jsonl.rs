//! One-record-per-line JSON files.
//!
//! Field order follows struct declaration order, so writers are byte-stable.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{Error, Result};

pub fn write<'a, T, I>(path: &Path, records: I) -> Result<usize>
where
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut n = 0;
    for record in records {
        let line = serde_json::to_string(record).expect("records serialize to JSON");
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
        n += 1;
    }
    out.flush().map_err(|e| Error::io(path, e))?;
    Ok(n)
}

/// Reads every non-blank line; the first malformed line is an error.
pub fn read<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            line: idx + 1,
            source,
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Pretty JSON summary file with a trailing newline.
pub fn write_summary<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("summaries serialize to JSON");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
