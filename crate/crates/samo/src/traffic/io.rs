//! Versioned on-disk formats: JSON instances, line-oriented solutions.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Solution, TrafficInstance};

pub const INSTANCE_FORMAT_VERSION: u32 = 1;
pub const SOLUTION_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed instance file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format_version {got} (supported: {supported})")]
    Version { got: u32, supported: u32 },
    #[error("malformed solution file: {0}")]
    Solution(String),
    #[error(transparent)]
    Invalid(#[from] super::TrafficError),
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    format_version: u32,
    #[serde(flatten)]
    instance: TrafficInstance,
}

pub fn save_instance(instance: &TrafficInstance, path: &Path) -> Result<(), FormatError> {
    let doc = InstanceFile {
        format_version: INSTANCE_FORMAT_VERSION,
        instance: instance.clone(),
    };
    fs::write(path, serde_json::to_string_pretty(&doc)?)?;
    Ok(())
}

pub fn load_instance(path: &Path) -> Result<TrafficInstance, FormatError> {
    let doc: InstanceFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    if doc.format_version != INSTANCE_FORMAT_VERSION {
        return Err(FormatError::Version {
            got: doc.format_version,
            supported: INSTANCE_FORMAT_VERSION,
        });
    }
    doc.instance.validate()?;
    Ok(doc.instance)
}

/// Writes `format_version <n>` followed by one duration per line.
pub fn save_solution(solution: &Solution, path: &Path) -> Result<(), FormatError> {
    let mut file = fs::File::create(path)?;
    writeln!(file, "format_version {SOLUTION_FORMAT_VERSION}")?;
    for d in solution.durations() {
        writeln!(file, "{d}")?;
    }
    Ok(())
}

pub fn load_solution(path: &Path) -> Result<Solution, FormatError> {
    let file = fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or_else(|| FormatError::Solution("empty file".into()))??;
    let version: u32 = header
        .strip_prefix("format_version ")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| FormatError::Solution(format!("bad header line {header:?}")))?;
    if version != SOLUTION_FORMAT_VERSION {
        return Err(FormatError::Version {
            got: version,
            supported: SOLUTION_FORMAT_VERSION,
        });
    }
    let mut durations = Vec::new();
    for line in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        durations.push(
            trimmed
                .parse::<i64>()
                .map_err(|_| FormatError::Solution(format!("not an integer: {trimmed:?}")))?,
        );
    }
    Ok(Solution::new(durations))
}
