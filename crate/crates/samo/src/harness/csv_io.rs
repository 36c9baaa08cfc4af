//! Column-oriented CSV access with schema-version enforcement. Every
//! result file this crate writes carries a `schema_version` column;
//! readers reject unknown versions and name any missing column.

use std::path::Path;

use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("missing column {column:?} in {path}")]
    MissingColumn { column: String, path: String },
    #[error("unsupported schema_version {got:?} in {path} (supported: {SCHEMA_VERSION})")]
    BadSchema { got: String, path: String },
    #[error("row {row} of {path}: {column} is not numeric: {value:?}")]
    BadValue {
        row: usize,
        path: String,
        column: String,
        value: String,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

struct Table {
    headers: Vec<String>,
    rows: Vec<csv::StringRecord>,
    path: String,
}

impl Table {
    fn load(path: &Path) -> Result<Self, CsvError> {
        let mut reader = csv::Reader::from_path(path)?;
        let headers = reader.headers()?.iter().map(str::to_string).collect();
        let rows = reader.records().collect::<Result<_, _>>()?;
        let table = Table {
            headers,
            rows,
            path: path.display().to_string(),
        };
        table.check_schema()?;
        Ok(table)
    }

    fn column_index(&self, column: &str) -> Result<usize, CsvError> {
        self.headers
            .iter()
            .position(|h| h == column)
            .ok_or_else(|| CsvError::MissingColumn {
                column: column.to_string(),
                path: self.path.clone(),
            })
    }

    fn check_schema(&self) -> Result<(), CsvError> {
        let idx = self.column_index("schema_version")?;
        for row in &self.rows {
            let got = row.get(idx).unwrap_or("");
            if got != SCHEMA_VERSION.to_string() {
                return Err(CsvError::BadSchema {
                    got: got.to_string(),
                    path: self.path.clone(),
                });
            }
        }
        Ok(())
    }

    fn numeric_column(&self, column: &str) -> Result<Vec<f64>, CsvError> {
        let idx = self.column_index(column)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(row, rec)| {
                let value = rec.get(idx).unwrap_or("");
                value.parse::<f64>().map_err(|_| CsvError::BadValue {
                    row: row + 2, // header is line 1
                    path: self.path.clone(),
                    column: column.to_string(),
                    value: value.to_string(),
                })
            })
            .collect()
    }

    fn string_column(&self, column: &str) -> Result<Vec<String>, CsvError> {
        let idx = self.column_index(column)?;
        Ok(self
            .rows
            .iter()
            .map(|rec| rec.get(idx).unwrap_or("").to_string())
            .collect())
    }
}

/// Reads one numeric column, verifying the schema version.
pub fn read_column(path: &Path, column: &str) -> Result<Vec<f64>, CsvError> {
    Table::load(path)?.numeric_column(column)
}

/// Reads several numeric columns at once (row-aligned).
pub fn read_columns(path: &Path, columns: &[&str]) -> Result<Vec<Vec<f64>>, CsvError> {
    let table = Table::load(path)?;
    columns.iter().map(|c| table.numeric_column(c)).collect()
}

/// Reads a numeric column split by a grouping column. Groups are sorted
/// numerically when every key parses as a number, lexicographically
/// otherwise.
pub fn read_grouped_column(
    path: &Path,
    value_column: &str,
    group_column: &str,
) -> Result<Vec<(String, Vec<f64>)>, CsvError> {
    let table = Table::load(path)?;
    let values = table.numeric_column(value_column)?;
    let keys = table.string_column(group_column)?;
    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    for (key, value) in keys.into_iter().zip(values) {
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, vs)) => vs.push(value),
            None => groups.push((key, vec![value])),
        }
    }
    let all_numeric = groups.iter().all(|(k, _)| k.parse::<f64>().is_ok());
    if all_numeric {
        groups.sort_by(|a, b| {
            a.0.parse::<f64>()
                .unwrap()
                .partial_cmp(&b.0.parse::<f64>().unwrap())
                .unwrap()
        });
    } else {
        groups.sort_by(|a, b| a.0.cmp(&b.0));
    }
    Ok(groups)
}
