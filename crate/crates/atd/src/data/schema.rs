//! Dataset schemas and schema-driven CSV loading.
//!
//! A schema is a TOML document describing the columns of a categorical data
//! file and how to encode them:
//!
//! ```toml
//! columns = ["buying", "maint", "doors", "persons", "lug_boot", "safety", "class"]
//! target = "class"
//! target_levels = ["unacc", "acc", "good", "vgood"]
//! # optional, shown with their defaults:
//! delimiter = ","
//! has_header = false
//!
//! [ordinal]
//! buying = ["low", "med", "high", "vhigh"]
//! # ... one entry per ordinal column, levels in ascending order
//!
//! [nominal]
//! # unordered columns, one-hot encoded
//!
//! # skip = ["id"]   # columns to ignore entirely
//! ```
//!
//! Every non-target, non-skipped column must be declared ordinal or nominal.
//! An ordinal column with levels `v_0 < ... < v_{L-1}` encodes `v_p` as
//! `p / (L - 1)`, preserving order; a nominal column expands into one `0/1`
//! column per level. Target values map to their position in `target_levels`,
//! whose length is the category count `C`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::data::OrdinalDataset;
use crate::error::{Error, Result};

/// How one input column is interpreted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnKind {
    /// Ordered levels, ascending; encoded as `position / (levels - 1)`.
    Ordinal(Vec<String>),
    /// Unordered levels; one-hot encoded.
    Nominal(Vec<String>),
    /// Ignored (identifiers, row numbers, ...).
    Skip,
    /// The label column.
    Target,
}

/// One column of the input file, in file order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
}

/// Parsed, validated description of a categorical data file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSchema {
    columns: Vec<ColumnSpec>,
    target_levels: Vec<String>,
    /// Raw target values folded into a declared level (for classes too small
    /// to stratify).
    target_aliases: BTreeMap<String, String>,
    delimiter: u8,
    has_header: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaFile {
    columns: Vec<String>,
    target: String,
    target_levels: Vec<String>,
    #[serde(default)]
    target_aliases: BTreeMap<String, String>,
    #[serde(default)]
    delimiter: Option<String>,
    #[serde(default)]
    has_header: bool,
    #[serde(default)]
    ordinal: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    nominal: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    skip: Vec<String>,
}

fn config_err(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

fn check_levels(field: &str, levels: &[String], minimum: usize) -> Result<()> {
    if levels.len() < minimum {
        return Err(config_err(
            field,
            format!("needs at least {minimum} levels, got {}", levels.len()),
        ));
    }
    for (i, a) in levels.iter().enumerate() {
        if levels[i + 1..].contains(a) {
            return Err(config_err(field, format!("duplicate level {a:?}")));
        }
    }
    Ok(())
}

impl DatasetSchema {
    /// Parse and validate a schema from TOML text.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: SchemaFile = toml::from_str(text)
            .map_err(|e| config_err("schema", e.to_string()))?;

        check_levels("target_levels", &file.target_levels, 3)?;
        if !file.columns.contains(&file.target) {
            return Err(config_err(
                "target",
                format!("column {:?} not in columns list", file.target),
            ));
        }
        for (raw, level) in &file.target_aliases {
            if file.target_levels.contains(raw) {
                return Err(config_err(
                    "target_aliases",
                    format!("{raw:?} is already a declared level"),
                ));
            }
            if !file.target_levels.contains(level) {
                return Err(config_err(
                    "target_aliases",
                    format!("alias target {level:?} is not a declared level"),
                ));
            }
        }

        let delimiter = match file.delimiter.as_deref() {
            None => b',',
            Some(d) if d.len() == 1 => d.as_bytes()[0],
            Some(d) => {
                return Err(config_err(
                    "delimiter",
                    format!("must be a single character, got {d:?}"),
                ))
            }
        };

        let mut used: BTreeMap<&str, usize> = BTreeMap::new();
        let mut columns = Vec::with_capacity(file.columns.len());
        for name in &file.columns {
            *used.entry(name.as_str()).or_insert(0) += 1;
            let kind = if *name == file.target {
                ColumnKind::Target
            } else if file.skip.contains(name) {
                ColumnKind::Skip
            } else if let Some(levels) = file.ordinal.get(name) {
                check_levels(&format!("ordinal.{name}"), levels, 2)?;
                ColumnKind::Ordinal(levels.clone())
            } else if let Some(levels) = file.nominal.get(name) {
                check_levels(&format!("nominal.{name}"), levels, 2)?;
                ColumnKind::Nominal(levels.clone())
            } else {
                return Err(config_err(
                    "columns",
                    format!("column {name:?} is neither target, skipped, ordinal, nor nominal"),
                ));
            };
            columns.push(ColumnSpec {
                name: name.clone(),
                kind,
            });
        }
        if let Some((name, _)) = used.iter().find(|(_, &n)| n > 1) {
            return Err(config_err("columns", format!("duplicate column {name:?}")));
        }
        for declared in file.ordinal.keys().chain(file.nominal.keys()) {
            if !file.columns.iter().any(|c| c == declared) {
                return Err(config_err(
                    "columns",
                    format!("declared column {declared:?} missing from columns list"),
                ));
            }
        }

        Ok(DatasetSchema {
            columns,
            target_levels: file.target_levels,
            target_aliases: file.target_aliases,
            delimiter,
            has_header: file.has_header,
        })
    }

    /// Read and parse a schema file.
    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Columns in file order.
    pub fn columns(&self) -> &[ColumnSpec] {
        &self.columns
    }

    /// Ordered class levels of the target column.
    pub fn target_levels(&self) -> &[String] {
        &self.target_levels
    }

    /// Number of categories `C`.
    pub fn category_count(&self) -> usize {
        self.target_levels.len()
    }

    /// Dimension of the encoded feature matrix: one column per ordinal
    /// attribute, one per nominal level.
    pub fn encoded_dim(&self) -> usize {
        self.columns
            .iter()
            .map(|c| match &c.kind {
                ColumnKind::Ordinal(_) => 1,
                ColumnKind::Nominal(levels) => levels.len(),
                ColumnKind::Skip | ColumnKind::Target => 0,
            })
            .sum()
    }

    /// Names of the encoded feature columns, in encoding order.
    pub fn encoded_feature_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.encoded_dim());
        for c in &self.columns {
            match &c.kind {
                ColumnKind::Ordinal(_) => names.push(c.name.clone()),
                ColumnKind::Nominal(levels) => {
                    for level in levels {
                        names.push(format!("{}={level}", c.name));
                    }
                }
                ColumnKind::Skip | ColumnKind::Target => {}
            }
        }
        names
    }
}

/// Load a delimiter-separated categorical file under a schema.
///
/// Every cell must appear in its column's declared level list; unknown values
/// fail with the row and column named. Rows of the wrong width are parse
/// errors. The resulting features lie in `[0, 1]` with ordinal order
/// preserved.
pub fn load_csv_ordinal(path: &Path, schema: &DatasetSchema) -> Result<OrdinalDataset> {
    let file = std::fs::File::open(path)?;
    load_csv_from_reader(file, schema, path.display().to_string())
}

/// Reader-based variant of [`load_csv_ordinal`]; `provenance` labels error
/// messages and the resulting dataset.
pub(crate) fn load_csv_from_reader<R: std::io::Read>(
    input: R,
    schema: &DatasetSchema,
    provenance: String,
) -> Result<OrdinalDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .has_headers(schema.has_header)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(input);

    let mut rows = Vec::new();
    let mut ranks = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            path: provenance.clone(),
            message: e.to_string(),
        })?;
        if record.len() != schema.columns.len() {
            return Err(Error::Parse {
                path: provenance.clone(),
                message: format!(
                    "row {}: expected {} columns, found {}",
                    row_idx + 1,
                    schema.columns.len(),
                    record.len()
                ),
            });
        }

        let mut row = Vec::with_capacity(schema.encoded_dim());
        let mut rank = None;
        for (cell, column) in record.iter().zip(&schema.columns) {
            let violation = || Error::SchemaViolation {
                row: row_idx + 1,
                column: column.name.clone(),
                value: cell.to_string(),
            };
            match &column.kind {
                ColumnKind::Skip => {}
                ColumnKind::Target => {
                    let level = schema
                        .target_aliases
                        .get(cell)
                        .map(String::as_str)
                        .unwrap_or(cell);
                    let pos = schema
                        .target_levels
                        .iter()
                        .position(|l| l == level)
                        .ok_or_else(violation)?;
                    rank = Some(pos);
                }
                ColumnKind::Ordinal(levels) => {
                    let pos = levels.iter().position(|l| l == cell).ok_or_else(violation)?;
                    row.push(pos as f64 / (levels.len() - 1) as f64);
                }
                ColumnKind::Nominal(levels) => {
                    let pos = levels.iter().position(|l| l == cell).ok_or_else(violation)?;
                    for i in 0..levels.len() {
                        row.push(if i == pos { 1.0 } else { 0.0 });
                    }
                }
            }
        }
        rows.push(row);
        // Target column membership was validated when the schema was built.
        ranks.push(rank.expect("schema always contains the target column"));
    }

    OrdinalDataset::from_rows(
        rows,
        ranks,
        schema.category_count(),
        schema.encoded_feature_names(),
        provenance,
    )
}
