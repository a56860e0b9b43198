//! Tabular results with a typed schema, serialized to CSV or JSON.
//!
//! CSV layout: `#meta key=value` lines, then one `#column name|unit|kind` line
//! per column, then a header record and the data records. Floats are written
//! with 17 significant digits so parsing recovers them exactly.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fmt_f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Int,
    Uint,
    Float,
    Bool,
    Text,
}

impl ColumnKind {
    fn as_str(self) -> &'static str {
        match self {
            Self::Int => "int",
            Self::Uint => "uint",
            Self::Float => "float",
            Self::Bool => "bool",
            Self::Text => "text",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "int" => Self::Int,
            "uint" => Self::Uint,
            "float" => Self::Float,
            "bool" => Self::Bool,
            "text" => Self::Text,
            other => return Err(Error::Parse(format!("unknown column kind {other}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
    pub kind: ColumnKind,
}

impl Column {
    pub fn new(name: &str, unit: &str, kind: ColumnKind) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
            kind,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum Cell {
    Int(i64),
    Uint(u64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn kind(&self) -> ColumnKind {
        match self {
            Self::Int(_) => ColumnKind::Int,
            Self::Uint(_) => ColumnKind::Uint,
            Self::Float(_) => ColumnKind::Float,
            Self::Bool(_) => ColumnKind::Bool,
            Self::Text(_) => ColumnKind::Text,
        }
    }

    fn render(&self) -> String {
        match self {
            Self::Int(v) => v.to_string(),
            Self::Uint(v) => v.to_string(),
            Self::Float(v) => fmt_f64(*v),
            Self::Bool(v) => v.to_string(),
            Self::Text(v) => v.clone(),
        }
    }

    fn parse(kind: ColumnKind, s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("cannot read {s:?} as {}", kind.as_str()));
        Ok(match kind {
            ColumnKind::Int => Self::Int(s.parse().map_err(|_| bad())?),
            ColumnKind::Uint => Self::Uint(s.parse().map_err(|_| bad())?),
            ColumnKind::Float => Self::Float(s.parse().map_err(|_| bad())?),
            ColumnKind::Bool => Self::Bool(s.parse().map_err(|_| bad())?),
            ColumnKind::Text => Self::Text(s.to_string()),
        })
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Self::Int(v) => Some(*v as f64),
            Self::Uint(v) => Some(*v as f64),
            Self::Float(v) => Some(*v),
            _ => None,
        }
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Self::Int(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Self::Int(v as i64)
    }
}
impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Self::Uint(v)
    }
}
impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Self::Float(v)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Self::Bool(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Self::Text(v.into())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StatTable {
    pub metadata: BTreeMap<String, String>,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl StatTable {
    pub fn new(columns: Vec<Column>) -> Self {
        Self {
            metadata: BTreeMap::new(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(invalid(format!(
                "row has {} cells, table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        for (cell, col) in row.iter().zip(&self.columns) {
            if cell.kind() != col.kind {
                return Err(invalid(format!(
                    "column {} expects {}",
                    col.name,
                    col.kind.as_str()
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Numeric values of one column.
    pub fn column_f64(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .column_index(name)
            .ok_or_else(|| invalid(format!("no column named {name}")))?;
        self.rows
            .iter()
            .map(|r| {
                r[idx]
                    .as_f64()
                    .ok_or_else(|| invalid(format!("column {name} is not numeric")))
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for (key, value) in &self.metadata {
            if key.contains(['=', '\n']) || value.contains('\n') {
                return Err(invalid(format!("metadata entry {key:?} cannot be written")));
            }
            writeln!(out, "#meta {key}={value}")?;
        }
        for col in &self.columns {
            if col.name.contains(['|', '\n']) || col.unit.contains(['|', '\n']) {
                return Err(invalid(format!("column {:?} cannot be written", col.name)));
            }
            writeln!(
                out,
                "#column {}|{}|{}",
                col.name,
                col.unit,
                col.kind.as_str()
            )?;
        }
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for row in &self.rows {
            writer.write_record(row.iter().map(Cell::render))?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(mut input: R) -> Result<Self> {
        let mut table = Self::default();
        // Comment lines come first; the rest is plain CSV.
        let mut line = String::new();
        let mut rest = String::new();
        loop {
            line.clear();
            if input.read_line(&mut line)? == 0 {
                break;
            }
            let trimmed = line.trim_end_matches(['\n', '\r']);
            if let Some(meta) = trimmed.strip_prefix("#meta ") {
                let (k, v) = meta
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("bad metadata line {trimmed}")))?;
                table.metadata.insert(k.into(), v.into());
            } else if let Some(col) = trimmed.strip_prefix("#column ") {
                let parts: Vec<&str> = col.split('|').collect();
                if parts.len() != 3 {
                    return Err(Error::Parse(format!("bad column line {trimmed}")));
                }
                table.columns.push(Column::new(
                    parts[0],
                    parts[1],
                    ColumnKind::parse(parts[2])?,
                ));
            } else {
                rest.push_str(&line);
                input.read_to_string(&mut rest)?;
                break;
            }
        }
        let mut reader = csv::Reader::from_reader(rest.as_bytes());
        let header: Vec<String> = reader.headers()?.iter().map(String::from).collect();
        let names: Vec<&str> = table.columns.iter().map(|c| c.name.as_str()).collect();
        if header != names {
            return Err(Error::Parse(
                "CSV header does not match the column schema".into(),
            ));
        }
        for record in reader.records() {
            let record = record?;
            let row = record
                .iter()
                .zip(&table.columns)
                .map(|(s, c)| Cell::parse(c.kind, s))
                .collect::<Result<Vec<_>>>()?;
            table.push(row)?;
        }
        Ok(table)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Writes CSV, or JSON when the path ends in `.json`, through a temporary
    /// file that is renamed into place, so failed runs leave no partial output.
    pub fn save(&self, path: &Path) -> Result<()> {
        let is_json = path.extension().is_some_and(|e| e == "json");
        write_atomic(path, |out| {
            if is_json {
                out.write_all(self.to_json()?.as_bytes())?;
                out.write_all(b"\n")?;
                Ok(())
            } else {
                self.write_csv(out)
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&std::fs::read_to_string(path)?)
        } else {
            Self::read_csv(std::io::BufReader::new(std::fs::File::open(path)?))
        }
    }
}

/// Writes through a temporary sibling file renamed into place; on failure the
/// temporary file is removed and `path` is untouched.
pub fn write_atomic<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut std::io::BufWriter<std::fs::File>) -> Result<()>,
{
    let file_name = path
        .file_name()
        .ok_or_else(|| invalid(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut out = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
        body(&mut out)?;
        out.flush()?;
        drop(out);
        std::fs::rename(&tmp, path)?;
        Ok(())
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}
