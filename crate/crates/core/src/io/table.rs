use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use serde_json::Value;

use super::config::Format;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cell::Real(x) if x.is_finite() => s.serialize_f64(*x),
            Cell::Real(_) => s.serialize_none(),
            Cell::Text(t) => s.serialize_str(t),
        }
    }
}

/// Reals with 17 significant digits, enough to round-trip any `f64`.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{:.16e}", x + 0.0)
    }
}

fn csv_text(t: &str) -> String {
    if t.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", t.replace('"', "\"\""))
    } else {
        t.to_string()
    }
}

/// Provenance written next to (CSV) or inside (JSON) every output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub generator: &'static str,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset_version: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backend: Option<String>,
    /// Full input echo: a run configuration or a sweep specification.
    pub config: Value,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub summary: BTreeMap<String, Value>,
}

impl Meta {
    pub fn new(config: Value) -> Self {
        Self {
            generator: "cavsim",
            version: env!("CARGO_PKG_VERSION"),
            preset: None,
            preset_version: None,
            backend: None,
            config,
            summary: BTreeMap::new(),
        }
    }

    pub fn with_backend(mut self, backend: impl ToString) -> Self {
        self.backend = Some(backend.to_string());
        self
    }

    pub fn with_preset(mut self, name: &str, version: u32) -> Self {
        self.preset = Some(name.to_string());
        self.preset_version = Some(version);
        self
    }

    pub fn summarize(&mut self, key: &str, value: impl Serialize) {
        self.summary
            .insert(key.to_string(), serde_json::to_value(value).expect("summary serializes"));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub meta: Meta,
}

impl Serialize for Table {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("meta", &self.meta)?;
        m.serialize_entry("columns", &self.columns)?;
        m.serialize_entry("rows", &self.rows)?;
        m.end()
    }
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>, meta: Meta) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            meta,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Header plus one line per row, comma separated, LF terminated.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.iter().map(|c| csv_text(c)).collect::<Vec<_>>().join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Real(x) => format_real(*x),
                    Cell::Text(t) => csv_text(t),
                })
                .collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn meta_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&serde_json::json!({ "meta": &self.meta })).expect("meta serializes");
        s.push('\n');
        s
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Sidecar metadata file of a CSV output: `<path>.meta.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Writes `table` to `path`. CSV outputs get a metadata sidecar; JSON
/// embeds the metadata. Returns the written paths.
pub fn emit(table: &Table, format: Format, path: &Path) -> Result<Vec<PathBuf>> {
    match format {
        Format::Csv => {
            write(path, &table.to_csv())?;
            let meta = sidecar_path(path);
            write(&meta, &table.meta_json())?;
            Ok(vec![path.to_path_buf(), meta])
        }
        Format::Json => {
            write(path, &table.to_json())?;
            Ok(vec![path.to_path_buf()])
        }
    }
}

/// The table rendered in `format`, for printing to stdout.
pub fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(["gamma1_t", "coherence"], Meta::new(Value::Null));
        for (t_, c) in [(0.0, 1.0), (0.5, 0.9), (1.0, 1.0 / 3.0)] {
            t.push(vec![t_.into(), c.into()]);
        }
        t
    }

    #[test]
    fn three_rows_give_four_lines() {
        let csv = sample().to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("gamma1_t,coherence\n"));
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn reals_round_trip() {
        let csv = sample().to_csv();
        let last = csv.lines().last().unwrap().split(',').nth(1).unwrap();
        assert_eq!(last.parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(last.split('e').next().unwrap().replace(['.', '-'], "").len(), 17);
    }

    #[test]
    fn non_finite_values() {
        assert_eq!(format_real(f64::NAN), "NaN");
        let mut t = Table::new(["x"], Meta::new(Value::Null));
        t.push(vec![f64::NAN.into()]);
        assert!(t.to_json().contains("null"));
    }

    #[test]
    fn text_cells_are_quoted_when_needed() {
        assert_eq!(csv_text("a,b"), "\"a,b\"");
        assert_eq!(csv_text("ok"), "ok");
    }

    #[test]
    fn csv_emit_writes_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/out.csv");
        let written = emit(&sample(), Format::Csv, &path).unwrap();
        assert_eq!(written.len(), 2);
        let meta: Value = serde_json::from_str(&fs::read_to_string(&written[1]).unwrap()).unwrap();
        assert_eq!(meta["meta"]["generator"], "cavsim");
    }

    #[test]
    fn unwritable_path_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain");
        fs::write(&file, "x").unwrap();
        let err = emit(&sample(), Format::Json, &file.join("child.json")).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }
}
