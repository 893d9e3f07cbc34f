//! Columnar data files: CSV with `#` metadata lines, or the same content as
//! JSON.

use std::fmt::Write as _;

use serde::Serialize;

use crate::config::Format;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

impl Column {
    pub fn new(name: impl Into<String>, unit: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub program: String,
    pub version: String,
    pub library_version: String,
    pub kind: String,
    pub config_sha256: String,
    pub warnings: Vec<String>,
}

impl Metadata {
    pub fn new(kind: impl Into<String>, config_sha256: String, warnings: Vec<String>) -> Self {
        Self {
            program: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            library_version: thermocav::VERSION.into(),
            kind: kind.into(),
            config_sha256,
            warnings,
        }
    }

    fn write_csv(&self, out: &mut String) {
        let _ = writeln!(out, "# program: {} {}", self.program, self.version);
        let _ = writeln!(out, "# library: thermocav {}", self.library_version);
        let _ = writeln!(out, "# output: {}", self.kind);
        let _ = writeln!(out, "# config_sha256: {}", self.config_sha256);
        for w in &self.warnings {
            let _ = writeln!(out, "# warning: {w}");
        }
    }
}

/// Numeric table; every value column is followed by its `_err` column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub metadata: Metadata,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
}

pub fn number(x: f64) -> String {
    format!("{x:.10e}")
}

impl Table {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => to_json(self),
        }
    }

    fn to_csv(&self) -> String {
        let mut out = String::new();
        self.metadata.write_csv(&mut out);
        let units: Vec<String> = self.columns.iter().map(|c| format!("{}={}", c.name, c.unit)).collect();
        let _ = writeln!(out, "# units: {}", units.join(" "));
        let names: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        out.push_str(&names.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| number(x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Table {
        Table {
            metadata: Metadata::new("figure test", "abc".into(), vec!["careful".into()]),
            columns: vec![Column::new("x", "m"), Column::new("y", "J"), Column::new("y_err", "J")],
            rows: vec![vec![1.0, 2.5, 0.0], vec![2.0, -3.0e-7, 1e-20]],
        }
    }

    #[test]
    fn csv_has_metadata_header_and_fixed_numbers() {
        let csv = table().render(Format::Csv);
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines.iter().any(|l| *l == "# config_sha256: abc"));
        assert!(lines.iter().any(|l| *l == "# warning: careful"));
        assert!(lines.iter().any(|l| *l == "# units: x=m y=J y_err=J"));
        let header = lines.iter().position(|l| *l == "x,y,y_err").unwrap();
        assert_eq!(lines[header + 1], "1.0000000000e0,2.5000000000e0,0.0000000000e0");
        assert_eq!(lines.len(), header + 3);
    }

    #[test]
    fn json_mirrors_the_table() {
        let v: serde_json::Value = serde_json::from_str(&table().render(Format::Json)).unwrap();
        assert_eq!(v["columns"][1]["unit"], "J");
        assert_eq!(v["rows"][1][1], -3.0e-7);
        assert_eq!(v["metadata"]["config_sha256"], "abc");
    }
}
