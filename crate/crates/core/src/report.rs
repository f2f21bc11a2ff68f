//! The common result format: one JSON document per run with the sections
//! `config`, `metrics`, `checks` and `tables`, CSV twins of the tables, and
//! optional SVG overlays.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::domain::DomainSpec;
use crate::error::Result;
use crate::geometry::{Point, Polygon};
use crate::graph::MetricGraph;

pub const VERSION: &str = concat!("qhlab ", env!("CARGO_PKG_VERSION"));

/// Outcome of one inequality check. `extremum` is the worst observed value
/// of the checked ratio; the check passes when `violations == 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub checked: usize,
    pub violations: usize,
    pub extremum: f64,
    pub bound: f64,
    pub details: BTreeMap<String, f64>,
}

impl Check {
    pub fn new(name: &str, bound: f64) -> Self {
        Self {
            name: name.to_string(),
            checked: 0,
            violations: 0,
            extremum: 0.0,
            bound,
            details: BTreeMap::new(),
        }
    }

    /// A check with a single yes/no outcome.
    pub fn boolean(name: &str, ok: bool) -> Self {
        Self {
            checked: 1,
            violations: usize::from(!ok),
            ..Self::new(name, 0.0)
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    /// Where the check ran, e.g. `disk h=0.02`.
    pub scope: String,
    pub passed: bool,
    #[serde(flatten)]
    pub check: Check,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Value>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(csv_cell).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// One result document.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultDoc {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: Value,
    pub metrics: BTreeMap<String, Value>,
    pub checks: Vec<CheckEntry>,
    /// `scope: name` of every failed check.
    pub violations: Vec<String>,
    pub tables: BTreeMap<String, Table>,
    pub passed: bool,
    /// SVG overlays by name; written next to the document, not embedded.
    #[serde(skip)]
    pub figures: BTreeMap<String, String>,
}

impl ResultDoc {
    pub fn new(command: &str, config: Value) -> Self {
        Self {
            tool: "qhlab".into(),
            version: VERSION.into(),
            command: command.into(),
            config,
            metrics: BTreeMap::new(),
            checks: Vec::new(),
            violations: Vec::new(),
            tables: BTreeMap::new(),
            passed: true,
            figures: BTreeMap::new(),
        }
    }

    pub fn metric<T: Serialize>(&mut self, key: &str, value: &T) {
        let v = serde_json::to_value(value).expect("metrics are serializable");
        self.metrics.insert(key.to_string(), v);
    }

    pub fn check(&mut self, scope: &str, check: Check) {
        self.passed &= check.passed();
        if !check.passed() {
            self.violations.push(format!("{scope}: {}", check.name));
        }
        self.checks.push(CheckEntry {
            scope: scope.to_string(),
            passed: check.passed(),
            check,
        });
    }

    pub fn table(&mut self, name: &str, table: Table) {
        self.tables.insert(name.to_string(), table);
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &CheckEntry> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    /// Writes `<command>.json`, one `<command>-<table>.csv` per table and one
    /// `<command>-<figure>.svg` per figure.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let main = dir.join(format!("{}.json", self.command));
        fs::write(&main, self.to_json())?;
        written.push(main);
        for (name, table) in &self.tables {
            let path = dir.join(format!("{}-{}.csv", self.command, name));
            fs::write(&path, table.to_csv())?;
            written.push(path);
        }
        for (name, svg) in &self.figures {
            let path = dir.join(format!("{}-{}.svg", self.command, name));
            fs::write(&path, svg)?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Minimal SVG scene in domain coordinates.
#[derive(Debug, Clone)]
pub struct Svg {
    lo: Point,
    hi: Point,
    body: String,
}

impl Svg {
    pub fn new(dom: &DomainSpec) -> Self {
        let (lo, hi) = dom.bbox();
        let mut svg = Self {
            lo,
            hi,
            body: String::new(),
        };
        let mut d = polygon_path(dom.outer());
        for hole in dom.holes() {
            d.push(' ');
            d.push_str(&polygon_path(hole));
        }
        let w = svg.stroke();
        writeln!(
            svg.body,
            r##"<path d="{d}" fill="#f4f1ea" fill-rule="evenodd" stroke="#222" stroke-width="{w}"/>"##
        )
        .unwrap();
        svg
    }

    fn stroke(&self) -> f64 {
        (self.hi.x - self.lo.x).max(self.hi.y - self.lo.y) / 400.0
    }

    pub fn polyline(&mut self, g: &MetricGraph, nodes: &[usize], color: &str) {
        let pts: Vec<String> = nodes
            .iter()
            .map(|&v| {
                let p = g.position(v);
                format!("{:.6},{:.6}", p.x, p.y)
            })
            .collect();
        let w = 2.0 * self.stroke();
        writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="{w}"/>"#,
            pts.join(" ")
        )
        .unwrap();
    }

    pub fn circle(&mut self, c: Point, r: f64, color: &str) {
        let w = 0.5 * self.stroke();
        writeln!(
            self.body,
            r#"<circle cx="{:.6}" cy="{:.6}" r="{:.6}" fill="none" stroke="{color}" stroke-width="{w}"/>"#,
            c.x, c.y, r
        )
        .unwrap();
    }

    /// The document, flipped so that `y` points up.
    pub fn finish(&self) -> String {
        let (w, h) = (self.hi.x - self.lo.x, self.hi.y - self.lo.y);
        let pad = 0.02 * w.max(h);
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.6} {:.6} {:.6} {:.6}\" width=\"800\">\n<g transform=\"matrix(1 0 0 -1 0 {:.6})\">\n{}</g>\n</svg>\n",
            self.lo.x - pad,
            self.lo.y - pad,
            w + 2.0 * pad,
            h + 2.0 * pad,
            self.lo.y + self.hi.y,
            self.body
        )
    }
}

fn polygon_path(poly: &Polygon) -> String {
    let mut d = String::new();
    for (i, p) in poly.vertices.iter().enumerate() {
        let cmd = if i == 0 { 'M' } else { 'L' };
        write!(d, "{cmd}{:.6},{:.6} ", p.x, p.y).unwrap();
    }
    d.push('Z');
    d
}

#[cfg(test)]
mod tests {
    use serde_json::json;

    use super::*;

    #[test]
    fn csv_quotes_only_when_needed() {
        let mut t = Table::new(&["name", "value"]);
        t.push(vec![json!("a,b"), json!(1.5)]);
        t.push(vec![json!("plain"), Value::Null]);
        assert_eq!(t.to_csv(), "name,value\n\"a,b\",1.5\nplain,\n");
    }

    #[test]
    fn failed_check_marks_document() {
        let mut doc = ResultDoc::new("gh", json!({"seed": 42}));
        doc.check("s", Check::boolean("ok", true));
        assert!(doc.passed);
        doc.check("s", Check::boolean("bad", false));
        assert!(!doc.passed);
        assert_eq!(doc.failed_checks().count(), 1);
        let text = doc.to_json();
        assert!(text.contains("\"version\": \"qhlab "));
    }
}
