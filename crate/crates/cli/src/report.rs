use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

/// One judged invariant. Passing means `value ≤ tolerance` (or `<` when
/// `strict`).
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }

    pub fn below(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            pass: value < tolerance,
        }
    }
}

#[derive(Debug, Default)]
pub struct Report {
    pub checks: Vec<Check>,
    pub results: serde_json::Map<String, serde_json::Value>,
    pub csv: Vec<(String, String)>,
    pub binary: Vec<(String, Vec<u8>)>,
}

impl Report {
    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.results.insert(key.to_string(), v);
    }

    pub fn csv(&mut self, name: &str, content: String) {
        self.csv.push((name.to_string(), content));
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Writes `summary.json` and every data file under `dir`.
    pub fn write(&self, dir: &Path, summary: &serde_json::Value) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        let text = serde_json::to_string_pretty(summary).map_err(io::Error::other)?;
        fs::write(dir.join("summary.json"), text + "\n")?;
        for (name, body) in &self.csv {
            fs::write(dir.join(name), body)?;
        }
        for (name, bytes) in &self.binary {
            let path = dir.join(name);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent)?;
            }
            fs::write(path, bytes)?;
        }
        Ok(())
    }
}

/// Builds a CSV body from a header and rows of already formatted cells.
pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn num(v: f64) -> String {
    format!("{v:e}")
}
