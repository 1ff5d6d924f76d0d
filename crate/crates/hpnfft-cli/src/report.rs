//! CSV sweep reports: a `# key=value` metadata block, a header row, then one
//! row per parameter combination. Output for a fixed seed is byte-stable, so
//! wall-clock data (timestamps, durations) goes to stderr or into explicitly
//! timing-labelled columns only.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use hpnfft::{Error, Result};

pub struct SweepReport {
    meta: Vec<(String, String)>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl SweepReport {
    pub fn new(header: &[&str]) -> Self {
        Self {
            meta: Vec::new(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row does not match header");
        self.rows.push(row);
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Writes to `path`, or stdout when no path is given.
    pub fn save(&self, path: Option<&Path>) -> Result<()> {
        let rendered = self.render();
        match path {
            Some(p) => {
                let mut f = File::create(p)
                    .map_err(|e| Error::Resource(format!("creating {}: {e}", p.display())))?;
                f.write_all(rendered.as_bytes())
                    .map_err(|e| Error::Resource(format!("writing {}: {e}", p.display())))
            }
            None => {
                print!("{rendered}");
                Ok(())
            }
        }
    }
}

/// Exponential shortest-roundtrip rendering for metrics; stable for a fixed
/// input value.
pub fn metric(v: f64) -> String {
    format!("{v:e}")
}
