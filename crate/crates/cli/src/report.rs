//! Reports written side by side as text and JSON.

use anyhow::{Context, Result};
use serde_json::Value;
use std::path::Path;

#[derive(Clone, Debug)]
pub struct Report {
    /// File stem of the written report.
    pub name: String,
    pub pass: bool,
    pub lines: Vec<String>,
    pub data: Value,
    /// Worst offender when `pass` is false.
    pub failure: Option<String>,
}

impl Report {
    pub fn new(name: &str) -> Self {
        Self { name: name.into(), pass: true, lines: Vec::new(), data: Value::Null, failure: None }
    }

    pub fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    /// Record a tolerance comparison, keeping the first failure as the headline.
    pub fn require(&mut self, what: &str, value: f64, tolerance: f64, at: &str) {
        let ok = value <= tolerance;
        let status = if ok { "ok" } else { "FAILED" };
        self.line(format!("{what}: max deviation {} (tolerance {}) {status}", sci(value), sci(tolerance)));
        if !ok {
            self.pass = false;
            if self.failure.is_none() {
                self.failure = Some(format!("{what}: {} > {} at {at}", sci(value), sci(tolerance)));
            }
        }
    }

    pub fn text(&self) -> String {
        let mut s = format!("# {}\n", self.name);
        for l in &self.lines {
            s.push_str(l);
            s.push('\n');
        }
        s.push_str(if self.pass { "status: pass\n" } else { "status: FAIL\n" });
        s
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        std::fs::write(dir.join(format!("{}.txt", self.name)), self.text())?;
        let json = serde_json::json!({ "report": self.name, "pass": self.pass, "failure": self.failure, "data": self.data });
        std::fs::write(dir.join(format!("{}.json", self.name)), serde_json::to_string_pretty(&json)? + "\n")?;
        Ok(())
    }
}

/// Seventeen significant digits, exact for doubles.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

/// 64-bit FNV-1a, stable across platforms and releases.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}
