//! Structured-text experiment reports and two-column plot files. Reports
//! carry no timestamps or wall times, so identical configurations produce
//! byte-identical output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub outcome: Outcome,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub name: String,
    pub config: Vec<(String, String)>,
    pub checks: Vec<Check>,
    pub artifacts: Vec<String>,
}

impl ExperimentReport {
    pub fn new(name: &str, config: Vec<(String, String)>) -> ExperimentReport {
        ExperimentReport { name: name.to_string(), config, checks: Vec::new(), artifacts: Vec::new() }
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: String) {
        self.checks.push(Check {
            name: name.to_string(),
            outcome: if pass { Outcome::Pass } else { Outcome::Fail },
            detail,
        });
    }

    /// A check that could not run; recorded rather than dropped.
    pub fn skip(&mut self, name: &str, reason: String) {
        self.checks.push(Check {
            name: name.to_string(),
            outcome: Outcome::Skipped,
            detail: reason,
        });
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Conjunction of the non-skipped checks; a report with any failed
    /// check fails as a whole.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.outcome != Outcome::Fail)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "MAOB-REPORT v1");
        let _ = writeln!(out, "experiment = {}", self.name);
        let _ = writeln!(out, "\n[config]");
        for (k, v) in &self.config {
            let _ = writeln!(out, "{k} = {v}");
        }
        let _ = writeln!(out, "\n[checks]");
        for c in &self.checks {
            let tag = match c.outcome {
                Outcome::Pass => "pass",
                Outcome::Fail => "FAIL",
                Outcome::Skipped => "skipped",
            };
            if c.detail.is_empty() {
                let _ = writeln!(out, "{} = {tag}", c.name);
            } else {
                let _ = writeln!(out, "{} = {tag}: {}", c.name, c.detail);
            }
        }
        let _ = writeln!(out, "\n[summary]");
        let _ = writeln!(out, "checks = {}", self.checks.len());
        let _ = writeln!(
            out,
            "failed = {}",
            self.checks.iter().filter(|c| c.outcome == Outcome::Fail).count()
        );
        let _ = writeln!(
            out,
            "skipped = {}",
            self.checks.iter().filter(|c| c.outcome == Outcome::Skipped).count()
        );
        let _ = writeln!(out, "pass = {}", self.passed());
        if !self.artifacts.is_empty() {
            let _ = writeln!(out, "\n[artifacts]");
            for a in &self.artifacts {
                let _ = writeln!(out, "{a}");
            }
        }
        out
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(format!("{}.report", self.name));
        std::fs::write(&path, self.render())
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

/// Two-column `x y` plot data; fitted-line parameters go in `#` header
/// comments so the file stays directly plottable.
pub fn write_plot(path: &Path, header: &[String], points: &[(f64, f64)]) -> Result<()> {
    let mut out = String::new();
    for h in header {
        let _ = writeln!(out, "# {h}");
    }
    for (x, y) in points {
        let _ = writeln!(out, "{} {}", crate::fieldio::format_value(*x), crate::fieldio::format_value(*y));
    }
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_is_the_conjunction_of_checks() {
        let mut r = ExperimentReport::new("demo", vec![("n".into(), "2".into())]);
        r.check("a", true, String::new());
        r.skip("b", "not applicable".into());
        assert!(r.passed());
        r.check("c", false, "margin -0.2".into());
        assert!(!r.passed());
        let text = r.render();
        assert!(text.contains("a = pass"));
        assert!(text.contains("b = skipped: not applicable"));
        assert!(text.contains("c = FAIL"));
        assert!(text.contains("pass = false"));
    }
}
