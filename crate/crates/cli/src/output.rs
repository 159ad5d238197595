//! Artifacts, checks and atomic output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::CommandName;

pub const MANIFEST: &str = "manifest.json";

/// One output file, fully rendered before anything touches the disk.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn json<T: Serialize>(name: &str, value: &T) -> Result<Self> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        Ok(Artifact {
            name: name.to_string(),
            bytes,
        })
    }

    pub fn csv(name: &str, header: &[&str], rows: &[Vec<String>]) -> Self {
        let mut s = header.join(",");
        s.push('\n');
        for row in rows {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        Artifact {
            name: name.to_string(),
            bytes: s.into_bytes(),
        }
    }
}

/// Renders a float for CSV; `None` is an empty cell.
pub fn cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub command: CommandName,
    pub summary: Vec<String>,
    pub artifacts: Vec<Artifact>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn new(command: CommandName) -> Self {
        Outcome {
            command,
            summary: Vec::new(),
            artifacts: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn line(&mut self, args: std::fmt::Arguments<'_>) {
        let mut s = String::new();
        let _ = s.write_fmt(args);
        self.summary.push(s);
    }

    pub fn failed(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: CommandName,
    created_unix_seconds: u64,
    files: Vec<&'a str>,
    checks: &'a [Check],
}

/// Writes every artifact plus a manifest into `dir`. Files are staged in a
/// temporary directory inside `dir` and renamed into place only once all of
/// them have been written.
pub fn write_atomic(dir: &Path, outcome: &Outcome) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let stage = tempfile::Builder::new()
        .prefix(".cobound-stage-")
        .tempdir_in(dir)
        .with_context(|| format!("staging in {}", dir.display()))?;
    let manifest = Manifest {
        command: outcome.command,
        created_unix_seconds: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        files: outcome.artifacts.iter().map(|a| a.name.as_str()).collect(),
        checks: &outcome.checks,
    };
    let manifest = Artifact::json(MANIFEST, &manifest)?;
    let all: Vec<&Artifact> = outcome.artifacts.iter().chain(Some(&manifest)).collect();
    for a in &all {
        fs::write(stage.path().join(&a.name), &a.bytes)
            .with_context(|| format!("writing {}", a.name))?;
    }
    for a in &all {
        fs::rename(stage.path().join(&a.name), dir.join(&a.name))
            .with_context(|| format!("moving {} into {}", a.name, dir.display()))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_rendering_and_empty_cells() {
        let a = Artifact::csv(
            "t.csv",
            &["a", "b"],
            &[
                vec!["1".into(), cell(None)],
                vec![cell(Some(0.5)), "x".into()],
            ],
        );
        assert_eq!(String::from_utf8(a.bytes).unwrap(), "a,b\n1,\n0.5,x\n");
    }

    #[test]
    fn atomic_write_leaves_only_final_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut o = Outcome::new(CommandName::Orlicz);
        o.artifacts
            .push(Artifact::json("r.json", &serde_json::json!({"v": 1})).unwrap());
        o.check("c", true, "");
        write_atomic(&dir.path().join("out"), &o).unwrap();
        let mut names: Vec<String> = std::fs::read_dir(dir.path().join("out"))
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        names.sort();
        assert_eq!(names, vec![MANIFEST.to_string(), "r.json".to_string()]);
    }

    #[test]
    fn failed_lists_only_failures() {
        let mut o = Outcome::new(CommandName::Verify);
        o.check("a", true, "");
        o.check("b", false, "why");
        assert_eq!(o.failed().len(), 1);
        assert_eq!(o.failed()[0].name, "b");
    }
}
