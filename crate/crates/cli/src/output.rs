use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

/// Write `bytes` to a temporary file next to `path`, then rename it into
/// place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .with_context(|| format!("output path {} has no file name", path.display()))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// CSV table with a fixed header; every row is formatted up front so the
/// bytes only depend on the values.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(w.into_inner().map_err(|e| anyhow::anyhow!("csv: {e}"))?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes()?)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

/// `out` with `suffix` appended to its file name.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

#[derive(Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: Value,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub outputs: Vec<String>,
    pub results: Value,
    pub started_unix: u64,
    pub wall_clock_seconds: f64,
}

/// Collects outputs and results of one run; the manifest is written next
/// to the primary output.
pub struct Run {
    subcommand: String,
    config: Value,
    seed: Option<u64>,
    outputs: Vec<String>,
    started: Instant,
    started_unix: u64,
}

impl Run {
    pub fn start<C: Serialize>(subcommand: &str, config: &C, seed: Option<u64>) -> Result<Self> {
        Ok(Self {
            subcommand: subcommand.into(),
            config: serde_json::to_value(config)?,
            seed,
            outputs: Vec::new(),
            started: Instant::now(),
            started_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        })
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn finish(self, primary: &Path, results: Value) -> Result<PathBuf> {
        let path = sibling(primary, ".manifest.json");
        let m = RunManifest {
            subcommand: self.subcommand,
            config: self.config,
            seed: self.seed,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            outputs: self.outputs,
            results,
            started_unix: self.started_unix,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
        };
        write_json(&path, &m)?;
        Ok(path)
    }
}

/// Shortest round-trip form; exponent notation for very small or large
/// magnitudes.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(num(0.0), "0");
        assert_eq!(num(288.0), "288");
        assert_eq!(num(-0.25), "-0.25");
        assert_eq!(num(1.5e-12), "1.5e-12");
        assert_eq!(num(-1.5e-12).parse::<f64>().unwrap(), -1.5e-12);
    }

    #[test]
    fn table_bytes() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "x;y".into()]);
        assert_eq!(t.to_bytes().unwrap(), b"a,b\n1,x;y\n");
    }
}
