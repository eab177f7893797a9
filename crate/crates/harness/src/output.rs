//! CSV records, JSON summaries and the files they go to.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use mipt_core::experiments::{FitResult, RunRecord};
use serde::Serialize;

pub const CSV_HEADER: &str = "model,q,lx,ly,param,region,sample,seed,value";

/// Version string baked in at build time (`git describe`, or the crate version).
pub const VERSION: &str = env!("MIPT_VERSION");

pub fn to_csv(records: &[RunRecord]) -> String {
    let mut s = String::with_capacity(64 * (records.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{:.16e},{},{},{},{:.16e}",
            r.model, r.q, r.lx, r.ly, r.param, r.region, r.sample, r.seed, r.value
        );
    }
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct NamedFit {
    pub name: String,
    #[serde(flatten)]
    pub fit: FitResult,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub version: String,
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub fits: Vec<NamedFit>,
    /// Fits or checks that failed, with the reason.
    pub errors: Vec<String>,
    pub diagnostics: serde_json::Value,
}

/// `<out>.csv`, `<out>.json` and `<out>.svg`.
pub fn output_paths(out: &str) -> [PathBuf; 3] {
    ["csv", "json", "svg"].map(|ext| PathBuf::from(format!("{out}.{ext}")))
}

pub fn write_all(out: &str, csv: &str, summary: &Summary, svg: &str) -> io::Result<()> {
    let [c, j, s] = output_paths(out);
    if let Some(dir) = c.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let json = serde_json::to_string_pretty(summary).map_err(io::Error::other)?;
    write(&c, csv)?;
    write(&j, &(json + "\n"))?;
    write(&s, svg)
}

fn write(path: &Path, text: &str) -> io::Result<()> {
    std::fs::write(path, text).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}
