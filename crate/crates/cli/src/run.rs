//! Run directories, output files and the manifest.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use copolymer::report::{write_jsonl, ResultRecord, Status};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileDigest {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub software_version: String,
    pub config: RunConfig,
    pub started: String,
    pub finished: String,
    /// `ok`, `failed`, `inconclusive`, `exploratory` or `error`.
    pub status: String,
    pub error: Option<String>,
    pub files: Vec<FileDigest>,
}

/// A fresh directory `<root>/<experiment>-<utc timestamp>-s<seed>[-k]`.
pub struct RunDir {
    pub path: PathBuf,
    started: DateTime<Utc>,
    files: Vec<String>,
    records: Vec<ResultRecord>,
}

impl RunDir {
    pub fn create(cfg: &RunConfig) -> io::Result<Self> {
        let started = Utc::now();
        fs::create_dir_all(&cfg.out)?;
        let stem = format!(
            "{}-{}-s{}",
            cfg.experiment,
            started.format("%Y%m%dT%H%M%S%.3fZ"),
            cfg.seed
        );
        let mut k = 0;
        loop {
            let name = if k == 0 { stem.clone() } else { format!("{stem}-{k}") };
            let path = cfg.out.join(name);
            match fs::create_dir(&path) {
                Ok(()) => {
                    return Ok(Self {
                        path,
                        started,
                        files: Vec::new(),
                        records: Vec::new(),
                    })
                }
                Err(e) if e.kind() == io::ErrorKind::AlreadyExists => k += 1,
                Err(e) => return Err(e),
            }
        }
    }

    /// Creates `name` inside the run directory and registers it for the manifest.
    pub fn file(&mut self, name: &str) -> io::Result<BufWriter<File>> {
        assert!(!self.files.iter().any(|f| f == name), "output `{name}` written twice");
        self.files.push(name.to_string());
        Ok(BufWriter::new(File::create(self.path.join(name))?))
    }

    pub fn record(&mut self, rec: ResultRecord) {
        self.records.push(rec);
    }

    pub fn records(&self) -> &[ResultRecord] {
        &self.records
    }

    /// Writes `results.jsonl` and then `manifest.json` (via rename).
    pub fn finish(mut self, cfg: &RunConfig, error: Option<String>) -> io::Result<RunManifest> {
        let mut w = self.file("results.jsonl")?;
        write_jsonl(&mut w, &self.records).map_err(io::Error::other)?;
        w.flush()?;
        drop(w);
        let mut files = Vec::with_capacity(self.files.len());
        for name in &self.files {
            files.push(digest(&self.path.join(name), name)?);
        }
        let status = match &error {
            Some(_) => "error",
            None => overall_status(&self.records),
        };
        let manifest = RunManifest {
            software_version: copolymer::VERSION.to_string(),
            config: cfg.clone(),
            started: self.started.to_rfc3339_opts(SecondsFormat::Millis, true),
            finished: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
            status: status.to_string(),
            error,
            files,
        };
        let tmp = self.path.join("manifest.json.tmp");
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            serde_json::to_writer_pretty(&mut w, &manifest)?;
            w.write_all(b"\n")?;
            w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        }
        fs::rename(&tmp, self.path.join("manifest.json"))?;
        Ok(manifest)
    }
}

pub fn overall_status(records: &[ResultRecord]) -> &'static str {
    let has = |s: Status| records.iter().any(|r| r.status == s);
    if has(Status::Failed) {
        "failed"
    } else if has(Status::Inconclusive) {
        "inconclusive"
    } else if has(Status::Exploratory) {
        "exploratory"
    } else {
        "ok"
    }
}

fn digest(path: &Path, name: &str) -> io::Result<FileDigest> {
    let mut f = File::open(path)?;
    let mut h = Sha256::new();
    let bytes = io::copy(&mut f, &mut h)?;
    Ok(FileDigest {
        name: name.to_string(),
        bytes,
        sha256: format!("{:x}", h.finalize()),
    })
}
