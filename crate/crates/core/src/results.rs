//! Result records, persisted as CSV with a JSON-lines mirror.
//!
//! Both files are append-only. The CSV header is fixed:
//!
//! ```text
//! schema_version,run_id,timestamp,experiment,config_hash,lx,ly,lz,n_total,
//! noise_kind,noise_magnitude,fidelity_mean,fidelity_stderr,leakage,
//! recorded_loss,duration_waits,duration_time,trajectories,seed
//! ```
//!
//! Floats are written in shortest round-trip form, so reading a file back
//! yields the records that were written.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 19] = [
    "schema_version",
    "run_id",
    "timestamp",
    "experiment",
    "config_hash",
    "lx",
    "ly",
    "lz",
    "n_total",
    "noise_kind",
    "noise_magnitude",
    "fidelity_mean",
    "fidelity_stderr",
    "leakage",
    "recorded_loss",
    "duration_waits",
    "duration_time",
    "trajectories",
    "seed",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub run_id: String,
    pub timestamp: String,
    pub experiment: String,
    pub config_hash: String,
    pub lx: i32,
    pub ly: i32,
    pub lz: i32,
    pub n_total: usize,
    /// Noise channel varied by the run, or `none`.
    pub noise_kind: String,
    pub noise_magnitude: f64,
    pub fidelity_mean: f64,
    pub fidelity_stderr: f64,
    pub leakage: f64,
    pub recorded_loss: f64,
    pub duration_waits: u64,
    pub duration_time: f64,
    pub trajectories: usize,
    pub seed: u64,
}

/// Timestamp stamped on new records.
///
/// Runs are reproducible byte for byte, so the wall clock is only read
/// when `SIMGATE_TIMESTAMP=now`. Any other value of the variable is used
/// verbatim; unset means the Unix epoch.
pub fn timestamp() -> String {
    match std::env::var("SIMGATE_TIMESTAMP") {
        Ok(v) if v == "now" => {
            let secs = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            format!("@{secs}")
        }
        Ok(v) => v,
        Err(_) => "1970-01-01T00:00:00Z".into(),
    }
}

/// Run id: a short digest of the config hash, seed and grid index.
pub fn run_id(config_hash: &str, seed: u64, index: usize) -> String {
    let mut h = Sha256::new();
    h.update(config_hash.as_bytes());
    h.update(seed.to_le_bytes());
    h.update((index as u64).to_le_bytes());
    let d = h.finalize();
    d[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// JSON-lines path paired with a CSV path.
pub fn jsonl_path(csv: &Path) -> PathBuf {
    csv.with_extension("jsonl")
}

/// Appends `records` to the CSV file at `path` and to its JSON-lines
/// mirror. A missing or empty CSV file gets the header first; an existing
/// one must carry the same header.
pub fn write_results(records: &[ResultRecord], path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    if !fresh {
        let mut first = String::new();
        BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?)
            .read_line(&mut first)
            .map_err(|e| Error::io(path, e))?;
        if first.trim_end() != CSV_HEADER.join(",") {
            return Err(Error::Format {
                path: path.into(),
                message: "existing file has a different header".into(),
            });
        }
    }
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    let csv_err = |e: csv::Error| Error::Format {
        path: path.into(),
        message: e.to_string(),
    };
    if fresh {
        w.write_record(CSV_HEADER).map_err(csv_err)?;
    }
    for r in records {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;

    let jpath = jsonl_path(path);
    let mut j = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&jpath)
        .map_err(|e| Error::io(&jpath, e))?;
    let mut buf = String::new();
    for r in records {
        buf.push_str(&serde_json::to_string(r).expect("records serialize"));
        buf.push('\n');
    }
    j.write_all(buf.as_bytes()).map_err(|e| Error::io(&jpath, e))?;
    Ok(())
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Format {
        path: path.into(),
        message: e.to_string(),
    })?;
    let header = r.headers().map_err(|e| Error::Format {
        path: path.into(),
        message: e.to_string(),
    })?;
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Format {
            path: path.into(),
            message: "unexpected header".into(),
        });
    }
    r.deserialize()
        .map(|row| {
            row.map_err(|e| Error::Format {
                path: path.into(),
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn read_results_jsonl(path: &Path) -> Result<Vec<ResultRecord>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    BufReader::new(f)
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map(|l| !l.trim().is_empty()).unwrap_or(true))
        .map(|(i, l)| {
            let l = l.map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&l).map_err(|e| Error::Format {
                path: path.into(),
                message: format!("line {}: {e}", i + 1),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(i: usize) -> ResultRecord {
        ResultRecord {
            schema_version: SCHEMA_VERSION,
            run_id: run_id("abc", 7, i),
            timestamp: "1970-01-01T00:00:00Z".into(),
            experiment: "gate".into(),
            config_hash: "abc".into(),
            lx: 3,
            ly: 2,
            lz: 2,
            n_total: 23,
            noise_kind: "loss".into(),
            noise_magnitude: 1e-4 * (i as f64 + 1.0),
            fidelity_mean: 0.1 + 0.2,
            fidelity_stderr: 1.0 / 3.0,
            leakage: 2e-17,
            recorded_loss: 0.0,
            duration_waits: 52,
            duration_time: 52.0,
            trajectories: 400,
            seed: u64::MAX,
        }
    }

    #[test]
    fn empty_write_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_results(&[], &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text, format!("{}\n", CSV_HEADER.join(",")));
        assert!(read_results(&p).unwrap().is_empty());
    }

    #[test]
    fn round_trip_and_append() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/out.csv");
        let recs: Vec<_> = (0..3).map(record).collect();
        write_results(&recs[..2], &p).unwrap();
        write_results(&recs[2..], &p).unwrap();
        assert_eq!(read_results(&p).unwrap(), recs);
        assert_eq!(read_results_jsonl(&jsonl_path(&p)).unwrap(), recs);
    }

    #[test]
    fn foreign_header_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        std::fs::write(&p, "a,b\n1,2\n").unwrap();
        assert!(write_results(&[record(0)], &p).is_err());
    }

    #[test]
    fn run_ids_are_stable() {
        assert_eq!(run_id("h", 1, 0), run_id("h", 1, 0));
        assert_ne!(run_id("h", 1, 0), run_id("h", 1, 1));
        assert_eq!(run_id("h", 1, 0).len(), 16);
    }
}
