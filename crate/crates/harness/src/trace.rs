//! Trace files: one `# `-prefixed JSON header line, then CSV records.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use parsgd::simnet::{EpochRecord, EpochStatus, RunOutcome};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: missing `# ` JSON header line")]
    MissingHeader { path: PathBuf },
    #[error("{path}: bad header: {source}")]
    Header { path: PathBuf, source: serde_json::Error },
    #[error("{path}: unexpected columns {found:?}, expected {expected:?}")]
    Columns { path: PathBuf, found: Vec<String>, expected: Vec<&'static str> },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub cell: String,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub rule: String,
    pub attack: String,
    pub f: usize,
    pub n_workers: usize,
    pub epochs: u64,
    pub problem: String,
    pub byzantine: Vec<usize>,
    pub crashed: Vec<usize>,
    pub outcome: RunOutcome,
    pub converged_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub epoch: u64,
    pub rule: String,
    pub attack: String,
    pub f: usize,
    pub inferred_c: usize,
    pub collected: usize,
    pub delta_t_us: u64,
    pub train_loss: f64,
    pub test_loss: f64,
    pub top1: Option<f64>,
    pub topk: Option<f64>,
    pub aggregation_us: u64,
    pub status: EpochStatus,
}

pub const COLUMNS: [&str; 13] = [
    "epoch",
    "rule",
    "attack",
    "f",
    "inferred_c",
    "collected",
    "delta_t_us",
    "train_loss",
    "test_loss",
    "top1",
    "topk",
    "aggregation_us",
    "status",
];

impl TraceRecord {
    pub fn from_epoch(header: &TraceHeader, r: &EpochRecord) -> Self {
        Self {
            epoch: r.report.epoch,
            rule: header.rule.clone(),
            attack: header.attack.clone(),
            f: header.f,
            inferred_c: r.report.inferred_c,
            collected: r.report.collected,
            delta_t_us: r.report.delta_t,
            train_loss: r.train.loss,
            test_loss: r.test.loss,
            top1: r.test.top1,
            topk: r.test.topk,
            aggregation_us: r.report.aggregation_us,
            status: r.report.status,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub header: TraceHeader,
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn final_test_loss(&self) -> Option<f64> {
        self.records.last().map(|r| r.test_loss)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = b"# ".to_vec();
        out.extend(serde_json::to_vec(&self.header).expect("header serialises"));
        out.push(b'\n');
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(COLUMNS).expect("in-memory write");
        for r in &self.records {
            w.serialize(r).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    /// Write via a temporary file and rename, so readers never see a
    /// partial trace.
    pub fn write_atomic(&self, path: &Path) -> Result<(), TraceError> {
        let io = |source| TraceError::Io { path: path.to_path_buf(), source };
        let tmp = path.with_extension("csv.tmp");
        let mut file = fs::File::create(&tmp).map_err(io)?;
        file.write_all(&self.to_bytes()).map_err(io)?;
        file.sync_all().map_err(io)?;
        fs::rename(&tmp, path).map_err(io)
    }

    pub fn read(path: &Path) -> Result<Self, TraceError> {
        let io = |source| TraceError::Io { path: path.to_path_buf(), source };
        let mut reader = BufReader::new(fs::File::open(path).map_err(io)?);
        let mut first = String::new();
        reader.read_line(&mut first).map_err(io)?;
        let json = first
            .strip_prefix("# ")
            .ok_or_else(|| TraceError::MissingHeader { path: path.to_path_buf() })?;
        let header: TraceHeader = serde_json::from_str(json.trim_end())
            .map_err(|source| TraceError::Header { path: path.to_path_buf(), source })?;
        let csv_err = |source| TraceError::Csv { path: path.to_path_buf(), source };
        let mut rdr = csv::Reader::from_reader(reader);
        let found: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(String::from).collect();
        if found.iter().map(String::as_str).ne(COLUMNS) {
            return Err(TraceError::Columns { path: path.to_path_buf(), found, expected: COLUMNS.to_vec() });
        }
        let records = rdr.deserialize().collect::<Result<Vec<TraceRecord>, _>>().map_err(csv_err)?;
        Ok(Self { header, records })
    }
}
