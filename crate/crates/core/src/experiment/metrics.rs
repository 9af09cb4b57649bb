//! CSV schemas.
//!
//! `metrics.csv`: `round,device,learning_signal,test_log_loss,test_accuracy,uploaded_entries`,
//! one row per device per evaluation point plus a `device = -1` row for the
//! dataset-weighted average of the device models (its learning signal is the
//! device mean and its upload count the total over devices).
//!
//! `summary.csv`: `device,final_test_accuracy,final_test_log_loss,loss_ratio,uploaded_entries,index_entries,broadcast_entries`,
//! one row per device, a `-1` row for the averaged model and a `mean` row over
//! devices. `loss_ratio` is empty unless baseline mode is on.

use std::path::Path;

use crate::{Error, Result};

pub const METRICS_HEADER: [&str; 6] = [
    "round",
    "device",
    "learning_signal",
    "test_log_loss",
    "test_accuracy",
    "uploaded_entries",
];

pub const SUMMARY_HEADER: [&str; 7] = [
    "device",
    "final_test_accuracy",
    "final_test_log_loss",
    "loss_ratio",
    "uploaded_entries",
    "index_entries",
    "broadcast_entries",
];

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub round: usize,
    /// Device id, or −1 for the averaged model.
    pub device: i64,
    pub learning_signal: f64,
    pub test_log_loss: f64,
    pub test_accuracy: f64,
    pub uploaded_entries: u64,
}

impl MetricsRow {
    pub(crate) fn record(&self) -> [String; 6] {
        [
            self.round.to_string(),
            self.device.to_string(),
            self.learning_signal.to_string(),
            self.test_log_loss.to_string(),
            self.test_accuracy.to_string(),
            self.uploaded_entries.to_string(),
        ]
    }

    fn from_record(r: &csv::StringRecord) -> Result<Self> {
        let field = |i: usize| r.get(i).ok_or_else(|| Error::format("short metrics row"));
        let bad = |i: usize| Error::format(format!("bad metrics field {}", METRICS_HEADER[i]));
        Ok(Self {
            round: field(0)?.parse().map_err(|_| bad(0))?,
            device: field(1)?.parse().map_err(|_| bad(1))?,
            learning_signal: field(2)?.parse().map_err(|_| bad(2))?,
            test_log_loss: field(3)?.parse().map_err(|_| bad(3))?,
            test_accuracy: field(4)?.parse().map_err(|_| bad(4))?,
            uploaded_entries: field(5)?.parse().map_err(|_| bad(5))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    /// Device id, `-1` for the averaged model, or `mean`.
    pub device: String,
    pub final_test_accuracy: f64,
    pub final_test_log_loss: f64,
    pub loss_ratio: Option<f64>,
    pub uploaded_entries: u64,
    pub index_entries: u64,
    pub broadcast_entries: u64,
}

impl SummaryRow {
    pub(crate) fn record(&self) -> [String; 7] {
        [
            self.device.clone(),
            self.final_test_accuracy.to_string(),
            self.final_test_log_loss.to_string(),
            self.loss_ratio.map(|r| r.to_string()).unwrap_or_default(),
            self.uploaded_entries.to_string(),
            self.index_entries.to_string(),
            self.broadcast_entries.to_string(),
        ]
    }

    fn from_record(r: &csv::StringRecord) -> Result<Self> {
        let field = |i: usize| r.get(i).ok_or_else(|| Error::format("short summary row"));
        let bad = |i: usize| Error::format(format!("bad summary field {}", SUMMARY_HEADER[i]));
        let ratio = field(3)?;
        Ok(Self {
            device: field(0)?.to_string(),
            final_test_accuracy: field(1)?.parse().map_err(|_| bad(1))?,
            final_test_log_loss: field(2)?.parse().map_err(|_| bad(2))?,
            loss_ratio: if ratio.is_empty() {
                None
            } else {
                Some(ratio.parse().map_err(|_| bad(3))?)
            },
            uploaded_entries: field(4)?.parse().map_err(|_| bad(4))?,
            index_entries: field(5)?.parse().map_err(|_| bad(5))?,
            broadcast_entries: field(6)?.parse().map_err(|_| bad(6))?,
        })
    }
}

fn check_header(reader: &mut csv::Reader<std::fs::File>, want: &[&str]) -> Result<()> {
    let header = reader.headers()?;
    if header.iter().ne(want.iter().copied()) {
        return Err(Error::format(format!("unexpected CSV header {header:?}")));
    }
    Ok(())
}

pub fn read_metrics(path: impl AsRef<Path>) -> Result<Vec<MetricsRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    check_header(&mut reader, &METRICS_HEADER)?;
    reader
        .records()
        .map(|r| MetricsRow::from_record(&r?))
        .collect()
}

pub fn read_summary(path: impl AsRef<Path>) -> Result<Vec<SummaryRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    check_header(&mut reader, &SUMMARY_HEADER)?;
    reader
        .records()
        .map(|r| SummaryRow::from_record(&r?))
        .collect()
}

pub(crate) fn write_csv<const N: usize>(
    path: &Path,
    header: &[&str; N],
    rows: impl IntoIterator<Item = [String; N]>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}
