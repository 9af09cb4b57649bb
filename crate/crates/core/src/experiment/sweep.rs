use std::path::PathBuf;

use rayon::prelude::*;

use super::config::{parse_rate, parse_tau, RunConfig};
use super::metrics::write_csv;
use super::runner::{prepare, summarize, train_run, write_outputs, RunSummary};
use crate::{Error, Result};

pub const SWEEP_HEADER: [&str; 7] = [
    "key",
    "value",
    "final_mean_accuracy",
    "final_mean_loss_ratio",
    "total_uploaded_entries",
    "total_index_entries",
    "total_broadcast_entries",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKey {
    Tau,
    Rate,
}

impl SweepKey {
    pub fn name(self) -> &'static str {
        match self {
            SweepKey::Tau => "tau",
            SweepKey::Rate => "rate",
        }
    }
}

impl std::str::FromStr for SweepKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tau" => Ok(SweepKey::Tau),
            "rate" => Ok(SweepKey::Rate),
            _ => Err(Error::config(format!(
                "unknown sweep key {s:?}, expected tau or rate"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: String,
    pub summary: RunSummary,
}

/// Runs one experiment per value with identical seeds and data, in parallel.
///
/// Each point writes its CSVs to `<output>/<key>_<value>/`; the per-value
/// summary goes to `<output>/sweep_summary.csv` in the order given. Every
/// value is validated before any training starts. With baseline mode on, the
/// no-sync baseline is trained once and shared by all points.
pub fn sweep(config: &RunConfig, key: SweepKey, values: &[String]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::config("sweep needs at least one value"));
    }
    let points = values
        .iter()
        .map(|v| {
            let mut c = config.clone();
            match key {
                SweepKey::Tau => c.tau = parse_tau(v)?,
                SweepKey::Rate => c.rate = parse_rate(v)?,
            }
            c.output = config
                .output
                .join(format!("{}_{}", key.name(), v.replace('/', "over")));
            c.validate()?;
            Ok(c)
        })
        .collect::<Result<Vec<RunConfig>>>()?;

    let prepared = prepare(config)?;
    let baseline = if config.baseline {
        let b = train_run(&prepared, None, None)?;
        write_outputs(&config.output.join("baseline"), &b, &summarize(&b, None))?;
        Some(b)
    } else {
        None
    };

    let rows = points
        .par_iter()
        .zip(values)
        .map(|(c, v)| {
            let run = train_run(&prepared, c.tau, c.rate)?;
            let summary = summarize(&run, baseline.as_ref());
            write_outputs(&c.output, &run, &summary)?;
            Ok(SweepRow {
                value: v.clone(),
                summary,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let path: PathBuf = config.output.join("sweep_summary.csv");
    write_csv(
        &path,
        &SWEEP_HEADER,
        rows.iter().map(|r| {
            [
                key.name().to_string(),
                r.value.clone(),
                r.summary.mean_accuracy.to_string(),
                r.summary
                    .mean_loss_ratio
                    .map(|x| x.to_string())
                    .unwrap_or_default(),
                r.summary.comm.total_uploaded().to_string(),
                r.summary.comm.total_index_entries().to_string(),
                r.summary.comm.broadcast.to_string(),
            ]
        }),
    )?;
    Ok(rows)
}
