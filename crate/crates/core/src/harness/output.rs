use std::path::Path;

use crate::bounds::BoundReport;
use crate::point_process::fmt_f64;
use crate::{Error, Result};

use super::experiment::{RatePoint, ReplicateRecord};

const RECORDS_HEADER: [&str; 5] = ["lambda", "replicate", "value", "standardized", "seed"];
const RATEFIT_HEADER: [&str; 5] = ["lambda", "d_w", "d_k", "bound", "ratio"];

fn to_string(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

pub fn records_csv(records: &[ReplicateRecord]) -> String {
    to_string(
        &RECORDS_HEADER,
        records.iter().map(|r| {
            vec![
                fmt_f64(r.lambda),
                r.replicate.to_string(),
                fmt_f64(r.value),
                fmt_f64(r.standardized),
                r.seed.to_string(),
            ]
        }),
    )
}

pub fn ratefit_csv(points: &[RatePoint]) -> String {
    to_string(
        &RATEFIT_HEADER,
        points.iter().map(|p| {
            [p.lambda, p.d_w, p.d_k, p.bound, p.ratio]
                .iter()
                .map(|&v| fmt_f64(v))
                .collect()
        }),
    )
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_records_csv(records: &[ReplicateRecord], path: &Path) -> Result<()> {
    write(path, &records_csv(records))
}

pub fn write_ratefit_csv(points: &[RatePoint], path: &Path) -> Result<()> {
    write(path, &ratefit_csv(points))
}

pub fn write_report_json(report: &BoundReport, path: &Path) -> Result<()> {
    write(path, &(report.to_json() + "\n"))
}

fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e))?;
    let found = r.headers().map_err(|e| Error::parse(path, e))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::parse(
            path,
            format!("expected header {}", header.join(",")),
        ));
    }
    r.records()
        .map(|row| row.map_err(|e| Error::parse(path, e)))
        .collect()
}

fn field<T: std::str::FromStr>(path: &Path, row: &csv::StringRecord, i: usize) -> Result<T> {
    row.get(i)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::parse(path, format!("bad field {i} in row {row:?}")))
}

pub fn read_records_csv(path: &Path) -> Result<Vec<ReplicateRecord>> {
    read_rows(path, &RECORDS_HEADER)?
        .iter()
        .map(|row| {
            Ok(ReplicateRecord {
                lambda: field(path, row, 0)?,
                replicate: field(path, row, 1)?,
                value: field(path, row, 2)?,
                standardized: field(path, row, 3)?,
                seed: field(path, row, 4)?,
            })
        })
        .collect()
}

pub fn read_ratefit_csv(path: &Path) -> Result<Vec<RatePoint>> {
    read_rows(path, &RATEFIT_HEADER)?
        .iter()
        .map(|row| {
            Ok(RatePoint {
                lambda: field(path, row, 0)?,
                d_w: field(path, row, 1)?,
                d_k: field(path, row, 2)?,
                bound: field(path, row, 3)?,
                ratio: field(path, row, 4)?,
            })
        })
        .collect()
}

pub fn read_report_json(path: &Path) -> Result<BoundReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e))
}
