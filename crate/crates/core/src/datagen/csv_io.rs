//! CSV format: header `x1,...,xd,s,y`, one row per instance. `s` is `1` or
//! `-1` (unlabelled); `y` is the latent label or empty when unknown.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;

use super::PuDataset;
use crate::error::{PgpuError, Result};

pub fn read_csv<R: Read>(reader: R) -> Result<PuDataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    let width = header.len();
    if width < 3 || &header[width - 2] != "s" || &header[width - 1] != "y" {
        return Err(PgpuError::Parse { line: 1, message: "header must be x1,...,xd,s,y".into() });
    }
    let dim = width - 2;

    let mut values = Vec::new();
    let mut s = Vec::new();
    let mut y: Vec<Option<i8>> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let err = |message: String| PgpuError::Parse { line, message };
        if record.len() != width {
            return Err(err(format!("expected {width} fields, found {}", record.len())));
        }
        for j in 0..dim {
            let v: f64 = record[j]
                .trim()
                .parse()
                .map_err(|_| err(format!("column x{} is not a number: '{}'", j + 1, &record[j])))?;
            values.push(v);
        }
        s.push(parse_label(&record[dim]).map_err(|m| err(format!("column s: {m}")))?);
        let raw_y = record[dim + 1].trim();
        y.push(if raw_y.is_empty() {
            None
        } else {
            Some(parse_label(raw_y).map_err(|m| err(format!("column y: {m}")))?)
        });
    }

    let n = s.len();
    let x = Array2::from_shape_vec((n, dim), values).map_err(|e| PgpuError::Parse { line: 0, message: e.to_string() })?;
    let latent = if n > 0 && y.iter().all(Option::is_some) {
        Some(y.into_iter().flatten().collect())
    } else if y.iter().all(Option::is_none) {
        None
    } else {
        return Err(PgpuError::Parse { line: 0, message: "latent labels must be given for all rows or none".into() });
    };
    PuDataset::new(x, s, latent)
}

fn parse_label(raw: &str) -> std::result::Result<i8, String> {
    match raw.trim() {
        "1" | "+1" => Ok(1),
        "-1" => Ok(-1),
        other => Err(format!("invalid label '{other}', expected 1 or -1")),
    }
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<PuDataset> {
    read_csv(File::open(path)?)
}

pub fn write_csv<W: Write>(dataset: &PuDataset, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (1..=dataset.dim()).map(|j| format!("x{j}")).collect();
    header.push("s".into());
    header.push("y".into());
    wtr.write_record(&header)?;
    for (i, row) in dataset.x.outer_iter().enumerate() {
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        rec.push(dataset.s[i].to_string());
        rec.push(dataset.y.as_ref().map_or(String::new(), |y| y[i].to_string()));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_csv(dataset: &PuDataset, path: impl AsRef<Path>) -> Result<()> {
    write_csv(dataset, File::create(path)?)
}
