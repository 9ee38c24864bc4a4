//! CSV ingestion and CSV/JSON output. Floats are written with Rust's
//! shortest round-trip formatting; files are written to a temporary path
//! and renamed into place.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::design::{Dataset, Features, TaskKind};
use crate::error::{Error, Result};
use crate::posterior::{ChainMeta, PosteriorSamples};

/// Read a headered numeric CSV whose last column is the response.
///
/// Row and column numbers in errors are 1-based and count data rows only.
/// With `rescale`, every covariate column is mapped affinely onto [−1, 1].
pub fn ingest_csv(path: &Path, kind: TaskKind, rescale: bool) -> Result<Dataset> {
    let shown = path.display().to_string();
    let data_err = |row: usize, column: usize, message: String| Error::Data {
        path: shown.clone(),
        row,
        column,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let width = reader.headers().map_err(|e| csv_error(path, e))?.len();
    if width < 2 {
        return Err(data_err(0, width, format!("need at least 2 columns, header has {width}")));
    }
    let mut cells = Vec::new();
    let mut n = 0;
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| csv_error(path, e))?;
        if record.len() != width {
            return Err(data_err(
                row,
                record.len().min(width) + 1,
                format!("expected {width} fields, found {}", record.len()),
            ));
        }
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| data_err(row, j + 1, format!("non-numeric cell '{field}'")))?;
            if !v.is_finite() {
                return Err(data_err(row, j + 1, format!("non-finite cell '{field}'")));
            }
            if j + 1 == width && kind == TaskKind::Classification && v != 0.0 && v != 1.0 {
                return Err(data_err(row, j + 1, format!("label {field} is not 0 or 1")));
            }
            cells.push(v);
        }
        n += 1;
    }
    let all = DMatrix::from_row_slice(n, width, &cells);
    let mut x = all.columns(0, width - 1).into_owned();
    let y = all.column(width - 1).into_owned();
    if rescale {
        for j in 0..x.ncols() {
            let mut col = x.column_mut(j);
            let lo = col.min();
            let hi = col.max();
            if n > 0 && lo == hi {
                return Err(data_err(0, j + 1, "cannot rescale a constant column".into()));
            }
            col.apply(|v| *v = -1.0 + 2.0 * ((*v - lo) / (hi - lo)));
        }
    }
    Dataset::new(x, y, kind)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let shown = path.display().to_string();
    match e.kind() {
        csv::ErrorKind::Io(_) => {
            let csv::ErrorKind::Io(source) = e.into_kind() else {
                unreachable!()
            };
            Error::io(path, source)
        }
        _ => {
            let row = e.position().map_or(0, |p| p.record() as usize);
            Error::Data {
                path: shown,
                row,
                column: 0,
                message: e.to_string(),
            }
        }
    }
}

/// Write `bytes` to `path` through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::config(format!("output path '{}' has no file name", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp: PathBuf = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

/// Serialize rows into CSV text.
pub fn csv_text<R: AsRef<[String]>>(header: &[&str], rows: &[R]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| Error::config(e.to_string()))?;
    for r in rows {
        w.write_record(r.as_ref()).map_err(|e| Error::config(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::config(e.to_string()))
}

pub fn write_csv<R: AsRef<[String]>>(path: &Path, header: &[&str], rows: &[R]) -> Result<()> {
    write_atomic(path, &csv_text(header, rows)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Error::config(e.to_string()))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn fmt(v: f64) -> String {
    v.to_string()
}

/// Header `x,y` for one covariate, `x1,…,xp,y` otherwise.
pub fn write_dataset(path: &Path, data: &Dataset) -> Result<()> {
    let p = data.dim();
    let mut header: Vec<String> = if p == 1 {
        vec!["x".into()]
    } else {
        (1..=p).map(|j| format!("x{j}")).collect()
    };
    header.push("y".into());
    let rows: Vec<Vec<String>> = (0..data.len())
        .map(|i| {
            let mut r: Vec<String> = data.x.row(i).iter().map(|&v| fmt(v)).collect();
            r.push(fmt(data.y[i]));
            r
        })
        .collect();
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(path, &h, &rows)
}

/// Name of the column holding `draws_lambda2` for a given sampler.
pub fn scale_column(sampler: &str) -> &'static str {
    if sampler == "horseshoe" {
        "tau2_global"
    } else {
        "lambda2"
    }
}

/// One row per retained draw: `beta_1..beta_K` then `sigma2` and the
/// shrinkage scale when the chain carries them.
pub fn write_draws(path: &Path, samples: &PosteriorSamples) -> Result<()> {
    let k = samples.dim();
    let mut header: Vec<String> = (1..=k).map(|j| format!("beta_{j}")).collect();
    let has_sigma = !samples.draws_sigma2.is_empty();
    let has_scale = !samples.draws_lambda2.is_empty();
    if has_sigma {
        header.push("sigma2".into());
    }
    if has_scale {
        header.push(scale_column(&samples.meta.sampler).into());
    }
    let rows: Vec<Vec<String>> = (0..samples.len())
        .map(|i| {
            let mut r: Vec<String> = samples.draws_beta.row(i).iter().map(|&v| fmt(v)).collect();
            if has_sigma {
                r.push(fmt(samples.draws_sigma2[i]));
            }
            if has_scale {
                r.push(fmt(samples.draws_lambda2[i]));
            }
            r
        })
        .collect();
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(path, &h, &rows)
}

/// What is needed besides the draws to rebuild a [`PosteriorSamples`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplesInfo {
    pub features: Features,
    pub intercept: f64,
    pub meta: ChainMeta,
}

pub fn read_draws(path: &Path, info: &SamplesInfo) -> Result<PosteriorSamples> {
    let shown = path.display().to_string();
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    let k = header.iter().filter(|h| h.starts_with("beta_")).count();
    let sigma_col = header.iter().position(|h| h == "sigma2");
    let scale_col = header
        .iter()
        .position(|h| h == "lambda2" || h == "tau2_global");
    let mut beta = Vec::new();
    let mut sigma2 = Vec::new();
    let mut lambda2 = Vec::new();
    let mut m = 0;
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let vals: Vec<f64> = rec
            .iter()
            .enumerate()
            .map(|(j, f)| {
                f.parse().map_err(|_| Error::Data {
                    path: shown.clone(),
                    row: i + 1,
                    column: j + 1,
                    message: format!("non-numeric cell '{f}'"),
                })
            })
            .collect::<Result<_>>()?;
        beta.extend_from_slice(&vals[..k]);
        if let Some(c) = sigma_col {
            sigma2.push(vals[c]);
        }
        if let Some(c) = scale_col {
            lambda2.push(vals[c]);
        }
        m += 1;
    }
    Ok(PosteriorSamples {
        draws_beta: DMatrix::from_row_slice(m, k, &beta),
        draws_sigma2: sigma2,
        draws_lambda2: lambda2,
        intercept: info.intercept,
        features: info.features,
        meta: info.meta.clone(),
    })
}

pub fn vec_of(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}
