use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One recorded iteration; `k` counts completed iterations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub fidelity: f64,
    /// `||x_k - f(x_k)||` for the raw (unrelaxed) denoiser.
    pub fp_residual: f64,
    /// `||x_k - x_{k-1}||`.
    pub step_change: f64,
    pub psnr: Option<f64>,
}

/// Per-iteration history plus the state of the returned iterate.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<TraceRecord>,
    pub final_fidelity: f64,
    pub final_fp_residual: f64,
    /// `||grad l(x)||` at the returned iterate. Together with
    /// `final_fp_residual` this tells apart runs that reached a common point
    /// of `Fix(f)` and the fidelity minimizers from runs where the two sets
    /// do not meet.
    pub final_grad_norm: f64,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    /// CSV with header `k,fidelity,fp_residual,step_change,psnr`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.records.is_empty() {
            w.write_record(["k", "fidelity", "fp_residual", "step_change", "psnr"])?;
        }
        for r in &self.records {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }

    /// Reads the records of a trace CSV. Terminal fields are taken from the
    /// last row.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let malformed = |detail: String| Error::MalformedTrace {
            path: path.to_path_buf(),
            detail,
        };
        let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => match e.into_kind() {
                csv::ErrorKind::Io(io) => Error::io(path, io),
                _ => unreachable!(),
            },
            _ => malformed(e.to_string()),
        })?;
        let header = rdr.headers().map_err(|e| malformed(e.to_string()))?;
        if header != vec!["k", "fidelity", "fp_residual", "step_change", "psnr"] {
            return Err(malformed(format!("unexpected header {header:?}")));
        }
        let records = rdr
            .deserialize()
            .collect::<std::result::Result<Vec<TraceRecord>, _>>()
            .map_err(|e| malformed(e.to_string()))?;
        if records.is_empty() {
            return Err(malformed("no records".into()));
        }
        let last = records[records.len() - 1];
        Ok(Self {
            final_fidelity: last.fidelity,
            final_fp_residual: last.fp_residual,
            final_grad_norm: f64::NAN,
            records,
        })
    }
}
