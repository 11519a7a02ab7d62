use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::solvers::IterationTrace;

/// Writes two whitespace-separated data files per trace CSV:
/// `<stem>_fidelity.dat` with `k |l_k - l_N| / |l_N|` and
/// `<stem>_fixedpoint.dat` with `k r_k / r_N`, where `N` is the last record.
/// A zero final value falls back to the absolute quantity.
///
/// Returns the written paths in input order.
pub fn emit_convergence_plots(traces: &[PathBuf], out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::with_capacity(2 * traces.len());
    for path in traces {
        let trace = IterationTrace::read_csv(path)?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "trace".into());
        let stem = stem.strip_suffix("_trace").unwrap_or(&stem).to_string();
        let last = *trace.last().expect("read_csv rejects empty traces");

        let fid_scale = if last.fidelity != 0.0 { last.fidelity.abs() } else { 1.0 };
        let res_scale = if last.fp_residual != 0.0 { last.fp_residual } else { 1.0 };
        let mut fid = String::new();
        let mut res = String::new();
        for r in &trace.records {
            writeln!(fid, "{} {:e}", r.k, (r.fidelity - last.fidelity).abs() / fid_scale).unwrap();
            writeln!(res, "{} {:e}", r.k, r.fp_residual / res_scale).unwrap();
        }
        for (suffix, body) in [("fidelity", fid), ("fixedpoint", res)] {
            let target = out_dir.join(format!("{stem}_{suffix}.dat"));
            std::fs::write(&target, body).map_err(|e| Error::io(&target, e))?;
            written.push(target);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::TraceRecord;

    #[test]
    fn relative_series() {
        let dir = tempfile::tempdir().unwrap();
        let rec = |k, fidelity, fp_residual| TraceRecord {
            k,
            fidelity,
            fp_residual,
            step_change: 0.0,
            psnr: None,
        };
        let t = IterationTrace {
            records: vec![rec(1, 30.0, 8.0), rec(2, 12.0, 2.0), rec(3, 10.0, 0.5)],
            ..Default::default()
        };
        let src = dir.path().join("bird_trace.csv");
        t.write_csv(&src).unwrap();
        let out = emit_convergence_plots(&[src], &dir.path().join("plots")).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out[0].ends_with("bird_fidelity.dat"));
        assert_eq!(std::fs::read_to_string(&out[0]).unwrap(), "1 2e0\n2 2e-1\n3 0e0\n");
        assert_eq!(std::fs::read_to_string(&out[1]).unwrap(), "1 1.6e1\n2 4e0\n3 1e0\n");
    }

    #[test]
    fn malformed_trace_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("x.csv");
        std::fs::write(&src, "nope\n").unwrap();
        assert!(matches!(
            emit_convergence_plots(&[src], dir.path()),
            Err(Error::MalformedTrace { .. })
        ));
    }
}
