use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::bench::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::forward::{degrade, FidelityModel};
use crate::image::{
    load_png, psnr, quantized, rgb_to_ycbcr, save_png, upsample_bicubic, ycbcr_to_rgb, ImagePlane, RgbImage,
};
use crate::solvers::{solve, IterationTrace, SolveOptions};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub image: String,
    pub degraded_psnr: f64,
    /// Empty when the solver diverged.
    pub restored_psnr: Option<f64>,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct ImageOutcome {
    pub image: PathBuf,
    pub degraded_png: PathBuf,
    pub restored_png: Option<PathBuf>,
    pub trace_csv: PathBuf,
    pub trace: IterationTrace,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub rows: Vec<SummaryRow>,
    pub outcomes: Vec<ImageOutcome>,
    pub summary_csv: PathBuf,
}

/// Degrades every image, restores its luminance and writes
/// `<stem>_degraded.png`, `<stem>_restored.png`, `<stem>_trace.csv` and
/// `summary.csv` under `cfg.out_dir`.
///
/// PSNR is measured on the luminance channel against the clean image. The
/// restored value is computed from the 8-bit image that is written to disk.
/// A diverging solver is recorded in its row and does not stop the run.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    if cfg.images.is_empty() {
        return Err(Error::Config("no input images".into()));
    }
    cfg.solver.validate()?;
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;

    let stems = unique_stems(&cfg.images);
    let jobs: Vec<(usize, &PathBuf, &String)> = cfg
        .images
        .iter()
        .zip(&stems)
        .enumerate()
        .map(|(i, (p, s))| (i, p, s))
        .collect();

    #[cfg(feature = "parallel")]
    let results: Vec<Result<(SummaryRow, ImageOutcome)>> = {
        use rayon::prelude::*;
        jobs.par_iter().map(|&(i, p, s)| run_one(cfg, i, p, s)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<(SummaryRow, ImageOutcome)>> =
        jobs.iter().map(|&(i, p, s)| run_one(cfg, i, p, s)).collect();

    let mut rows = Vec::with_capacity(results.len());
    let mut outcomes = Vec::with_capacity(results.len());
    for r in results {
        let (row, outcome) = r?;
        rows.push(row);
        outcomes.push(outcome);
    }
    let summary_csv = cfg.out_dir.join("summary.csv");
    write_summary(&rows, &summary_csv)?;
    Ok(ExperimentResult {
        rows,
        outcomes,
        summary_csv,
    })
}

pub fn write_summary(rows: &[SummaryRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(["image", "degraded_psnr", "restored_psnr", "seconds"])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn unique_stems(paths: &[PathBuf]) -> Vec<String> {
    let base: Vec<String> = paths
        .iter()
        .map(|p| {
            p.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "image".into())
        })
        .collect();
    base.iter()
        .enumerate()
        .map(|(i, s)| {
            if base.iter().filter(|o| *o == s).count() > 1 {
                format!("{s}_{i}")
            } else {
                s.clone()
            }
        })
        .collect()
}

/// Noise seed for channel `c` of image `i`.
fn channel_seed(seed: u64, image: usize, channel: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((image as u64) << 2 | channel as u64)
}

/// The clean and degraded images with the observed luminance and the
/// initial estimate, all prepared for one task.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub clean: RgbImage,
    pub clean_luma: ImagePlane,
    pub degraded: RgbImage,
    pub observation: ImagePlane,
    pub x0: ImagePlane,
    pub chroma: (ImagePlane, ImagePlane),
}

/// Degrades each RGB channel independently. Super-resolution crops the
/// image to a multiple of the decimation factor and starts from a bicubic
/// upsampling of the low-resolution luminance.
pub fn prepare(cfg: &ExperimentConfig, clean: RgbImage, image_index: usize) -> Result<Prepared> {
    let q = cfg.model.factor();
    let (h, w) = clean.dims();
    let clean = if q > 1 { clean.crop(h - h % q, w - w % q) } else { clean };
    if clean.height() == 0 || clean.width() == 0 {
        return Err(Error::invalid("image is smaller than the decimation factor"));
    }
    let degraded = clean.try_map_channels(|ch, p| degrade(&cfg.model, p, channel_seed(cfg.seed, image_index, ch)))?;
    let (clean_luma, _, _) = rgb_to_ycbcr(&clean);
    let (y, cb, cr) = rgb_to_ycbcr(&degraded);
    let (x0, chroma) = if q > 1 {
        (
            upsample_bicubic(&y, q),
            (upsample_bicubic(&cb, q), upsample_bicubic(&cr, q)),
        )
    } else {
        (y.clone(), (cb, cr))
    };
    Ok(Prepared {
        clean,
        clean_luma,
        degraded,
        observation: y,
        x0,
        chroma,
    })
}

fn run_one(cfg: &ExperimentConfig, index: usize, path: &Path, stem: &str) -> Result<(SummaryRow, ImageOutcome)> {
    let clean = load_png(path)?;
    let prep = prepare(cfg, clean, index)?;
    let fm = FidelityModel::new(&cfg.model, prep.observation.clone())?;

    let degraded_png = cfg.out_dir.join(format!("{stem}_degraded.png"));
    save_png(&prep.degraded, &degraded_png)?;
    let degraded_view = ycbcr_to_rgb(&prep.x0, &prep.chroma.0, &prep.chroma.1)?;
    let degraded_psnr = psnr(&rgb_to_ycbcr(&quantized(&degraded_view)).0, &prep.clean_luma)?;

    let start = Instant::now();
    let opts = SolveOptions::with_ground_truth(&prep.clean_luma);
    let solved = solve(cfg.algorithm, &fm, &cfg.denoiser, &cfg.solver, &prep.x0, opts);
    let seconds = start.elapsed().as_secs_f64();

    let trace_csv = cfg.out_dir.join(format!("{stem}_trace.csv"));
    let image = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| stem.to_string());
    let (restored_png, restored_psnr, trace, error) = match solved {
        Ok(sol) => {
            let restored = quantized(&ycbcr_to_rgb(&sol.x, &prep.chroma.0, &prep.chroma.1)?);
            let png = cfg.out_dir.join(format!("{stem}_restored.png"));
            save_png(&restored, &png)?;
            let value = psnr(&rgb_to_ycbcr(&restored).0, &prep.clean_luma)?;
            (Some(png), Some(value), sol.trace, None)
        }
        Err(Error::Diverged { iteration, norm, trace }) => (
            None,
            None,
            *trace,
            Some(format!("diverged at iteration {iteration} (norm {norm:e})")),
        ),
        Err(e) => return Err(e),
    };
    trace.write_csv(&trace_csv)?;
    Ok((
        SummaryRow {
            image,
            degraded_psnr,
            restored_psnr,
            seconds,
        },
        ImageOutcome {
            image: path.to_path_buf(),
            degraded_png,
            restored_png,
            trace_csv,
            trace,
            error,
        },
    ))
}
