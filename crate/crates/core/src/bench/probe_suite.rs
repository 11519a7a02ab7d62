use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::denoise::Denoiser;
use crate::error::{Error, Result};
use crate::fixpoint::{
    check_bounded_denoiser, check_cocoercivity, check_dilation_containment, check_strong_quasi_nonexpansive,
    cyclic_monotonicity_probe, estimate_demicontractivity, map_points, CycleSearch, CyclicReport,
    DemicontractivityEstimate, HalpernConfig, ProbeReport, FIXED_POINT_TOL,
};
use crate::image::{load_png, rgb_to_ycbcr, ImagePlane, PEAK};

/// The dilation probe runs at `DILATION_MARGIN * alpha`. At the boundary
/// `alpha = (1 - d) / 2` the containment can hold with equality, and the
/// error of the approximate projection would then show up as a violation.
pub const DILATION_MARGIN: f64 = 0.8;

#[derive(Clone, Debug)]
pub enum SampleSource {
    /// Random `patch x patch` luminance windows from the given images.
    Images {
        paths: Vec<PathBuf>,
        patch: usize,
        count: usize,
    },
    /// I.i.d. uniform pixels in `[low, high]`.
    Uniform {
        height: usize,
        width: usize,
        count: usize,
        low: f64,
        high: f64,
    },
}

impl SampleSource {
    fn range(&self) -> (f64, f64) {
        match self {
            SampleSource::Images { .. } => (0.0, PEAK),
            SampleSource::Uniform { low, high, .. } => (*low, *high),
        }
    }

    pub fn draw(&self, seed: u64) -> Result<Vec<ImagePlane>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match self {
            SampleSource::Uniform {
                height,
                width,
                count,
                low,
                high,
            } => {
                if !(low < high) || *height == 0 || *width == 0 || *count == 0 {
                    return Err(Error::invalid("uniform samples need low < high and non-empty shape"));
                }
                Ok((0..*count)
                    .map(|_| ImagePlane::from_fn(*height, *width, |_, _| rng.random_range(*low..=*high)))
                    .collect())
            }
            SampleSource::Images { paths, patch, count } => {
                if paths.is_empty() || *patch == 0 || *count == 0 {
                    return Err(Error::invalid("image samples need images, a patch size and a count"));
                }
                let lumas = paths
                    .iter()
                    .map(|p| load_png(p).map(|img| rgb_to_ycbcr(&img).0.map(|v| v.clamp(0.0, PEAK))))
                    .collect::<Result<Vec<_>>>()?;
                if let Some(small) = lumas.iter().find(|l| l.height() < *patch || l.width() < *patch) {
                    return Err(Error::invalid(format!(
                        "image {:?} is smaller than the {patch}x{patch} patch",
                        small.dims()
                    )));
                }
                Ok((0..*count)
                    .map(|_| {
                        let l = &lumas[rng.random_range(0..lumas.len())];
                        let top = rng.random_range(0..=l.height() - patch);
                        let left = rng.random_range(0..=l.width() - patch);
                        l.window(top, left, *patch, *patch)
                    })
                    .collect())
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
struct SummaryLine {
    probe: String,
    rows: usize,
    violations: usize,
    min_slack: Option<f64>,
    parameter: String,
    value: f64,
    note: String,
}

#[derive(Clone, Debug)]
pub struct ProbeSuiteResult {
    pub estimate: DemicontractivityEstimate,
    pub fixed_points: usize,
    /// `(1 - d_hat) / 2`, or `None` when the estimate is not below one.
    pub alpha: Option<f64>,
    pub reports: Vec<ProbeReport>,
    pub cyclic: Option<CyclicReport>,
    pub notes: Vec<String>,
    pub summary_csv: PathBuf,
}

impl ProbeSuiteResult {
    pub fn all_passed(&self) -> bool {
        self.reports.iter().all(ProbeReport::passed) && self.cyclic.as_ref().is_none_or(CyclicReport::monotone)
    }
}

/// Candidate fixed points: zero, constant images and the denoised samples,
/// kept when their residual is below [`FIXED_POINT_TOL`].
pub fn candidate_fixed_points<D: Denoiser>(f: &D, samples: &[ImagePlane], range: (f64, f64)) -> Vec<ImagePlane> {
    let (h, w) = samples[0].dims();
    let mut cands = vec![ImagePlane::zeros(h, w)];
    for v in [range.0, 0.5 * (range.0 + range.1), range.1] {
        if v != 0.0 {
            cands.push(ImagePlane::filled(h, w, v));
        }
    }
    cands.extend(map_points(f, samples));
    let images = map_points(f, &cands);
    cands
        .into_iter()
        .zip(images)
        .filter(|(z, fz)| z.distance(fz) < FIXED_POINT_TOL)
        .map(|(z, _)| z)
        .collect()
}

/// Estimates the demicontractivity constant of `f` on samples from
/// `source`, then runs every operator probe at `alpha = (1 - d_hat) / 2`.
///
/// Writes one CSV per probe plus `summary.csv` into `out_dir`.
pub fn run_probe_suite<D: Denoiser>(
    f: &D,
    source: &SampleSource,
    seed: u64,
    out_dir: &Path,
) -> Result<ProbeSuiteResult> {
    let samples = source.draw(seed)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let range = source.range();
    let fixed = candidate_fixed_points(f, &samples, range);
    if fixed.is_empty() {
        return Err(Error::invalid("no fixed points of the denoiser were found among the candidates"));
    }
    let estimate = estimate_demicontractivity(f, &fixed, &samples)?;
    let mut notes = Vec::new();
    let mut lines = vec![SummaryLine {
        probe: "demicontractivity".into(),
        rows: estimate.sample_count,
        violations: 0,
        min_slack: None,
        parameter: "d_hat".into(),
        value: estimate.d_hat,
        note: String::new(),
    }];
    if estimate.is_degenerate() {
        notes.push("zero residual everywhere".into());
        lines[0].note = "zero residual everywhere".into();
    }

    let mut reports = Vec::new();
    let alpha = (estimate.d_hat < 1.0).then(|| 0.5 * (1.0 - estimate.d_hat));
    match alpha {
        Some(alpha) => {
            let d = estimate.d_hat;
            reports.push(check_strong_quasi_nonexpansive(f, alpha, d, &fixed, &samples)?);
            reports.push(check_bounded_denoiser(f, alpha, d, range.0, range.1, &samples)?);
            let residuals: Vec<f64> = samples
                .iter()
                .zip(map_points(f, &samples))
                .map(|(x, fx)| x.distance(&fx))
                .collect();
            match median(&residuals).filter(|&e| e > 0.0) {
                Some(epsilon) => {
                    let cfg = HalpernConfig {
                        alpha,
                        ..Default::default()
                    };
                    reports.push(check_dilation_containment(f, DILATION_MARGIN * alpha, epsilon, &samples, &cfg)?);
                }
                None => notes.push("dilation containment skipped: median residual is zero".into()),
            }
            reports.push(check_cocoercivity(f, &samples, &fixed, 2.0 / (1.0 - d))?);
        }
        None => notes.push(format!(
            "d_hat = {} is not below 1; the samples show no demicontractivity",
            estimate.d_hat
        )),
    }
    for r in &reports {
        r.write_csv(out_dir.join(format!("{}.csv", r.probe)))?;
        let (parameter, value) = r.parameters.first().cloned().unwrap_or_default();
        lines.push(SummaryLine {
            probe: r.probe.clone(),
            rows: r.rows.len(),
            violations: r.violations,
            min_slack: Some(r.min_slack()),
            parameter,
            value,
            note: String::new(),
        });
    }

    let cyclic = if samples.len() >= 3 {
        let c = cyclic_monotonicity_probe(f, &samples, 3, CycleSearch::Random { cycles: 200, seed })?;
        lines.push(SummaryLine {
            probe: "cyclic_monotonicity".into(),
            rows: c.cycles_checked,
            violations: usize::from(!c.monotone()),
            min_slack: Some(-c.max_cycle_sum),
            parameter: "m".into(),
            value: c.m as f64,
            note: String::new(),
        });
        Some(c)
    } else {
        None
    };

    let summary_csv = out_dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&summary_csv)?;
    for l in &lines {
        w.serialize(l)?;
    }
    w.flush().map_err(|e| Error::io(&summary_csv, e))?;

    Ok(ProbeSuiteResult {
        estimate,
        fixed_points: fixed.len(),
        alpha,
        reports,
        cyclic,
        notes,
        summary_csv,
    })
}

fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(v[v.len() / 2])
}
