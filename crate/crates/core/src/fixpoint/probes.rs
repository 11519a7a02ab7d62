use std::fmt::Write as _;
use std::path::Path;

use crate::denoise::{relax, Denoiser};
use crate::error::{Error, Result};
use crate::fixpoint::halpern::{project_dilated, HalpernConfig};
use crate::fixpoint::map_points;
use crate::image::ImagePlane;

/// Residuals below this are treated as zero by the `d` estimator.
pub const ZERO_RESIDUAL: f64 = 1e-10;
/// Fixed points supplied to the probes must satisfy `||z - f(z)||` below this.
pub const FIXED_POINT_TOL: f64 = 1e-8;
/// Relative slack used when deciding whether an inequality is violated.
pub const PROBE_SLACK: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct DemicontractivityEstimate {
    /// `max(raw, 0)`, the constant reported to the user.
    pub d_hat: f64,
    /// Largest ratio over pairs with a nonzero residual, `None` if there were none.
    pub raw: Option<f64>,
    pub sample_count: usize,
    /// `(sample index, fixed point index)` achieving `raw`.
    pub worst_pair: Option<(usize, usize)>,
}

impl DemicontractivityEstimate {
    /// Every sample had a (numerically) zero residual.
    pub fn is_degenerate(&self) -> bool {
        self.raw.is_none()
    }
}

/// Largest ratio `(||f(x) - z||^2 - ||x - z||^2) / ||f(x) - x||^2` over all
/// sample/fixed-point pairs.
///
/// Pairs with a residual below [`ZERO_RESIDUAL`] contribute 0.
pub fn estimate_demicontractivity<D: Denoiser>(
    f: &D,
    fixed_points: &[ImagePlane],
    samples: &[ImagePlane],
) -> Result<DemicontractivityEstimate> {
    check_inputs(f, fixed_points, samples)?;
    let images = map_points(f, samples);
    let mut raw: Option<f64> = None;
    let mut worst_pair = None;
    for (i, (x, fx)) in samples.iter().zip(&images).enumerate() {
        let res = x.distance(fx);
        if res < ZERO_RESIDUAL {
            continue;
        }
        for (k, z) in fixed_points.iter().enumerate() {
            let ratio = ((fx - z).norm_sq() - (x - z).norm_sq()) / (res * res);
            if raw.is_none_or(|r| ratio > r) {
                raw = Some(ratio);
                worst_pair = Some((i, k));
            }
        }
    }
    let d_hat = raw.unwrap_or(0.0).max(0.0);
    Ok(DemicontractivityEstimate {
        d_hat,
        raw,
        sample_count: samples.len(),
        worst_pair,
    })
}

fn check_inputs<D: Denoiser>(f: &D, fixed_points: &[ImagePlane], samples: &[ImagePlane]) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::invalid("at least one sample is required"));
    }
    if fixed_points.is_empty() {
        return Err(Error::invalid("at least one fixed point is required"));
    }
    let dims = samples[0].dims();
    for x in samples.iter().chain(fixed_points) {
        x.ensure_dims(dims)?;
    }
    for (k, z) in fixed_points.iter().enumerate() {
        let r = z.distance(&f.denoise(z));
        if !(r < FIXED_POINT_TOL) {
            return Err(Error::invalid(format!(
                "fixed point {k} has residual {r:e}, above {FIXED_POINT_TOL:e}"
            )));
        }
    }
    Ok(())
}

/// One inequality instance `lhs <= rhs`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeRow {
    pub index: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; negative beyond the tolerance means a violation.
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeReport {
    pub probe: String,
    pub rows: Vec<ProbeRow>,
    /// Rows with `lhs > rhs + PROBE_SLACK * (1 + |lhs| + |rhs|)`.
    pub violations: usize,
    /// Derived constants such as `gamma` or the implied `d`.
    pub parameters: Vec<(String, f64)>,
}

impl ProbeReport {
    pub(crate) fn new(probe: impl Into<String>) -> Self {
        Self {
            probe: probe.into(),
            rows: Vec::new(),
            violations: 0,
            parameters: Vec::new(),
        }
    }

    pub(crate) fn with_parameter(mut self, name: &str, value: f64) -> Self {
        self.parameters.push((name.to_string(), value));
        self
    }

    pub(crate) fn push(&mut self, lhs: f64, rhs: f64) {
        let slack = rhs - lhs;
        if !(slack >= -PROBE_SLACK * (1.0 + lhs.abs() + rhs.abs())) {
            self.violations += 1;
        }
        self.rows.push(ProbeRow {
            index: self.rows.len(),
            lhs,
            rhs,
            slack,
        });
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.parameters.iter().find(|(n, _)| n == name).map(|p| p.1)
    }

    pub fn min_slack(&self) -> f64 {
        self.rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,lhs,rhs,slack\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{:e},{:e},{:e}", r.index, r.lhs, r.rhs, r.slack);
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

fn check_d(d: f64) -> Result<()> {
    if !(0.0..1.0).contains(&d) {
        return Err(Error::invalid(format!("demicontractivity constant must lie in [0, 1), got {d}")));
    }
    Ok(())
}

/// `||f_a(x) - z||^2 <= ||x - z||^2 - gamma ||f_a(x) - x||^2` with
/// `gamma = (1 - d - alpha) / alpha`, over all sample/fixed-point pairs.
pub fn check_strong_quasi_nonexpansive<D: Denoiser>(
    f: &D,
    alpha: f64,
    d: f64,
    fixed_points: &[ImagePlane],
    samples: &[ImagePlane],
) -> Result<ProbeReport> {
    check_d(d)?;
    if !(alpha > 0.0 && alpha <= 1.0 - d) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1 - d], got {alpha}")));
    }
    check_inputs(f, fixed_points, samples)?;
    let gamma = (1.0 - d - alpha) / alpha;
    let fa = relax(f, alpha)?;
    let images = map_points(&fa, samples);
    let mut report = ProbeReport::new("strong_quasi_nonexpansive").with_parameter("gamma", gamma);
    for (x, fx) in samples.iter().zip(&images) {
        let step = fx.distance(x).powi(2);
        for z in fixed_points {
            report.push((fx - z).norm_sq(), (x - z).norm_sq() - gamma * step);
        }
    }
    Ok(report)
}

/// `(1/n) ||f_a(x) - x||^2 <= alpha / (1 - d - alpha) * (b - a)^2` for samples in `[a, b]^n`.
pub fn check_bounded_denoiser<D: Denoiser>(
    f: &D,
    alpha: f64,
    d: f64,
    range_a: f64,
    range_b: f64,
    samples: &[ImagePlane],
) -> Result<ProbeReport> {
    check_d(d)?;
    if !(alpha > 0.0 && alpha < 1.0 - d) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1 - d), got {alpha}")));
    }
    if !(range_a < range_b) {
        return Err(Error::invalid("range needs a < b"));
    }
    if samples.is_empty() {
        return Err(Error::invalid("at least one sample is required"));
    }
    if samples
        .iter()
        .any(|x| x.as_slice().iter().any(|v| !(range_a..=range_b).contains(v)))
    {
        return Err(Error::invalid(format!("samples must lie in [{range_a}, {range_b}]")));
    }
    let sigma2 = alpha / (1.0 - d - alpha);
    let bound = sigma2 * (range_b - range_a).powi(2);
    let fa = relax(f, alpha)?;
    let images = map_points(&fa, samples);
    let mut report = ProbeReport::new("bounded_denoiser").with_parameter("sigma2", sigma2);
    for (x, fx) in samples.iter().zip(&images) {
        report.push(fx.distance(x).powi(2) / x.len() as f64, bound);
    }
    Ok(report)
}

/// Projects every sample into `B_delta(f)` with `delta = alpha * epsilon` and
/// checks `||x' - f(x')|| <= epsilon`.
///
/// The Halpern projection is approximate; its error enters the left side.
pub fn check_dilation_containment<D: Denoiser>(
    f: &D,
    alpha: f64,
    epsilon: f64,
    samples: &[ImagePlane],
    cfg: &HalpernConfig,
) -> Result<ProbeReport> {
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1/2], got {alpha}")));
    }
    if !(epsilon > 0.0) {
        return Err(Error::invalid("epsilon must be > 0"));
    }
    let delta = alpha * epsilon;
    let projected = collect_results(samples, |x| project_dilated(f, x, delta, cfg))?;
    let images = map_points(f, &projected);
    let mut report = ProbeReport::new("dilation_containment").with_parameter("delta", delta);
    for (x, fx) in projected.iter().zip(&images) {
        report.push(x.distance(fx), epsilon);
    }
    Ok(report)
}

/// `(1/L) ||r(x) - r(z)||^2 <= <r(x) - r(z), x - z>` with `r = Id - f`, for
/// samples `x` against fixed points `z`. Reports the implied `d = 1 - 2/L`.
pub fn check_cocoercivity<D: Denoiser>(
    f: &D,
    samples: &[ImagePlane],
    fixed_points: &[ImagePlane],
    lipschitz: f64,
) -> Result<ProbeReport> {
    if !(lipschitz > 0.0) {
        return Err(Error::invalid("co-coercivity constant must be > 0"));
    }
    check_inputs(f, fixed_points, samples)?;
    let residual = |xs: &[ImagePlane]| -> Vec<ImagePlane> {
        xs.iter().zip(map_points(f, xs)).map(|(x, fx)| x - &fx).collect()
    };
    let rx = residual(samples);
    let rz = residual(fixed_points);
    let mut report = ProbeReport::new("cocoercivity").with_parameter("implied_d", 1.0 - 2.0 / lipschitz);
    for (x, r) in samples.iter().zip(&rx) {
        for (z, s) in fixed_points.iter().zip(&rz) {
            let dr = r - s;
            report.push(dr.norm_sq() / lipschitz, dr.dot(&(x - z)));
        }
    }
    Ok(report)
}

#[cfg(feature = "parallel")]
fn collect_results(
    xs: &[ImagePlane],
    op: impl Fn(&ImagePlane) -> Result<ImagePlane> + Sync + Send,
) -> Result<Vec<ImagePlane>> {
    use rayon::prelude::*;
    xs.par_iter().map(op).collect()
}

#[cfg(not(feature = "parallel"))]
fn collect_results(
    xs: &[ImagePlane],
    op: impl Fn(&ImagePlane) -> Result<ImagePlane>,
) -> Result<Vec<ImagePlane>> {
    xs.iter().map(op).collect()
}
