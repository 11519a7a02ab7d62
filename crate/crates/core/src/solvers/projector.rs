use crate::denoise::{relax, Denoiser, RelaxedDenoiser};
use crate::error::Result;
use crate::fixpoint::{dilate_towards, AnchorSchedule};
use crate::image::ImagePlane;
use crate::solvers::SolverConfig;

/// Inner loop of the relaxed RED-PRO scheme as a map `x -> v(x)`.
///
/// Runs `x_{j+1} = f_alpha(t_j x + (1 - t_j) x_j)` from `x_0 = x` for `J`
/// steps, then moves `x` to distance `delta` from `x_J` along the segment
/// (or keeps `x` when it is already that close).
#[derive(Clone, Debug)]
pub struct FixedPointProjector<D> {
    relaxed: RelaxedDenoiser<D>,
    inner_iters: usize,
    anchor: AnchorSchedule,
    delta: f64,
}

impl<D: Denoiser> FixedPointProjector<D> {
    pub fn new(inner: D, alpha: f64, inner_iters: usize, anchor: AnchorSchedule, delta: f64) -> Result<Self> {
        let cfg = SolverConfig {
            alpha,
            inner_iters,
            anchor,
            delta,
            ..Default::default()
        };
        cfg.validate()?;
        Ok(Self {
            relaxed: relax(inner, alpha)?,
            inner_iters,
            anchor: cfg.anchor,
            delta,
        })
    }

    pub fn from_config(inner: D, cfg: &SolverConfig) -> Result<Self> {
        Self::new(inner, cfg.alpha, cfg.inner_iters, cfg.anchor.clone(), cfg.delta)
    }

    /// The inner-loop end point `x_J` before the `delta` combination.
    pub fn inner_limit(&self, x: &ImagePlane) -> ImagePlane {
        let mut xj = x.clone();
        for j in 0..self.inner_iters {
            let t = self.anchor.t(j);
            xj = self.relaxed.denoise(&ImagePlane::combine(t, x, 1.0 - t, &xj));
        }
        xj
    }
}

impl<D: Denoiser> Denoiser for FixedPointProjector<D> {
    fn denoise(&self, x: &ImagePlane) -> ImagePlane {
        dilate_towards(x, &self.inner_limit(x), self.delta)
    }
}
