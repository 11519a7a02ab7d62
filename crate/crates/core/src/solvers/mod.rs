//! Iterative restoration algorithms.
//!
//! All solvers share [`SolverConfig`] and return the final iterate together
//! with an [`IterationTrace`]. They are generic over the data term
//! ([`Fidelity`]) and the denoiser ([`Denoiser`]) and are deterministic given
//! their inputs.

mod algorithms;
mod projector;
mod trace;

pub use algorithms::{
    red_gradient, red_prior, solve_hsd, solve_minimal_norm_feasibility, solve_pnp_admm, solve_pnp_pgm, solve_red,
    solve_relaxed_redpro_sd, RedVariant,
};
pub use projector::FixedPointProjector;
pub use trace::{IterationTrace, TraceRecord};

use crate::denoise::Denoiser;
use crate::error::{Error, Result};
use crate::fixpoint::AnchorSchedule;
use crate::forward::{CgOptions, Fidelity};
use crate::image::ImagePlane;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSchedule {
    Constant(f64),
    /// `mu_k = mu0 * (k + 1)^(-p)`.
    DiminishingPower { mu0: f64, p: f64 },
}

impl StepSchedule {
    pub fn mu(&self, k: usize) -> f64 {
        match *self {
            StepSchedule::Constant(mu) => mu,
            StepSchedule::DiminishingPower { mu0, p } => mu0 * (k as f64 + 1.0).powf(-p),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            StepSchedule::Constant(mu) if !(mu > 0.0 && mu.is_finite()) => {
                Err(Error::invalid(format!("step size must be > 0, got {mu}")))
            }
            StepSchedule::DiminishingPower { mu0, p } if !(mu0 > 0.0 && mu0.is_finite() && p > 0.0 && p <= 1.0) => {
                Err(Error::invalid(format!(
                    "diminishing steps need mu0 > 0 and p in (0, 1], got mu0 = {mu0}, p = {p}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Whether a constant step lies in `(0, 2/L)`.
    pub fn within_lipschitz_bound(&self, lipschitz: f64) -> bool {
        match *self {
            StepSchedule::Constant(mu) => mu < 2.0 / lipschitz,
            StepSchedule::DiminishingPower { .. } => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// `N`; zero returns the initial point.
    pub outer_iters: usize,
    /// Relaxation of the denoiser, in `(0, 1]`.
    pub alpha: f64,
    pub lambda: f64,
    pub delta: f64,
    /// `J`, inner Halpern steps of the relaxed RED-PRO projector.
    pub inner_iters: usize,
    /// `beta`.
    pub admm_penalty: f64,
    /// `m1`, the iteration budget of the CG prox fallback.
    pub admm_inner_x: usize,
    /// `m2`, denoiser passes per ADMM z-update.
    pub admm_inner_z: usize,
    pub anchor: AnchorSchedule,
    pub step: StepSchedule,
    pub trace_every: usize,
    pub cg_tol: f64,
    /// Relaxed RED-PRO only: use `lambda (x - f(x))` in place of the
    /// distance-penalty gradient `lambda (x - v)`. Experimental; no
    /// convergence guarantee is known.
    pub distance_shortcut: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            outer_iters: 100,
            alpha: 0.5,
            lambda: 0.02,
            delta: 0.0,
            inner_iters: 3,
            admm_penalty: 0.001,
            admm_inner_x: 200,
            admm_inner_z: 1,
            anchor: AnchorSchedule::Harmonic,
            step: StepSchedule::Constant(1.0),
            trace_every: 1,
            cg_tol: 1e-10,
            distance_shortcut: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::invalid(msg));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be >= 0, got {}", self.lambda));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return bad(format!("delta must be >= 0, got {}", self.delta));
        }
        if self.inner_iters == 0 {
            return bad("inner iteration count J must be >= 1".into());
        }
        if !(self.admm_penalty > 0.0 && self.admm_penalty.is_finite()) {
            return bad(format!("ADMM penalty must be > 0, got {}", self.admm_penalty));
        }
        if self.admm_inner_x == 0 || self.admm_inner_z == 0 {
            return bad("ADMM inner counts m1, m2 must be >= 1".into());
        }
        if self.trace_every == 0 {
            return bad("trace_every must be >= 1".into());
        }
        if !(self.cg_tol > 0.0) {
            return bad("CG tolerance must be > 0".into());
        }
        self.anchor.validate(self.inner_iters)?;
        self.step.validate()
    }

    pub(crate) fn cg(&self) -> CgOptions {
        CgOptions {
            max_iters: self.admm_inner_x,
            tol: self.cg_tol,
        }
    }
}

/// Optional inputs that do not change the iteration.
#[derive(Default)]
pub struct SolveOptions<'a> {
    /// Enables the PSNR column of the trace.
    pub ground_truth: Option<&'a ImagePlane>,
    /// Called with `(0, x0)` and then `(k, x_k)` after every iteration.
    pub observer: Option<&'a mut dyn FnMut(usize, &ImagePlane)>,
}

impl<'a> SolveOptions<'a> {
    pub fn with_ground_truth(ground_truth: &'a ImagePlane) -> Self {
        Self {
            ground_truth: Some(ground_truth),
            observer: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub x: ImagePlane,
    pub trace: IterationTrace,
}

/// Every solver family, as selected by name in experiment configs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Hsd,
    PnpPgm,
    PnpApgm,
    PnpAdmm,
    RedSd,
    RedFp,
    RedAdmm,
    /// RED iterations with `f` replaced by the relaxed RED-PRO projector.
    RelaxedSd,
    RelaxedFp,
    RelaxedAdmm,
    MinimalNorm,
}

impl Algorithm {
    pub const ALL: [Algorithm; 11] = [
        Algorithm::Hsd,
        Algorithm::PnpPgm,
        Algorithm::PnpApgm,
        Algorithm::PnpAdmm,
        Algorithm::RedSd,
        Algorithm::RedFp,
        Algorithm::RedAdmm,
        Algorithm::RelaxedSd,
        Algorithm::RelaxedFp,
        Algorithm::RelaxedAdmm,
        Algorithm::MinimalNorm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Hsd => "hsd",
            Algorithm::PnpPgm => "pnp_pgm",
            Algorithm::PnpApgm => "pnp_apgm",
            Algorithm::PnpAdmm => "pnp_admm",
            Algorithm::RedSd => "red_sd",
            Algorithm::RedFp => "red_fp",
            Algorithm::RedAdmm => "red_admm",
            Algorithm::RelaxedSd => "relaxed_sd",
            Algorithm::RelaxedFp => "relaxed_fp",
            Algorithm::RelaxedAdmm => "relaxed_admm",
            Algorithm::MinimalNorm => "minimal_norm",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{name}`")))
    }
}

/// Runs `algorithm` from `x0`. The minimal-norm solver uses `x0` as its anchor.
pub fn solve<F: Fidelity, D: Denoiser>(
    algorithm: Algorithm,
    fm: &F,
    f: &D,
    cfg: &SolverConfig,
    x0: &ImagePlane,
    opts: SolveOptions<'_>,
) -> Result<Solution> {
    match algorithm {
        Algorithm::Hsd => solve_hsd(fm, f, cfg, x0, opts),
        Algorithm::PnpPgm => solve_pnp_pgm(fm, f, cfg, x0, false, opts),
        Algorithm::PnpApgm => solve_pnp_pgm(fm, f, cfg, x0, true, opts),
        Algorithm::PnpAdmm => solve_pnp_admm(fm, f, cfg, x0, opts),
        Algorithm::RedSd => solve_red(fm, f, cfg, x0, RedVariant::Sd, opts),
        Algorithm::RedFp => solve_red(fm, f, cfg, x0, RedVariant::Fp, opts),
        Algorithm::RedAdmm => solve_red(fm, f, cfg, x0, RedVariant::Admm, opts),
        Algorithm::RelaxedSd => solve_relaxed_redpro_sd(fm, f, cfg, x0, opts),
        Algorithm::RelaxedFp | Algorithm::RelaxedAdmm => {
            let variant = if algorithm == Algorithm::RelaxedFp {
                RedVariant::Fp
            } else {
                RedVariant::Admm
            };
            let projector = FixedPointProjector::from_config(f, cfg)?;
            algorithms::red_with_residual_of(fm, &projector, f, cfg, x0, variant, opts)
        }
        Algorithm::MinimalNorm => solve_minimal_norm_feasibility(fm, f, cfg, x0, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_schedules() {
        assert_eq!(StepSchedule::Constant(0.5).mu(100), 0.5);
        let d = StepSchedule::DiminishingPower { mu0: 4.0, p: 0.1 };
        assert_eq!(d.mu(0), 4.0);
        assert!((d.mu(1) - 4.0 * 2f64.powf(-0.1)).abs() < 1e-15);
        assert!(StepSchedule::DiminishingPower { mu0: 1.0, p: 1.5 }.validate().is_err());
        assert!(StepSchedule::Constant(0.0).validate().is_err());
        assert!(StepSchedule::Constant(1.9).within_lipschitz_bound(1.0));
        assert!(!StepSchedule::Constant(2.0).within_lipschitz_bound(1.0));
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = [
            SolverConfig { alpha: 0.0, ..Default::default() },
            SolverConfig { alpha: 1.1, ..Default::default() },
            SolverConfig { lambda: -1.0, ..Default::default() },
            SolverConfig { delta: -1e-3, ..Default::default() },
            SolverConfig { inner_iters: 0, ..Default::default() },
            SolverConfig { admm_penalty: 0.0, ..Default::default() },
            SolverConfig { trace_every: 0, ..Default::default() },
            SolverConfig { anchor: AnchorSchedule::Sequence(vec![0.5]), ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
        assert!(SolverConfig { outer_iters: 0, ..Default::default() }.validate().is_ok());
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(Algorithm::from_name(a.name()).unwrap(), a);
        }
        assert!(Algorithm::from_name("nope").is_err());
    }
}
