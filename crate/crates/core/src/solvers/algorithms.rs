use crate::denoise::{relax, Denoiser};
use crate::error::{Error, Result};
use crate::forward::Fidelity;
use crate::image::{psnr, ImagePlane};
use crate::solvers::{FixedPointProjector, IterationTrace, SolveOptions, Solution, SolverConfig, StepSchedule, TraceRecord};

const DIVERGENCE_FACTOR: f64 = 1e6;

/// Bookkeeping shared by every solver: divergence checks, the observer hook
/// and trace records.
struct Driver<'a, 'o, F, D> {
    fm: &'a F,
    f: &'a D,
    cfg: &'a SolverConfig,
    ground_truth: Option<&'o ImagePlane>,
    observer: Option<&'o mut dyn FnMut(usize, &ImagePlane)>,
    norm_limit: f64,
    trace: IterationTrace,
}

impl<'a, 'o, F: Fidelity, D: Denoiser> Driver<'a, 'o, F, D> {
    fn new(
        fm: &'a F,
        f: &'a D,
        cfg: &'a SolverConfig,
        x0: &ImagePlane,
        opts: SolveOptions<'o>,
    ) -> Result<Self> {
        cfg.validate()?;
        x0.ensure_dims(fm.input_dims())?;
        if !x0.is_finite() {
            return Err(Error::NonFinite);
        }
        if let Some(gt) = opts.ground_truth {
            gt.ensure_dims(fm.input_dims())?;
        }
        let mut driver = Self {
            fm,
            f,
            cfg,
            ground_truth: opts.ground_truth,
            observer: opts.observer,
            norm_limit: DIVERGENCE_FACTOR * x0.norm().max(1.0),
            trace: IterationTrace::default(),
        };
        driver.observe(0, x0);
        Ok(driver)
    }

    fn observe(&mut self, k: usize, x: &ImagePlane) {
        if let Some(obs) = self.observer.as_mut() {
            obs(k, x);
        }
    }

    /// Records the transition `prev -> next` made by iteration `k` (0-based).
    fn step(&mut self, k: usize, prev: &ImagePlane, next: &ImagePlane) -> Result<()> {
        let norm = next.norm();
        if !(norm <= self.norm_limit) || !next.is_finite() {
            return Err(Error::Diverged {
                iteration: k + 1,
                norm,
                trace: Box::new(std::mem::take(&mut self.trace)),
            });
        }
        self.observe(k + 1, next);
        if k % self.cfg.trace_every == 0 {
            let psnr = self.ground_truth.map(|gt| psnr(next, gt).expect("dimensions checked"));
            self.trace.records.push(TraceRecord {
                k: k + 1,
                fidelity: self.fm.value(next),
                fp_residual: next.distance(&self.f.denoise(next)),
                step_change: next.distance(prev),
                psnr,
            });
        }
        Ok(())
    }

    fn finish(mut self, x: ImagePlane) -> Solution {
        self.trace.final_fidelity = self.fm.value(&x);
        self.trace.final_fp_residual = x.distance(&self.f.denoise(&x));
        self.trace.final_grad_norm = self.fm.gradient(&x).norm();
        Solution { x, trace: self.trace }
    }
}

/// Hybrid steepest descent: `v = x - mu_k grad l(x)`, `x+ = (1 - alpha) v + alpha f(v)`.
pub fn solve_hsd<F: Fidelity, D: Denoiser>(
    fm: &F,
    f: &D,
    cfg: &SolverConfig,
    x0: &ImagePlane,
    opts: SolveOptions<'_>,
) -> Result<Solution> {
    let mut drv = Driver::new(fm, f, cfg, x0, opts)?;
    let mut x = x0.clone();
    for k in 0..cfg.outer_iters {
        let mut v = x.clone();
        v.axpy(-cfg.step.mu(k), &fm.gradient(&x));
        let z = f.denoise(&v);
        let next = ImagePlane::combine(1.0 - cfg.alpha, &v, cfg.alpha, &z);
        drv.step(k, &x, &next)?;
        x = next;
    }
    Ok(drv.finish(x))
}

/// PnP proximal gradient: `x+ = f(s - mu grad l(s))`, with `s = x` (PGM) or
/// the FISTA extrapolation `s = x + ((t_k - 1) / t_{k+1}) (x - x_prev)` (APGM).
pub fn solve_pnp_pgm<F: Fidelity, D: Denoiser>(
    fm: &F,
    f: &D,
    cfg: &SolverConfig,
    x0: &ImagePlane,
    accelerated: bool,
    opts: SolveOptions<'_>,
) -> Result<Solution> {
    let mut drv = Driver::new(fm, f, cfg, x0, opts)?;
    let mut x = x0.clone();
    let mut s = x0.clone();
    let mut t = 1.0f64;
    for k in 0..cfg.outer_iters {
        let mut v = s;
        v.axpy(-cfg.step.mu(k), &fm.gradient(&v));
        let next = f.denoise(&v);
        drv.step(k, &x, &next)?;
        if accelerated {
            let t_next = fista_next(t);
            let momentum = (t - 1.0) / t_next;
            s = ImagePlane::combine(1.0 + momentum, &next, -momentum, &x);
            t = t_next;
        } else {
            s = next.clone();
        }
        x = next;
    }
    Ok(drv.finish(x))
}

/// `t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2`.
pub(crate) fn fista_next(t: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt())
}

/// PnP-ADMM: `x+ = prox_{l/beta}(z - u)`, `z+ = f^{m2}(x+ + u)`, `u+ = u + x+ - z+`,
/// started from `z = x0`, `u = 0`.
pub fn solve_pnp_admm<F: Fidelity, D: Denoiser>(
    fm: &F,
    f: &D,
    cfg: &SolverConfig,
    x0: &ImagePlane,
    opts: SolveOptions<'_>,
) -> Result<Solution> {
    let mut drv = Driver::new(fm, f, cfg, x0, opts)?;
    let weight = 1.0 / cfg.admm_penalty;
    let cg = cfg.cg();
    let mut x = x0.clone();
    let mut z = x0.clone();
    let mut u = ImagePlane::zeros(x0.height(), x0.width());
    for k in 0..cfg.outer_iters {
        let next = fm.prox(&(&z - &u), weight, &cg)?;
        let mut zn = &next + &u;
        for _ in 0..cfg.admm_inner_z {
            zn = f.denoise(&zn);
        }
        u += &next;
        u -= &zn;
        z = zn;
        drv.step(k, &x, &next)?;
        x = next;
    }
    Ok(drv.finish(x))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RedVariant {
    /// `x+ = x - mu (grad l(x) + lambda (x - f(x)))`.
    Sd,
    /// `x+ = prox_{l/lambda}(f(x))`, i.e. `(H^T H / s^2 + lambda I) x+ = H^T y / s^2 + lambda f(x)`.
    Fp,
    /// ADMM whose z-update runs `m2` passes of `z = (lambda f(z) + beta (x + u)) / (lambda + beta)`.
    Admm,
}

/// The RED prior `rho(x) = 1/2 <x, x - f(x)>`.
pub fn red_prior<D: Denoiser>(f: &D, x: &ImagePlane) -> f64 {
    0.5 * x.dot(&(x - &f.denoise(x)))
}

/// `grad l(x) + lambda (x - f(x))`, the gradient of `l + lambda rho` when `f`
/// is locally homogeneous with a symmetric Jacobian.
pub fn red_gradient<F: Fidelity, D: Denoiser>(fm: &F, f: &D, lambda: f64, x: &ImagePlane) -> ImagePlane {
    let mut grad = fm.gradient(x);
    grad.axpy(lambda, &(x - &f.denoise(x)));
    grad
}

/// Regularization by denoising with gradient `grad l(x) + lambda (x - f(x))`.
pub fn solve_red<F: Fidelity, D: Denoiser>(
    fm: &F,
    f: &D,
    cfg: &SolverConfig,
    x0: &ImagePlane,
    variant: RedVariant,
    opts: SolveOptions<'_>,
) -> Result<Solution> {
    red_with_residual_of(fm, f, f, cfg, x0, variant, opts)
}

/// RED iterations driven by `g`, with trace residuals measured against `f`.
pub(crate) fn red_with_residual_of<F: Fidelity, G: Denoiser, D: Denoiser>(
    fm: &F,
    g: &G,
    f: &D,
    cfg: &SolverConfig,
    x0: &ImagePlane,
    variant: RedVariant,
    opts: SolveOptions<'_>,
) -> Result<Solution> {
    let mut drv = Driver::new(fm, f, cfg, x0, opts)?;
    if variant != RedVariant::Sd && !(cfg.lambda > 0.0) {
        return Err(Error::invalid("RED fixed-point and ADMM variants need lambda > 0"));
    }
    let lambda = cfg.lambda;
    let cg = cfg.cg();
    let mut x = x0.clone();
    match variant {
        RedVariant::Sd => {
            for k in 0..cfg.outer_iters {
                let grad = red_gradient(fm, g, lambda, &x);
                let mut next = x.clone();
                next.axpy(-cfg.step.mu(k), &grad);
                drv.step(k, &x, &next)?;
                x = next;
            }
        }
        RedVariant::Fp => {
            for k in 0..cfg.outer_iters {
                let next = fm.prox(&g.denoise(&x), 1.0 / lambda, &cg)?;
                drv.step(k, &x, &next)?;
                x = next;
            }
        }
        RedVariant::Admm => {
            let beta = cfg.admm_penalty;
            let mut z = x0.clone();
            let mut u = ImagePlane::zeros(x0.height(), x0.width());
            for k in 0..cfg.outer_iters {
                let next = fm.prox(&(&z - &u), 1.0 / beta, &cg)?;
                let target = &next + &u;
                for _ in 0..cfg.admm_inner_z {
                    z = ImagePlane::combine(lambda / (lambda + beta), &g.denoise(&z), beta / (lambda + beta), &target);
                }
                u += &next;
                u -= &z;
                drv.step(k, &x, &next)?;
                x = next;
            }
        }
    }
    Ok(drv.finish(x))
}

/// Relaxed RED-PRO by steepest descent:
/// `x+ = x - mu (grad l(x) + lambda (x - v(x)))` where `v` is the
/// [`FixedPointProjector`] built from `cfg` (`J` inner steps, `delta`).
pub fn solve_relaxed_redpro_sd<F: Fidelity, D: Denoiser>(
    fm: &F,
    f: &D,
    cfg: &SolverConfig,
    x0: &ImagePlane,
    opts: SolveOptions<'_>,
) -> Result<Solution> {
    if cfg.distance_shortcut {
        return red_with_residual_of(fm, f, f, cfg, x0, RedVariant::Sd, opts);
    }
    let projector = FixedPointProjector::from_config(f, cfg)?;
    red_with_residual_of(fm, &projector, f, cfg, x0, RedVariant::Sd, opts)
}

/// Halpern iteration `x+ = t_k u + (1 - t_k) T(x)` anchored at `u` for
/// `T(x) = f_alpha(x - mu grad l(x))`; approximates the projection of `u`
/// onto `Fix(T)`. Requires a constant step.
pub fn solve_minimal_norm_feasibility<F: Fidelity, D: Denoiser>(
    fm: &F,
    f: &D,
    cfg: &SolverConfig,
    anchor: &ImagePlane,
    opts: SolveOptions<'_>,
) -> Result<Solution> {
    let StepSchedule::Constant(mu) = cfg.step else {
        return Err(Error::invalid("minimal-norm feasibility needs a constant step"));
    };
    cfg.anchor.validate(cfg.outer_iters)?;
    let fa = relax(f, cfg.alpha)?;
    let mut drv = Driver::new(fm, f, cfg, anchor, opts)?;
    let mut x = anchor.clone();
    for k in 0..cfg.outer_iters {
        let mut v = x.clone();
        v.axpy(-mu, &fm.gradient(&x));
        let tx = fa.denoise(&v);
        let t = cfg.anchor.t(k);
        let next = ImagePlane::combine(t, anchor, 1.0 - t, &tx);
        drv.step(k, &x, &next)?;
        x = next;
    }
    Ok(drv.finish(x))
}
