use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::forward::operator::{fidelity_sigma, power_iteration};
use crate::forward::{DegradationModel, LinearOperator};
use crate::image::ImagePlane;

/// Settings for the conjugate-gradient prox fallback.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgOptions {
    pub max_iters: usize,
    /// Stop once `||b - A v|| <= tol * ||b||`.
    pub tol: f64,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            tol: 1e-12,
        }
    }
}

/// A smooth convex data term as seen by the solvers.
///
/// Implemented by [`FidelityModel`]; tests and callers can plug in other
/// quadratic terms (e.g. a dense sensing matrix) without touching the solvers.
pub trait Fidelity: Sync {
    fn input_dims(&self) -> (usize, usize);

    fn value(&self, x: &ImagePlane) -> f64;

    fn gradient(&self, x: &ImagePlane) -> ImagePlane;

    /// `argmin_v 1/2 ||u - v||^2 + weight * value(v)`.
    fn prox(&self, u: &ImagePlane, weight: f64, cg: &CgOptions) -> Result<ImagePlane>;

    /// Lipschitz constant of the gradient (an upper bound is fine).
    fn lipschitz(&self) -> f64;
}

/// `l(x; y) = ||Hx - y||^2 / (2 sigma^2)` for a bound degradation model.
///
/// A noiseless model (`noise_sigma == 0`) is weighted as if `sigma = 1`.
#[derive(Clone, Debug)]
pub struct FidelityModel {
    op: LinearOperator,
    observation: ImagePlane,
    sigma: f64,
    lipschitz: f64,
    adjoint_observation: ImagePlane,
    adjoint_observation_spectrum: Option<Vec<Complex64>>,
}

impl FidelityModel {
    pub fn new(model: &DegradationModel, observation: ImagePlane) -> Result<Self> {
        let input_dims = model.input_dims(observation.dims());
        let op = model.bind(input_dims)?;
        let sigma = fidelity_sigma(model.noise_sigma);
        let lipschitz = power_iteration(&op) / (sigma * sigma) * 1.01;
        let adjoint_observation = op.adjoint(&observation);
        let adjoint_observation_spectrum = op
            .is_circulant()
            .then(|| op.fft().forward_real(&adjoint_observation));
        Ok(Self {
            op,
            observation,
            sigma,
            lipschitz,
            adjoint_observation,
            adjoint_observation_spectrum,
        })
    }

    pub fn operator(&self) -> &LinearOperator {
        &self.op
    }

    pub fn observation(&self) -> &ImagePlane {
        &self.observation
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn residual(&self, x: &ImagePlane) -> ImagePlane {
        &self.op.forward(x) - &self.observation
    }

    fn prox_closed_form(&self, u: &ImagePlane, weight: f64) -> ImagePlane {
        let c = weight / (self.sigma * self.sigma);
        let fft = self.op.fft();
        let mut spec = fft.forward_real(u);
        let aty = self
            .adjoint_observation_spectrum
            .as_ref()
            .expect("closed form requires a circulant operator");
        for ((s, k), b) in spec.iter_mut().zip(self.op.spectrum()).zip(aty) {
            *s = (*s + b * c) / (1.0 + c * k.norm_sqr());
        }
        fft.inverse_real(spec)
    }

    /// Prox through conjugate gradients, regardless of whether `H` is circulant.
    pub fn prox_cg(&self, u: &ImagePlane, weight: f64, cg: &CgOptions) -> Result<ImagePlane> {
        let c = weight / (self.sigma * self.sigma);
        let mut rhs = u.clone();
        rhs.axpy(c, &self.adjoint_observation);
        let apply = |v: &ImagePlane| {
            let mut out = v.clone();
            out.axpy(c, &self.op.normal(v));
            out
        };
        conjugate_gradient(apply, &rhs, u.clone(), cg)
    }
}

impl Fidelity for FidelityModel {
    fn input_dims(&self) -> (usize, usize) {
        self.op.input_dims()
    }

    fn value(&self, x: &ImagePlane) -> f64 {
        self.residual(x).norm_sq() / (2.0 * self.sigma * self.sigma)
    }

    fn gradient(&self, x: &ImagePlane) -> ImagePlane {
        self.op
            .adjoint(&self.residual(x))
            .scaled(1.0 / (self.sigma * self.sigma))
    }

    fn prox(&self, u: &ImagePlane, weight: f64, cg: &CgOptions) -> Result<ImagePlane> {
        if !(weight >= 0.0) {
            return Err(Error::invalid("prox weight must be nonnegative"));
        }
        u.ensure_dims(self.input_dims())?;
        if weight == 0.0 {
            return Ok(u.clone());
        }
        if self.op.is_circulant() {
            Ok(self.prox_closed_form(u, weight))
        } else {
            self.prox_cg(u, weight, cg)
        }
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

pub fn fidelity_value(fm: &impl Fidelity, x: &ImagePlane) -> Result<f64> {
    x.ensure_dims(fm.input_dims())?;
    Ok(fm.value(x))
}

pub fn fidelity_grad(fm: &impl Fidelity, x: &ImagePlane) -> Result<ImagePlane> {
    x.ensure_dims(fm.input_dims())?;
    Ok(fm.gradient(x))
}

/// Prox with default CG settings for the non-circulant case.
pub fn fidelity_prox(fm: &impl Fidelity, u: &ImagePlane, weight: f64) -> Result<ImagePlane> {
    fm.prox(u, weight, &CgOptions::default())
}

/// Solves `A v = b` for symmetric positive definite `A`, warm-started at `x0`.
pub fn conjugate_gradient(
    apply: impl Fn(&ImagePlane) -> ImagePlane,
    b: &ImagePlane,
    x0: ImagePlane,
    opts: &CgOptions,
) -> Result<ImagePlane> {
    let b_norm = b.norm();
    if b_norm == 0.0 {
        return Ok(ImagePlane::zeros(b.height(), b.width()));
    }
    let mut x = x0;
    let mut r = b - &apply(&x);
    let mut p = r.clone();
    let mut rr = r.norm_sq();
    for _ in 0..opts.max_iters {
        if rr.sqrt() <= opts.tol * b_norm {
            return Ok(x);
        }
        let ap = apply(&p);
        let step = rr / p.dot(&ap);
        x.axpy(step, &p);
        r.axpy(-step, &ap);
        let rr_next = r.norm_sq();
        let beta = rr_next / rr;
        p = ImagePlane::combine(1.0, &r, beta, &p);
        rr = rr_next;
    }
    let residual = rr.sqrt() / b_norm;
    if residual <= opts.tol {
        Ok(x)
    } else {
        Err(Error::CgNotConverged {
            iterations: opts.max_iters,
            residual,
        })
    }
}
