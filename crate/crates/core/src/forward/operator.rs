use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::forward::Kernel;
use crate::image::ImagePlane;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DegradationKind {
    Blur,
    BlurThenDecimate,
}

/// Describes `H` and the noise level of `y = Hx + e`.
///
/// Convolution is circular, so the blur part is diagonalized by the DFT.
/// Decimation keeps the top-left pixel of every `factor x factor` block.
#[derive(Clone, Debug, PartialEq)]
pub struct DegradationModel {
    pub kind: DegradationKind,
    pub kernel: Kernel,
    pub decimation_factor: usize,
    pub noise_sigma: f64,
}

impl DegradationModel {
    pub fn blur(kernel: Kernel, noise_sigma: f64) -> Result<Self> {
        Self::validate_sigma(noise_sigma)?;
        Ok(Self {
            kind: DegradationKind::Blur,
            kernel,
            decimation_factor: 1,
            noise_sigma,
        })
    }

    pub fn blur_then_decimate(kernel: Kernel, factor: usize, noise_sigma: f64) -> Result<Self> {
        Self::validate_sigma(noise_sigma)?;
        if factor == 0 {
            return Err(Error::invalid("decimation factor must be at least 1"));
        }
        Ok(Self {
            kind: DegradationKind::BlurThenDecimate,
            kernel,
            decimation_factor: factor,
            noise_sigma,
        })
    }

    fn validate_sigma(sigma: f64) -> Result<()> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!("noise sigma must be finite and >= 0, got {sigma}")));
        }
        Ok(())
    }

    pub fn factor(&self) -> usize {
        match self.kind {
            DegradationKind::Blur => 1,
            DegradationKind::BlurThenDecimate => self.decimation_factor,
        }
    }

    pub fn output_dims(&self, input: (usize, usize)) -> Result<(usize, usize)> {
        let k = self.factor();
        if input.0 % k != 0 || input.1 % k != 0 {
            return Err(Error::NotDivisible {
                height: input.0,
                width: input.1,
                factor: k,
            });
        }
        Ok((input.0 / k, input.1 / k))
    }

    pub fn input_dims(&self, output: (usize, usize)) -> (usize, usize) {
        let k = self.factor();
        (output.0 * k, output.1 * k)
    }

    /// Binds the model to a concrete input size, caching FFT plans and the
    /// kernel spectrum.
    pub fn bind(&self, input_dims: (usize, usize)) -> Result<LinearOperator> {
        LinearOperator::new(self.clone(), input_dims)
    }
}

/// `H` for a fixed input size.
#[derive(Clone, Debug)]
pub struct LinearOperator {
    model: DegradationModel,
    input_dims: (usize, usize),
    output_dims: (usize, usize),
    fft: Fft2,
    spectrum: Vec<Complex64>,
}

impl LinearOperator {
    fn new(model: DegradationModel, input_dims: (usize, usize)) -> Result<Self> {
        let output_dims = model.output_dims(input_dims)?;
        let (h, w) = input_dims;
        if h == 0 || w == 0 {
            return Err(Error::invalid("image dimensions must be nonzero"));
        }
        let fft = Fft2::new(h, w);
        // Kernel centre goes to the origin; taps wrap when the kernel is
        // larger than the image.
        let r = model.kernel.radius() as isize;
        let mut embedded = vec![Complex64::default(); h * w];
        for dy in -r..=r {
            for dx in -r..=r {
                let row = dy.rem_euclid(h as isize) as usize;
                let col = dx.rem_euclid(w as isize) as usize;
                embedded[row * w + col].re += model.kernel.at(dy, dx);
            }
        }
        fft.forward(&mut embedded);
        Ok(Self {
            model,
            input_dims,
            output_dims,
            fft,
            spectrum: embedded,
        })
    }

    pub fn model(&self) -> &DegradationModel {
        &self.model
    }

    pub fn input_dims(&self) -> (usize, usize) {
        self.input_dims
    }

    pub fn output_dims(&self) -> (usize, usize) {
        self.output_dims
    }

    pub fn is_circulant(&self) -> bool {
        self.model.factor() == 1
    }

    pub(crate) fn fft(&self) -> &Fft2 {
        &self.fft
    }

    pub(crate) fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    fn filter(&self, x: &ImagePlane, conjugate: bool) -> ImagePlane {
        if self.model.kernel.size() == 1 {
            return x.clone();
        }
        let mut spec = self.fft.forward_real(x);
        for (s, k) in spec.iter_mut().zip(&self.spectrum) {
            *s *= if conjugate { k.conj() } else { *k };
        }
        self.fft.inverse_real(spec)
    }

    pub fn forward(&self, x: &ImagePlane) -> ImagePlane {
        assert_eq!(x.dims(), self.input_dims, "forward: input shape");
        let blurred = self.filter(x, false);
        let k = self.model.factor();
        if k == 1 {
            return blurred;
        }
        let (oh, ow) = self.output_dims;
        ImagePlane::from_fn(oh, ow, |r, c| blurred.get(r * k, c * k))
    }

    pub fn adjoint(&self, r: &ImagePlane) -> ImagePlane {
        assert_eq!(r.dims(), self.output_dims, "adjoint: input shape");
        let k = self.model.factor();
        let up = if k == 1 {
            r.clone()
        } else {
            let (h, w) = self.input_dims;
            ImagePlane::from_fn(h, w, |i, j| {
                if i % k == 0 && j % k == 0 {
                    r.get(i / k, j / k)
                } else {
                    0.0
                }
            })
        };
        self.filter(&up, true)
    }

    /// `H^T H x`
    pub fn normal(&self, x: &ImagePlane) -> ImagePlane {
        self.adjoint(&self.forward(x))
    }
}

pub fn apply_forward(model: &DegradationModel, x: &ImagePlane) -> Result<ImagePlane> {
    Ok(model.bind(x.dims())?.forward(x))
}

pub fn apply_adjoint(model: &DegradationModel, r: &ImagePlane) -> Result<ImagePlane> {
    let op = model.bind(model.input_dims(r.dims()))?;
    Ok(op.adjoint(r))
}

/// Upper bound on the Lipschitz constant of the fidelity gradient,
/// `lambda_max(H^T H) / sigma^2`, from power iteration inflated by 1%.
///
/// A zero noise level is treated as unit weight, matching [`FidelityModel`].
///
/// [`FidelityModel`]: crate::forward::FidelityModel
pub fn estimate_lipschitz(model: &DegradationModel, input_dims: (usize, usize)) -> Result<f64> {
    let op = model.bind(input_dims)?;
    Ok(power_iteration(&op) / fidelity_sigma(model.noise_sigma).powi(2) * 1.01)
}

pub(crate) fn fidelity_sigma(noise_sigma: f64) -> f64 {
    if noise_sigma > 0.0 {
        noise_sigma
    } else {
        1.0
    }
}

const POWER_SEED: u64 = 0x5eed_1234;
const POWER_MAX_ITERS: usize = 10_000;
const POWER_REL_TOL: f64 = 1e-8;

/// Largest eigenvalue of `H^T H`.
pub(crate) fn power_iteration(op: &LinearOperator) -> f64 {
    let (h, w) = op.input_dims();
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    let mut v = ImagePlane::from_fn(h, w, |_, _| {
        let s: f64 = StandardNormal.sample(&mut rng);
        s
    });
    let n = v.norm();
    v = v.scaled(1.0 / n);
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        let av = op.normal(&v);
        let next = v.dot(&av);
        let norm = av.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = av.scaled(1.0 / norm);
        if (next - lambda).abs() < POWER_REL_TOL * next.abs() {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda
}

/// `Hx` plus i.i.d. Gaussian noise of std `model.noise_sigma`, seeded.
pub fn degrade(model: &DegradationModel, clean: &ImagePlane, seed: u64) -> Result<ImagePlane> {
    let mut y = apply_forward(model, clean)?;
    if model.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, model.noise_sigma)
            .map_err(|e| Error::invalid(format!("noise distribution: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in y.as_mut_slice() {
            *v += normal.sample(&mut rng);
        }
    }
    Ok(y)
}
