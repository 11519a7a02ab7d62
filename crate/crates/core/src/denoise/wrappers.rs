use crate::denoise::Denoiser;
use crate::error::{Error, Result};
use crate::image::ImagePlane;

/// `f_alpha(x) = alpha * f(x) + (1 - alpha) * x`.
#[derive(Clone, Debug)]
pub struct RelaxedDenoiser<D> {
    pub inner: D,
    alpha: f64,
}

impl<D: Denoiser> RelaxedDenoiser<D> {
    pub fn new(inner: D, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid(format!("relaxation alpha must lie in (0, 1], got {alpha}")));
        }
        Ok(Self { inner, alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl<D: Denoiser> Denoiser for RelaxedDenoiser<D> {
    fn denoise(&self, x: &ImagePlane) -> ImagePlane {
        let fx = self.inner.denoise(x);
        if self.alpha == 1.0 {
            return fx;
        }
        ImagePlane::combine(self.alpha, &fx, 1.0 - self.alpha, x)
    }
}

pub fn relax<D: Denoiser>(inner: D, alpha: f64) -> Result<RelaxedDenoiser<D>> {
    RelaxedDenoiser::new(inner, alpha)
}

pub fn evaluate_relaxed<D: Denoiser>(rd: &RelaxedDenoiser<D>, x: &ImagePlane) -> ImagePlane {
    rd.denoise(x)
}

/// The adaptive average `f_eps(x) = a x + (1 - a) f(x)` with
/// `a = eps / max(eps, ||x - f(x)||)`. Its fixed points are exactly the
/// points with `||x - f(x)|| <= eps`, and `||x - f_eps(x)||` equals
/// `max(0, ||x - f(x)|| - eps)`.
#[derive(Clone, Debug)]
pub struct EpsilonAdaptiveDenoiser<D> {
    pub inner: D,
    epsilon: f64,
}

impl<D: Denoiser> EpsilonAdaptiveDenoiser<D> {
    pub fn new(inner: D, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid(format!("epsilon must be > 0, got {epsilon}")));
        }
        Ok(Self { inner, epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// The weight `alpha_eps(x)` placed on `x`.
    pub fn weight(&self, x: &ImagePlane, fx: &ImagePlane) -> f64 {
        self.epsilon / self.epsilon.max(x.distance(fx))
    }
}

impl<D: Denoiser> Denoiser for EpsilonAdaptiveDenoiser<D> {
    fn denoise(&self, x: &ImagePlane) -> ImagePlane {
        let fx = self.inner.denoise(x);
        let a = self.weight(x, &fx);
        if a == 1.0 {
            return x.clone();
        }
        ImagePlane::combine(a, x, 1.0 - a, &fx)
    }
}

pub fn epsilon_adapt<D: Denoiser>(inner: D, epsilon: f64) -> Result<EpsilonAdaptiveDenoiser<D>> {
    EpsilonAdaptiveDenoiser::new(inner, epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denoise::DenoiserSpec;
    use rand::{Rng, SeedableRng};

    fn random_plane(seed: u64) -> ImagePlane {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        ImagePlane::from_fn(6, 7, |_, _| rng.random_range(-50.0..300.0))
    }

    #[test]
    fn alpha_one_is_inner() {
        let f = DenoiserSpec::gaussian(1.0).unwrap();
        let x = random_plane(1);
        assert_eq!(relax(&f, 1.0).unwrap().denoise(&x), f.denoise(&x));
        assert!(relax(&f, 0.0).is_err());
        assert!(relax(&f, 1.5).is_err());
    }

    #[test]
    fn residual_scales_with_alpha() {
        let f = DenoiserSpec::median(1);
        for (s, alpha) in [0.1, 0.35, 0.8].into_iter().enumerate() {
            let x = random_plane(10 + s as u64);
            let rd = relax(&f, alpha).unwrap();
            let lhs = x.distance(&evaluate_relaxed(&rd, &x));
            let rhs = alpha * x.distance(&f.denoise(&x));
            assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        }
    }

    #[test]
    fn half_relaxed_box_is_midpoint() {
        let f = DenoiserSpec::projection_box(0.0, 255.0).unwrap();
        let x = random_plane(2);
        let out = relax(&f, 0.5).unwrap().denoise(&x);
        let mid = (&x + &x.clamped(0.0, 255.0)).scaled(0.5);
        assert!(out.max_abs_diff(&mid) < 1e-12);
    }

    #[test]
    fn epsilon_adaptive_cases() {
        let f = DenoiserSpec::scalar_multiple(-1.0);
        // ||x - f(x)|| = 2 ||x||
        let mut x = ImagePlane::zeros(2, 2);
        x.set(0, 0, 0.25);
        let fe = epsilon_adapt(&f, 1.0).unwrap();
        assert_eq!(fe.denoise(&x), x);

        x.set(0, 0, 1.0);
        let out = fe.denoise(&x);
        let mid = (&x + &f.denoise(&x)).scaled(0.5);
        assert!(out.max_abs_diff(&mid) < 1e-15);

        let g = DenoiserSpec::gaussian(2.0).unwrap();
        let ge = epsilon_adapt(&g, 3.0).unwrap();
        // ||x - f_eps(x)|| = max(0, ||x - f(x)|| - eps), which is <= eps
        // only while the raw residual stays below 2 eps
        for s in 0..30 {
            let x = random_plane(100 + s);
            let r = x.distance(&g.denoise(&x));
            let out = x.distance(&ge.denoise(&x));
            assert!((out - (r - 3.0).max(0.0)).abs() <= 1e-12 * r.max(1.0));
            if r <= 6.0 {
                assert!(out <= 3.0 + 1e-12);
            }
        }
        assert!(epsilon_adapt(&g, 0.0).is_err());
    }
}
