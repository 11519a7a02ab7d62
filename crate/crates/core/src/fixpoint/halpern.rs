use crate::denoise::{relax, Denoiser};
use crate::error::{Error, Result};
use crate::image::ImagePlane;

/// Anchor weights `t_j` of the Halpern iteration.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum AnchorSchedule {
    /// `t_j = 1 / (j + 2)`.
    #[default]
    Harmonic,
    /// Explicit weights; must cover every inner iteration.
    Sequence(Vec<f64>),
}

impl AnchorSchedule {
    pub fn t(&self, j: usize) -> f64 {
        match self {
            AnchorSchedule::Harmonic => 1.0 / (j as f64 + 2.0),
            AnchorSchedule::Sequence(ts) => ts[j],
        }
    }

    pub(crate) fn validate(&self, len: usize) -> Result<()> {
        if let AnchorSchedule::Sequence(ts) = self {
            if ts.len() < len {
                return Err(Error::invalid(format!(
                    "anchor schedule has {} weights, {len} needed",
                    ts.len()
                )));
            }
            if ts.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
                return Err(Error::invalid("anchor weights must lie in (0, 1]"));
            }
            if ts.windows(2).any(|w| w[1] > w[0]) {
                return Err(Error::invalid("anchor weights must be nonincreasing"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HalpernConfig {
    /// Relaxation applied to the denoiser inside the iteration.
    pub alpha: f64,
    pub schedule: AnchorSchedule,
    pub max_inner: usize,
    /// Stop early once `||x_j - f(x_j)|| <= tol`.
    pub tol: f64,
}

impl Default for HalpernConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            schedule: AnchorSchedule::Harmonic,
            max_inner: 500,
            tol: 0.0,
        }
    }
}

impl HalpernConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::invalid(format!("Halpern alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::invalid("Halpern tolerance must be nonnegative"));
        }
        self.schedule.validate(self.max_inner)
    }
}

/// Approximates the projection of `x0` onto `Fix(f)` by
/// `x_{j+1} = t_j x0 + (1 - t_j) f_alpha(x_j)`.
///
/// Returns the last iterate and its residual `||x - f(x)||`.
pub fn halpern_project<D: Denoiser>(
    f: &D,
    x0: &ImagePlane,
    cfg: &HalpernConfig,
) -> Result<(ImagePlane, f64)> {
    cfg.validate()?;
    let fa = relax(f, cfg.alpha)?;
    let mut x = x0.clone();
    for j in 0..cfg.max_inner {
        let fx = fa.denoise(&x);
        if x.distance(&fx) <= cfg.alpha * cfg.tol {
            break;
        }
        let t = cfg.schedule.t(j);
        x = ImagePlane::combine(t, x0, 1.0 - t, &fx);
    }
    let residual = x.distance(&f.denoise(&x));
    Ok((x, residual))
}

/// Projection onto the dilation `B_delta(f)` of `Fix(f)`: points already
/// within `delta` of their projection are returned as is, others are moved
/// along the segment to distance `delta` from it.
pub fn project_dilated<D: Denoiser>(
    f: &D,
    x: &ImagePlane,
    delta: f64,
    cfg: &HalpernConfig,
) -> Result<ImagePlane> {
    if !(delta >= 0.0) {
        return Err(Error::invalid(format!("delta must be >= 0, got {delta}")));
    }
    let (p, _) = halpern_project(f, x, cfg)?;
    Ok(dilate_towards(x, &p, delta))
}

/// `(delta / d) x + (1 - delta / d) p` with `d = ||x - p||`, or `x` when `d <= delta`.
pub(crate) fn dilate_towards(x: &ImagePlane, p: &ImagePlane, delta: f64) -> ImagePlane {
    let d = x.distance(p);
    if d <= delta {
        return x.clone();
    }
    let w = delta / d;
    ImagePlane::combine(w, x, 1.0 - w, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denoise::{DenoiserSpec, SymmetricMatrix};
    use rand::{Rng, SeedableRng};

    fn random_plane(h: usize, w: usize, seed: u64) -> ImagePlane {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        ImagePlane::from_fn(h, w, |_, _| rng.random_range(-1.0..1.0))
    }

    fn halfspace(n: usize) -> (Vec<f64>, DenoiserSpec) {
        let normal: Vec<f64> = (0..n).map(|i| 1.0 + (i % 3) as f64).collect();
        let f = DenoiserSpec::projection_halfspace(normal.clone(), 0.0).unwrap();
        (normal, f)
    }

    #[test]
    fn fixed_anchor_is_stationary() {
        let f = DenoiserSpec::projection_box(-2.0, 2.0).unwrap();
        let x0 = random_plane(4, 4, 1);
        let (p, r) = halpern_project(&f, &x0, &HalpernConfig::default()).unwrap();
        assert_eq!(p, x0);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn halfspace_error_follows_harmonic_envelope() {
        let (normal, f) = halfspace(16);
        let nn: f64 = normal.iter().map(|a| a * a).sum();
        let mut x0 = random_plane(4, 4, 2);
        // put x0 at distance 1 outside the halfspace
        let dot: f64 = normal.iter().zip(x0.as_slice()).map(|(a, b)| a * b).sum();
        let shift = (1.0 - dot / nn.sqrt()) / nn.sqrt();
        for (v, a) in x0.as_mut_slice().iter_mut().zip(&normal) {
            *v += shift * a;
        }
        let oracle = f.denoise(&x0);
        assert!((x0.distance(&oracle) - 1.0).abs() < 1e-12);

        for j in [50, 200, 500] {
            let cfg = HalpernConfig {
                alpha: 1.0,
                max_inner: j,
                ..Default::default()
            };
            let (p, _) = halpern_project(&f, &x0, &cfg).unwrap();
            // with alpha = 1 the offset along the normal is exactly 1 / (J + 1)
            assert!((p.distance(&oracle) - 1.0 / (j as f64 + 1.0)).abs() < 1e-12);
        }
        let cfg = HalpernConfig::default();
        let (p, _) = halpern_project(&f, &x0, &cfg).unwrap();
        assert!(p.distance(&oracle) < 3.0 / cfg.max_inner as f64);
    }

    #[test]
    fn linear_symmetric_converges_to_eigenspace_projection() {
        // W averages all pixels: Fix(W) = constants, other eigenvalues 0
        let n = 9;
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                w[i * n + j] = 1.0 / n as f64;
            }
        }
        let f = DenoiserSpec::linear_symmetric(SymmetricMatrix::new(n, w).unwrap());
        let x0 = random_plane(3, 3, 3);
        let oracle = ImagePlane::filled(3, 3, x0.mean());
        let cfg = HalpernConfig {
            alpha: 0.5,
            ..Default::default()
        };
        let (p, r) = halpern_project(&f, &x0, &cfg).unwrap();
        let err = p.distance(&oracle);
        let scale = x0.distance(&oracle);
        assert!(err < 4.0 * scale / cfg.max_inner as f64, "err = {err}");
        assert!(r <= err + 1e-12);
    }

    #[test]
    fn early_stop_on_tolerance() {
        let f = DenoiserSpec::projection_box(0.0, 1.0).unwrap();
        let x0 = random_plane(3, 3, 4).scaled(5.0);
        let cfg = HalpernConfig {
            tol: 1e-2,
            max_inner: 100_000,
            ..Default::default()
        };
        let (_, r) = halpern_project(&f, &x0, &cfg).unwrap();
        assert!(r <= 1e-2);
    }

    #[test]
    fn rejects_bad_schedules() {
        let f = DenoiserSpec::identity();
        let x = random_plane(2, 2, 5);
        for schedule in [
            AnchorSchedule::Sequence(vec![0.5]),
            AnchorSchedule::Sequence(vec![0.5, 0.6]),
            AnchorSchedule::Sequence(vec![0.5, 0.0]),
        ] {
            let cfg = HalpernConfig {
                schedule,
                max_inner: 2,
                ..Default::default()
            };
            assert!(halpern_project(&f, &x, &cfg).is_err());
        }
        let cfg = HalpernConfig {
            alpha: 0.0,
            ..Default::default()
        };
        assert!(halpern_project(&f, &x, &cfg).is_err());
    }

    #[test]
    fn dilated_projection_geometry() {
        let (normal, f) = halfspace(4);
        let nn: f64 = normal.iter().map(|a| a * a).sum::<f64>().sqrt();
        // x at distance 2 along the unit normal from the origin (on the boundary)
        let x = ImagePlane::new(2, 2, normal.iter().map(|a| 2.0 * a / nn).collect()).unwrap();
        let cfg = HalpernConfig {
            alpha: 1.0,
            max_inner: 100_000,
            ..Default::default()
        };
        let p = project_dilated(&f, &x, 0.0, &cfg).unwrap();
        assert!(p.norm() < 1e-4);

        assert_eq!(project_dilated(&f, &x, 2.5, &cfg).unwrap(), x);

        let q = project_dilated(&f, &x, 1.0, &cfg).unwrap();
        let expected = x.scaled(0.5);
        assert!(q.distance(&expected) < 1e-4);
        assert!(project_dilated(&f, &x, -1.0, &cfg).is_err());
    }
}
