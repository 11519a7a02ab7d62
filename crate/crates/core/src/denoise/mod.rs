//! Denoising engines and the operator wrappers built on top of them.
//!
//! Every denoiser is a deterministic map `f: R^n -> R^n` behind the
//! [`Denoiser`] trait. Besides the image denoisers (NLM, median, Gaussian,
//! box) there are synthetic kinds with closed-form fixed-point sets
//! (projections onto a box or halfspace, symmetric linear smoothers); the
//! probe and solver tests are anchored on those.

mod filters;
mod nlm;
mod wrappers;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::image::ImagePlane;

pub use filters::{box_filter, gaussian_filter, median_filter};
pub use nlm::nlm;
pub use wrappers::{epsilon_adapt, evaluate_relaxed, relax, EpsilonAdaptiveDenoiser, RelaxedDenoiser};

pub trait Denoiser: Sync {
    fn denoise(&self, x: &ImagePlane) -> ImagePlane;
}

impl<D: Denoiser + ?Sized> Denoiser for &D {
    fn denoise(&self, x: &ImagePlane) -> ImagePlane {
        (**self).denoise(x)
    }
}

impl<D: Denoiser + ?Sized + Send> Denoiser for Box<D> {
    fn denoise(&self, x: &ImagePlane) -> ImagePlane {
        (**self).denoise(x)
    }
}

/// Dense symmetric matrix acting on flattened planes.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    /// Row-major `n x n` entries; symmetry is checked to `1e-12` relative.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::invalid(format!("matrix needs {} entries", n * n)));
        }
        let scale = data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for i in 0..n {
            for j in 0..i {
                if (data[i * n + j] - data[j * n + i]).abs() > 1e-12 * scale {
                    return Err(Error::invalid(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "matrix/vector size mismatch");
        self.data
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// A user-supplied map with a display name.
#[derive(Clone)]
pub struct CustomDenoiser {
    pub name: String,
    map: Arc<dyn Fn(&ImagePlane) -> ImagePlane + Send + Sync>,
}

impl CustomDenoiser {
    pub fn new(
        name: impl Into<String>,
        map: impl Fn(&ImagePlane) -> ImagePlane + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            map: Arc::new(map),
        }
    }
}

impl fmt::Debug for CustomDenoiser {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomDenoiser").field("name", &self.name).finish()
    }
}

#[derive(Clone, Debug)]
pub enum DenoiserKind {
    /// Non-local means with `h = strength`.
    Nlm {
        patch_radius: usize,
        search_radius: usize,
    },
    Median {
        radius: usize,
    },
    /// Gaussian smoothing with standard deviation `strength`.
    Gaussian,
    Box {
        radius: usize,
    },
    /// Clamp every pixel to `[lower, upper]`.
    ProjectionBox {
        lower: f64,
        upper: f64,
    },
    /// Projection onto `{x : <normal, x> <= offset}`.
    ProjectionHalfspace {
        normal: Arc<Vec<f64>>,
        offset: f64,
    },
    LinearSymmetric(Arc<SymmetricMatrix>),
    Custom(CustomDenoiser),
}

#[derive(Clone, Debug)]
pub struct DenoiserSpec {
    pub kind: DenoiserKind,
    /// Denoising strength; ignored by the projection and linear kinds.
    pub strength: f64,
}

pub const DEFAULT_PATCH_RADIUS: usize = 2;
pub const DEFAULT_SEARCH_RADIUS: usize = 5;

impl DenoiserSpec {
    pub fn new(kind: DenoiserKind, strength: f64) -> Result<Self> {
        if !(strength > 0.0 && strength.is_finite()) {
            return Err(Error::invalid(format!("denoiser strength must be > 0, got {strength}")));
        }
        match &kind {
            DenoiserKind::ProjectionBox { lower, upper } if !(lower <= upper) => {
                return Err(Error::invalid("box projection needs lower <= upper"))
            }
            DenoiserKind::ProjectionHalfspace { normal, .. }
                if normal.iter().all(|v| *v == 0.0) =>
            {
                return Err(Error::invalid("halfspace normal must be nonzero"))
            }
            _ => {}
        }
        Ok(Self { kind, strength })
    }

    /// NLM with 5x5 patches and an 11x11 search window.
    pub fn nlm(strength: f64) -> Result<Self> {
        Self::new(
            DenoiserKind::Nlm {
                patch_radius: DEFAULT_PATCH_RADIUS,
                search_radius: DEFAULT_SEARCH_RADIUS,
            },
            strength,
        )
    }

    pub fn median(radius: usize) -> Self {
        Self {
            kind: DenoiserKind::Median { radius },
            strength: 1.0,
        }
    }

    pub fn gaussian(std: f64) -> Result<Self> {
        Self::new(DenoiserKind::Gaussian, std)
    }

    pub fn box_filter(radius: usize) -> Self {
        Self {
            kind: DenoiserKind::Box { radius },
            strength: 1.0,
        }
    }

    pub fn projection_box(lower: f64, upper: f64) -> Result<Self> {
        Self::new(DenoiserKind::ProjectionBox { lower, upper }, 1.0)
    }

    pub fn projection_halfspace(normal: Vec<f64>, offset: f64) -> Result<Self> {
        Self::new(
            DenoiserKind::ProjectionHalfspace {
                normal: Arc::new(normal),
                offset,
            },
            1.0,
        )
    }

    pub fn linear_symmetric(matrix: SymmetricMatrix) -> Self {
        Self {
            kind: DenoiserKind::LinearSymmetric(Arc::new(matrix)),
            strength: 1.0,
        }
    }

    pub fn custom(
        name: impl Into<String>,
        map: impl Fn(&ImagePlane) -> ImagePlane + Send + Sync + 'static,
    ) -> Self {
        Self {
            kind: DenoiserKind::Custom(CustomDenoiser::new(name, map)),
            strength: 1.0,
        }
    }

    pub fn identity() -> Self {
        Self::custom("identity", |x| x.clone())
    }

    /// `f(x) = factor * x`; with `factor = -t` this is `((t-1)/(t+1))`-demicontractive.
    pub fn scalar_multiple(factor: f64) -> Self {
        Self::custom(format!("scalar({factor})"), move |x| x.scaled(factor))
    }

    /// Proximal map of `threshold * ||x||_1`.
    pub fn soft_threshold(threshold: f64) -> Self {
        Self::custom(format!("soft_threshold({threshold})"), move |x| {
            x.map(|v| v.signum() * (v.abs() - threshold).max(0.0))
        })
    }

    pub fn name(&self) -> String {
        match &self.kind {
            DenoiserKind::Nlm { .. } => "nlm".into(),
            DenoiserKind::Median { .. } => "median".into(),
            DenoiserKind::Gaussian => "gaussian".into(),
            DenoiserKind::Box { .. } => "box".into(),
            DenoiserKind::ProjectionBox { .. } => "projection_box".into(),
            DenoiserKind::ProjectionHalfspace { .. } => "projection_halfspace".into(),
            DenoiserKind::LinearSymmetric(_) => "linear_symmetric".into(),
            DenoiserKind::Custom(c) => c.name.clone(),
        }
    }

    /// Kinds that average pixel values with weights summing to one, hence
    /// fix constant images.
    pub fn is_averaging(&self) -> bool {
        matches!(
            self.kind,
            DenoiserKind::Nlm { .. }
                | DenoiserKind::Median { .. }
                | DenoiserKind::Gaussian
                | DenoiserKind::Box { .. }
        )
    }
}

impl Denoiser for DenoiserSpec {
    fn denoise(&self, x: &ImagePlane) -> ImagePlane {
        match &self.kind {
            DenoiserKind::Nlm {
                patch_radius,
                search_radius,
            } => nlm(x, self.strength, *patch_radius, *search_radius),
            DenoiserKind::Median { radius } => median_filter(x, *radius),
            DenoiserKind::Gaussian => gaussian_filter(x, self.strength),
            DenoiserKind::Box { radius } => box_filter(x, *radius),
            DenoiserKind::ProjectionBox { lower, upper } => x.clamped(*lower, *upper),
            DenoiserKind::ProjectionHalfspace { normal, offset } => {
                project_halfspace(x, normal, *offset)
            }
            DenoiserKind::LinearSymmetric(m) => {
                ImagePlane::from_vec_unchecked(x.height(), x.width(), m.apply(x.as_slice()))
            }
            DenoiserKind::Custom(c) => {
                let out = (c.map)(x);
                assert_eq!(out.dims(), x.dims(), "custom denoiser changed image shape");
                out
            }
        }
    }
}

pub fn denoise(spec: &DenoiserSpec, x: &ImagePlane) -> ImagePlane {
    spec.denoise(x)
}

fn project_halfspace(x: &ImagePlane, normal: &[f64], offset: f64) -> ImagePlane {
    assert_eq!(normal.len(), x.len(), "halfspace normal/image size mismatch");
    let dot: f64 = normal.iter().zip(x.as_slice()).map(|(a, b)| a * b).sum();
    if dot <= offset {
        return x.clone();
    }
    let nn: f64 = normal.iter().map(|a| a * a).sum();
    let step = (dot - offset) / nn;
    let data = x
        .as_slice()
        .iter()
        .zip(normal)
        .map(|(v, a)| v - step * a)
        .collect();
    ImagePlane::from_vec_unchecked(x.height(), x.width(), data)
}

/// Runs `f` at a different noise level through the homogeneity rescaling
/// `f_target(x) = (target / native) * f_native((native / target) * x)`,
/// where `native` is `spec.strength`.
pub fn denoise_scaled(spec: &DenoiserSpec, x: &ImagePlane, target_sigma: f64) -> Result<ImagePlane> {
    if !(target_sigma > 0.0) {
        return Err(Error::invalid("target sigma must be > 0"));
    }
    let ratio = spec.strength / target_sigma;
    if ratio == 1.0 {
        return Ok(spec.denoise(x));
    }
    Ok(spec.denoise(&x.scaled(ratio)).scaled(1.0 / ratio))
}
