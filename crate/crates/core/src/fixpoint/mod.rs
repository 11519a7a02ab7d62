//! Fixed-point projections and numerical probes of operator inequalities.
//!
//! [`halpern_project`] approximates the projection onto `Fix(f)` and
//! [`project_dilated`] the projection onto its dilation `B_delta(f)`. The
//! probes evaluate demicontractivity, strong quasi-nonexpansiveness, the
//! bounded-denoiser estimate, dilation containment, co-coercivity and
//! finite cycle sums on sampled points. They never fail on a violated
//! inequality; they return a report and leave the verdict to the caller.

mod cyclic;
mod halpern;
mod probes;

pub use cyclic::{cyclic_monotonicity_probe, CycleSearch, CyclicReport};
pub(crate) use halpern::dilate_towards;
pub use halpern::{halpern_project, project_dilated, AnchorSchedule, HalpernConfig};
pub use probes::{
    check_bounded_denoiser, check_cocoercivity, check_dilation_containment,
    check_strong_quasi_nonexpansive, estimate_demicontractivity, DemicontractivityEstimate,
    ProbeReport, ProbeRow, FIXED_POINT_TOL, PROBE_SLACK, ZERO_RESIDUAL,
};

use crate::denoise::Denoiser;
use crate::image::ImagePlane;

/// `f` applied to every point, in input order.
pub(crate) fn map_points<D: Denoiser>(f: &D, xs: &[ImagePlane]) -> Vec<ImagePlane> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        xs.par_iter().map(|x| f.denoise(x)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        xs.iter().map(|x| f.denoise(x)).collect()
    }
}
