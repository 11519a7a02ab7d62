//! Image restoration with denoisers used as fixed-point regularizers.
//!
//! The crate solves linear inverse problems `y = Hx + e` by minimizing the
//! quadratic data fidelity over (a relaxation of) the fixed-point set of a
//! demicontractive denoiser. The classical plug-and-play (PnP) and
//! regularization-by-denoising (RED) solvers are included for comparison,
//! together with numerical probes for the operator inequalities the
//! convergence theory rests on.
//!
//! Module map:
//!
//! * [`image`]: planes, color conversion, PSNR, PNG I/O, bicubic resampling.
//! * [`forward`]: blur / blur+decimate operators, the fidelity term and its prox.
//! * [`denoise`]: denoising engines plus the relaxed and epsilon-adaptive wrappers.
//! * [`fixpoint`]: Halpern projection onto `Fix(f)`, dilated projection and probes.
//! * [`solvers`]: HSD, PnP-PGM/APGM, PnP-ADMM, RED (SD/FP/ADMM), relaxed variants.
//! * [`bench`]: experiment runner, probe suite and plot-data export used by the CLI.

pub mod bench;
pub mod denoise;
mod error;
mod fft;
pub mod fixpoint;
pub mod forward;
pub mod image;
pub mod solvers;

pub use crate::denoise::{DenoiserKind, DenoiserSpec, Denoiser};
pub use crate::error::{Error, Result};
pub use crate::forward::{DegradationModel, Fidelity, FidelityModel, Kernel};
pub use crate::image::{ImagePlane, RgbImage};
