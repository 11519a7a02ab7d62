//! Image planes, color conversion, quality metrics and file I/O.

mod color;
mod io;
mod metrics;
mod plane;
mod resample;

pub use color::{rgb_to_ycbcr, ycbcr_to_rgb, RgbImage};
pub use io::{load_png, quantize, quantized, save_gray_png, save_png};
pub use metrics::{mse, psnr, PEAK};
pub use plane::ImagePlane;
pub use resample::upsample_bicubic;
