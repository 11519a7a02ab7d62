use crate::error::Result;
use crate::image::ImagePlane;

pub const PEAK: f64 = 255.0;

/// PSNR in dB with a fixed peak of 255.
///
/// Returns `f64::INFINITY` when the two planes are identical.
pub fn psnr(x: &ImagePlane, reference: &ImagePlane) -> Result<f64> {
    x.ensure_dims(reference.dims())?;
    let mse = mse(x, reference);
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (PEAK * PEAK / mse).log10())
}

pub fn mse(x: &ImagePlane, reference: &ImagePlane) -> f64 {
    let n = x.len().max(1) as f64;
    x.as_slice()
        .iter()
        .zip(reference.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n
}
