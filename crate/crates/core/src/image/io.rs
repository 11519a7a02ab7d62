use std::path::Path;

use image::{DynamicImage, ImageFormat};

use crate::error::{Error, Result};
use crate::image::{ImagePlane, RgbImage};

/// Reads an 8-bit PNG (gray, gray+alpha, RGB or RGBA). Alpha is dropped and
/// gray images are replicated into all three channels.
pub fn load_png(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let reader = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    let decoded = reader.decode()?;
    let rgb = match decoded {
        DynamicImage::ImageRgb8(buf) => buf,
        DynamicImage::ImageRgba8(_) | DynamicImage::ImageLuma8(_) | DynamicImage::ImageLumaA8(_) => {
            decoded.to_rgb8()
        }
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                detail: format!("only 8-bit images are supported, found {:?}", other.color()),
            })
        }
    };
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let mut channels = [
        Vec::with_capacity(w * h),
        Vec::with_capacity(w * h),
        Vec::with_capacity(w * h),
    ];
    for px in rgb.pixels() {
        for (c, v) in channels.iter_mut().zip(px.0) {
            c.push(v as f64);
        }
    }
    let [r, g, b] = channels;
    RgbImage::new(
        ImagePlane::from_vec_unchecked(h, w, r),
        ImagePlane::from_vec_unchecked(h, w, g),
        ImagePlane::from_vec_unchecked(h, w, b),
    )
}

/// Clamp to `[0, 255]` and round to the nearest integer.
pub fn quantize(v: f64) -> u8 {
    v.clamp(0.0, 255.0).round() as u8
}

/// The image as it will be stored in an 8-bit file.
pub fn quantized(img: &RgbImage) -> RgbImage {
    img.map_channels(|p| p.map(|v| quantize(v) as f64))
}

pub fn save_png(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (h, w) = img.dims();
    let mut bytes = Vec::with_capacity(3 * w * h);
    for i in 0..w * h {
        for ch in img.channels() {
            bytes.push(quantize(ch.as_slice()[i]));
        }
    }
    let buf = image::RgbImage::from_raw(w as u32, h as u32, bytes)
        .expect("buffer length matches dimensions");
    buf.save_with_format(path, ImageFormat::Png)?;
    Ok(())
}

pub fn save_gray_png(plane: &ImagePlane, path: impl AsRef<Path>) -> Result<()> {
    let (h, w) = plane.dims();
    let bytes = plane.as_slice().iter().map(|&v| quantize(v)).collect();
    let buf = image::GrayImage::from_raw(w as u32, h as u32, bytes)
        .expect("buffer length matches dimensions");
    buf.save_with_format(path.as_ref(), ImageFormat::Png)?;
    Ok(())
}
