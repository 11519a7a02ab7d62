use crate::error::{Error, Result};
use crate::image::ImagePlane;

// BT.601 luma weights.
const KR: f64 = 0.299;
const KG: f64 = 0.587;
const KB: f64 = 0.114;
const CHROMA_OFFSET: f64 = 128.0;

/// Three equally sized planes holding R, G and B in `[0, 255]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RgbImage {
    pub r: ImagePlane,
    pub g: ImagePlane,
    pub b: ImagePlane,
}

impl RgbImage {
    pub fn new(r: ImagePlane, g: ImagePlane, b: ImagePlane) -> Result<Self> {
        let dims = r.dims();
        g.ensure_dims(dims)?;
        b.ensure_dims(dims)?;
        Ok(Self { r, g, b })
    }

    pub fn from_gray(plane: ImagePlane) -> Self {
        Self {
            r: plane.clone(),
            g: plane.clone(),
            b: plane,
        }
    }

    pub fn height(&self) -> usize {
        self.r.height()
    }

    pub fn width(&self) -> usize {
        self.r.width()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.r.dims()
    }

    pub fn channels(&self) -> [&ImagePlane; 3] {
        [&self.r, &self.g, &self.b]
    }

    pub fn map_channels(&self, mut f: impl FnMut(&ImagePlane) -> ImagePlane) -> RgbImage {
        RgbImage {
            r: f(&self.r),
            g: f(&self.g),
            b: f(&self.b),
        }
    }

    pub fn try_map_channels(
        &self,
        mut f: impl FnMut(usize, &ImagePlane) -> Result<ImagePlane>,
    ) -> Result<RgbImage> {
        RgbImage::new(f(0, &self.r)?, f(1, &self.g)?, f(2, &self.b)?)
    }

    pub fn crop(&self, height: usize, width: usize) -> RgbImage {
        self.map_channels(|p| p.crop(height, width))
    }
}

/// Full-range BT.601 (JPEG convention) RGB to YCbCr.
///
/// Chroma is centred at 128. The inverse in [`ycbcr_to_rgb`] is the exact
/// algebraic inverse, so the round trip is limited only by rounding.
pub fn rgb_to_ycbcr(img: &RgbImage) -> (ImagePlane, ImagePlane, ImagePlane) {
    let (h, w) = img.dims();
    let n = h * w;
    let (mut y, mut cb, mut cr) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for ((&r, &g), &b) in img
        .r
        .as_slice()
        .iter()
        .zip(img.g.as_slice())
        .zip(img.b.as_slice())
    {
        let luma = KR * r + KG * g + KB * b;
        y.push(luma);
        cb.push(CHROMA_OFFSET + (b - luma) / (2.0 * (1.0 - KB)));
        cr.push(CHROMA_OFFSET + (r - luma) / (2.0 * (1.0 - KR)));
    }
    (
        ImagePlane::from_vec_unchecked(h, w, y),
        ImagePlane::from_vec_unchecked(h, w, cb),
        ImagePlane::from_vec_unchecked(h, w, cr),
    )
}

pub fn ycbcr_to_rgb(luma: &ImagePlane, cb: &ImagePlane, cr: &ImagePlane) -> Result<RgbImage> {
    let dims = luma.dims();
    if cb.dims() != dims || cr.dims() != dims {
        return Err(Error::DimensionMismatch {
            expected: dims,
            found: if cb.dims() != dims { cb.dims() } else { cr.dims() },
        });
    }
    let mut r = Vec::with_capacity(luma.len());
    let mut g = Vec::with_capacity(luma.len());
    let mut b = Vec::with_capacity(luma.len());
    for ((&yv, &cbv), &crv) in luma.as_slice().iter().zip(cb.as_slice()).zip(cr.as_slice()) {
        let rv = yv + 2.0 * (1.0 - KR) * (crv - CHROMA_OFFSET);
        let bv = yv + 2.0 * (1.0 - KB) * (cbv - CHROMA_OFFSET);
        r.push(rv);
        g.push((yv - KR * rv - KB * bv) / KG);
        b.push(bv);
    }
    let (h, w) = dims;
    Ok(RgbImage {
        r: ImagePlane::from_vec_unchecked(h, w, r),
        g: ImagePlane::from_vec_unchecked(h, w, g),
        b: ImagePlane::from_vec_unchecked(h, w, b),
    })
}
