#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::denoise::filters::pad_mirror;
use crate::image::ImagePlane;

const BAND_ROWS: usize = 16;

/// Non-local means.
///
/// Weights are `exp(-d2 / h^2)` where `d2` is the mean squared difference
/// between the `(2*patch_radius+1)^2` patches. The centre pixel receives the
/// largest weight among its neighbours. Borders are mirror padded.
///
/// Patch distances are accumulated per search offset with integral images
/// over horizontal bands of rows. Bands are independent, so the parallel and
/// serial builds give bit-identical output.
pub fn nlm(x: &ImagePlane, h: f64, patch_radius: usize, search_radius: usize) -> ImagePlane {
    let (height, width) = x.dims();
    if height == 0 || width == 0 {
        return x.clone();
    }
    let pad = patch_radius + search_radius;
    let padded = pad_mirror(x, pad);
    let params = Params {
        x,
        padded: &padded,
        inv_h2: 1.0 / (h * h),
        patch_radius,
        search_radius,
    };

    let mut out = vec![0.0; height * width];
    let band_len = BAND_ROWS * width;
    #[cfg(feature = "parallel")]
    out.par_chunks_mut(band_len)
        .enumerate()
        .for_each(|(b, chunk)| params.band(b * BAND_ROWS, chunk));
    #[cfg(not(feature = "parallel"))]
    out.chunks_mut(band_len)
        .enumerate()
        .for_each(|(b, chunk)| params.band(b * BAND_ROWS, chunk));

    ImagePlane::from_vec_unchecked(height, width, out)
}

struct Params<'a> {
    x: &'a ImagePlane,
    padded: &'a ImagePlane,
    inv_h2: f64,
    patch_radius: usize,
    search_radius: usize,
}

impl Params<'_> {
    fn band(&self, r0: usize, out: &mut [f64]) {
        let width = self.x.width();
        let rows = out.len() / width;
        let (pr, sr) = (self.patch_radius, self.search_radius);
        let pad = pr + sr;
        let side = 2 * pr + 1;
        let inv_area = 1.0 / (side * side) as f64;
        let padded = self.padded;

        // Region of reference-patch pixels, in padded coordinates.
        let reg_top = r0 + sr;
        let reg_left = sr;
        let reg_h = rows + 2 * pr;
        let reg_w = width + 2 * pr;
        let iw = reg_w + 1;
        let mut integral = vec![0.0; (reg_h + 1) * iw];

        let mut acc = vec![0.0; rows * width];
        let mut wsum = vec![0.0; rows * width];
        let mut wmax = vec![0.0f64; rows * width];

        let s = sr as isize;
        for dy in -s..=s {
            for dx in -s..=s {
                if dy == 0 && dx == 0 {
                    continue;
                }
                for i in 0..reg_h {
                    let pi = reg_top + i;
                    let qi = (pi as isize + dy) as usize;
                    let prow = padded.row(pi);
                    let qrow = padded.row(qi);
                    let mut run = 0.0;
                    for j in 0..reg_w {
                        let pj = reg_left + j;
                        let d = prow[pj] - qrow[(pj as isize + dx) as usize];
                        run += d * d;
                        integral[(i + 1) * iw + j + 1] = integral[i * iw + j + 1] + run;
                    }
                }
                for r in 0..rows {
                    let neighbour_row = padded.row(((r0 + r + pad) as isize + dy) as usize);
                    let top = r * iw;
                    let bottom = (r + side) * iw;
                    for c in 0..width {
                        let sum = integral[bottom + c + side] - integral[top + c + side]
                            - integral[bottom + c]
                            + integral[top + c];
                        let d2 = (sum * inv_area).max(0.0);
                        let w = (-d2 * self.inv_h2).exp();
                        let k = r * width + c;
                        acc[k] += w * neighbour_row[(c as isize + pad as isize + dx) as usize];
                        wsum[k] += w;
                        if w > wmax[k] {
                            wmax[k] = w;
                        }
                    }
                }
            }
        }

        for r in 0..rows {
            for c in 0..width {
                let k = r * width + c;
                let centre_w = if sr == 0 { 1.0 } else { wmax[k] };
                let centre = self.x.get(r0 + r, c);
                let total = wsum[k] + centre_w;
                out[k] = if total > 0.0 {
                    (acc[k] + centre_w * centre) / total
                } else {
                    centre
                };
            }
        }
    }
}
