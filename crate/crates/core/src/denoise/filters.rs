use crate::image::ImagePlane;

/// Reflect-101 boundary: `... 2 1 | 0 1 2 ... n-1 | n-2 ...`.
#[inline]
pub(crate) fn mirror(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let m = i.rem_euclid(period);
    if m < n as isize {
        m as usize
    } else {
        (period - m) as usize
    }
}

/// Copy of `x` padded by `pad` pixels on every side with mirrored values.
pub(crate) fn pad_mirror(x: &ImagePlane, pad: usize) -> ImagePlane {
    let (h, w) = x.dims();
    ImagePlane::from_fn(h + 2 * pad, w + 2 * pad, |r, c| {
        x.get(
            mirror(r as isize - pad as isize, h),
            mirror(c as isize - pad as isize, w),
        )
    })
}

pub fn median_filter(x: &ImagePlane, radius: usize) -> ImagePlane {
    if radius == 0 {
        return x.clone();
    }
    let padded = pad_mirror(x, radius);
    let side = 2 * radius + 1;
    let mut window = Vec::with_capacity(side * side);
    ImagePlane::from_fn(x.height(), x.width(), |r, c| {
        window.clear();
        for dr in 0..side {
            window.extend_from_slice(&padded.row(r + dr)[c..c + side]);
        }
        let mid = window.len() / 2;
        *window.select_nth_unstable_by(mid, f64::total_cmp).1
    })
}

pub fn box_filter(x: &ImagePlane, radius: usize) -> ImagePlane {
    let side = 2 * radius + 1;
    separable(x, &vec![1.0 / side as f64; side])
}

/// Gaussian smoothing truncated at `ceil(3 std)` and renormalized.
pub fn gaussian_filter(x: &ImagePlane, std: f64) -> ImagePlane {
    let radius = (3.0 * std).ceil() as isize;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|d| (-(d * d) as f64 / (2.0 * std * std)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    separable(x, &taps)
}

/// Applies the same odd 1-D filter along rows then columns, mirror padded.
fn separable(x: &ImagePlane, taps: &[f64]) -> ImagePlane {
    let (h, w) = x.dims();
    let r = (taps.len() / 2) as isize;
    let rows = ImagePlane::from_fn(h, w, |i, j| {
        taps.iter()
            .enumerate()
            .map(|(k, t)| t * x.get(i, mirror(j as isize + k as isize - r, w)))
            .sum()
    });
    ImagePlane::from_fn(h, w, |i, j| {
        taps.iter()
            .enumerate()
            .map(|(k, t)| t * rows.get(mirror(i as isize + k as isize - r, h), j))
            .sum()
    })
}
