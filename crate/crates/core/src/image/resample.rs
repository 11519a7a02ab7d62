use crate::image::ImagePlane;

/// Catmull-Rom weights for the four taps around a fractional offset `t`.
fn catmull_rom(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

/// Bicubic (Catmull-Rom) upsampling by an integer factor.
///
/// Low-resolution sample `(i, j)` is placed at high-resolution pixel
/// `(factor*i, factor*j)`, the same grid the decimation operator samples, so
/// upsampling reproduces the input at those positions. Borders replicate.
pub fn upsample_bicubic(low: &ImagePlane, factor: usize) -> ImagePlane {
    assert!(factor >= 1);
    if factor == 1 {
        return low.clone();
    }
    let (h, w) = low.dims();
    let at = |r: isize, c: isize| {
        let r = r.clamp(0, h as isize - 1) as usize;
        let c = c.clamp(0, w as isize - 1) as usize;
        low.get(r, c)
    };
    let f = factor as f64;
    ImagePlane::from_fn(h * factor, w * factor, |r, c| {
        let (ry, rx) = (r as f64 / f, c as f64 / f);
        let (iy, ix) = (ry.floor() as isize, rx.floor() as isize);
        let wy = catmull_rom(ry - iy as f64);
        let wx = catmull_rom(rx - ix as f64);
        let mut acc = 0.0;
        for (dy, wyv) in wy.iter().enumerate() {
            let mut row = 0.0;
            for (dx, wxv) in wx.iter().enumerate() {
                row += wxv * at(iy + dy as isize - 1, ix + dx as isize - 1);
            }
            acc += wyv * row;
        }
        acc
    })
}
