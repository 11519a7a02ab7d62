//! Minimal 2-D FFT over row-major buffers, built from rustfft 1-D plans.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::image::ImagePlane;

#[derive(Clone)]
pub(crate) struct Fft2 {
    height: usize,
    width: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2")
            .field("height", &self.height)
            .field("width", &self.width)
            .finish()
    }
}

impl Fft2 {
    pub(crate) fn new(height: usize, width: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            height,
            width,
            row_fwd: planner.plan_fft_forward(width),
            row_inv: planner.plan_fft_inverse(width),
            col_fwd: planner.plan_fft_forward(height),
            col_inv: planner.plan_fft_inverse(height),
        }
    }

    fn transform(&self, buf: &mut [Complex64], rows: &Arc<dyn Fft<f64>>, cols: &Arc<dyn Fft<f64>>) {
        let (h, w) = (self.height, self.width);
        debug_assert_eq!(buf.len(), h * w);
        // Rows are contiguous, so one call processes all of them.
        rows.process(buf);
        let mut column = vec![Complex64::default(); h];
        for c in 0..w {
            for r in 0..h {
                column[r] = buf[r * w + c];
            }
            cols.process(&mut column);
            for r in 0..h {
                buf[r * w + c] = column[r];
            }
        }
    }

    pub(crate) fn forward(&self, buf: &mut [Complex64]) {
        self.transform(buf, &self.row_fwd, &self.col_fwd);
    }

    /// Inverse transform including the `1/(h*w)` normalization.
    pub(crate) fn inverse(&self, buf: &mut [Complex64]) {
        self.transform(buf, &self.row_inv, &self.col_inv);
        let scale = 1.0 / (self.height * self.width) as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }

    pub(crate) fn forward_real(&self, plane: &ImagePlane) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = plane
            .as_slice()
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        self.forward(&mut buf);
        buf
    }

    pub(crate) fn inverse_real(&self, mut spectrum: Vec<Complex64>) -> ImagePlane {
        self.inverse(&mut spectrum);
        ImagePlane::from_vec_unchecked(
            self.height,
            self.width,
            spectrum.into_iter().map(|c| c.re).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_undoes_forward() {
        let plane = ImagePlane::from_fn(6, 10, |r, c| (r * 3 + c * 7 % 5) as f64 - 4.0);
        let fft = Fft2::new(6, 10);
        let back = fft.inverse_real(fft.forward_real(&plane));
        assert!(back.max_abs_diff(&plane) < 1e-12);
    }

    #[test]
    fn dc_term_is_sum() {
        let plane = ImagePlane::from_fn(4, 5, |r, c| (r + c) as f64);
        let spec = Fft2::new(4, 5).forward_real(&plane);
        let sum: f64 = plane.as_slice().iter().sum();
        assert!((spec[0].re - sum).abs() < 1e-12);
    }
}
