use std::ops::{Add, AddAssign, Mul, Sub, SubAssign};

use crate::error::{Error, Result};

/// A single-channel image stored row-major as `f64` intensities.
///
/// Intensities nominally live in `[0, 255]` but are never clamped here; the
/// solvers operate on unconstrained real vectors and only PNG export
/// quantizes. Arithmetic operators panic on shape mismatch, the fallible
/// entry points of the crate check shapes before reaching them.
#[derive(Clone, Debug, PartialEq)]
pub struct ImagePlane {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl ImagePlane {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != height * width {
            return Err(Error::invalid(format!(
                "data length {} does not match {}x{}",
                data.len(),
                height,
                width
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self::filled(height, width, 0.0)
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        Self {
            height,
            width,
            data: vec![value; height * width],
        }
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self {
            height,
            width,
            data,
        }
    }

    /// Wraps a buffer that is known to have the right length.
    pub(crate) fn from_vec_unchecked(height: usize, width: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), height * width);
        Self {
            height,
            width,
            data,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.width + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn ensure_dims(&self, expected: (usize, usize)) -> Result<()> {
        if self.dims() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: self.dims(),
            });
        }
        Ok(())
    }

    pub fn dot(&self, other: &ImagePlane) -> f64 {
        assert_eq!(self.dims(), other.dims(), "dot: shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn distance(&self, other: &ImagePlane) -> f64 {
        assert_eq!(self.dims(), other.dims(), "distance: shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &ImagePlane) -> f64 {
        assert_eq!(self.dims(), other.dims(), "max_abs_diff: shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn mean(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ImagePlane {
        ImagePlane {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &ImagePlane, f: impl Fn(f64, f64) -> f64) -> ImagePlane {
        assert_eq!(self.dims(), other.dims(), "zip_map: shape mismatch");
        ImagePlane {
            height: self.height,
            width: self.width,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> ImagePlane {
        self.map(|v| s * v)
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &ImagePlane) {
        assert_eq!(self.dims(), x.dims(), "axpy: shape mismatch");
        for (s, v) in self.data.iter_mut().zip(&x.data) {
            *s += a * v;
        }
    }

    /// Convex combination `a * x + b * y`, evaluated term by term.
    pub fn combine(a: f64, x: &ImagePlane, b: f64, y: &ImagePlane) -> ImagePlane {
        x.zip_map(y, |p, q| a * p + b * q)
    }

    pub fn clamped(&self, lo: f64, hi: f64) -> ImagePlane {
        self.map(|v| v.clamp(lo, hi))
    }

    /// Top-left crop.
    pub fn crop(&self, height: usize, width: usize) -> ImagePlane {
        assert!(height <= self.height && width <= self.width);
        ImagePlane::from_fn(height, width, |r, c| self.get(r, c))
    }

    /// Rectangular sub-window starting at `(top, left)`.
    pub fn window(&self, top: usize, left: usize, height: usize, width: usize) -> ImagePlane {
        assert!(top + height <= self.height && left + width <= self.width);
        ImagePlane::from_fn(height, width, |r, c| self.get(top + r, left + c))
    }
}

impl Add<&ImagePlane> for &ImagePlane {
    type Output = ImagePlane;

    fn add(self, rhs: &ImagePlane) -> ImagePlane {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub<&ImagePlane> for &ImagePlane {
    type Output = ImagePlane;

    fn sub(self, rhs: &ImagePlane) -> ImagePlane {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul<&ImagePlane> for f64 {
    type Output = ImagePlane;

    fn mul(self, rhs: &ImagePlane) -> ImagePlane {
        rhs.scaled(self)
    }
}

impl AddAssign<&ImagePlane> for ImagePlane {
    fn add_assign(&mut self, rhs: &ImagePlane) {
        self.axpy(1.0, rhs);
    }
}

impl SubAssign<&ImagePlane> for ImagePlane {
    fn sub_assign(&mut self, rhs: &ImagePlane) {
        self.axpy(-1.0, rhs);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_length_and_nan() {
        assert!(ImagePlane::new(2, 2, vec![0.0; 3]).is_err());
        assert!(matches!(
            ImagePlane::new(1, 2, vec![0.0, f64::NAN]),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn arithmetic() {
        let a = ImagePlane::new(1, 3, vec![1.0, 2.0, 3.0]).unwrap();
        let b = ImagePlane::new(1, 3, vec![1.0, 0.0, -1.0]).unwrap();
        assert_eq!((&a - &b).as_slice(), &[0.0, 2.0, 4.0]);
        assert_eq!(a.dot(&b), -2.0);
        assert_eq!((2.0 * &b).as_slice(), &[2.0, 0.0, -2.0]);
        assert!((a.distance(&b) - 20f64.sqrt()).abs() < 1e-15);
    }
}
