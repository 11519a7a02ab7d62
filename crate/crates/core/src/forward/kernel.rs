use crate::error::{Error, Result};

/// A normalized, odd-sized square point spread function.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    size: usize,
    taps: Vec<f64>,
}

impl Kernel {
    /// Taps must already sum to one (within `1e-12`).
    pub fn new(size: usize, taps: Vec<f64>) -> Result<Self> {
        if size == 0 || size % 2 == 0 {
            return Err(Error::invalid(format!("kernel size must be odd, got {size}")));
        }
        if taps.len() != size * size {
            return Err(Error::invalid(format!(
                "kernel of size {size} needs {} taps, got {}",
                size * size,
                taps.len()
            )));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite);
        }
        let sum: f64 = taps.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("kernel taps sum to {sum}, expected 1")));
        }
        Ok(Self { size, taps })
    }

    /// Normalizes arbitrary nonnegative-sum weights.
    pub fn from_weights(size: usize, weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum.is_finite() && sum != 0.0) {
            return Err(Error::invalid("kernel weights must have a finite nonzero sum"));
        }
        Self::new(size, weights.into_iter().map(|w| w / sum).collect())
    }

    pub fn delta() -> Self {
        Self {
            size: 1,
            taps: vec![1.0],
        }
    }

    pub fn uniform(size: usize) -> Result<Self> {
        Self::from_weights(size, vec![1.0; size * size])
    }

    /// Gaussian PSF truncated to `size x size` and renormalized.
    pub fn gaussian(size: usize, std: f64) -> Result<Self> {
        if !(std > 0.0) {
            return Err(Error::invalid("gaussian std must be positive"));
        }
        let c = (size / 2) as f64;
        let mut w = Vec::with_capacity(size * size);
        for r in 0..size {
            for col in 0..size {
                let (dy, dx) = (r as f64 - c, col as f64 - c);
                w.push((-(dy * dy + dx * dx) / (2.0 * std * std)).exp());
            }
        }
        Self::from_weights(size, w)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn radius(&self) -> usize {
        self.size / 2
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Tap at signed offset `(dy, dx)` from the center.
    pub fn at(&self, dy: isize, dx: isize) -> f64 {
        let r = self.radius() as isize;
        self.taps[((dy + r) * self.size as isize + dx + r) as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_normalize() {
        for k in [
            Kernel::uniform(9).unwrap(),
            Kernel::gaussian(7, 1.6).unwrap(),
            Kernel::gaussian(9, 1.6).unwrap(),
            Kernel::delta(),
        ] {
            assert!((k.taps().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert_eq!(k.size() % 2, 1);
        }
        assert_eq!(Kernel::uniform(9).unwrap().at(-4, 4), 1.0 / 81.0);
    }

    #[test]
    fn rejects_even_or_unnormalized() {
        assert!(Kernel::uniform(4).is_err());
        assert!(Kernel::new(3, vec![0.2; 9]).is_err());
    }
}
