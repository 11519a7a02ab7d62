#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use redpro::forward::{CgOptions, Fidelity};
use redpro::{DegradationModel, ImagePlane, Result};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_plane(h: usize, w: usize, seed: u64, lo: f64, hi: f64) -> ImagePlane {
    let mut r = rng(seed);
    ImagePlane::from_fn(h, w, |_, _| r.random_range(lo..hi))
}

pub fn gaussian_plane(h: usize, w: usize, seed: u64) -> ImagePlane {
    use rand_distr::{Distribution, StandardNormal};
    let mut r = rng(seed);
    ImagePlane::from_fn(h, w, |_, _| StandardNormal.sample(&mut r))
}

pub fn to_vec(x: &ImagePlane) -> DVector<f64> {
    DVector::from_column_slice(x.as_slice())
}

pub fn from_vec(v: &DVector<f64>, dims: (usize, usize)) -> ImagePlane {
    ImagePlane::new(dims.0, dims.1, v.as_slice().to_vec()).unwrap()
}

pub fn rel_err(a: &ImagePlane, b: &ImagePlane) -> f64 {
    a.distance(b) / b.norm().max(f64::MIN_POSITIVE)
}

/// `H` as a dense matrix built by periodic direct summation of the kernel
/// taps, followed by keeping every `factor`-th row and column.
pub fn dense_operator(model: &DegradationModel, dims: (usize, usize)) -> DMatrix<f64> {
    let (h, w) = dims;
    let q = model.factor();
    let (oh, ow) = (h / q, w / q);
    let r = model.kernel.radius() as isize;
    let mut m = DMatrix::zeros(oh * ow, h * w);
    for i in 0..oh {
        for j in 0..ow {
            let (pi, pj) = ((i * q) as isize, (j * q) as isize);
            for dy in -r..=r {
                for dx in -r..=r {
                    let si = (pi - dy).rem_euclid(h as isize) as usize;
                    let sj = (pj - dx).rem_euclid(w as isize) as usize;
                    m[(i * ow + j, si * w + sj)] += model.kernel.at(dy, dx);
                }
            }
        }
    }
    m
}

/// `l(x) = scale/2 ||A x - y||^2` on flattened planes of shape `dims`.
pub struct DenseFidelity {
    pub a: DMatrix<f64>,
    pub y: DVector<f64>,
    pub scale: f64,
    pub dims: (usize, usize),
}

impl DenseFidelity {
    pub fn new(a: DMatrix<f64>, y: DVector<f64>, scale: f64, dims: (usize, usize)) -> Self {
        assert_eq!(a.ncols(), dims.0 * dims.1);
        assert_eq!(a.nrows(), y.len());
        Self { a, y, scale, dims }
    }

    pub fn gram(&self) -> DMatrix<f64> {
        self.a.transpose() * &self.a * self.scale
    }

    pub fn value_vec(&self, x: &DVector<f64>) -> f64 {
        0.5 * self.scale * (&self.a * x - &self.y).norm_squared()
    }
}

impl Fidelity for DenseFidelity {
    fn input_dims(&self) -> (usize, usize) {
        self.dims
    }

    fn value(&self, x: &ImagePlane) -> f64 {
        self.value_vec(&to_vec(x))
    }

    fn gradient(&self, x: &ImagePlane) -> ImagePlane {
        let g = self.a.transpose() * (&self.a * to_vec(x) - &self.y) * self.scale;
        from_vec(&g, self.dims)
    }

    fn prox(&self, u: &ImagePlane, weight: f64, _cg: &CgOptions) -> Result<ImagePlane> {
        let n = self.a.ncols();
        let lhs = DMatrix::identity(n, n) + self.gram() * weight;
        let rhs = to_vec(u) + self.a.transpose() * &self.y * (weight * self.scale);
        let v = lhs.cholesky().expect("positive definite").solve(&rhs);
        Ok(from_vec(&v, self.dims))
    }

    fn lipschitz(&self) -> f64 {
        self.gram().symmetric_eigenvalues().max()
    }
}

/// Cyclic coordinate descent for `1/2 ||A x - y||^2 + lambda ||x||_1`.
pub fn lasso_coordinate_descent(a: &DMatrix<f64>, y: &DVector<f64>, lambda: f64, sweeps: usize) -> DVector<f64> {
    let n = a.ncols();
    let mut x: DVector<f64> = DVector::zeros(n);
    let mut r = y.clone();
    let col_sq: Vec<f64> = (0..n).map(|j| a.column(j).norm_squared()).collect();
    for _ in 0..sweeps {
        for j in 0..n {
            let aj = a.column(j);
            let rho: f64 = aj.dot(&r) + col_sq[j] * x[j];
            let new = rho.signum() * (rho.abs() - lambda).max(0.0) / col_sq[j];
            r.axpy(x[j] - new, &aj, 1.0);
            x[j] = new;
        }
    }
    x
}

pub fn lasso_objective(a: &DMatrix<f64>, y: &DVector<f64>, lambda: f64, x: &DVector<f64>) -> f64 {
    0.5 * (a * x - y).norm_squared() + lambda * x.lp_norm(1)
}

/// Projected coordinate descent for `1/2 x^T Q x - b^T x` over `[lo, hi]^n`.
pub fn box_qp(q: &DMatrix<f64>, b: &DVector<f64>, lo: f64, hi: f64, sweeps: usize) -> DVector<f64> {
    let n = b.len();
    let mut x = DVector::from_element(n, 0.5 * (lo + hi));
    for _ in 0..sweeps {
        for j in 0..n {
            let g = (q.row(j) * &x)[0] - b[j];
            x[j] = (x[j] - g / q[(j, j)]).clamp(lo, hi);
        }
    }
    x
}

/// Symmetric `n x n` matrix `Q diag(eigs) Q^T` with a seeded random orthogonal `Q`.
pub fn symmetric_with_spectrum(eigs: &[f64], seed: u64) -> DMatrix<f64> {
    let n = eigs.len();
    let g = gaussian_plane(n, n, seed);
    let m = DMatrix::from_row_slice(n, n, g.as_slice());
    let q = m.qr().q();
    &q * DMatrix::from_diagonal(&DVector::from_column_slice(eigs)) * q.transpose()
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Row-major entries, as expected by `SymmetricMatrix::new`.
pub fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}
