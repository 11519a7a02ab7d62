use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::denoise::Denoiser;
use crate::error::{Error, Result};
use crate::fixpoint::map_points;
use crate::image::ImagePlane;

/// How the probe enumerates `m`-cycles of distinct points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CycleSearch {
    Random { cycles: usize, seed: u64 },
    /// Every cycle up to rotation; only sensible for a handful of points.
    Exhaustive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CyclicReport {
    pub m: usize,
    pub cycles_checked: usize,
    /// Largest `sum <A(x_i), x_{i+1} - x_i>` with `A = Id - f`.
    pub max_cycle_sum: f64,
    /// The cycle behind `max_cycle_sum` when it exceeds the tolerance.
    pub witness: Option<Vec<usize>>,
    /// Smallest `sum <x_i - f(x_i), f(x_i) - f(x_{i+1})>`; nonnegative for
    /// cyclically firmly nonexpansive `f`.
    pub min_firm_sum: f64,
    pub firm_witness: Option<Vec<usize>>,
}

impl CyclicReport {
    pub fn monotone(&self) -> bool {
        self.witness.is_none()
    }

    pub fn firmly_nonexpansive(&self) -> bool {
        self.firm_witness.is_none()
    }
}

const CYCLE_TOL: f64 = 1e-10;

/// Evaluates the finite cycle sums behind cyclic monotonicity of `Id - f`
/// over cycles drawn from `points`.
pub fn cyclic_monotonicity_probe<D: Denoiser>(
    f: &D,
    points: &[ImagePlane],
    m: usize,
    search: CycleSearch,
) -> Result<CyclicReport> {
    if m < 2 {
        return Err(Error::invalid("cycle length must be at least 2"));
    }
    if points.len() < m {
        return Err(Error::invalid(format!("{m}-cycles need at least {m} points, got {}", points.len())));
    }
    let dims = points[0].dims();
    for p in points {
        p.ensure_dims(dims)?;
    }
    let images = map_points(f, points);
    let residuals: Vec<ImagePlane> = points.iter().zip(&images).map(|(x, fx)| x - fx).collect();
    let scale = points.iter().map(|p| p.norm_sq()).fold(0.0, f64::max).max(1.0);

    let mut state = Search {
        points,
        images: &images,
        residuals: &residuals,
        best: (f64::NEG_INFINITY, Vec::new()),
        worst_firm: (f64::INFINITY, Vec::new()),
        count: 0,
    };
    match search {
        CycleSearch::Random { cycles, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..cycles {
                let cycle = sample(&mut rng, points.len(), m).into_vec();
                state.visit(&cycle);
            }
        }
        CycleSearch::Exhaustive => {
            for first in 0..points.len() {
                let mut cycle = vec![first];
                state.extend(&mut cycle, m);
            }
        }
    }

    let tol = CYCLE_TOL * m as f64 * scale;
    let (max_cycle_sum, best) = state.best;
    let (min_firm_sum, worst_firm) = state.worst_firm;
    Ok(CyclicReport {
        m,
        cycles_checked: state.count,
        max_cycle_sum,
        witness: (max_cycle_sum > tol).then_some(best),
        min_firm_sum,
        firm_witness: (min_firm_sum < -tol).then_some(worst_firm),
    })
}

struct Search<'a> {
    points: &'a [ImagePlane],
    images: &'a [ImagePlane],
    residuals: &'a [ImagePlane],
    best: (f64, Vec<usize>),
    worst_firm: (f64, Vec<usize>),
    count: usize,
}

impl Search<'_> {
    /// Cycles whose smallest index comes first, so rotations are not repeated.
    fn extend(&mut self, cycle: &mut Vec<usize>, m: usize) {
        if cycle.len() == m {
            let c = cycle.clone();
            self.visit(&c);
            return;
        }
        for next in cycle[0] + 1..self.points.len() {
            if !cycle.contains(&next) {
                cycle.push(next);
                self.extend(cycle, m);
                cycle.pop();
            }
        }
    }

    fn visit(&mut self, cycle: &[usize]) {
        self.count += 1;
        let mut sum = 0.0;
        let mut firm = 0.0;
        for (pos, &i) in cycle.iter().enumerate() {
            let j = cycle[(pos + 1) % cycle.len()];
            let a = &self.residuals[i];
            sum += a.dot(&(&self.points[j] - &self.points[i]));
            firm += a.dot(&(&self.images[i] - &self.images[j]));
        }
        if sum > self.best.0 {
            self.best = (sum, cycle.to_vec());
        }
        if firm < self.worst_firm.0 {
            self.worst_firm = (firm, cycle.to_vec());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denoise::DenoiserSpec;
    use rand::Rng;

    fn rotation(theta: f64) -> DenoiserSpec {
        let (s, c) = theta.sin_cos();
        DenoiserSpec::custom("rotation", move |x| {
            let (a, b) = (x.as_slice()[0], x.as_slice()[1]);
            ImagePlane::new(1, 2, vec![c * a - s * b, s * a + c * b]).unwrap()
        })
    }

    fn grid(n: usize) -> Vec<ImagePlane> {
        let mut pts = Vec::new();
        for i in 0..n {
            for j in 0..n {
                pts.push(ImagePlane::new(1, 2, vec![i as f64 - 1.5, j as f64 - 1.5]).unwrap());
            }
        }
        pts
    }

    fn regular_polygon(m: usize) -> Vec<ImagePlane> {
        (0..m)
            .map(|k| {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                ImagePlane::new(1, 2, vec![phi.cos(), phi.sin()]).unwrap()
            })
            .collect()
    }

    #[test]
    fn projection_residual_is_cyclically_monotone() {
        let f = DenoiserSpec::projection_box(-1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts: Vec<ImagePlane> = (0..40)
            .map(|_| ImagePlane::from_fn(3, 3, |_, _| rng.random_range(-3.0..3.0)))
            .collect();
        for m in 2..=6 {
            let rep = cyclic_monotonicity_probe(&f, &pts, m, CycleSearch::Random { cycles: 1000, seed: m as u64 })
                .unwrap();
            assert_eq!(rep.cycles_checked, 1000);
            assert!(rep.max_cycle_sum <= 1e-10, "m = {m}: {}", rep.max_cycle_sum);
            assert!(rep.monotone() && rep.firmly_nonexpansive());
        }
    }

    #[test]
    fn pairwise_case_is_monotonicity() {
        let f = DenoiserSpec::scalar_multiple(-3.0);
        let pts = grid(3);
        let rep = cyclic_monotonicity_probe(&f, &pts, 2, CycleSearch::Exhaustive).unwrap();
        assert_eq!(rep.cycles_checked, 36);
        // A = 4 Id, so the pair sum is -4 ||x1 - x2||^2, largest at grid spacing 1
        assert!((rep.max_cycle_sum + 4.0).abs() < 1e-12);
        assert!(rep.monotone());
    }

    #[test]
    fn quarter_turn_needs_five_points() {
        // A = Id - R(90 deg) is monotone but not cyclically monotone. No triangle
        // witnesses this (that takes a rotation angle below 60 degrees), a
        // regular pentagon does.
        let f = rotation(std::f64::consts::FRAC_PI_2);
        let rep = cyclic_monotonicity_probe(&f, &grid(4), 3, CycleSearch::Exhaustive).unwrap();
        assert!(rep.monotone(), "{}", rep.max_cycle_sum);

        let pentagon = regular_polygon(5);
        let rep = cyclic_monotonicity_probe(&f, &pentagon, 5, CycleSearch::Exhaustive).unwrap();
        assert!(!rep.monotone());
        assert!(rep.max_cycle_sum > 0.1);
        assert_eq!(rep.witness.as_ref().unwrap().len(), 5);
    }

    #[test]
    fn small_rotation_has_violating_triangle() {
        let f = rotation(std::f64::consts::PI / 6.0);
        let rep = cyclic_monotonicity_probe(&f, &grid(4), 3, CycleSearch::Exhaustive).unwrap();
        assert!(!rep.monotone());
        let w = rep.witness.unwrap();
        assert_eq!(w.len(), 3);
        // recompute the witness sum by hand
        let pts = grid(4);
        let a = |x: &ImagePlane| x - &f.denoise(x);
        let sum: f64 = (0..3)
            .map(|k| a(&pts[w[k]]).dot(&(&pts[w[(k + 1) % 3]] - &pts[w[k]])))
            .sum();
        assert!((sum - rep.max_cycle_sum).abs() < 1e-12);
    }

    #[test]
    fn rejects_short_inputs() {
        let f = DenoiserSpec::identity();
        assert!(cyclic_monotonicity_probe(&f, &grid(2), 1, CycleSearch::Exhaustive).is_err());
        assert!(cyclic_monotonicity_probe(&f, &grid(1), 2, CycleSearch::Exhaustive).is_err());
    }
}
