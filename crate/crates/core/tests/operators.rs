mod common;

use common::*;
use nalgebra::DMatrix;
use redpro::forward::{
    apply_adjoint, apply_forward, degrade, estimate_lipschitz, fidelity_grad, fidelity_prox, fidelity_value, CgOptions,
};
use redpro::image::{psnr, rgb_to_ycbcr, ycbcr_to_rgb};
use redpro::{DegradationModel, Fidelity, FidelityModel, ImagePlane, Kernel, RgbImage};

fn models() -> Vec<DegradationModel> {
    vec![
        DegradationModel::blur(Kernel::uniform(9).unwrap(), 2f64.sqrt()).unwrap(),
        DegradationModel::blur(Kernel::gaussian(5, 1.2).unwrap(), 1.0).unwrap(),
        DegradationModel::blur(
            Kernel::from_weights(3, vec![0.1, 0.3, 0.0, 0.05, 0.4, 0.2, 0.0, 0.15, 0.6]).unwrap(),
            0.5,
        )
        .unwrap(),
        DegradationModel::blur_then_decimate(Kernel::gaussian(7, 1.6).unwrap(), 2, 5.0).unwrap(),
        DegradationModel::blur_then_decimate(Kernel::uniform(3).unwrap(), 4, 1.0).unwrap(),
    ]
}

#[test]
fn forward_matches_dense_direct_summation() {
    for (m, model) in models().into_iter().enumerate() {
        let h = dense_operator(&model, (16, 16));
        for seed in 0..3 {
            let x = random_plane(16, 16, 100 * m as u64 + seed, -1.0, 1.0);
            let fast = apply_forward(&model, &x).unwrap();
            let slow = from_vec(&(&h * to_vec(&x)), fast.dims());
            assert!(rel_err(&fast, &slow) < 1e-10, "model {m}");
        }
    }
}

#[test]
fn adjoint_matches_dense_transpose() {
    for (m, model) in models().into_iter().enumerate() {
        let h = dense_operator(&model, (16, 16));
        let out = model.output_dims((16, 16)).unwrap();
        let r = random_plane(out.0, out.1, 7 + m as u64, -1.0, 1.0);
        let fast = apply_adjoint(&model, &r).unwrap();
        let slow = from_vec(&(h.transpose() * to_vec(&r)), (16, 16));
        assert!(rel_err(&fast, &slow) < 1e-10, "model {m}");
    }
}

#[test]
fn lipschitz_matches_dense_spectrum() {
    for model in models() {
        let h = dense_operator(&model, (16, 16));
        let exact = (h.transpose() * &h).symmetric_eigenvalues().max() / model.noise_sigma.powi(2);
        let est = estimate_lipschitz(&model, (16, 16)).unwrap();
        assert!(est >= exact * (1.0 - 1e-6), "{est} < {exact}");
        assert!(est <= exact * 1.05, "{est} far above {exact}");
    }
}

#[test]
fn fidelity_value_and_gradient_match_dense_forms() {
    for (m, model) in models().into_iter().enumerate() {
        let out = model.output_dims((16, 16)).unwrap();
        let y = random_plane(out.0, out.1, 40 + m as u64, 0.0, 255.0);
        let fm = FidelityModel::new(&model, y.clone()).unwrap();
        let dense = DenseFidelity::new(dense_operator(&model, (16, 16)), to_vec(&y), model.noise_sigma.powi(-2), (16, 16));
        let x = random_plane(16, 16, 50 + m as u64, 0.0, 255.0);
        let v = fidelity_value(&fm, &x).unwrap();
        assert!((v - dense.value(&x)).abs() <= 1e-10 * v);
        assert!(rel_err(&fidelity_grad(&fm, &x).unwrap(), &dense.gradient(&x)) < 1e-10);
    }
}

#[test]
fn prox_matches_dense_solve_both_paths() {
    for (m, model) in models().into_iter().enumerate() {
        let out = model.output_dims((16, 16)).unwrap();
        let y = random_plane(out.0, out.1, 60 + m as u64, 0.0, 255.0);
        let fm = FidelityModel::new(&model, y.clone()).unwrap();
        let dense = DenseFidelity::new(dense_operator(&model, (16, 16)), to_vec(&y), model.noise_sigma.powi(-2), (16, 16));
        let u = random_plane(16, 16, 70 + m as u64, 0.0, 255.0);
        for weight in [0.01, 1.0, 50.0] {
            let oracle = dense.prox(&u, weight, &CgOptions::default()).unwrap();
            let got = fidelity_prox(&fm, &u, weight).unwrap();
            assert!(rel_err(&got, &oracle) < 1e-8, "model {m} weight {weight}");
            let cg = fm.prox_cg(&u, weight, &CgOptions { max_iters: 2000, tol: 1e-13 }).unwrap();
            assert!(rel_err(&cg, &oracle) < 1e-8, "cg model {m} weight {weight}");
        }
    }
}

#[test]
fn degrade_noise_statistics_and_seeding() {
    let model = DegradationModel::blur(Kernel::delta(), 5.0).unwrap();
    let clean = ImagePlane::filled(64, 64, 100.0);
    let a = degrade(&model, &clean, 11).unwrap();
    assert_eq!(a, degrade(&model, &clean, 11).unwrap());
    assert_ne!(a, degrade(&model, &clean, 12).unwrap());
    let n = a.len() as f64;
    let mean = a.mean();
    let var = a.as_slice().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((mean - 100.0).abs() < 4.0 * 5.0 / n.sqrt());
    assert!((var.sqrt() - 5.0).abs() < 0.2);
}

#[test]
fn noiseless_degradation_is_exact_forward() {
    let model = DegradationModel::blur_then_decimate(Kernel::gaussian(7, 1.6).unwrap(), 3, 0.0).unwrap();
    let x = random_plane(12, 9, 3, 0.0, 255.0);
    assert_eq!(degrade(&model, &x, 1).unwrap(), apply_forward(&model, &x).unwrap());
}

#[test]
fn color_round_trip_and_psnr() {
    let img = RgbImage::new(
        random_plane(8, 8, 1, 0.0, 255.0),
        random_plane(8, 8, 2, 0.0, 255.0),
        random_plane(8, 8, 3, 0.0, 255.0),
    )
    .unwrap();
    let (y, cb, cr) = rgb_to_ycbcr(&img);
    let back = ycbcr_to_rgb(&y, &cb, &cr).unwrap();
    for (a, b) in back.channels().iter().zip(img.channels()) {
        assert!(a.max_abs_diff(b) < 1e-9);
    }
    // a constant offset of 1 gives 20 log10(255)
    let shifted = y.map(|v| v + 1.0);
    assert!((psnr(&shifted, &y).unwrap() - 20.0 * 255f64.log10()).abs() < 1e-12);
    assert_eq!(psnr(&y, &y).unwrap(), f64::INFINITY);
}

#[test]
fn dense_oracle_self_check() {
    // the oracle itself: a delta kernel is the identity, decimation picks pixels
    let id = dense_operator(&DegradationModel::blur(Kernel::delta(), 1.0).unwrap(), (3, 4));
    assert_eq!(id, DMatrix::identity(12, 12));
    let dec = dense_operator(&DegradationModel::blur_then_decimate(Kernel::delta(), 2, 1.0).unwrap(), (4, 4));
    assert_eq!(dec.nrows(), 4);
    for (row, col) in [(0, 0), (1, 2), (2, 8), (3, 10)] {
        assert_eq!(dec[(row, col)], 1.0);
    }
}
