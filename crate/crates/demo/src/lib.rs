//! WebAssembly bindings for the browser demo in `www/`.

use redpro::bench::{preset, Task};
use redpro::fixpoint::{halpern_project, project_dilated, HalpernConfig};
use redpro::forward::degrade;
use redpro::image::{psnr, upsample_bicubic};
use redpro::solvers::{solve, SolveOptions};
use redpro::{DenoiserSpec, FidelityModel, ImagePlane};
use wasm_bindgen::prelude::*;

fn js_err(e: redpro::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Piecewise smooth test scene: a shaded background, a disc, a bar and a ramp.
pub fn synthetic_scene(size: usize) -> ImagePlane {
    let s = size as f64;
    ImagePlane::from_fn(size, size, |r, c| {
        let (y, x) = (r as f64 / s, c as f64 / s);
        let mut v = 60.0 + 40.0 * x;
        if (x - 0.35).powi(2) + (y - 0.4).powi(2) < 0.04 {
            v = 210.0;
        }
        if (0.6..0.8).contains(&x) && (0.15..0.85).contains(&y) {
            v = 30.0;
        }
        if y > 0.75 && x < 0.55 {
            v = 120.0 + 200.0 * (x - 0.3).abs();
        }
        v
    })
}

#[wasm_bindgen]
pub struct Restoration {
    size: usize,
    clean: Vec<u8>,
    degraded: Vec<u8>,
    restored: Vec<u8>,
    degraded_psnr: f64,
    restored_psnr: f64,
    psnr_trace: Vec<f64>,
}

fn to_rgba(x: &ImagePlane) -> Vec<u8> {
    x.as_slice()
        .iter()
        .flat_map(|&v| {
            let g = v.round().clamp(0.0, 255.0) as u8;
            [g, g, g, 255]
        })
        .collect()
}

#[wasm_bindgen]
impl Restoration {
    #[wasm_bindgen(getter)]
    pub fn size(&self) -> usize {
        self.size
    }
    /// RGBA bytes, ready for `ImageData`.
    pub fn clean(&self) -> Vec<u8> {
        self.clean.clone()
    }
    pub fn degraded(&self) -> Vec<u8> {
        self.degraded.clone()
    }
    pub fn restored(&self) -> Vec<u8> {
        self.restored.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn degraded_psnr(&self) -> f64 {
        self.degraded_psnr
    }
    #[wasm_bindgen(getter)]
    pub fn restored_psnr(&self) -> f64 {
        self.restored_psnr
    }
    pub fn psnr_trace(&self) -> Vec<f64> {
        self.psnr_trace.clone()
    }
}

/// Blurs and corrupts the synthetic scene with the given task's model, then
/// restores it with a named preset and denoiser (`median`, `box` or `nlm`).
#[wasm_bindgen]
pub fn restore(task: &str, preset_name: &str, denoiser: &str, iters: usize, seed: u64) -> Result<Restoration, JsError> {
    let task = Task::from_name(task).map_err(js_err)?;
    let p = preset(preset_name, task).map_err(js_err)?;
    let f = match denoiser {
        "median" => DenoiserSpec::median(1),
        "box" => DenoiserSpec::box_filter(1),
        "nlm" => DenoiserSpec::nlm(p.denoiser_strength).map_err(js_err)?,
        other => return Err(JsError::new(&format!("unknown denoiser `{other}`"))),
    };
    let size = 48;
    let clean = synthetic_scene(size);
    let model = task.model();
    let y = degrade(&model, &clean, seed).map_err(js_err)?;
    let fm = FidelityModel::new(&model, y.clone()).map_err(js_err)?;
    let x0 = match model.factor() {
        1 => y,
        q => upsample_bicubic(&y, q),
    };
    let mut cfg = p.solver;
    cfg.outer_iters = iters;
    let sol = solve(p.algorithm, &fm, &f, &cfg, &x0, SolveOptions::with_ground_truth(&clean)).map_err(js_err)?;
    let restored = sol.x.clamped(0.0, 255.0);
    Ok(Restoration {
        size,
        degraded_psnr: psnr(&x0.clamped(0.0, 255.0), &clean).map_err(js_err)?,
        restored_psnr: psnr(&restored, &clean).map_err(js_err)?,
        psnr_trace: sol.trace.records.iter().filter_map(|r| r.psnr).collect(),
        clean: to_rgba(&clean),
        degraded: to_rgba(&x0),
        restored: to_rgba(&restored),
    })
}

/// Halpern iterates toward the projection of `(x, y)` onto the halfspace
/// `{p : <n, p> <= offset}`, as a flat `[x0, y0, x1, y1, ...]` list. The last
/// pair is the exact projection.
#[wasm_bindgen]
pub fn halpern_path(nx: f64, ny: f64, offset: f64, x: f64, y: f64, alpha: f64, steps: usize) -> Result<Vec<f64>, JsError> {
    let f = DenoiserSpec::projection_halfspace(vec![nx, ny], offset).map_err(js_err)?;
    let start = ImagePlane::new(1, 2, vec![x, y]).map_err(js_err)?;
    let mut path = vec![x, y];
    for j in 1..=steps {
        let cfg = HalpernConfig {
            alpha,
            max_inner: j,
            ..Default::default()
        };
        let (p, _) = halpern_project(&f, &start, &cfg).map_err(js_err)?;
        path.extend_from_slice(p.as_slice());
    }
    let excess = (nx * x + ny * y - offset).max(0.0) / (nx * nx + ny * ny);
    path.extend([x - excess * nx, y - excess * ny]);
    Ok(path)
}

/// Projection of `(x, y)` onto the square `[lower, upper]^2` and onto its
/// `delta`-dilation, as `[px, py, dx, dy]`.
#[wasm_bindgen]
pub fn dilated_box_projection(x: f64, y: f64, lower: f64, upper: f64, delta: f64) -> Result<Vec<f64>, JsError> {
    let f = DenoiserSpec::projection_box(lower, upper).map_err(js_err)?;
    let pt = ImagePlane::new(1, 2, vec![x, y]).map_err(js_err)?;
    let cfg = HalpernConfig {
        alpha: 1.0,
        max_inner: 2000,
        ..Default::default()
    };
    let d = project_dilated(&f, &pt, delta, &cfg).map_err(js_err)?;
    let p = pt.clamped(lower, upper);
    Ok(vec![p.get(0, 0), p.get(0, 1), d.get(0, 0), d.get(0, 1)])
}
