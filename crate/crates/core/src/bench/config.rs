use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::denoise::{DenoiserKind, DenoiserSpec, DEFAULT_PATCH_RADIUS, DEFAULT_SEARCH_RADIUS};
use crate::error::{Error, Result};
use crate::fixpoint::AnchorSchedule;
use crate::forward::{DegradationModel, Kernel};
use crate::solvers::{Algorithm, SolverConfig, StepSchedule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Task {
    DeblurUniform,
    DeblurGaussian,
    Superres,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::DeblurUniform => "deblur_uniform",
            Task::DeblurGaussian => "deblur_gaussian",
            Task::Superres => "superres",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "deblur_uniform" => Ok(Task::DeblurUniform),
            "deblur_gaussian" => Ok(Task::DeblurGaussian),
            "superres" => Ok(Task::Superres),
            other => Err(Error::Config(format!("unknown task `{other}`"))),
        }
    }

    /// 9x9 uniform blur or 9x9 Gaussian blur (std 1.6) with noise sqrt(2);
    /// 7x7 Gaussian blur (std 1.6), decimation by 3, noise 5.
    pub fn model(self) -> DegradationModel {
        let built = match self {
            Task::DeblurUniform => DegradationModel::blur(Kernel::uniform(9).expect("odd size"), 2f64.sqrt()),
            Task::DeblurGaussian => {
                DegradationModel::blur(Kernel::gaussian(9, 1.6).expect("valid kernel"), 2f64.sqrt())
            }
            Task::Superres => {
                DegradationModel::blur_then_decimate(Kernel::gaussian(7, 1.6).expect("valid kernel"), 3, 5.0)
            }
        };
        built.expect("task models are valid")
    }

    /// Denoiser strength and regularization weight used by the presets.
    pub fn nlm_strength_and_lambda(self) -> (f64, f64) {
        match self {
            Task::DeblurUniform => (3.25, 0.02),
            Task::DeblurGaussian => (4.1, 0.01),
            Task::Superres => (3.0, 0.008),
        }
    }
}

pub const PRESET_NAMES: [&str; 13] = [
    "red_fp",
    "red_admm",
    "red_sd",
    "hsd",
    "rrp_fp",
    "rrp_admm",
    "rrp_sd",
    "approx_fp",
    "approx_admm",
    "approx_sd",
    "pnp_pgm",
    "pnp_apgm",
    "pnp_admm",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub algorithm: Algorithm,
    pub denoiser_strength: f64,
    pub solver: SolverConfig,
}

/// Parameter sets for the published comparison, adapted per task.
///
/// Steepest-descent methods use the constant step `2 / (sigma^-2 + lambda)`
/// with `sigma` the noise level; HSD uses `mu_k = 2 sigma^2 (k+1)^-0.1`.
pub fn preset(name: &str, task: Task) -> Result<Preset> {
    let (strength, lambda) = task.nlm_strength_and_lambda();
    let sigma = task.model().noise_sigma;
    let sd_step = StepSchedule::Constant(2.0 / (sigma.powi(-2) + lambda));
    let base = SolverConfig {
        lambda,
        admm_penalty: 0.001,
        admm_inner_x: 200,
        admm_inner_z: 1,
        alpha: 1.0,
        inner_iters: 3,
        delta: 0.0,
        anchor: AnchorSchedule::Harmonic,
        step: sd_step,
        trace_every: 1,
        ..SolverConfig::default()
    };
    let (family, rest) = name.split_once('_').unwrap_or((name, ""));
    let iters = |variant: &str| if variant == "sd" { 1500 } else { 200 };
    let (algorithm, solver) = match (family, rest) {
        ("hsd", "") => (
            Algorithm::Hsd,
            SolverConfig {
                outer_iters: 400,
                alpha: 0.035,
                step: StepSchedule::DiminishingPower {
                    mu0: 2.0 * sigma * sigma,
                    p: 0.1,
                },
                ..base
            },
        ),
        ("red", v @ ("fp" | "admm" | "sd")) => (
            [Algorithm::RedFp, Algorithm::RedAdmm, Algorithm::RedSd][variant_index(v)],
            SolverConfig {
                outer_iters: iters(v),
                ..base
            },
        ),
        ("rrp" | "approx", v @ ("fp" | "admm" | "sd")) => (
            [Algorithm::RelaxedFp, Algorithm::RelaxedAdmm, Algorithm::RelaxedSd][variant_index(v)],
            SolverConfig {
                outer_iters: iters(v),
                delta: if family == "approx" { 1e-4 } else { 0.0 },
                ..base
            },
        ),
        ("pnp", v @ ("pgm" | "apgm")) => (
            if v == "pgm" {
                Algorithm::PnpPgm
            } else {
                Algorithm::PnpApgm
            },
            SolverConfig {
                outer_iters: 200,
                step: StepSchedule::Constant(sigma * sigma),
                ..base
            },
        ),
        ("pnp", "admm") => (
            Algorithm::PnpAdmm,
            SolverConfig {
                outer_iters: 100,
                admm_penalty: 0.05,
                ..base
            },
        ),
        _ => {
            return Err(Error::Config(format!(
                "unknown preset `{name}`; expected one of {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(Preset {
        algorithm,
        denoiser_strength: strength,
        solver,
    })
}

fn variant_index(v: &str) -> usize {
    match v {
        "fp" => 0,
        "admm" => 1,
        _ => 2,
    }
}

/// A fully resolved experiment.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub task: Task,
    pub model: DegradationModel,
    pub images: Vec<PathBuf>,
    pub denoiser: DenoiserSpec,
    pub algorithm: Algorithm,
    pub solver: SolverConfig,
    pub seed: u64,
    pub out_dir: PathBuf,
}

/// Values given on the command line; they take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub preset: Option<String>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub images: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    out: Option<PathBuf>,
    images: Option<Vec<String>>,
    #[serde(default)]
    task: TaskSection,
    denoiser: Option<DenoiserSection>,
    #[serde(default)]
    solver: SolverSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskSection {
    kind: Option<String>,
    noise_sigma: Option<f64>,
    /// `"delta"` replaces the task blur with the identity.
    kernel: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DenoiserSection {
    kind: String,
    strength: Option<f64>,
    patch_radius: Option<usize>,
    search_radius: Option<usize>,
    radius: Option<usize>,
    lower: Option<f64>,
    upper: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverSection {
    preset: Option<String>,
    algorithm: Option<String>,
    outer_iters: Option<usize>,
    alpha: Option<f64>,
    lambda: Option<f64>,
    delta: Option<f64>,
    inner_iters: Option<usize>,
    beta: Option<f64>,
    m1: Option<usize>,
    m2: Option<usize>,
    /// `"constant"` (uses `mu`) or `"diminishing"` (uses `mu0` and `p`).
    step: Option<String>,
    mu: Option<f64>,
    mu0: Option<f64>,
    p: Option<f64>,
    trace_every: Option<usize>,
    cg_tol: Option<f64>,
    distance_shortcut: Option<bool>,
}

impl ExperimentConfig {
    /// Defaults for `task`: the `hsd` preset with NLM, seed 0, output `results`.
    pub fn for_task(task: Task) -> Self {
        let p = preset("hsd", task).expect("built-in preset");
        Self {
            task,
            model: task.model(),
            images: Vec::new(),
            denoiser: DenoiserSpec::nlm(p.denoiser_strength).expect("positive strength"),
            algorithm: p.algorithm,
            solver: p.solver,
            seed: 0,
            out_dir: PathBuf::from("results"),
        }
    }

    /// Reads a TOML config file and applies command-line overrides.
    pub fn load(path: Option<&Path>, task: Task, overrides: &Overrides) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?,
            None => String::new(),
        };
        let base_dir = path.and_then(Path::parent).unwrap_or(Path::new("."));
        Self::from_toml_str(&text, task, overrides, base_dir)
    }

    /// Parses config text. Relative image patterns from the file are resolved
    /// against `base_dir`; patterns given as overrides are used verbatim.
    pub fn from_toml_str(text: &str, task: Task, overrides: &Overrides, base_dir: &Path) -> Result<Self> {
        let file: FileConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(kind) = &file.task.kind {
            let declared = Task::from_name(kind)?;
            if declared != task {
                return Err(Error::Config(format!(
                    "config declares task `{}` but `{}` was requested",
                    declared.name(),
                    task.name()
                )));
            }
        }
        let mut cfg = Self::for_task(task);

        if let Some(sigma) = file.task.noise_sigma {
            cfg.model.noise_sigma = sigma;
        }
        match file.task.kernel.as_deref() {
            None => {}
            Some("delta") => cfg.model.kernel = Kernel::delta(),
            Some(other) => return Err(Error::Config(format!("unknown kernel override `{other}`"))),
        }
        if !(cfg.model.noise_sigma >= 0.0) {
            return Err(Error::Config("noise_sigma must be >= 0".into()));
        }

        let preset_name = overrides
            .preset
            .clone()
            .or(file.solver.preset.clone())
            .unwrap_or_else(|| "hsd".into());
        let p = preset(&preset_name, task)?;
        cfg.algorithm = p.algorithm;
        cfg.solver = p.solver;
        cfg.denoiser = match &file.denoiser {
            Some(section) => section.build(p.denoiser_strength)?,
            None => DenoiserSpec::nlm(p.denoiser_strength)?,
        };
        file.solver.apply(&mut cfg)?;

        cfg.seed = overrides.seed.or(file.seed).unwrap_or(0);
        if let Some(out) = overrides.out_dir.clone().or(file.out) {
            cfg.out_dir = out;
        }
        let patterns: Vec<String> = match &overrides.images {
            Some(p) => vec![p.clone()],
            None => file
                .images
                .unwrap_or_default()
                .into_iter()
                .map(|p| resolve(base_dir, &p))
                .collect(),
        };
        cfg.images = expand_globs(&patterns)?;
        cfg.solver.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }
}

fn resolve(base: &Path, pattern: &str) -> String {
    if Path::new(pattern).is_absolute() {
        pattern.to_string()
    } else {
        base.join(pattern).to_string_lossy().into_owned()
    }
}

/// Expands glob patterns into a sorted, de-duplicated file list.
pub fn expand_globs(patterns: &[String]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for pattern in patterns {
        let paths = glob::glob(pattern).map_err(|e| Error::Config(format!("bad glob `{pattern}`: {e}")))?;
        let mut matched: Vec<PathBuf> = paths.filter_map(|p| p.ok()).filter(|p| p.is_file()).collect();
        if matched.is_empty() {
            return Err(Error::Config(format!("no files match `{pattern}`")));
        }
        matched.sort();
        out.extend(matched);
    }
    out.dedup();
    Ok(out)
}

impl DenoiserSection {
    fn build(&self, preset_strength: f64) -> Result<DenoiserSpec> {
        let strength = self.strength.unwrap_or(preset_strength);
        let spec = match self.kind.as_str() {
            "nlm" => DenoiserSpec::new(
                DenoiserKind::Nlm {
                    patch_radius: self.patch_radius.unwrap_or(DEFAULT_PATCH_RADIUS),
                    search_radius: self.search_radius.unwrap_or(DEFAULT_SEARCH_RADIUS),
                },
                strength,
            )?,
            "median" => DenoiserSpec::median(self.radius.unwrap_or(1)),
            "gaussian" => DenoiserSpec::gaussian(strength)?,
            "box" => DenoiserSpec::box_filter(self.radius.unwrap_or(1)),
            "projection_box" => DenoiserSpec::projection_box(self.lower.unwrap_or(0.0), self.upper.unwrap_or(255.0))?,
            "identity" => DenoiserSpec::identity(),
            other => return Err(Error::Config(format!("unknown denoiser kind `{other}`"))),
        };
        Ok(spec)
    }
}

impl SolverSection {
    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(a) = &self.algorithm {
            cfg.algorithm = Algorithm::from_name(a)?;
        }
        let s = &mut cfg.solver;
        set(&mut s.outer_iters, self.outer_iters);
        set(&mut s.alpha, self.alpha);
        set(&mut s.lambda, self.lambda);
        set(&mut s.delta, self.delta);
        set(&mut s.inner_iters, self.inner_iters);
        set(&mut s.admm_penalty, self.beta);
        set(&mut s.admm_inner_x, self.m1);
        set(&mut s.admm_inner_z, self.m2);
        set(&mut s.trace_every, self.trace_every);
        set(&mut s.cg_tol, self.cg_tol);
        set(&mut s.distance_shortcut, self.distance_shortcut);
        match self.step.as_deref() {
            None => {
                if let Some(mu) = self.mu {
                    s.step = StepSchedule::Constant(mu);
                }
            }
            Some("constant") => {
                let mu = self
                    .mu
                    .ok_or_else(|| Error::Config("constant step needs `mu`".into()))?;
                s.step = StepSchedule::Constant(mu);
            }
            Some("diminishing") => {
                let (mu0, p) = match s.step {
                    StepSchedule::DiminishingPower { mu0, p } => (mu0, p),
                    StepSchedule::Constant(mu) => (mu, 0.1),
                };
                s.step = StepSchedule::DiminishingPower {
                    mu0: self.mu0.unwrap_or(mu0),
                    p: self.p.unwrap_or(p),
                };
            }
            Some(other) => return Err(Error::Config(format!("unknown step kind `{other}`"))),
        }
        Ok(())
    }
}

fn set<T: Copy>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_models_match_protocol() {
        let m = Task::DeblurUniform.model();
        assert_eq!(m.kernel.size(), 9);
        assert!(m.kernel.taps().iter().all(|t| (t - 1.0 / 81.0).abs() < 1e-15));
        assert_eq!(m.factor(), 1);
        assert_eq!(m.noise_sigma, 2f64.sqrt());

        let g = Task::DeblurGaussian.model();
        assert_eq!(g.kernel.size(), 9);
        assert_eq!(g.kernel.taps(), Kernel::gaussian(9, 1.6).unwrap().taps());
        assert_eq!(g.noise_sigma, 2f64.sqrt());

        let s = Task::Superres.model();
        assert_eq!(s.kernel.size(), 7);
        assert_eq!(s.kernel.taps(), Kernel::gaussian(7, 1.6).unwrap().taps());
        assert_eq!(s.factor(), 3);
        assert_eq!(s.noise_sigma, 5.0);
        for m in [m, g, s] {
            assert!((m.kernel.taps().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn table_presets() {
        let t = Task::DeblurUniform;
        let hsd = preset("hsd", t).unwrap();
        assert_eq!(hsd.algorithm, Algorithm::Hsd);
        assert_eq!(hsd.solver.outer_iters, 400);
        assert_eq!(hsd.solver.alpha, 0.035);
        assert_eq!(hsd.denoiser_strength, 3.25);
        assert!(matches!(hsd.solver.step, StepSchedule::DiminishingPower { p, .. } if p == 0.1));

        let expect = [
            ("red_fp", Algorithm::RedFp, 200, 0.0),
            ("red_admm", Algorithm::RedAdmm, 200, 0.0),
            ("red_sd", Algorithm::RedSd, 1500, 0.0),
            ("rrp_fp", Algorithm::RelaxedFp, 200, 0.0),
            ("rrp_admm", Algorithm::RelaxedAdmm, 200, 0.0),
            ("rrp_sd", Algorithm::RelaxedSd, 1500, 0.0),
            ("approx_fp", Algorithm::RelaxedFp, 200, 1e-4),
            ("approx_admm", Algorithm::RelaxedAdmm, 200, 1e-4),
            ("approx_sd", Algorithm::RelaxedSd, 1500, 1e-4),
        ];
        for (name, alg, n, delta) in expect {
            let p = preset(name, t).unwrap();
            assert_eq!(p.algorithm, alg, "{name}");
            assert_eq!(p.solver.outer_iters, n, "{name}");
            assert_eq!(p.solver.delta, delta, "{name}");
            assert_eq!(p.solver.lambda, 0.02);
            assert_eq!(p.solver.admm_penalty, 0.001);
            assert_eq!(p.solver.admm_inner_z, 1);
            assert_eq!(p.solver.alpha, 1.0);
            assert_eq!(p.solver.inner_iters, 3);
            match p.solver.step {
                StepSchedule::Constant(mu) => assert!((mu - 2.0 / (0.5 + 0.02)).abs() < 1e-12),
                other => panic!("{other:?}"),
            }
        }
        for name in PRESET_NAMES {
            for task in [Task::DeblurUniform, Task::DeblurGaussian, Task::Superres] {
                preset(name, task).unwrap().solver.validate().unwrap();
            }
        }
        assert!(preset("red_xx", t).is_err());
        assert!(preset("nope", t).is_err());
    }

    #[test]
    fn task_specific_values() {
        let g = preset("red_sd", Task::DeblurGaussian).unwrap();
        assert_eq!((g.denoiser_strength, g.solver.lambda), (4.1, 0.01));
        let s = preset("red_fp", Task::Superres).unwrap();
        assert_eq!((s.denoiser_strength, s.solver.lambda, s.solver.admm_inner_x), (3.0, 0.008, 200));
    }

    #[test]
    fn toml_overrides() {
        let text = r#"
            seed = 11
            [task]
            kind = "deblur_gaussian"
            noise_sigma = 0.0
            kernel = "delta"
            [denoiser]
            kind = "median"
            radius = 2
            [solver]
            preset = "red_fp"
            outer_iters = 7
            step = "constant"
            mu = 0.5
        "#;
        let cfg = ExperimentConfig::from_toml_str(text, Task::DeblurGaussian, &Overrides::default(), Path::new("."))
            .unwrap();
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.model.noise_sigma, 0.0);
        assert_eq!(cfg.model.kernel, Kernel::delta());
        assert_eq!(cfg.algorithm, Algorithm::RedFp);
        assert_eq!(cfg.solver.outer_iters, 7);
        assert_eq!(cfg.solver.step, StepSchedule::Constant(0.5));
        assert_eq!(cfg.denoiser.name(), "median");

        let over = Overrides {
            preset: Some("approx_sd".into()),
            seed: Some(3),
            ..Default::default()
        };
        let cfg = ExperimentConfig::from_toml_str(text, Task::DeblurGaussian, &over, Path::new(".")).unwrap();
        assert_eq!(cfg.algorithm, Algorithm::RelaxedSd);
        assert_eq!(cfg.solver.delta, 1e-4);
        assert_eq!(cfg.solver.outer_iters, 7);
        assert_eq!(cfg.seed, 3);
    }

    #[test]
    fn config_errors() {
        let none = Overrides::default();
        let here = Path::new(".");
        for text in [
            "[task]\nkind = \"superres\"",
            "bogus = 1",
            "[solver]\npreset = \"nope\"",
            "[solver]\nalpha = 2.0",
            "[denoiser]\nkind = \"bm3d\"",
            "[solver]\nstep = \"constant\"",
            "images = [\"/definitely/not/here/*.png\"]",
        ] {
            assert!(
                matches!(ExperimentConfig::from_toml_str(text, Task::DeblurUniform, &none, here), Err(Error::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn empty_config_gives_defaults() {
        let cfg = ExperimentConfig::from_toml_str("", Task::Superres, &Overrides::default(), Path::new(".")).unwrap();
        assert_eq!(cfg.algorithm, Algorithm::Hsd);
        assert_eq!(cfg.denoiser.strength, 3.0);
        assert!(cfg.images.is_empty());
    }
}
