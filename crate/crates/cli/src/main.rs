use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use redpro::bench::{
    emit_convergence_plots, expand_globs, run_experiment, run_probe_suite, ExperimentConfig, Overrides,
    SampleSource, Task, PRESET_NAMES,
};

#[derive(Parser)]
#[command(name = "redpro", version, about = "Image restoration with denoiser fixed-point regularization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Parameter preset; see `--preset help`.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Glob of input PNG images.
    #[arg(long)]
    images: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Blur {
    Uniform,
    Gaussian,
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    DeblurUniform,
    DeblurGaussian,
    Superres,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::DeblurUniform => Task::DeblurUniform,
            TaskArg::DeblurGaussian => Task::DeblurGaussian,
            TaskArg::Superres => Task::Superres,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Deblur images and write restored PNGs, traces and a summary CSV.
    Deblur {
        #[arg(long, value_enum, default_value_t = Blur::Uniform)]
        blur: Blur,
        #[command(flatten)]
        common: Common,
    },
    /// 3x super-resolution of images.
    Superres {
        #[command(flatten)]
        common: Common,
    },
    /// Estimate the demicontractivity of the configured denoiser and run the operator probes.
    Probe {
        #[command(flatten)]
        common: Common,
        /// Task whose config section and denoiser defaults apply.
        #[arg(long, value_enum, default_value_t = TaskArg::DeblurUniform)]
        task: TaskArg,
        /// Side of the square luminance patches drawn from the images.
        #[arg(long, default_value_t = 16)]
        patch: usize,
        /// Number of samples.
        #[arg(long, default_value_t = 50)]
        count: usize,
    },
    /// Turn trace CSVs into relative fidelity and fixed-point residual series.
    Plotdata {
        /// Trace files or glob patterns.
        #[arg(required = true)]
        traces: Vec<String>,
        #[arg(long, default_value = "plots")]
        out: PathBuf,
    },
}

fn overrides(common: &Common) -> Result<Overrides> {
    if common.preset.as_deref() == Some("help") {
        bail!("available presets: {}", PRESET_NAMES.join(", "));
    }
    Ok(Overrides {
        preset: common.preset.clone(),
        seed: common.seed,
        out_dir: common.out.clone(),
        images: common.images.clone(),
    })
}

fn restore(task: Task, common: &Common) -> Result<ExitCode> {
    let cfg = ExperimentConfig::load(common.config.as_deref(), task, &overrides(common)?)?;
    if cfg.images.is_empty() {
        bail!("no input images; pass --images or set `images` in the config");
    }
    println!(
        "{}: {} with {} on {} image(s), {} iterations",
        task.name(),
        cfg.algorithm.name(),
        cfg.denoiser.name(),
        cfg.images.len(),
        cfg.solver.outer_iters
    );
    let result = run_experiment(&cfg)?;
    let mut diverged = false;
    for (row, outcome) in result.rows.iter().zip(&result.outcomes) {
        match (row.restored_psnr, &outcome.error) {
            (Some(p), _) => println!(
                "  {:<24} {:>7.2} dB -> {:>7.2} dB  ({:.1} s)",
                row.image, row.degraded_psnr, p, row.seconds
            ),
            (None, err) => {
                diverged = true;
                println!(
                    "  {:<24} {:>7.2} dB -> {}",
                    row.image,
                    row.degraded_psnr,
                    err.as_deref().unwrap_or("no result")
                );
            }
        }
    }
    println!("summary written to {}", result.summary_csv.display());
    Ok(if diverged { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn probe(common: &Common, task: Task, patch: usize, count: usize) -> Result<ExitCode> {
    let cfg = ExperimentConfig::load(common.config.as_deref(), task, &overrides(common)?)?;
    let source = if cfg.images.is_empty() {
        SampleSource::Uniform {
            height: patch,
            width: patch,
            count,
            low: 0.0,
            high: 255.0,
        }
    } else {
        SampleSource::Images {
            paths: cfg.images.clone(),
            patch,
            count,
        }
    };
    let res = run_probe_suite(&cfg.denoiser, &source, cfg.seed, &cfg.out_dir)?;
    println!("denoiser {}: {} fixed point(s) found", cfg.denoiser.name(), res.fixed_points);
    println!("  d_hat = {:.6}", res.estimate.d_hat);
    if let Some(alpha) = res.alpha {
        println!("  alpha = {alpha:.6}");
    }
    for r in &res.reports {
        println!(
            "  {:<28} {:>5} rows  {:>5} violations  min slack {:.3e}",
            r.probe,
            r.rows.len(),
            r.violations,
            r.min_slack()
        );
    }
    if let Some(c) = &res.cyclic {
        println!(
            "  {:<28} {:>5} cycles  max cycle sum {:.3e}  {}",
            "cyclic_monotonicity",
            c.cycles_checked,
            c.max_cycle_sum,
            if c.monotone() { "monotone" } else { "not monotone" }
        );
    }
    for note in &res.notes {
        println!("  note: {note}");
    }
    println!("summary written to {}", res.summary_csv.display());
    Ok(ExitCode::SUCCESS)
}

fn plotdata(traces: &[String], out: &std::path::Path) -> Result<ExitCode> {
    let paths = expand_globs(traces)?;
    let files = emit_convergence_plots(&paths, out).context("writing plot data")?;
    for f in files {
        println!("{}", f.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = match &cli.command {
        Command::Deblur { blur, common } => {
            let task = match blur {
                Blur::Uniform => Task::DeblurUniform,
                Blur::Gaussian => Task::DeblurGaussian,
            };
            restore(task, common)
        }
        Command::Superres { common } => restore(Task::Superres, common),
        Command::Probe {
            common,
            task,
            patch,
            count,
        } => probe(common, (*task).into(), *patch, *count),
        Command::Plotdata { traces, out } => plotdata(traces, out),
    };
    match run {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
