use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use curvefill::binarize::{binarize, fit_threshold};
use curvefill::morph::adaptive_dilate_iter;
use curvefill::pipeline::write_outputs;
use curvefill::{
    classical_dilate, classical_gaussian_blur, histogram, largest_component, local_gaussian_blur,
    prune, read_binary_image, read_image, run_pipeline, synthesize, thin, write_image, BlurParams,
    Gate, MorphParams, PipelineConfig, PruneParams, SynthSpec, ThresholdMethod,
};

/// Completes broken curve-like structures in grayscale images.
#[derive(Parser)]
#[command(name = "curvefill", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Orientation-adaptive local Gaussian blur
    Blur(BlurArgs),
    /// Histogram thresholding to a binary image
    Threshold(ThresholdArgs),
    /// Covariance-gated elliptical dilation of a binary image
    Morph(MorphArgs),
    /// Thinning, spur pruning and largest-component selection
    Skeleton(SkeletonArgs),
    /// All stages in sequence
    Pipeline(PipelineArgs),
    /// Render a synthetic dashed-curve image from a spec file
    Synth(SynthArgs),
}

#[derive(Args)]
struct Io {
    /// Input image (PGM or PNG)
    #[arg(short, long, value_parser = existing_file)]
    input: PathBuf,

    /// Output image; `.png` writes PNG, anything else binary PGM
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct BlurArgs {
    #[command(flatten)]
    io: Io,

    /// Neighborhood radius
    #[arg(short, long, default_value_t = 15)]
    radius: u32,

    /// Return the raw kernel sum instead of normalizing by kernel mass
    #[arg(long)]
    no_normalize: bool,

    /// Use a fixed isotropic Gaussian with this variance instead
    #[arg(long, value_name = "S")]
    classical: Option<f64>,
}

#[derive(Args)]
struct ThresholdArgs {
    #[command(flatten)]
    io: Io,

    /// cec or otsu
    #[arg(short, long, default_value = "cec")]
    method: ThresholdMethod,

    /// Treat the dark side as foreground
    #[arg(long)]
    invert: bool,
}

#[derive(Args)]
struct MorphArgs {
    #[command(flatten)]
    io: Io,

    #[arg(short, long, default_value_t = 25)]
    radius: u32,

    /// Gate threshold on the axis ratio
    #[arg(short, long, default_value_t = 0.25)]
    alpha: f64,

    /// sqrt (axis ratio) or squared (eigenvalue ratio)
    #[arg(long, default_value = "sqrt")]
    gate: Gate,

    #[arg(long, default_value_t = 1)]
    iterations: u32,

    /// Dilate with a fixed disk of the given radius instead
    #[arg(long)]
    classical: bool,
}

#[derive(Args)]
struct SkeletonArgs {
    #[command(flatten)]
    io: Io,

    /// Longest spur, in pixels, that pruning removes
    #[arg(long, default_value_t = 10)]
    prune_length: usize,

    /// Keep every component instead of only the largest
    #[arg(long)]
    keep_all_components: bool,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(short, long, value_parser = existing_file)]
    input: PathBuf,

    #[arg(short, long)]
    output_dir: Option<PathBuf>,

    /// key = value file with pipeline settings; flags override it
    #[arg(short, long, value_parser = existing_file)]
    config: Option<PathBuf>,

    #[arg(long)]
    blur_radius: Option<u32>,

    #[arg(long)]
    method: Option<ThresholdMethod>,

    #[arg(long)]
    invert: bool,

    #[arg(long)]
    morph_radius: Option<u32>,

    #[arg(long)]
    alpha: Option<f64>,

    #[arg(long)]
    gate: Option<Gate>,

    #[arg(long)]
    iterations: Option<u32>,

    #[arg(long)]
    prune_length: Option<usize>,

    /// Also write 01_blur.pgm .. 05_prune.pgm
    #[arg(long)]
    emit_intermediates: bool,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(short, long, value_parser = existing_file)]
    spec: PathBuf,

    #[arg(short, long)]
    output: PathBuf,
}

fn existing_file(s: &str) -> Result<PathBuf, String> {
    let path = PathBuf::from(s);
    if path.is_file() {
        Ok(path)
    } else {
        Err(format!("no such file: {s}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> curvefill::Result<()> {
    match command {
        Command::Blur(a) => blur(a),
        Command::Threshold(a) => threshold(a),
        Command::Morph(a) => morph(a),
        Command::Skeleton(a) => skeleton(a),
        Command::Pipeline(a) => pipeline(a),
        Command::Synth(a) => synth(&a.spec, &a.output),
    }
}

fn blur(a: BlurArgs) -> curvefill::Result<()> {
    let img = read_image(&a.io.input)?;
    let out = match a.classical {
        Some(s) => classical_gaussian_blur(&img, s, a.radius)?,
        None => {
            let params = BlurParams {
                normalize: !a.no_normalize,
                ..BlurParams::new(a.radius)
            };
            local_gaussian_blur(&img, &params)?
        }
    };
    write_image(&out, &a.io.output)
}

fn threshold(a: ThresholdArgs) -> curvefill::Result<()> {
    let img = read_image(&a.io.input)?;
    let model = fit_threshold(&histogram(&img)?, a.method)?;
    println!(
        "{} threshold {:.6} (cut after bin {})",
        model.method, model.threshold, model.cut_bin
    );
    write_image(&binarize(&img, &model, a.invert), &a.io.output)
}

fn morph(a: MorphArgs) -> curvefill::Result<()> {
    let img = read_binary_image(&a.io.input)?;
    let out = if a.classical {
        let mut out = img;
        for _ in 0..a.iterations {
            out = classical_dilate(&out, a.radius)?;
        }
        out
    } else {
        let params = MorphParams {
            gate: a.gate,
            ..MorphParams::new(a.radius, a.alpha)
        };
        adaptive_dilate_iter(&img, &params, a.iterations)?
    };
    write_image(&out, &a.io.output)
}

fn skeleton(a: SkeletonArgs) -> curvefill::Result<()> {
    let img = read_binary_image(&a.io.input)?;
    let mut out = prune(
        &thin(&img),
        &PruneParams {
            max_spur_length: a.prune_length,
        },
    );
    if !a.keep_all_components {
        out = largest_component(&out);
    }
    write_image(&out, &a.io.output)
}

fn pipeline(a: PipelineArgs) -> curvefill::Result<()> {
    let mut cfg = match &a.config {
        Some(path) => PipelineConfig::from_file(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(dir) = a.output_dir {
        cfg.output_dir = dir;
    }
    if let Some(v) = a.blur_radius {
        cfg.blur_radius = v;
    }
    if let Some(v) = a.method {
        cfg.threshold_method = v;
    }
    cfg.invert |= a.invert;
    if let Some(v) = a.morph_radius {
        cfg.morph_radius = v;
    }
    if let Some(v) = a.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = a.gate {
        cfg.gate = v;
    }
    if let Some(v) = a.iterations {
        cfg.morph_iterations = v;
    }
    if let Some(v) = a.prune_length {
        cfg.prune_length = v;
    }
    cfg.emit_intermediates |= a.emit_intermediates;

    let img = read_image(&a.input)?;
    let out = run_pipeline(&img, &cfg)?;
    for path in write_outputs(&out, &cfg)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn synth(spec: &Path, output: &Path) -> curvefill::Result<()> {
    let img = synthesize(&SynthSpec::from_file(spec)?)?;
    write_image(&img, output)
}
