//! Command-line interface for the candling pipeline.
//!
//! Exit codes: 0 success, 1 usage error, 2 processing error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use candleseg::colorspace::{rgb_to_gray, rgb_to_lab, WhitePoint};
use candleseg::enhance::{clahe, equalize, ClaheParams};
use candleseg::error::Error;
use candleseg::io::{load_image, save_image};
use candleseg::kmeans::{FeatureMode, KmeansOptions};
use candleseg::metrics::{evaluate_gray, MetricsReport, MseScale, SsimParams};
use candleseg::morphology::{binarize_otsu, canny, dilate, thicken, CannyParams, Strel};
use candleseg::phantom::egg_phantom;
use candleseg::pipeline::{
    self, cluster_map_image, composite_retained, lab_visualization, load_config, run_pipeline,
    PipelineConfig, Retain, StrelSpec,
};
use candleseg::segment::segment_lab;

#[derive(Parser)]
#[command(
    name = "candleseg",
    version,
    about = "Embryo detection in candled egg images: Lab k-means segmentation,\n\
             grayscale enhancement, morphology, edge detection and metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full two-phase pipeline, writing per-stage artifacts
    Pipeline(PipelineArgs),
    /// Convert an image to Lab and write the plane visualization
    Lab(LabArgs),
    /// K-means segmentation in Lab space
    Segment(SegmentArgs),
    /// Weighted grayscale conversion
    Gray(GrayArgs),
    /// Histogram equalization and CLAHE
    Enhance(EnhanceArgs),
    /// Binarize, dilate and thicken
    Morph(MorphArgs),
    /// Canny edge detection
    Edges(EdgesArgs),
    /// MSE and SSIM between two images
    Metrics(MetricsArgs),
    /// Emit the synthetic egg phantom test image
    Phantom(PhantomArgs),
}

fn parse_strel_arg(value: &str) -> Result<StrelSpec, String> {
    pipeline::parse_strel(value).ok_or_else(|| format!("expected line:<len>:<deg>, got {value}"))
}

fn parse_tiles_arg(value: &str) -> Result<(u32, u32), String> {
    pipeline::parse_tiles(value).ok_or_else(|| format!("expected WxH, got {value}"))
}

fn parse_scale_arg(value: &str) -> Result<MseScaleArg, String> {
    match value {
        "unit" => Ok(MseScaleArg(MseScale::Unit)),
        "byte" => Ok(MseScaleArg(MseScale::Byte)),
        _ => Err(format!("expected unit or byte, got {value}")),
    }
}

#[derive(Clone, Copy)]
struct MseScaleArg(MseScale);

fn parse_feature_mode(value: &str) -> Result<FeatureModeArg, String> {
    match value {
        "lab" => Ok(FeatureModeArg(FeatureMode::Lab)),
        "ab" => Ok(FeatureModeArg(FeatureMode::Ab)),
        _ => Err(format!("expected lab or ab, got {value}")),
    }
}

#[derive(Clone, Copy)]
struct FeatureModeArg(FeatureMode);

fn parse_retain(value: &str) -> Result<RetainArg, String> {
    match value {
        "background" => Ok(RetainArg(Retain::Background)),
        "egg" => Ok(RetainArg(Retain::Egg)),
        "yolk" => Ok(RetainArg(Retain::Yolk)),
        "all" => Ok(RetainArg(Retain::All)),
        _ => Err(format!("expected background, egg, yolk or all, got {value}")),
    }
}

#[derive(Clone, Copy)]
struct RetainArg(Retain);

#[derive(Args)]
struct PipelineArgs {
    /// Input image (or directory with --batch); may also come from --config
    input: Option<PathBuf>,
    /// Output directory for stage artifacts and report.json
    #[arg(long = "out")]
    out: Option<PathBuf>,
    /// Key-value configuration file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Treat INPUT as a directory and process every image inside
    #[arg(long)]
    batch: bool,
    #[arg(long)]
    crop: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "feature-mode", value_parser = parse_feature_mode)]
    feature_mode: Option<FeatureModeArg>,
    #[arg(long, value_parser = parse_retain)]
    retain: Option<RetainArg>,
    #[command(flatten)]
    enhance: EnhanceFlags,
    #[command(flatten)]
    morph: MorphFlags,
    #[command(flatten)]
    edge: EdgeFlags,
    #[arg(long = "mse-scale", value_parser = parse_scale_arg)]
    mse_scale: Option<MseScaleArg>,
    /// Disable histogram equalization
    #[arg(long = "no-he")]
    no_he: bool,
    /// Disable CLAHE
    #[arg(long = "no-clahe")]
    no_clahe: bool,
    /// Disable dilation
    #[arg(long = "no-dilate")]
    no_dilate: bool,
    /// Disable thickening
    #[arg(long = "no-thicken")]
    no_thicken: bool,
    /// Disable edge detection
    #[arg(long = "no-edges")]
    no_edges: bool,
}

#[derive(Args)]
struct EnhanceFlags {
    /// CLAHE tile grid, e.g. 8x8
    #[arg(long = "clahe-tiles", value_parser = parse_tiles_arg)]
    clahe_tiles: Option<(u32, u32)>,
    /// CLAHE clip factor in [0, 100]
    #[arg(long = "clahe-alpha")]
    clahe_alpha: Option<f64>,
    /// CLAHE maximum slope
    #[arg(long = "clahe-smax")]
    clahe_smax: Option<f64>,
}

#[derive(Args)]
struct MorphFlags {
    /// Line structuring element, line:<len>:<deg>
    #[arg(long, value_parser = parse_strel_arg)]
    strel: Option<StrelSpec>,
    /// Thickening passes over the template family
    #[arg(long = "thicken-passes")]
    thicken_passes: Option<usize>,
}

#[derive(Args)]
struct EdgeFlags {
    #[arg(long = "canny-sigma")]
    canny_sigma: Option<f64>,
    #[arg(long = "canny-low")]
    canny_low: Option<f64>,
    #[arg(long = "canny-high")]
    canny_high: Option<f64>,
    /// Minimum edge component size kept by cleanup
    #[arg(long = "min-edge-size")]
    min_edge_size: Option<usize>,
}

#[derive(Args)]
struct LabArgs {
    input: PathBuf,
    /// Output directory (writes lab.png)
    #[arg(long = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SegmentArgs {
    input: PathBuf,
    /// Output directory (cluster_map.png, cluster_N.png, color_segmented.png)
    #[arg(long = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long = "feature-mode", value_parser = parse_feature_mode)]
    feature_mode: Option<FeatureModeArg>,
    #[arg(long, value_parser = parse_retain)]
    retain: Option<RetainArg>,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long = "max-iters", default_value_t = 100)]
    max_iters: usize,
}

#[derive(Args)]
struct GrayArgs {
    input: PathBuf,
    /// Output file
    #[arg(long = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct EnhanceArgs {
    input: PathBuf,
    /// Output directory (he.png, clahe.png)
    #[arg(long = "out")]
    out: PathBuf,
    #[command(flatten)]
    flags: EnhanceFlags,
    #[arg(long = "no-he")]
    no_he: bool,
    #[arg(long = "no-clahe")]
    no_clahe: bool,
}

#[derive(Args)]
struct MorphArgs {
    input: PathBuf,
    /// Output directory (bw.png, dilate.png, thicken.png)
    #[arg(long = "out")]
    out: PathBuf,
    #[command(flatten)]
    flags: MorphFlags,
    #[arg(long = "no-dilate")]
    no_dilate: bool,
    #[arg(long = "no-thicken")]
    no_thicken: bool,
}

#[derive(Args)]
struct EdgesArgs {
    input: PathBuf,
    /// Output file
    #[arg(long = "out")]
    out: PathBuf,
    #[command(flatten)]
    flags: EdgeFlags,
}

#[derive(Args)]
struct MetricsArgs {
    a: PathBuf,
    b: PathBuf,
    #[arg(long, value_parser = parse_scale_arg)]
    scale: Option<MseScaleArg>,
    #[arg(long = "ssim-window")]
    ssim_window: Option<usize>,
    #[arg(long = "ssim-sigma")]
    ssim_sigma: Option<f64>,
    /// Also write the report to this file
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct PhantomArgs {
    /// Output file
    #[arg(long = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 582)]
    width: u32,
    #[arg(long, default_value_t = 778)]
    height: u32,
    /// Also write ground-truth region masks into this directory
    #[arg(long = "truth-dir")]
    truth_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Pipeline(args) => cmd_pipeline(args),
        Command::Lab(args) => cmd_lab(args),
        Command::Segment(args) => cmd_segment(args),
        Command::Gray(args) => cmd_gray(args),
        Command::Enhance(args) => cmd_enhance(args),
        Command::Morph(args) => cmd_morph(args),
        Command::Edges(args) => cmd_edges(args),
        Command::Metrics(args) => cmd_metrics(args),
        Command::Phantom(args) => cmd_phantom(args),
    }
}

fn build_pipeline_config(args: &PipelineArgs) -> Result<PipelineConfig, Error> {
    let mut config = match &args.config {
        Some(path) => load_config(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(input) = &args.input {
        config.input = input.clone();
    }
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    if let Some(crop) = &args.crop {
        config.crop = Some(pipeline::parse_rect(crop).ok_or_else(|| Error::InvalidConfig {
            message: format!("--crop expects x0,y0,w,h, got {crop}"),
        })?);
    }
    if let Some(k) = args.k {
        config.k = k;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(FeatureModeArg(mode)) = args.feature_mode {
        config.feature_mode = mode;
    }
    if let Some(RetainArg(retain)) = args.retain {
        config.retain = retain;
    }
    if let Some((tx, ty)) = args.enhance.clahe_tiles {
        config.clahe.tiles_x = tx;
        config.clahe.tiles_y = ty;
    }
    if let Some(alpha) = args.enhance.clahe_alpha {
        config.clahe.clip_alpha = alpha;
    }
    if let Some(smax) = args.enhance.clahe_smax {
        config.clahe.s_max = smax;
    }
    if let Some(strel) = args.morph.strel {
        config.strel = strel;
    }
    if let Some(passes) = args.morph.thicken_passes {
        config.thicken_passes = passes;
    }
    if let Some(sigma) = args.edge.canny_sigma {
        config.canny.gaussian_sigma = sigma;
    }
    if let Some(low) = args.edge.canny_low {
        config.canny.low_ratio = low;
    }
    if let Some(high) = args.edge.canny_high {
        config.canny.high_ratio = high;
    }
    if let Some(min) = args.edge.min_edge_size {
        config.canny.min_edge_size = min;
    }
    if let Some(MseScaleArg(scale)) = args.mse_scale {
        config.mse_scale = scale;
    }
    config.stages.he &= !args.no_he;
    config.stages.clahe &= !args.no_clahe;
    config.stages.dilate &= !args.no_dilate;
    config.stages.thicken &= !args.no_thicken;
    config.stages.edges &= !args.no_edges;
    Ok(config)
}

fn cmd_pipeline(args: PipelineArgs) -> Result<(), Error> {
    let config = build_pipeline_config(&args)?;
    if args.batch {
        return run_batch(&config);
    }
    let (artifacts, report) = run_pipeline(&config)?;
    for artifact in &artifacts {
        println!(
            "{:<16} {:>8.1} ms  {}",
            artifact.stage,
            artifact.wall_ms,
            artifact.path.display()
        );
    }
    println!("mse = {:.6}, mssim = {:.6}", report.mse, report.mssim);
    Ok(())
}

/// Batch mode: run every image in the input directory, one output
/// subdirectory per image. `CANDLESEG_THREADS` caps the worker count.
fn run_batch(config: &PipelineConfig) -> Result<(), Error> {
    let dir = &config.input;
    let entries = std::fs::read_dir(dir).map_err(|e| Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let mut inputs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some("png" | "ppm" | "pgm")
            )
        })
        .collect();
    inputs.sort();
    if inputs.is_empty() {
        return Err(Error::InvalidConfig {
            message: format!("no .png/.ppm/.pgm images in {}", dir.display()),
        });
    }

    let threads = std::env::var("CANDLESEG_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
        .min(inputs.len());

    let next = std::sync::atomic::AtomicUsize::new(0);
    let failures = std::sync::Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                let Some(input) = inputs.get(i) else { break };
                let stem = input
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| format!("image_{i}"));
                let mut per_image = config.clone();
                per_image.input = input.clone();
                per_image.output_dir = config.output_dir.join(stem);
                match run_pipeline(&per_image) {
                    Ok((_, report)) => {
                        println!(
                            "{}: mse = {:.6}, mssim = {:.6}",
                            input.display(),
                            report.mse,
                            report.mssim
                        );
                    }
                    Err(err) => {
                        failures
                            .lock()
                            .unwrap()
                            .push(format!("{}: {err}", input.display()));
                    }
                }
            });
        }
    });
    let failures = failures.into_inner().unwrap();
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidConfig {
            message: format!("{} image(s) failed:\n{}", failures.len(), failures.join("\n")),
        })
    }
}

fn ensure_dir(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn cmd_lab(args: LabArgs) -> Result<(), Error> {
    let img = load_image(&args.input)?;
    let lab = rgb_to_lab(&img, &WhitePoint::d65());
    ensure_dir(&args.out)?;
    save_image(&lab_visualization(&lab), &args.out.join("lab.png"))
}

fn cmd_segment(args: SegmentArgs) -> Result<(), Error> {
    let img = load_image(&args.input)?;
    let lab = rgb_to_lab(&img, &WhitePoint::d65());
    let opts = KmeansOptions {
        max_iters: args.max_iters,
        tol: args.tol,
    };
    let mode = args.feature_mode.map(|m| m.0).unwrap_or(FeatureMode::Lab);
    let seg = segment_lab(&lab, args.k, args.seed, opts, mode)?;
    ensure_dir(&args.out)?;
    save_image(&cluster_map_image(&seg), &args.out.join("cluster_map.png"))?;
    for (j, mask) in seg.cluster_masks.iter().enumerate() {
        save_image(mask, &args.out.join(format!("cluster_{}.png", j + 1)))?;
    }
    let retain = args.retain.map(|r| r.0).unwrap_or(Retain::Yolk);
    let composite = composite_retained(&img, &seg, retain);
    save_image(&composite, &args.out.join("color_segmented.png"))?;
    for region in [
        candleseg::segment::Region::Background,
        candleseg::segment::Region::Egg,
        candleseg::segment::Region::Yolk,
    ] {
        println!(
            "{}: cluster {} (mean L* = {:.2})",
            region.name(),
            seg.region_assignment.cluster_for(region),
            seg.cluster_mean_l[seg.region_assignment.cluster_for(region)]
        );
    }
    Ok(())
}

fn cmd_gray(args: GrayArgs) -> Result<(), Error> {
    let img = load_image(&args.input)?;
    save_image(&rgb_to_gray(&img), &args.out)
}

fn cmd_enhance(args: EnhanceArgs) -> Result<(), Error> {
    let gray = rgb_to_gray(&load_image(&args.input)?);
    let mut params = ClaheParams::default();
    if let Some((tx, ty)) = args.flags.clahe_tiles {
        params.tiles_x = tx;
        params.tiles_y = ty;
    }
    if let Some(alpha) = args.flags.clahe_alpha {
        params.clip_alpha = alpha;
    }
    if let Some(smax) = args.flags.clahe_smax {
        params.s_max = smax;
    }
    ensure_dir(&args.out)?;
    let mut current = gray;
    if !args.no_he {
        current = equalize(&current);
        save_image(&current, &args.out.join("he.png"))?;
    }
    if !args.no_clahe {
        current = clahe(&current, &params)?;
        save_image(&current, &args.out.join("clahe.png"))?;
    }
    Ok(())
}

fn cmd_morph(args: MorphArgs) -> Result<(), Error> {
    let gray = rgb_to_gray(&load_image(&args.input)?);
    ensure_dir(&args.out)?;
    let mut mask = binarize_otsu(&gray);
    save_image(&mask, &args.out.join("bw.png"))?;
    if !args.no_dilate {
        let spec = args.flags.strel.unwrap_or_default();
        mask = dilate(&mask, &Strel::line(spec.length, spec.angle_degrees));
        save_image(&mask, &args.out.join("dilate.png"))?;
    }
    if !args.no_thicken {
        mask = thicken(&mask, args.flags.thicken_passes.unwrap_or(1));
        save_image(&mask, &args.out.join("thicken.png"))?;
    }
    Ok(())
}

fn cmd_edges(args: EdgesArgs) -> Result<(), Error> {
    let gray = rgb_to_gray(&load_image(&args.input)?);
    let mut params = CannyParams::default();
    if let Some(sigma) = args.flags.canny_sigma {
        params.gaussian_sigma = sigma;
    }
    if let Some(low) = args.flags.canny_low {
        params.low_ratio = low;
    }
    if let Some(high) = args.flags.canny_high {
        params.high_ratio = high;
    }
    if let Some(min) = args.flags.min_edge_size {
        params.min_edge_size = min;
    }
    params.validate()?;
    save_image(&canny(&gray, &params), &args.out)
}

fn report_json(report: &MetricsReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes") + "\n"
}

fn cmd_metrics(args: MetricsArgs) -> Result<(), Error> {
    let a = rgb_to_gray(&load_image(&args.a)?);
    let b = rgb_to_gray(&load_image(&args.b)?);
    let scale = args.scale.map(|s| s.0).unwrap_or(MseScale::Unit);
    let mut params = SsimParams::default();
    if let Some(window) = args.ssim_window {
        params.window = window;
    }
    if let Some(sigma) = args.ssim_sigma {
        params.sigma = sigma;
    }
    let report = evaluate_gray(&a, &b, scale, &params)?;
    let json = report_json(&report);
    print!("{json}");
    if let Some(path) = &args.json {
        std::fs::write(path, &json).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
    }
    Ok(())
}

fn cmd_phantom(args: PhantomArgs) -> Result<(), Error> {
    let (img, truth) = egg_phantom(args.width, args.height);
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    save_image(&img, &args.out)?;
    if let Some(dir) = &args.truth_dir {
        ensure_dir(dir)?;
        save_image(&truth.background, &dir.join("truth_background.png"))?;
        save_image(&truth.egg, &dir.join("truth_egg.png"))?;
        save_image(&truth.yolk, &dir.join("truth_yolk.png"))?;
    }
    Ok(())
}
