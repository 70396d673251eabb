//! Two-phase pipeline orchestration, configuration and stage artifacts.
//!
//! Phase one works in color: optional crop, Lab conversion, k-means
//! segmentation and a composite keeping the retained region. Phase two works
//! in grayscale: weighted gray conversion, HE, CLAHE, Otsu binarization,
//! dilation, thickening and Canny edges. The report compares the binarized
//! pre-enhancement grayscale against the last enabled mask stage.
//!
//! Every enabled stage writes exactly one artifact named
//! `NN_<stage>.png` with a fixed per-stage index, plus `report.json`;
//! identical configurations produce byte-identical artifact trees.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::colorspace::{rgb_to_gray, rgb_to_lab, LabImage, WhitePoint};
use crate::enhance::{clahe, equalize, ClaheParams};
use crate::error::{Error, Result};
use crate::io::save_image;
use crate::kmeans::{FeatureMode, KmeansOptions};
use crate::metrics::{evaluate_masks, MetricsReport, MseScale, SsimParams};
use crate::morphology::{binarize_otsu, canny, dilate, thicken, CannyParams, Strel};
use crate::raster::{GrayImage, RasterImage, Rect};
use crate::segment::{segment_lab, Region, SegmentationResult};

/// Which segmented region feeds the grayscale phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Retain {
    Background,
    Egg,
    Yolk,
    All,
}

/// Line structuring element specification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrelSpec {
    pub length: u32,
    pub angle_degrees: f64,
}

impl Default for StrelSpec {
    fn default() -> Self {
        // The reference configuration: a length-1 line at 45 degrees, which
        // degenerates to an identity dilation. Kept as the default on
        // purpose; longer strels are available through configuration.
        StrelSpec {
            length: 1,
            angle_degrees: 45.0,
        }
    }
}

/// Per-stage enable flags for the optional stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageToggles {
    pub he: bool,
    pub clahe: bool,
    pub dilate: bool,
    pub thicken: bool,
    pub edges: bool,
}

impl Default for StageToggles {
    fn default() -> Self {
        StageToggles {
            he: true,
            clahe: true,
            dilate: true,
            thicken: true,
            edges: true,
        }
    }
}

/// Full pipeline configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub output_dir: PathBuf,
    pub crop: Option<Rect>,
    pub k: usize,
    pub seed: u64,
    pub kmeans_tol: f64,
    pub kmeans_max_iters: usize,
    pub feature_mode: FeatureMode,
    pub white_point: WhitePoint,
    pub retain: Retain,
    pub clahe: ClaheParams,
    pub strel: StrelSpec,
    pub thicken_passes: usize,
    pub canny: CannyParams,
    pub ssim: SsimParams,
    pub mse_scale: MseScale,
    pub stages: StageToggles,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: PathBuf::new(),
            output_dir: PathBuf::new(),
            crop: None,
            k: 3,
            seed: 42,
            kmeans_tol: 1e-4,
            kmeans_max_iters: 100,
            feature_mode: FeatureMode::Lab,
            white_point: WhitePoint::d65(),
            retain: Retain::Yolk,
            clahe: ClaheParams::default(),
            strel: StrelSpec::default(),
            thicken_passes: 1,
            canny: CannyParams::default(),
            ssim: SsimParams::default(),
            mse_scale: MseScale::Unit,
            stages: StageToggles::default(),
        }
    }
}

impl PipelineConfig {
    /// Validate every parameter except the input/output paths.
    pub fn validate_params(&self) -> Result<()> {
        let bad = |message: String| Err(Error::InvalidConfig { message });
        if self.k < 2 {
            return bad("k must be >= 2".into());
        }
        let tol_ok = self.kmeans_tol > 0.0;
        if !tol_ok {
            return bad(format!("kmeans_tol {} must be positive", self.kmeans_tol));
        }
        if self.kmeans_max_iters == 0 {
            return bad("kmeans_max_iters must be at least 1".into());
        }
        if self.strel.length < 1 {
            return bad("strel length must be at least 1".into());
        }
        WhitePoint::new(self.white_point.xn, self.white_point.yn, self.white_point.zn)?;
        self.clahe.validate()?;
        self.canny.validate()?;
        self.ssim.validate()?;
        Ok(())
    }

    /// Full validation including paths.
    pub fn validate(&self) -> Result<()> {
        self.validate_params()?;
        if self.input.as_os_str().is_empty() {
            return Err(Error::InvalidConfig {
                message: "input path is required".into(),
            });
        }
        if self.output_dir.as_os_str().is_empty() {
            return Err(Error::InvalidConfig {
                message: "output directory is required".into(),
            });
        }
        if self.input == self.output_dir {
            return Err(Error::InvalidConfig {
                message: "output directory must differ from the input path".into(),
            });
        }
        Ok(())
    }
}

fn parse_bool(key: &str, value: &str, line: usize) -> Result<bool> {
    match value {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(Error::ConfigParse {
            line,
            message: format!("key \"{key}\": expected a boolean, got \"{value}\""),
        }),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| Error::ConfigParse {
        line,
        message: format!("key \"{key}\": cannot parse \"{value}\""),
    })
}

/// Parse `x0,y0,w,h`.
pub fn parse_rect(value: &str) -> Option<Rect> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return None;
    }
    let nums: Option<Vec<u32>> = parts.iter().map(|p| p.parse().ok()).collect();
    let n = nums?;
    Some(Rect::new(n[0], n[1], n[2], n[3]))
}

/// Parse `line:<len>:<deg>`.
pub fn parse_strel(value: &str) -> Option<StrelSpec> {
    let parts: Vec<&str> = value.split(':').collect();
    if parts.len() != 3 || parts[0] != "line" {
        return None;
    }
    Some(StrelSpec {
        length: parts[1].trim().parse().ok()?,
        angle_degrees: parts[2].trim().parse().ok()?,
    })
}

/// Parse `WxH` tile grids, e.g. `8x8`.
pub fn parse_tiles(value: &str) -> Option<(u32, u32)> {
    let (a, b) = value.split_once('x')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

/// Load a flat key-value configuration file. Lines are `key = value`;
/// blank lines and `#` comments are skipped; unknown keys are rejected.
/// Missing keys keep their defaults.
pub fn load_config(path: &Path) -> Result<PipelineConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::FileMissing {
                path: path.to_path_buf(),
            }
        } else {
            Error::Io {
                path: path.to_path_buf(),
                source: e,
            }
        }
    })?;
    let mut config = PipelineConfig::default();
    apply_config_text(&text, &mut config)?;
    config.validate_params()?;
    Ok(config)
}

/// Apply configuration text onto an existing config (used by both the file
/// loader and tests).
pub fn apply_config_text(text: &str, config: &mut PipelineConfig) -> Result<()> {
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::ConfigParse {
                line: line_no,
                message: format!("expected key = value, got \"{line}\""),
            });
        };
        let key = key.trim();
        let value = value.trim();
        apply_key(config, key, value, line_no)?;
    }
    Ok(())
}

fn apply_key(config: &mut PipelineConfig, key: &str, value: &str, line: usize) -> Result<()> {
    let parse_fail = |message: String| Error::ConfigParse { line, message };
    match key {
        "input" => config.input = PathBuf::from(value),
        "output_dir" => config.output_dir = PathBuf::from(value),
        "crop" => {
            config.crop = Some(parse_rect(value).ok_or_else(|| {
                parse_fail(format!("key \"crop\": expected x0,y0,w,h, got \"{value}\""))
            })?)
        }
        "k" => config.k = parse_num(key, value, line)?,
        "seed" => config.seed = parse_num(key, value, line)?,
        "kmeans_tol" => config.kmeans_tol = parse_num(key, value, line)?,
        "kmeans_max_iters" => config.kmeans_max_iters = parse_num(key, value, line)?,
        "feature_mode" => {
            config.feature_mode = match value {
                "lab" => FeatureMode::Lab,
                "ab" => FeatureMode::Ab,
                _ => {
                    return Err(parse_fail(format!(
                        "key \"feature_mode\": expected lab or ab, got \"{value}\""
                    )))
                }
            }
        }
        "white_point" => {
            if value == "d65" {
                config.white_point = WhitePoint::d65();
            } else {
                let parts: Vec<&str> = value.split_whitespace().collect();
                let nums: Option<Vec<f64>> = parts.iter().map(|p| p.parse().ok()).collect();
                match nums.as_deref() {
                    Some([x, y, z]) => config.white_point = WhitePoint::new(*x, *y, *z)?,
                    _ => {
                        return Err(parse_fail(format!(
                            "key \"white_point\": expected d65 or three numbers, got \"{value}\""
                        )))
                    }
                }
            }
        }
        "retain" => {
            config.retain = match value {
                "background" => Retain::Background,
                "egg" => Retain::Egg,
                "yolk" => Retain::Yolk,
                "all" => Retain::All,
                _ => {
                    return Err(parse_fail(format!(
                        "key \"retain\": expected background, egg, yolk or all, got \"{value}\""
                    )))
                }
            }
        }
        "clahe_tiles" => {
            let (tx, ty) = parse_tiles(value).ok_or_else(|| {
                parse_fail(format!("key \"clahe_tiles\": expected WxH, got \"{value}\""))
            })?;
            config.clahe.tiles_x = tx;
            config.clahe.tiles_y = ty;
        }
        "clahe_alpha" => config.clahe.clip_alpha = parse_num(key, value, line)?,
        "clahe_smax" => config.clahe.s_max = parse_num(key, value, line)?,
        "strel" => {
            config.strel = parse_strel(value).ok_or_else(|| {
                parse_fail(format!(
                    "key \"strel\": expected line:<len>:<deg>, got \"{value}\""
                ))
            })?
        }
        "thicken_passes" => config.thicken_passes = parse_num(key, value, line)?,
        "canny_sigma" => config.canny.gaussian_sigma = parse_num(key, value, line)?,
        "canny_low" => config.canny.low_ratio = parse_num(key, value, line)?,
        "canny_high" => config.canny.high_ratio = parse_num(key, value, line)?,
        "min_edge_size" => config.canny.min_edge_size = parse_num(key, value, line)?,
        "ssim_window" => config.ssim.window = parse_num(key, value, line)?,
        "ssim_sigma" => config.ssim.sigma = parse_num(key, value, line)?,
        "mse_scale" => {
            config.mse_scale = match value {
                "unit" => MseScale::Unit,
                "byte" => MseScale::Byte,
                _ => {
                    return Err(parse_fail(format!(
                        "key \"mse_scale\": expected unit or byte, got \"{value}\""
                    )))
                }
            }
        }
        "enable_he" => config.stages.he = parse_bool(key, value, line)?,
        "enable_clahe" => config.stages.clahe = parse_bool(key, value, line)?,
        "enable_dilate" => config.stages.dilate = parse_bool(key, value, line)?,
        "enable_thicken" => config.stages.thicken = parse_bool(key, value, line)?,
        "enable_edges" => config.stages.edges = parse_bool(key, value, line)?,
        _ => {
            return Err(Error::ConfigParse {
                line,
                message: format!("unknown key \"{key}\""),
            })
        }
    }
    Ok(())
}

/// One emitted artifact: stage name, file path, wall time.
#[derive(Debug, Clone)]
pub struct StageArtifact {
    pub stage: String,
    pub path: PathBuf,
    pub wall_ms: f64,
}

pub type StageArtifacts = Vec<StageArtifact>;

/// Render Lab planes as an RGB visualization: R = 2.55 L*, G = a* + 128,
/// B = b* + 128, clamped.
pub fn lab_visualization(lab: &LabImage) -> RasterImage {
    let n = lab.width() as usize * lab.height() as usize;
    let mut pixels = Vec::with_capacity(n * 3);
    for i in 0..n {
        let clamp8 = |v: f32| v.round().clamp(0.0, 255.0) as u8;
        pixels.push(clamp8(lab.l_plane()[i] * 2.55));
        pixels.push(clamp8(lab.a_plane()[i] + 128.0));
        pixels.push(clamp8(lab.b_plane()[i] + 128.0));
    }
    RasterImage::new(lab.width(), lab.height(), pixels).expect("dims valid")
}

/// Cluster label raster scaled by 80 per id for visibility.
pub fn cluster_map_image(seg: &SegmentationResult) -> GrayImage {
    let pixels = seg
        .label_map
        .pixels()
        .iter()
        .map(|&id| (id as u16 * 80).min(255) as u8)
        .collect();
    GrayImage::new(seg.label_map.width(), seg.label_map.height(), pixels).expect("dims valid")
}

/// Keep the retained clusters' pixels from `src`, black elsewhere.
pub fn composite_retained(src: &RasterImage, seg: &SegmentationResult, retain: Retain) -> RasterImage {
    let keep: Vec<usize> = match retain {
        Retain::Background => vec![seg.region_assignment.cluster_for(Region::Background)],
        Retain::Egg => vec![seg.region_assignment.cluster_for(Region::Egg)],
        Retain::Yolk => vec![seg.region_assignment.cluster_for(Region::Yolk)],
        Retain::All => (0..seg.cluster_masks.len()).collect(),
    };
    let mut out = RasterImage::filled(src.width(), src.height(), [0, 0, 0]).expect("dims valid");
    for y in 0..src.height() {
        for x in 0..src.width() {
            let id = seg.label_map.get(x, y) as usize;
            if keep.contains(&id) {
                out.set(x, y, src.get(x, y));
            }
        }
    }
    out
}

struct StageWriter<'a> {
    dir: &'a Path,
    artifacts: StageArtifacts,
}

impl<'a> StageWriter<'a> {
    fn emit<T: crate::io::Encodable>(
        &mut self,
        index: usize,
        stage: &str,
        image: &T,
        started: Instant,
    ) -> Result<()> {
        let mut name = String::new();
        let _ = write!(name, "{index:02}_{stage}.png");
        let path = self.dir.join(name);
        save_image(image, &path).map_err(|e| e.in_stage(stage))?;
        self.artifacts.push(StageArtifact {
            stage: stage.to_string(),
            path,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        });
        Ok(())
    }
}

/// Execute the full pipeline, writing per-stage artifacts and `report.json`
/// into the output directory.
pub fn run_pipeline(config: &PipelineConfig) -> Result<(StageArtifacts, MetricsReport)> {
    config.validate()?;
    std::fs::create_dir_all(&config.output_dir).map_err(|e| {
        Error::Io {
            path: config.output_dir.clone(),
            source: e,
        }
        .in_stage("setup")
    })?;
    let mut writer = StageWriter {
        dir: &config.output_dir,
        artifacts: Vec::new(),
    };

    // Phase 1: color.
    let t = Instant::now();
    let loaded = crate::io::load_image(&config.input).map_err(|e| e.in_stage("load"))?;
    let input = match config.crop {
        Some(rect) => {
            let cropped = loaded.crop(rect).map_err(|e| e.in_stage("crop"))?;
            writer.emit(0, "crop", &cropped, t)?;
            cropped
        }
        None => loaded,
    };

    let t = Instant::now();
    let lab = rgb_to_lab(&input, &config.white_point);
    writer.emit(1, "lab", &lab_visualization(&lab), t)?;

    let t = Instant::now();
    let opts = KmeansOptions {
        max_iters: config.kmeans_max_iters,
        tol: config.kmeans_tol,
    };
    let seg = segment_lab(&lab, config.k, config.seed, opts, config.feature_mode)
        .map_err(|e| e.in_stage("cluster_map"))?;
    writer.emit(2, "cluster_map", &cluster_map_image(&seg), t)?;
    for (j, mask) in seg.cluster_masks.iter().enumerate() {
        let t = Instant::now();
        writer.emit(3 + j, &format!("cluster_{}", j + 1), mask, t)?;
    }
    let k = config.k;

    let t = Instant::now();
    let composite = composite_retained(&input, &seg, config.retain);
    writer.emit(3 + k, "color_segmented", &composite, t)?;

    // Phase 2: grayscale.
    let t = Instant::now();
    let gray = rgb_to_gray(&composite);
    writer.emit(4 + k, "gray", &gray, t)?;

    // Reference for the evaluation: the binarized pre-enhancement grayscale.
    let reference = binarize_otsu(&gray);

    let mut current = gray;
    if config.stages.he {
        let t = Instant::now();
        current = equalize(&current);
        writer.emit(5 + k, "he", &current, t)?;
    }
    if config.stages.clahe {
        let t = Instant::now();
        current = clahe(&current, &config.clahe).map_err(|e| e.in_stage("clahe"))?;
        writer.emit(6 + k, "clahe", &current, t)?;
    }

    let t = Instant::now();
    let bw = binarize_otsu(&current);
    writer.emit(7 + k, "bw", &bw, t)?;

    let mut mask = bw;
    if config.stages.dilate {
        let t = Instant::now();
        let strel = Strel::line(config.strel.length, config.strel.angle_degrees);
        mask = dilate(&mask, &strel);
        writer.emit(8 + k, "dilate", &mask, t)?;
    }
    if config.stages.thicken {
        let t = Instant::now();
        mask = thicken(&mask, config.thicken_passes);
        writer.emit(9 + k, "thicken", &mask, t)?;
    }
    if config.stages.edges {
        let t = Instant::now();
        mask = canny(&mask.to_gray(), &config.canny);
        writer.emit(10 + k, "edges", &mask, t)?;
    }

    // Evaluation.
    let t = Instant::now();
    let report = evaluate_masks(&reference, &mask, config.mse_scale, &config.ssim)
        .map_err(|e| e.in_stage("report"))?;
    let report_path = config.output_dir.join("report.json");
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    std::fs::write(&report_path, json + "\n").map_err(|e| {
        Error::Io {
            path: report_path.clone(),
            source: e,
        }
        .in_stage("report")
    })?;
    writer.artifacts.push(StageArtifact {
        stage: "report".to_string(),
        path: report_path,
        wall_ms: t.elapsed().as_secs_f64() * 1e3,
    });

    Ok((writer.artifacts, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_validates_params() {
        PipelineConfig::default().validate_params().unwrap();
    }

    #[test]
    fn k_below_two_is_rejected() {
        let mut config = PipelineConfig::default();
        apply_config_text("k = 1", &mut config).unwrap();
        let err = config.validate_params().unwrap_err();
        assert!(err.to_string().contains("k must be >= 2"), "{err}");
    }

    #[test]
    fn unknown_key_is_rejected_by_name() {
        let mut config = PipelineConfig::default();
        let err = apply_config_text("klusters = 3", &mut config).unwrap_err();
        assert!(err.to_string().contains("klusters"), "{err}");
        assert!(matches!(err, Error::ConfigParse { line: 1, .. }));
    }

    #[test]
    fn parse_error_carries_line_number() {
        let mut config = PipelineConfig::default();
        let err = apply_config_text("k = 3\nseed == 7", &mut config).unwrap_err();
        match err {
            Error::ConfigParse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn empty_config_keeps_defaults() {
        let mut config = PipelineConfig::default();
        apply_config_text("\n# just a comment\n\n", &mut config).unwrap();
        assert_eq!(config, PipelineConfig::default());
        assert_eq!(config.k, 3);
        assert_eq!(config.clahe.tiles_x, 8);
        assert_eq!(config.white_point, WhitePoint::d65());
    }

    #[test]
    fn full_config_roundtrip() {
        let text = "\
input = in.png
output_dir = out
crop = 10,20,100,200
k = 4
seed = 7
kmeans_tol = 1e-3
kmeans_max_iters = 50
feature_mode = ab
retain = all
clahe_tiles = 4x2
clahe_alpha = 25
clahe_smax = 3
strel = line:5:90
thicken_passes = 2
canny_sigma = 2.0
canny_low = 0.05
canny_high = 0.2
min_edge_size = 8
ssim_window = 7
ssim_sigma = 1.1
mse_scale = byte
enable_he = off
enable_edges = false
";
        let mut config = PipelineConfig::default();
        apply_config_text(text, &mut config).unwrap();
        assert_eq!(config.crop, Some(Rect::new(10, 20, 100, 200)));
        assert_eq!(config.k, 4);
        assert_eq!(config.feature_mode, FeatureMode::Ab);
        assert_eq!(config.retain, Retain::All);
        assert_eq!((config.clahe.tiles_x, config.clahe.tiles_y), (4, 2));
        assert_eq!(config.strel.length, 5);
        assert_eq!(config.thicken_passes, 2);
        assert!(!config.stages.he);
        assert!(!config.stages.edges);
        assert!(config.stages.clahe);
        assert_eq!(config.mse_scale, MseScale::Byte);
        config.validate_params().unwrap();
    }

    #[test]
    fn strel_and_tiles_parsers() {
        assert_eq!(
            parse_strel("line:3:45"),
            Some(StrelSpec {
                length: 3,
                angle_degrees: 45.0
            })
        );
        assert_eq!(parse_strel("disk:3:45"), None);
        assert_eq!(parse_tiles("8x8"), Some((8, 8)));
        assert_eq!(parse_tiles("8"), None);
        assert_eq!(parse_rect("1,2,3,4"), Some(Rect::new(1, 2, 3, 4)));
        assert_eq!(parse_rect("1,2,3"), None);
    }

    #[test]
    fn validate_requires_distinct_paths() {
        let mut config = PipelineConfig {
            input: PathBuf::from("x"),
            output_dir: PathBuf::from("x"),
            ..PipelineConfig::default()
        };
        assert!(config.validate().is_err());
        config.output_dir = PathBuf::from("y");
        config.validate().unwrap();
    }
}
