//! C ABI for the candleseg pipeline.
//!
//! Conventions: every fallible call returns a [`CsStatus`]; `CS_STATUS_OK`
//! is zero. On failure a textual description is stored per thread and
//! readable through [`cs_last_error_message`] until the next failing call
//! on the same thread. Handles (`CsImage*`, `CsConfig*`) are opaque and
//! must be released with their matching `_free` function exactly once;
//! passing null where a handle is expected yields `CS_STATUS_NULL_ARGUMENT`
//! rather than a crash.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use candleseg::error::Error;
use candleseg::kmeans::FeatureMode;
use candleseg::metrics::MseScale;
use candleseg::pipeline::{run_pipeline, PipelineConfig, Retain};
use candleseg::raster::{RasterImage, Rect};

/// Result codes for every fallible FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    FileMissing = 3,
    UnsupportedFormat = 4,
    CorruptHeader = 5,
    Io = 6,
    InvalidShape = 7,
    OutOfBounds = 8,
    DimensionMismatch = 9,
    InfeasibleK = 10,
    InvalidConfig = 11,
    DomainError = 12,
    Internal = 13,
}

/// Feature planes used for clustering.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsFeatureMode {
    Lab = 0,
    Ab = 1,
}

/// Region retained for the grayscale phase.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsRetain {
    Background = 0,
    Egg = 1,
    Yolk = 2,
    All = 3,
}

/// Intensity scale for the MSE metric.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsMseScale {
    Unit = 0,
    Byte = 1,
}

/// Optional pipeline stages.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsStage {
    He = 0,
    Clahe = 1,
    Dilate = 2,
    Thicken = 3,
    Edges = 4,
}

/// Metrics summary returned by pipeline and comparison calls.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CsMetricsReport {
    pub mse: f64,
    pub mssim: f64,
    pub ssim_min: f64,
    pub ssim_max: f64,
    pub window_count: u64,
}

/// Opaque RGB image handle.
pub struct CsImage {
    inner: RasterImage,
}

/// Opaque pipeline configuration handle.
pub struct CsConfig {
    inner: PipelineConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> CsStatus {
    match err {
        Error::FileMissing { .. } => CsStatus::FileMissing,
        Error::UnsupportedFormat { .. } => CsStatus::UnsupportedFormat,
        Error::CorruptHeader { .. } => CsStatus::CorruptHeader,
        Error::Io { .. } => CsStatus::Io,
        Error::InvalidShape { .. } => CsStatus::InvalidShape,
        Error::RectOutOfBounds { .. } => CsStatus::OutOfBounds,
        Error::DimensionMismatch { .. } | Error::FeatureDimMismatch { .. } => {
            CsStatus::DimensionMismatch
        }
        Error::WindowTooLarge { .. } => CsStatus::DimensionMismatch,
        Error::NegativeDomain { .. } => CsStatus::DomainError,
        Error::InfeasibleK { .. } => CsStatus::InfeasibleK,
        Error::InvalidConfig { .. } | Error::ConfigParse { .. } => CsStatus::InvalidConfig,
        Error::Stage { source, .. } => status_of(source),
    }
}

fn fail(err: &Error) -> CsStatus {
    set_error(&err.to_string());
    status_of(err)
}

fn null_arg(what: &str) -> CsStatus {
    set_error(&format!("null argument: {what}"));
    CsStatus::NullArgument
}

/// # Safety
/// `ptr` must be a valid NUL-terminated string.
unsafe fn path_from(ptr: *const c_char, what: &str) -> Result<PathBuf, CsStatus> {
    if ptr.is_null() {
        return Err(null_arg(what));
    }
    match unsafe { CStr::from_ptr(ptr) }.to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => {
            set_error(&format!("{what} is not valid UTF-8"));
            Err(CsStatus::InvalidUtf8)
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Description of the most recent failure on this thread. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Load a PNG or binary PNM image.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn cs_image_load(path: *const c_char, out: *mut *mut CsImage) -> CsStatus {
    if out.is_null() {
        return null_arg("out");
    }
    let path = match unsafe { path_from(path, "path") } {
        Ok(p) => p,
        Err(status) => return status,
    };
    match candleseg::io::load_image(&path) {
        Ok(inner) => {
            unsafe { *out = Box::into_raw(Box::new(CsImage { inner })) };
            CsStatus::Ok
        }
        Err(err) => fail(&err),
    }
}

/// Build an image from an interleaved RGB8 buffer of `width * height * 3`
/// bytes.
///
/// # Safety
/// `pixels` must point to at least `width * height * 3` readable bytes.
#[no_mangle]
pub unsafe extern "C" fn cs_image_from_rgb8(
    width: u32,
    height: u32,
    pixels: *const u8,
    out: *mut *mut CsImage,
) -> CsStatus {
    if out.is_null() {
        return null_arg("out");
    }
    if pixels.is_null() {
        return null_arg("pixels");
    }
    let len = width as usize * height as usize * 3;
    let data = unsafe { std::slice::from_raw_parts(pixels, len) }.to_vec();
    match RasterImage::new(width, height, data) {
        Ok(inner) => {
            unsafe { *out = Box::into_raw(Box::new(CsImage { inner })) };
            CsStatus::Ok
        }
        Err(err) => fail(&err),
    }
}

/// Image width in pixels; 0 for a null handle.
///
/// # Safety
/// `image` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn cs_image_width(image: *const CsImage) -> u32 {
    if image.is_null() {
        return 0;
    }
    unsafe { &*image }.inner.width()
}

/// Image height in pixels; 0 for a null handle.
///
/// # Safety
/// `image` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn cs_image_height(image: *const CsImage) -> u32 {
    if image.is_null() {
        return 0;
    }
    unsafe { &*image }.inner.height()
}

/// Copy the interleaved RGB8 pixels into `buf` (`buf_len` must be at least
/// `width * height * 3`).
///
/// # Safety
/// `buf` must point to `buf_len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn cs_image_copy_rgb8(
    image: *const CsImage,
    buf: *mut u8,
    buf_len: usize,
) -> CsStatus {
    if image.is_null() {
        return null_arg("image");
    }
    if buf.is_null() {
        return null_arg("buf");
    }
    let pixels = unsafe { &*image }.inner.pixels();
    if buf_len < pixels.len() {
        set_error(&format!(
            "buffer of {buf_len} bytes is smaller than the {} pixel bytes",
            pixels.len()
        ));
        return CsStatus::InvalidShape;
    }
    unsafe { std::ptr::copy_nonoverlapping(pixels.as_ptr(), buf, pixels.len()) };
    CsStatus::Ok
}

/// Save the image; the format follows the path extension (.png/.ppm).
///
/// # Safety
/// `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn cs_image_save(image: *const CsImage, path: *const c_char) -> CsStatus {
    if image.is_null() {
        return null_arg("image");
    }
    let path = match unsafe { path_from(path, "path") } {
        Ok(p) => p,
        Err(status) => return status,
    };
    match candleseg::io::save_image(&unsafe { &*image }.inner, &path) {
        Ok(()) => CsStatus::Ok,
        Err(err) => fail(&err),
    }
}

/// Release an image handle. Null is a no-op.
///
/// # Safety
/// `image` must have been returned by this library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn cs_image_free(image: *mut CsImage) {
    if !image.is_null() {
        drop(unsafe { Box::from_raw(image) });
    }
}

/// Generate the deterministic synthetic egg phantom.
///
/// # Safety
/// `out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn cs_phantom_generate(
    width: u32,
    height: u32,
    out: *mut *mut CsImage,
) -> CsStatus {
    if out.is_null() {
        return null_arg("out");
    }
    if width == 0 || height == 0 {
        set_error("phantom dimensions must be at least 1x1");
        return CsStatus::InvalidShape;
    }
    let (inner, _) = candleseg::phantom::egg_phantom(width, height);
    unsafe { *out = Box::into_raw(Box::new(CsImage { inner })) };
    CsStatus::Ok
}

/// New configuration with every parameter at its default.
#[no_mangle]
pub extern "C" fn cs_config_new() -> *mut CsConfig {
    Box::into_raw(Box::new(CsConfig {
        inner: PipelineConfig::default(),
    }))
}

/// Release a configuration handle. Null is a no-op.
///
/// # Safety
/// `config` must have been returned by [`cs_config_new`] and not freed.
#[no_mangle]
pub unsafe extern "C" fn cs_config_free(config: *mut CsConfig) {
    if !config.is_null() {
        drop(unsafe { Box::from_raw(config) });
    }
}

unsafe fn config_mut<'a>(config: *mut CsConfig) -> Result<&'a mut PipelineConfig, CsStatus> {
    if config.is_null() {
        Err(null_arg("config"))
    } else {
        Ok(&mut unsafe { &mut *config }.inner)
    }
}

/// Set the cluster count (k >= 2).
///
/// # Safety
/// `config` must be a live handle from [`cs_config_new`].
#[no_mangle]
pub unsafe extern "C" fn cs_config_set_k(config: *mut CsConfig, k: u32) -> CsStatus {
    let cfg = match unsafe { config_mut(config) } {
        Ok(c) => c,
        Err(s) => return s,
    };
    if k < 2 {
        set_error("k must be >= 2");
        return CsStatus::InvalidConfig;
    }
    cfg.k = k as usize;
    CsStatus::Ok
}

/// Set the PRNG seed for centroid initialization.
///
/// # Safety
/// `config` must be a live handle from [`cs_config_new`].
#[no_mangle]
pub unsafe extern "C" fn cs_config_set_seed(config: *mut CsConfig, seed: u64) -> CsStatus {
    match unsafe { config_mut(config) } {
        Ok(cfg) => {
            cfg.seed = seed;
            CsStatus::Ok
        }
        Err(s) => s,
    }
}

/// Set the crop window applied before segmentation.
///
/// # Safety
/// `config` must be a live handle from [`cs_config_new`].
#[no_mangle]
pub unsafe extern "C" fn cs_config_set_crop(
    config: *mut CsConfig,
    x0: u32,
    y0: u32,
    w: u32,
    h: u32,
) -> CsStatus {
    let cfg = match unsafe { config_mut(config) } {
        Ok(c) => c,
        Err(s) => return s,
    };
    if w == 0 || h == 0 {
        set_error("crop extent must be positive");
        return CsStatus::InvalidConfig;
    }
    cfg.crop = Some(Rect::new(x0, y0, w, h));
    CsStatus::Ok
}

/// Choose the feature planes used for clustering.
///
/// # Safety
/// `config` must be a live handle from [`cs_config_new`].
#[no_mangle]
pub unsafe extern "C" fn cs_config_set_feature_mode(
    config: *mut CsConfig,
    mode: CsFeatureMode,
) -> CsStatus {
    match unsafe { config_mut(config) } {
        Ok(cfg) => {
            cfg.feature_mode = match mode {
                CsFeatureMode::Lab => FeatureMode::Lab,
                CsFeatureMode::Ab => FeatureMode::Ab,
            };
            CsStatus::Ok
        }
        Err(s) => s,
    }
}

/// Choose the region retained for the grayscale phase.
///
/// # Safety
/// `config` must be a live handle from [`cs_config_new`].
#[no_mangle]
pub unsafe extern "C" fn cs_config_set_retain(config: *mut CsConfig, retain: CsRetain) -> CsStatus {
    match unsafe { config_mut(config) } {
        Ok(cfg) => {
            cfg.retain = match retain {
                CsRetain::Background => Retain::Background,
                CsRetain::Egg => Retain::Egg,
                CsRetain::Yolk => Retain::Yolk,
                CsRetain::All => Retain::All,
            };
            CsStatus::Ok
        }
        Err(s) => s,
    }
}

/// Set the CLAHE tile grid, clip factor (0-100) and maximum slope.
///
/// # Safety
/// `config` must be a live handle from [`cs_config_new`].
#[no_mangle]
pub unsafe extern "C" fn cs_config_set_clahe(
    config: *mut CsConfig,
    tiles_x: u32,
    tiles_y: u32,
    clip_alpha: f64,
    s_max: f64,
) -> CsStatus {
    let cfg = match unsafe { config_mut(config) } {
        Ok(c) => c,
        Err(s) => return s,
    };
    let params = candleseg::enhance::ClaheParams {
        tiles_x,
        tiles_y,
        clip_alpha,
        s_max,
    };
    if let Err(err) = params.validate() {
        return fail(&err);
    }
    cfg.clahe = params;
    CsStatus::Ok
}

/// Set the line structuring element used by dilation.
///
/// # Safety
/// `config` must be a live handle from [`cs_config_new`].
#[no_mangle]
pub unsafe extern "C" fn cs_config_set_strel(
    config: *mut CsConfig,
    length: u32,
    angle_degrees: f64,
) -> CsStatus {
    let cfg = match unsafe { config_mut(config) } {
        Ok(c) => c,
        Err(s) => return s,
    };
    if length < 1 {
        set_error("strel length must be at least 1");
        return CsStatus::InvalidConfig;
    }
    cfg.strel = candleseg::pipeline::StrelSpec {
        length,
        angle_degrees,
    };
    CsStatus::Ok
}

/// Set the number of thickening passes.
///
/// # Safety
/// `config` must be a live handle from [`cs_config_new`].
#[no_mangle]
pub unsafe extern "C" fn cs_config_set_thicken_passes(
    config: *mut CsConfig,
    passes: u64,
) -> CsStatus {
    match unsafe { config_mut(config) } {
        Ok(cfg) => {
            cfg.thicken_passes = passes as usize;
            CsStatus::Ok
        }
        Err(s) => s,
    }
}

/// Set Canny parameters: blur sigma, relative thresholds and the minimum
/// kept component size.
///
/// # Safety
/// `config` must be a live handle from [`cs_config_new`].
#[no_mangle]
pub unsafe extern "C" fn cs_config_set_canny(
    config: *mut CsConfig,
    sigma: f64,
    low_ratio: f64,
    high_ratio: f64,
    min_edge_size: u64,
) -> CsStatus {
    let cfg = match unsafe { config_mut(config) } {
        Ok(c) => c,
        Err(s) => return s,
    };
    let params = candleseg::morphology::CannyParams {
        gaussian_sigma: sigma,
        low_ratio,
        high_ratio,
        min_edge_size: min_edge_size as usize,
    };
    if let Err(err) = params.validate() {
        return fail(&err);
    }
    cfg.canny = params;
    CsStatus::Ok
}

/// Set the MSE intensity scale.
///
/// # Safety
/// `config` must be a live handle from [`cs_config_new`].
#[no_mangle]
pub unsafe extern "C" fn cs_config_set_mse_scale(
    config: *mut CsConfig,
    scale: CsMseScale,
) -> CsStatus {
    match unsafe { config_mut(config) } {
        Ok(cfg) => {
            cfg.mse_scale = match scale {
                CsMseScale::Unit => MseScale::Unit,
                CsMseScale::Byte => MseScale::Byte,
            };
            CsStatus::Ok
        }
        Err(s) => s,
    }
}

/// Enable or disable an optional stage.
///
/// # Safety
/// `config` must be a live handle from [`cs_config_new`].
#[no_mangle]
pub unsafe extern "C" fn cs_config_set_stage_enabled(
    config: *mut CsConfig,
    stage: CsStage,
    enabled: bool,
) -> CsStatus {
    match unsafe { config_mut(config) } {
        Ok(cfg) => {
            let toggles = &mut cfg.stages;
            match stage {
                CsStage::He => toggles.he = enabled,
                CsStage::Clahe => toggles.clahe = enabled,
                CsStage::Dilate => toggles.dilate = enabled,
                CsStage::Thicken => toggles.thicken = enabled,
                CsStage::Edges => toggles.edges = enabled,
            }
            CsStatus::Ok
        }
        Err(s) => s,
    }
}

fn report_out(report: *mut CsMetricsReport, value: &candleseg::metrics::MetricsReport) {
    if !report.is_null() {
        unsafe {
            *report = CsMetricsReport {
                mse: value.mse,
                mssim: value.mssim,
                ssim_min: value.ssim_min,
                ssim_max: value.ssim_max,
                window_count: value.window_count,
            };
        }
    }
}

/// Run the full pipeline on `input`, writing stage artifacts and
/// report.json into `output_dir`. `report` may be null.
///
/// # Safety
/// Handles and strings must be valid; `report`, when non-null, must point
/// to writable memory.
#[no_mangle]
pub unsafe extern "C" fn cs_pipeline_run(
    config: *const CsConfig,
    input: *const c_char,
    output_dir: *const c_char,
    report: *mut CsMetricsReport,
) -> CsStatus {
    if config.is_null() {
        return null_arg("config");
    }
    let input = match unsafe { path_from(input, "input") } {
        Ok(p) => p,
        Err(s) => return s,
    };
    let output_dir = match unsafe { path_from(output_dir, "output_dir") } {
        Ok(p) => p,
        Err(s) => return s,
    };
    let mut cfg = unsafe { &*config }.inner.clone();
    cfg.input = input;
    cfg.output_dir = output_dir;
    let outcome = catch_unwind(AssertUnwindSafe(|| run_pipeline(&cfg)));
    match outcome {
        Ok(Ok((_, metrics))) => {
            report_out(report, &metrics);
            CsStatus::Ok
        }
        Ok(Err(err)) => fail(&err),
        Err(_) => {
            set_error("internal panic in pipeline run");
            CsStatus::Internal
        }
    }
}

/// Compare two image files (converted to grayscale) with MSE and SSIM at
/// default SSIM parameters.
///
/// # Safety
/// Paths must be NUL-terminated; `report`, when non-null, must be writable.
#[no_mangle]
pub unsafe extern "C" fn cs_metrics_compare_files(
    path_a: *const c_char,
    path_b: *const c_char,
    scale: CsMseScale,
    report: *mut CsMetricsReport,
) -> CsStatus {
    let a = match unsafe { path_from(path_a, "path_a") } {
        Ok(p) => p,
        Err(s) => return s,
    };
    let b = match unsafe { path_from(path_b, "path_b") } {
        Ok(p) => p,
        Err(s) => return s,
    };
    let load_gray = |p: &PathBuf| -> Result<candleseg::GrayImage, Error> {
        Ok(candleseg::colorspace::rgb_to_gray(&candleseg::io::load_image(p)?))
    };
    let ga = match load_gray(&a) {
        Ok(g) => g,
        Err(err) => return fail(&err),
    };
    let gb = match load_gray(&b) {
        Ok(g) => g,
        Err(err) => return fail(&err),
    };
    let scale = match scale {
        CsMseScale::Unit => MseScale::Unit,
        CsMseScale::Byte => MseScale::Byte,
    };
    match candleseg::metrics::evaluate_gray(
        &ga,
        &gb,
        scale,
        &candleseg::metrics::SsimParams::default(),
    ) {
        Ok(metrics) => {
            report_out(report, &metrics);
            CsStatus::Ok
        }
        Err(err) => fail(&err),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    fn cpath(path: &std::path::Path) -> CString {
        CString::new(path.to_str().unwrap()).unwrap()
    }

    #[test]
    fn version_is_a_c_string() {
        let v = unsafe { CStr::from_ptr(cs_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn null_arguments_are_rejected() {
        let status = unsafe { cs_image_load(ptr::null(), ptr::null_mut()) };
        assert_eq!(status, CsStatus::NullArgument);
        let msg = unsafe { CStr::from_ptr(cs_last_error_message()) };
        assert!(msg.to_str().unwrap().contains("null argument"));
    }

    #[test]
    fn missing_file_maps_to_file_missing() {
        let path = CString::new("/definitely/not/here.png").unwrap();
        let mut handle: *mut CsImage = ptr::null_mut();
        let status = unsafe { cs_image_load(path.as_ptr(), &mut handle) };
        assert_eq!(status, CsStatus::FileMissing);
        assert!(handle.is_null());
    }

    #[test]
    fn image_buffer_roundtrip() {
        let pixels: Vec<u8> = (0..2 * 2 * 3).map(|v| v as u8 * 7).collect();
        let mut handle: *mut CsImage = ptr::null_mut();
        let status = unsafe { cs_image_from_rgb8(2, 2, pixels.as_ptr(), &mut handle) };
        assert_eq!(status, CsStatus::Ok);
        assert_eq!(unsafe { cs_image_width(handle) }, 2);
        assert_eq!(unsafe { cs_image_height(handle) }, 2);
        let mut back = vec![0u8; 12];
        let status = unsafe { cs_image_copy_rgb8(handle, back.as_mut_ptr(), back.len()) };
        assert_eq!(status, CsStatus::Ok);
        assert_eq!(back, pixels);
        let status = unsafe { cs_image_copy_rgb8(handle, back.as_mut_ptr(), 3) };
        assert_eq!(status, CsStatus::InvalidShape);
        unsafe { cs_image_free(handle) };
    }

    #[test]
    fn save_and_reload_through_ffi() {
        let dir = tempfile::tempdir().unwrap();
        let path = cpath(&dir.path().join("img.png"));
        let mut handle: *mut CsImage = ptr::null_mut();
        unsafe {
            assert_eq!(cs_phantom_generate(32, 40, &mut handle), CsStatus::Ok);
            assert_eq!(cs_image_save(handle, path.as_ptr()), CsStatus::Ok);
            cs_image_free(handle);
            let mut reloaded: *mut CsImage = ptr::null_mut();
            assert_eq!(cs_image_load(path.as_ptr(), &mut reloaded), CsStatus::Ok);
            assert_eq!(cs_image_width(reloaded), 32);
            assert_eq!(cs_image_height(reloaded), 40);
            cs_image_free(reloaded);
        }
    }

    #[test]
    fn config_validation_through_ffi() {
        let config = cs_config_new();
        unsafe {
            assert_eq!(cs_config_set_k(config, 1), CsStatus::InvalidConfig);
            assert_eq!(cs_config_set_k(config, 3), CsStatus::Ok);
            assert_eq!(
                cs_config_set_canny(config, 1.4, 0.5, 0.2, 4),
                CsStatus::InvalidConfig
            );
            assert_eq!(cs_config_set_canny(config, 1.4, 0.1, 0.25, 4), CsStatus::Ok);
            assert_eq!(
                cs_config_set_clahe(config, 8, 8, 150.0, 4.0),
                CsStatus::InvalidConfig
            );
            assert_eq!(cs_config_set_clahe(config, 8, 8, 50.0, 4.0), CsStatus::Ok);
            cs_config_free(config);
        }
    }

    #[test]
    fn pipeline_runs_end_to_end_through_ffi() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("phantom.png");
        let out_dir = dir.path().join("out");
        unsafe {
            let mut img: *mut CsImage = ptr::null_mut();
            assert_eq!(cs_phantom_generate(146, 195, &mut img), CsStatus::Ok);
            let input_c = cpath(&input);
            assert_eq!(cs_image_save(img, input_c.as_ptr()), CsStatus::Ok);
            cs_image_free(img);

            let config = cs_config_new();
            assert_eq!(cs_config_set_seed(config, 42), CsStatus::Ok);
            assert_eq!(
                cs_config_set_stage_enabled(config, CsStage::Edges, true),
                CsStatus::Ok
            );
            let mut report = CsMetricsReport::default();
            let out_c = cpath(&out_dir);
            let status = cs_pipeline_run(config, input_c.as_ptr(), out_c.as_ptr(), &mut report);
            assert_eq!(status, CsStatus::Ok);
            cs_config_free(config);

            assert!(out_dir.join("report.json").exists());
            assert!(report.mse >= 0.0 && report.mse <= 1.0);
            assert!(report.mssim >= -1.0 && report.mssim <= 1.0);
            assert!(report.window_count > 0);

            // Identity comparison through the metrics entry point.
            let mut identity = CsMetricsReport::default();
            assert_eq!(
                cs_metrics_compare_files(
                    input_c.as_ptr(),
                    input_c.as_ptr(),
                    CsMseScale::Unit,
                    &mut identity
                ),
                CsStatus::Ok
            );
            assert_eq!(identity.mse, 0.0);
            assert!((identity.mssim - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn infeasible_k_surfaces_through_status() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("flat.png");
        candleseg::io::save_image(
            &candleseg::RasterImage::filled(32, 32, [5, 5, 5]).unwrap(),
            &input,
        )
        .unwrap();
        unsafe {
            let config = cs_config_new();
            let input_c = cpath(&input);
            let out_c = cpath(&dir.path().join("out"));
            let status = cs_pipeline_run(config, input_c.as_ptr(), out_c.as_ptr(), ptr::null_mut());
            assert_eq!(status, CsStatus::InfeasibleK);
            let msg = CStr::from_ptr(cs_last_error_message());
            assert!(msg.to_str().unwrap().contains("infeasible"));
            cs_config_free(config);
        }
    }
}
