//! Image value types shared by every pipeline stage.
//!
//! All three raster types are plain row-major buffers validated at
//! construction. They are immutable values in practice: operations return
//! fresh images rather than mutating in place, so instances can be shared
//! freely across threads.

use crate::error::{Error, Result};

/// 8-bit RGB image, row-major, channels interleaved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

/// Single-channel 8-bit intensity image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

/// Boolean raster; `true` marks foreground.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    pixels: Vec<bool>,
}

/// Axis-aligned crop window. `x0`, `y0` is the top-left pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x0: u32,
    pub y0: u32,
    pub w: u32,
    pub h: u32,
}

impl Rect {
    pub fn new(x0: u32, y0: u32, w: u32, h: u32) -> Rect {
        Rect { x0, y0, w, h }
    }

    /// Resolve `inner` relative to this rect's frame: cropping by `self`
    /// then by `inner` equals cropping once by `self.compose(inner)`.
    pub fn compose(&self, inner: Rect) -> Rect {
        Rect {
            x0: self.x0 + inner.x0,
            y0: self.y0 + inner.y0,
            w: inner.w,
            h: inner.h,
        }
    }

    fn check_within(&self, width: u32, height: u32) -> Result<()> {
        let fits_x = self.w >= 1 && self.x0.checked_add(self.w).is_some_and(|e| e <= width);
        let fits_y = self.h >= 1 && self.y0.checked_add(self.h).is_some_and(|e| e <= height);
        if fits_x && fits_y {
            Ok(())
        } else {
            Err(Error::RectOutOfBounds {
                rect: *self,
                width,
                height,
            })
        }
    }
}

fn check_dims(width: u32, height: u32, len: usize, per_pixel: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidShape {
            detail: format!("dimensions {width}x{height} must be at least 1x1"),
        });
    }
    let expected = width as usize * height as usize * per_pixel;
    if len != expected {
        return Err(Error::InvalidShape {
            detail: format!("buffer holds {len} values, expected {expected} for {width}x{height}"),
        });
    }
    Ok(())
}

impl RasterImage {
    /// Build from an interleaved RGB buffer of length `width * height * 3`.
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<RasterImage> {
        check_dims(width, height, pixels.len(), 3)?;
        Ok(RasterImage {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Result<RasterImage> {
        let n = width as usize * height as usize;
        let mut pixels = Vec::with_capacity(n * 3);
        for _ in 0..n {
            pixels.extend_from_slice(&rgb);
        }
        RasterImage::new(width, height, pixels)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Interleaved RGB bytes, row-major.
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn set(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn crop(&self, rect: Rect) -> Result<RasterImage> {
        rect.check_within(self.width, self.height)?;
        let mut pixels = Vec::with_capacity(rect.w as usize * rect.h as usize * 3);
        for y in rect.y0..rect.y0 + rect.h {
            let row = (y as usize * self.width as usize + rect.x0 as usize) * 3;
            pixels.extend_from_slice(&self.pixels[row..row + rect.w as usize * 3]);
        }
        RasterImage::new(rect.w, rect.h, pixels)
    }
}

impl GrayImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<GrayImage> {
        check_dims(width, height, pixels.len(), 1)?;
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: u32, height: u32, value: u8) -> Result<GrayImage> {
        GrayImage::new(
            width,
            height,
            vec![value; width as usize * height as usize],
        )
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        self.pixels[y as usize * self.width as usize + x as usize] = value;
    }

    pub fn crop(&self, rect: Rect) -> Result<GrayImage> {
        rect.check_within(self.width, self.height)?;
        let mut pixels = Vec::with_capacity(rect.w as usize * rect.h as usize);
        for y in rect.y0..rect.y0 + rect.h {
            let row = y as usize * self.width as usize + rect.x0 as usize;
            pixels.extend_from_slice(&self.pixels[row..row + rect.w as usize]);
        }
        GrayImage::new(rect.w, rect.h, pixels)
    }
}

impl BinaryMask {
    pub fn new(width: u32, height: u32, pixels: Vec<bool>) -> Result<BinaryMask> {
        check_dims(width, height, pixels.len(), 1)?;
        Ok(BinaryMask {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: u32, height: u32, value: bool) -> Result<BinaryMask> {
        BinaryMask::new(
            width,
            height,
            vec![value; width as usize * height as usize],
        )
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[bool] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    /// Out-of-bounds reads are background; used by morphology kernels.
    pub fn get_or_background(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            false
        } else {
            self.pixels[y as usize * self.width as usize + x as usize]
        }
    }

    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        self.pixels[y as usize * self.width as usize + x as usize] = value;
    }

    pub fn count_foreground(&self) -> usize {
        self.pixels.iter().filter(|&&p| p).count()
    }

    /// Render as an 8-bit image, foreground = 255, background = 0.
    pub fn to_gray(&self) -> GrayImage {
        let pixels = self.pixels.iter().map(|&p| if p { 255 } else { 0 }).collect();
        GrayImage::new(self.width, self.height, pixels).expect("mask dims are valid")
    }

    pub fn crop(&self, rect: Rect) -> Result<BinaryMask> {
        rect.check_within(self.width, self.height)?;
        let mut pixels = Vec::with_capacity(rect.w as usize * rect.h as usize);
        for y in rect.y0..rect.y0 + rect.h {
            let row = y as usize * self.width as usize + rect.x0 as usize;
            pixels.extend_from_slice(&self.pixels[row..row + rect.w as usize]);
        }
        BinaryMask::new(rect.w, rect.h, pixels)
    }
}
