//! sRGB ↔ CIEXYZ ↔ CIELAB conversions and weighted grayscale.
//!
//! The Lab transfer function `g` uses the branch constant σ = 6/29: the cube
//! root above σ³ and the linear ramp `t/(3σ²) + 4/29` below. RGB enters via
//! standard sRGB companding and the sRGB→XYZ matrix; the default white point
//! is the matrix's own D65 row sums, so pure white lands exactly on
//! L* = 100, a* = b* = 0.

use crate::error::{Error, Result};
use crate::raster::{GrayImage, RasterImage};

/// σ = 6/29, the branch point of the Lab transfer function.
pub const SIGMA: f64 = 6.0 / 29.0;

/// σ³; inputs above this take the cube-root branch of [`g_forward`].
pub const SIGMA3: f64 = SIGMA * SIGMA * SIGMA;

// sRGB (linear) → XYZ, D65.
const M_RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

// XYZ → sRGB (linear), inverse of the matrix above.
const M_XYZ_TO_RGB: [[f64; 3]; 3] = [
    [3.2404542, -1.5371385, -0.4985314],
    [-0.9692660, 1.8760108, 0.0415560],
    [0.0556434, -0.2040259, 1.0572252],
];

/// Reference-white tristimulus values normalizing the Lab conversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhitePoint {
    pub xn: f64,
    pub yn: f64,
    pub zn: f64,
}

impl WhitePoint {
    /// All components must be strictly positive.
    pub fn new(xn: f64, yn: f64, zn: f64) -> Result<WhitePoint> {
        if xn > 0.0 && yn > 0.0 && zn > 0.0 {
            Ok(WhitePoint { xn, yn, zn })
        } else {
            Err(Error::InvalidConfig {
                message: format!("white point ({xn}, {yn}, {zn}) must be strictly positive"),
            })
        }
    }

    /// D65 as seen by the conversion matrix (its row sums, Yn ≈ 1), so that
    /// sRGB white maps to exactly (1, 1, 1) in normalized tristimulus space.
    pub fn d65() -> WhitePoint {
        let row = |r: [f64; 3]| r[0] + r[1] + r[2];
        WhitePoint {
            xn: row(M_RGB_TO_XYZ[0]),
            yn: row(M_RGB_TO_XYZ[1]),
            zn: row(M_RGB_TO_XYZ[2]),
        }
    }
}

impl Default for WhitePoint {
    fn default() -> Self {
        WhitePoint::d65()
    }
}

/// A CIE XYZ tristimulus triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XyzTriple {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Per-pixel (L*, a*, b*) planes. L* lies in [0, 100] for in-gamut input;
/// a* and b* roughly in [-128, 128].
#[derive(Debug, Clone, PartialEq)]
pub struct LabImage {
    width: u32,
    height: u32,
    l: Vec<f32>,
    a: Vec<f32>,
    b: Vec<f32>,
}

impl LabImage {
    pub fn new(width: u32, height: u32, l: Vec<f32>, a: Vec<f32>, b: Vec<f32>) -> Result<LabImage> {
        let n = width as usize * height as usize;
        if width == 0 || height == 0 || l.len() != n || a.len() != n || b.len() != n {
            return Err(Error::InvalidShape {
                detail: format!(
                    "plane lengths ({}, {}, {}) must equal {width}x{height}",
                    l.len(),
                    a.len(),
                    b.len()
                ),
            });
        }
        Ok(LabImage {
            width,
            height,
            l,
            a,
            b,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn l_plane(&self) -> &[f32] {
        &self.l
    }

    pub fn a_plane(&self) -> &[f32] {
        &self.a
    }

    pub fn b_plane(&self) -> &[f32] {
        &self.b
    }

    pub fn get(&self, x: u32, y: u32) -> [f32; 3] {
        let i = y as usize * self.width as usize + x as usize;
        [self.l[i], self.a[i], self.b[i]]
    }
}

/// Lab transfer function: cube root above σ³, linear ramp below.
///
/// Continuous and strictly increasing; negative inputs are a domain error.
pub fn g_forward(t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::NegativeDomain { value: t });
    }
    Ok(g_fwd(t))
}

#[inline]
fn g_fwd(t: f64) -> f64 {
    if t > SIGMA3 {
        t.cbrt()
    } else {
        t / (3.0 * SIGMA * SIGMA) + 4.0 / 29.0
    }
}

/// Functional inverse of [`g_forward`]: cubic above σ, linear below.
/// Inputs under the linear range are absorbed by the linear branch.
pub fn g_inverse(u: f64) -> f64 {
    if u > SIGMA {
        u * u * u
    } else {
        3.0 * SIGMA * SIGMA * (u - 4.0 / 29.0)
    }
}

#[inline]
fn srgb_decode(c: f64) -> f64 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

#[inline]
fn srgb_encode(c: f64) -> f64 {
    if c <= 0.003_130_8 {
        12.92 * c
    } else {
        1.055 * c.powf(1.0 / 2.4) - 0.055
    }
}

/// Linear-light RGB (components in [0, 1]) to XYZ.
pub fn linear_rgb_to_xyz(r: f64, g: f64, b: f64) -> XyzTriple {
    let m = &M_RGB_TO_XYZ;
    XyzTriple {
        x: m[0][0] * r + m[0][1] * g + m[0][2] * b,
        y: m[1][0] * r + m[1][1] * g + m[1][2] * b,
        z: m[2][0] * r + m[2][1] * g + m[2][2] * b,
    }
}

/// One 8-bit sRGB pixel to (L*, a*, b*).
pub fn srgb_to_lab(rgb: [u8; 3], wp: &WhitePoint) -> [f64; 3] {
    let lin_r = srgb_decode(rgb[0] as f64 / 255.0);
    let lin_g = srgb_decode(rgb[1] as f64 / 255.0);
    let lin_b = srgb_decode(rgb[2] as f64 / 255.0);
    let xyz = linear_rgb_to_xyz(lin_r, lin_g, lin_b);
    let fx = g_fwd(xyz.x / wp.xn);
    let fy = g_fwd(xyz.y / wp.yn);
    let fz = g_fwd(xyz.z / wp.zn);
    [
        116.0 * fy - 16.0,
        500.0 * (fx - fy),
        200.0 * (fy - fz),
    ]
}

/// One (L*, a*, b*) pixel back to 8-bit sRGB. Out-of-gamut linear RGB is
/// clamped to [0, 1] before companding.
pub fn lab_to_srgb(lab: [f64; 3], wp: &WhitePoint) -> [u8; 3] {
    let fy = (lab[0] + 16.0) / 116.0;
    let fx = fy + lab[1] / 500.0;
    let fz = fy - lab[2] / 200.0;
    let x = wp.xn * g_inverse(fx);
    let y = wp.yn * g_inverse(fy);
    let z = wp.zn * g_inverse(fz);
    let m = &M_XYZ_TO_RGB;
    let lin = [
        m[0][0] * x + m[0][1] * y + m[0][2] * z,
        m[1][0] * x + m[1][1] * y + m[1][2] * z,
        m[2][0] * x + m[2][1] * y + m[2][2] * z,
    ];
    let mut out = [0u8; 3];
    for (o, c) in out.iter_mut().zip(lin) {
        let encoded = srgb_encode(c.clamp(0.0, 1.0));
        *o = (encoded * 255.0).round().clamp(0.0, 255.0) as u8;
    }
    out
}

/// Convert a full raster to Lab planes.
pub fn rgb_to_lab(image: &RasterImage, wp: &WhitePoint) -> LabImage {
    let n = image.width() as usize * image.height() as usize;
    let mut l = Vec::with_capacity(n);
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for px in image.pixels().chunks_exact(3) {
        let lab = srgb_to_lab([px[0], px[1], px[2]], wp);
        l.push(lab[0] as f32);
        a.push(lab[1] as f32);
        b.push(lab[2] as f32);
    }
    LabImage::new(image.width(), image.height(), l, a, b).expect("raster dims are valid")
}

/// Reconstruct an 8-bit raster from Lab planes; inverse of [`rgb_to_lab`]
/// up to quantization.
pub fn lab_to_rgb(image: &LabImage, wp: &WhitePoint) -> RasterImage {
    let n = image.width() as usize * image.height() as usize;
    let mut pixels = Vec::with_capacity(n * 3);
    for i in 0..n {
        let lab = [
            image.l_plane()[i] as f64,
            image.a_plane()[i] as f64,
            image.b_plane()[i] as f64,
        ];
        pixels.extend_from_slice(&lab_to_srgb(lab, wp));
    }
    RasterImage::new(image.width(), image.height(), pixels).expect("lab dims are valid")
}

/// Grayscale weights for the red, green and blue channels.
pub const GRAY_WEIGHTS: [f64; 3] = [0.2989, 0.587, 0.1141];

/// Weighted grayscale conversion, rounded half away from zero.
pub fn rgb_to_gray(image: &RasterImage) -> GrayImage {
    let n = image.width() as usize * image.height() as usize;
    let mut pixels = Vec::with_capacity(n);
    for px in image.pixels().chunks_exact(3) {
        let v = GRAY_WEIGHTS[0] * px[0] as f64
            + GRAY_WEIGHTS[1] * px[1] as f64
            + GRAY_WEIGHTS[2] * px[2] as f64;
        pixels.push(v.round().clamp(0.0, 255.0) as u8);
    }
    GrayImage::new(image.width(), image.height(), pixels).expect("raster dims are valid")
}
