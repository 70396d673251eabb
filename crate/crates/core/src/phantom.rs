//! Deterministic synthetic candling image with known region truth.
//!
//! The phantom stands in for real candled-egg photographs in every golden
//! test: a dark gradient background, a bright elliptical shell, an interior
//! yolk disk of intermediate luminance, and a few thin darker vessel curves
//! inside the yolk. Region truth is exact by construction (vessels belong to
//! the yolk region).

use crate::raster::{BinaryMask, RasterImage};

/// Ground-truth region masks; pairwise disjoint, union covers the image.
#[derive(Debug, Clone)]
pub struct PhantomTruth {
    pub background: BinaryMask,
    pub egg: BinaryMask,
    pub yolk: BinaryMask,
}

/// Generate the egg phantom at the given size (the usual test size is the
/// 582x778 crop window). Pure function of its arguments.
pub fn egg_phantom(width: u32, height: u32) -> (RasterImage, PhantomTruth) {
    let (w, h) = (width as f64, height as f64);
    let cx = w / 2.0;
    let cy = h / 2.0;
    // Egg ellipse and yolk disk geometry, scaled to the frame.
    let ax = 0.34 * w;
    let ay = 0.42 * h;
    let yolk_r = 0.21 * w.min(h);
    let yolk_cx = cx + 0.04 * w;
    let yolk_cy = cy + 0.06 * h;

    let mut img = RasterImage::filled(width, height, [0, 0, 0]).expect("dims valid");
    let mut bg = BinaryMask::filled(width, height, false).expect("dims valid");
    let mut egg = BinaryMask::filled(width, height, false).expect("dims valid");
    let mut yolk = BinaryMask::filled(width, height, false).expect("dims valid");

    let clamp8 = |v: f64| v.round().clamp(0.0, 255.0) as u8;
    for y in 0..height {
        for x in 0..width {
            let fx = x as f64;
            let fy = y as f64;
            let er = ((fx - cx) / ax).powi(2) + ((fy - cy) / ay).powi(2);
            let yolk_d = ((fx - yolk_cx).powi(2) + (fy - yolk_cy).powi(2)).sqrt();
            let rgb = if er > 1.0 {
                bg.set(x, y, true);
                // Dark bluish gradient.
                [
                    clamp8(24.0 + 10.0 * fy / h),
                    clamp8(26.0 + 8.0 * fy / h),
                    clamp8(38.0 + 12.0 * fx / w),
                ]
            } else if yolk_d <= yolk_r {
                yolk.set(x, y, true);
                // Deep red-orange, slightly brighter toward the center.
                let lift = 14.0 * (1.0 - yolk_d / yolk_r);
                [
                    clamp8(182.0 + lift),
                    clamp8(94.0 + lift),
                    clamp8(40.0 + lift * 0.5),
                ]
            } else {
                egg.set(x, y, true);
                // Warm translucent shell, dimming toward the rim.
                let dim = 16.0 * er;
                [
                    clamp8(246.0 - dim),
                    clamp8(176.0 - dim),
                    clamp8(96.0 - dim * 0.5),
                ]
            };
            img.set(x, y, rgb);
        }
    }

    // Vessel curves: three arcs radiating from the yolk center. They darken
    // the yolk color but stay inside the yolk region truth.
    let vessel = [148u8, 66, 28];
    let steps = 400;
    for arm in 0..3 {
        let theta0 = arm as f64 * 2.0943951023931953; // 2*pi/3
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            let r = t * 0.82 * yolk_r;
            let theta = theta0 + 0.9 * (3.0 * t).sin();
            let px = yolk_cx + r * theta.cos();
            let py = yolk_cy + r * theta.sin();
            // Stamp a small disk so the curve is about two pixels wide.
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let qx = px as i64 + dx;
                    let qy = py as i64 + dy;
                    if qx < 0 || qy < 0 || qx >= width as i64 || qy >= height as i64 {
                        continue;
                    }
                    let (qx, qy) = (qx as u32, qy as u32);
                    if yolk.get(qx, qy) {
                        img.set(qx, qy, vessel);
                    }
                }
            }
        }
    }

    (
        img,
        PhantomTruth {
            background: bg,
            egg,
            yolk,
        },
    )
}

/// Intersection-over-union of two masks.
pub fn iou(a: &BinaryMask, b: &BinaryMask) -> f64 {
    let mut inter = 0usize;
    let mut union = 0usize;
    for (&pa, &pb) in a.pixels().iter().zip(b.pixels()) {
        if pa && pb {
            inter += 1;
        }
        if pa || pb {
            union += 1;
        }
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}
