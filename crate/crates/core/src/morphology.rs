//! Binarization, dilation, morphological thickening and Canny edges.
//!
//! Out-of-bounds reads are background for all mask operations; the Gaussian
//! blur inside Canny replicates edge pixels instead.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::raster::{BinaryMask, GrayImage};

/// Structuring element: a set of (dx, dy) offsets around the origin, dy
/// growing downward in raster order.
#[derive(Debug, Clone, PartialEq)]
pub struct Strel {
    offsets: Vec<(i32, i32)>,
    kind: StrelKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StrelKind {
    Line { length: u32, angle_degrees: f64 },
    Square { side: u32 },
    Custom,
}

impl Strel {
    /// Line strel: the Bresenham rasterization of a centered segment.
    ///
    /// Angles follow the usual y-up convention, so a 45-degree line of
    /// length 3 yields offsets (-1,1), (0,0), (1,-1) in raster coordinates.
    /// Length 1 degenerates to the single origin pixel (an identity
    /// dilation) for any angle.
    pub fn line(length: u32, angle_degrees: f64) -> Strel {
        let length = length.max(1);
        let half = (length - 1) as f64 / 2.0;
        let theta = angle_degrees.to_radians();
        let ex = (half * theta.cos()).round() as i32;
        let ey = (half * theta.sin()).round() as i32;
        let mut set = BTreeSet::new();
        for (x, y_up) in bresenham((-ex, -ey), (ex, ey)) {
            set.insert((x, -y_up));
        }
        Strel {
            offsets: set.into_iter().collect(),
            kind: StrelKind::Line {
                length,
                angle_degrees,
            },
        }
    }

    /// Square strel of the given odd side, centered on the origin.
    pub fn square(side: u32) -> Strel {
        let side = side.max(1);
        let r = (side / 2) as i32;
        let lo = r - side as i32 + 1;
        let mut offsets = Vec::new();
        for dy in lo..=r {
            for dx in lo..=r {
                offsets.push((dx, dy));
            }
        }
        Strel {
            offsets,
            kind: StrelKind::Square { side },
        }
    }

    pub fn custom(offsets: Vec<(i32, i32)>) -> Strel {
        let set: BTreeSet<(i32, i32)> = offsets.into_iter().collect();
        Strel {
            offsets: set.into_iter().collect(),
            kind: StrelKind::Custom,
        }
    }

    pub fn offsets(&self) -> &[(i32, i32)] {
        &self.offsets
    }

    pub fn kind(&self) -> &StrelKind {
        &self.kind
    }
}

fn bresenham(from: (i32, i32), to: (i32, i32)) -> Vec<(i32, i32)> {
    let (mut x, mut y) = from;
    let dx = (to.0 - x).abs();
    let dy = -(to.1 - y).abs();
    let sx = if x < to.0 { 1 } else { -1 };
    let sy = if y < to.1 { 1 } else { -1 };
    let mut err = dx + dy;
    let mut points = Vec::new();
    loop {
        points.push((x, y));
        if (x, y) == to {
            return points;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// Binary dilation: output(p) is foreground iff some strel offset b has
/// mask(p - b) foreground.
pub fn dilate(mask: &BinaryMask, strel: &Strel) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    let mut out = BinaryMask::filled(w, h, false).expect("dims valid");
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let hit = strel
                .offsets()
                .iter()
                .any(|&(dx, dy)| mask.get_or_background(x - dx as i64, y - dy as i64));
            if hit {
                out.set(x as u32, y as u32, true);
            }
        }
    }
    out
}

/// Otsu threshold: the gray level maximizing between-class variance.
/// Pixels strictly above the level are foreground; a constant image yields
/// an all-background mask.
pub fn otsu_level(image: &GrayImage) -> u8 {
    let hist = crate::enhance::histogram(image);
    let total = hist.total as f64;
    let total_sum: f64 = hist
        .bins
        .iter()
        .enumerate()
        .map(|(v, &c)| v as f64 * c as f64)
        .sum();

    let mut best_t = 0u8;
    let mut best_var = 0.0f64;
    let mut w0 = 0.0f64;
    let mut sum0 = 0.0f64;
    for t in 0..256usize {
        w0 += hist.bins[t] as f64;
        sum0 += t as f64 * hist.bins[t] as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let mean_diff = sum0 / w0 - (total_sum - sum0) / w1;
        let var = w0 * w1 * mean_diff * mean_diff;
        if var > best_var {
            best_var = var;
            best_t = t as u8;
        }
    }
    if best_var == 0.0 {
        // Constant image: no split has positive variance; threshold above
        // every level so the mask comes out all-background.
        return 255;
    }
    best_t
}

/// Binarize with the Otsu threshold.
pub fn binarize_otsu(image: &GrayImage) -> BinaryMask {
    let level = otsu_level(image);
    let pixels = image.pixels().iter().map(|&p| p > level).collect();
    BinaryMask::new(image.width(), image.height(), pixels).expect("dims valid")
}

/// Hit-or-miss cell requirement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cell {
    Fg,
    Bg,
    DontCare,
}

/// The 8-neighborhood ring in clockwise order starting at the top-left.
const RING: [(i32, i32); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
];

/// Thickening templates: the Golay-style L element (full foreground row
/// opposite a full background row, don't-care flanks, background center)
/// rotated through the eight 45-degree steps.
fn thicken_templates() -> [[Cell; 8]; 8] {
    use Cell::{Bg, DontCare as Dc, Fg};
    let base = [Fg, Fg, Fg, Dc, Bg, Bg, Bg, Dc];
    let mut out = [[Dc; 8]; 8];
    for (k, tpl) in out.iter_mut().enumerate() {
        for (i, cell) in tpl.iter_mut().enumerate() {
            *cell = base[(i + 8 - k) % 8];
        }
    }
    out
}

fn hit_or_miss_at(mask: &BinaryMask, x: i64, y: i64, ring: &[Cell; 8]) -> bool {
    // Thickening adds only background pixels.
    if mask.get_or_background(x, y) {
        return false;
    }
    for (cell, &(dx, dy)) in ring.iter().zip(RING.iter()) {
        let v = mask.get_or_background(x + dx as i64, y + dy as i64);
        match cell {
            Cell::Fg if !v => return false,
            Cell::Bg if v => return false,
            _ => {}
        }
    }
    true
}

/// Morphological thickening: union the mask with the hit-or-miss matches of
/// each rotated template in sequence, one full template sweep per pass,
/// until a fixpoint or `max_passes` passes. The output is always a superset
/// of the input.
pub fn thicken(mask: &BinaryMask, max_passes: usize) -> BinaryMask {
    let templates = thicken_templates();
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let mut current = mask.clone();
    for _ in 0..max_passes {
        let mut changed = false;
        for tpl in &templates {
            let mut additions = Vec::new();
            for y in 0..h {
                for x in 0..w {
                    if hit_or_miss_at(&current, x, y, tpl) {
                        additions.push((x as u32, y as u32));
                    }
                }
            }
            if !additions.is_empty() {
                changed = true;
                for (x, y) in additions {
                    current.set(x, y, true);
                }
            }
        }
        if !changed {
            break;
        }
    }
    current
}

/// Run [`thicken`] until it stabilizes.
pub fn thicken_to_fixpoint(mask: &BinaryMask) -> BinaryMask {
    thicken(mask, usize::MAX)
}

/// Canny parameters. Thresholds are ratios of the maximum gradient
/// magnitude; edge components smaller than `min_edge_size` are discarded in
/// the cleanup step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CannyParams {
    pub gaussian_sigma: f64,
    pub low_ratio: f64,
    pub high_ratio: f64,
    pub min_edge_size: usize,
}

impl Default for CannyParams {
    fn default() -> Self {
        CannyParams {
            gaussian_sigma: 1.4,
            low_ratio: 0.10,
            high_ratio: 0.25,
            min_edge_size: 4,
        }
    }
}

impl CannyParams {
    pub fn validate(&self) -> Result<()> {
        // NaN fails every comparison, so these also reject NaN inputs.
        let sigma_ok = self.gaussian_sigma > 0.0;
        if !sigma_ok {
            return Err(crate::error::Error::InvalidConfig {
                message: format!("canny_sigma {} must be positive", self.gaussian_sigma),
            });
        }
        let thresholds_ok =
            0.0 < self.low_ratio && self.low_ratio < self.high_ratio && self.high_ratio < 1.0;
        if !thresholds_ok {
            return Err(crate::error::Error::InvalidConfig {
                message: format!(
                    "canny thresholds must satisfy 0 < low ({}) < high ({}) < 1",
                    self.low_ratio, self.high_ratio
                ),
            });
        }
        Ok(())
    }
}

/// Separable Gaussian blur with edge replication; kernel radius ceil(3 sigma).
fn gaussian_blur(image: &GrayImage, sigma: f64) -> Vec<f64> {
    let (w, h) = (image.width() as usize, image.height() as usize);
    let radius = (3.0 * sigma).ceil() as i64;
    let mut kernel = Vec::with_capacity((2 * radius + 1) as usize);
    for i in -radius..=radius {
        kernel.push((-((i * i) as f64) / (2.0 * sigma * sigma)).exp());
    }
    let norm: f64 = kernel.iter().sum();
    for k in kernel.iter_mut() {
        *k /= norm;
    }

    let clamp = |v: i64, n: usize| v.clamp(0, n as i64 - 1) as usize;
    let mut horiz = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (ki, kv) in kernel.iter().enumerate() {
                let sx = clamp(x as i64 + ki as i64 - radius, w);
                acc += kv * image.pixels()[y * w + sx] as f64;
            }
            horiz[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (ki, kv) in kernel.iter().enumerate() {
                let sy = clamp(y as i64 + ki as i64 - radius, h);
                acc += kv * horiz[sy * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Canny edge detection: Gaussian blur, Sobel gradients, four-sector
/// non-maximum suppression, double thresholding relative to the maximum
/// gradient magnitude, hysteresis tracking, and removal of small components.
///
/// NMS keeps a pixel when it is strictly greater than its preceding
/// neighbor along the gradient direction and at least equal to the
/// following one, so magnitude plateaus resolve to a single-pixel edge.
pub fn canny(image: &GrayImage, params: &CannyParams) -> BinaryMask {
    let (w, h) = (image.width() as usize, image.height() as usize);
    let blurred = gaussian_blur(image, params.gaussian_sigma);

    // Sobel gradients over the interior.
    let mut gx = vec![0.0f64; w * h];
    let mut gy = vec![0.0f64; w * h];
    let mut mag = vec![0.0f64; w * h];
    let mut max_mag = 0.0f64;
    if w >= 3 && h >= 3 {
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                let p = |dx: i64, dy: i64| {
                    blurred[(y as i64 + dy) as usize * w + (x as i64 + dx) as usize]
                };
                // Difference-first ordering keeps the response exactly zero
                // on constant neighborhoods.
                let sx = (p(1, -1) - p(-1, -1)) + 2.0 * (p(1, 0) - p(-1, 0)) + (p(1, 1) - p(-1, 1));
                let sy = (p(-1, 1) - p(-1, -1)) + 2.0 * (p(0, 1) - p(0, -1)) + (p(1, 1) - p(1, -1));
                let m = sx.hypot(sy);
                gx[y * w + x] = sx;
                gy[y * w + x] = sy;
                mag[y * w + x] = m;
                if m > max_mag {
                    max_mag = m;
                }
            }
        }
    }
    let mut edges = BinaryMask::filled(image.width(), image.height(), false).expect("dims valid");
    if max_mag == 0.0 {
        return edges;
    }

    // Non-maximum suppression with deterministic plateau resolution.
    let mut nms = vec![0.0f64; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let m = mag[y * w + x];
            if m == 0.0 {
                continue;
            }
            let mut angle = gy[y * w + x].atan2(gx[y * w + x]).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            // Sector neighbors ordered (preceding, following) in scan order.
            let (pre, post) = if !(22.5..157.5).contains(&angle) {
                (mag[y * w + x - 1], mag[y * w + x + 1])
            } else if angle < 67.5 {
                (mag[(y - 1) * w + x - 1], mag[(y + 1) * w + x + 1])
            } else if angle < 112.5 {
                (mag[(y - 1) * w + x], mag[(y + 1) * w + x])
            } else {
                (mag[(y - 1) * w + x + 1], mag[(y + 1) * w + x - 1])
            };
            if m > pre && m >= post {
                nms[y * w + x] = m;
            }
        }
    }

    // Double threshold + hysteresis, 8-connected.
    let low = params.low_ratio * max_mag;
    let high = params.high_ratio * max_mag;
    let mut stack = Vec::new();
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            if nms[y * w + x] >= high && !edges.get(x as u32, y as u32) {
                edges.set(x as u32, y as u32, true);
                stack.push((x, y));
                while let Some((cx, cy)) = stack.pop() {
                    for dy in -1i64..=1 {
                        for dx in -1i64..=1 {
                            if dx == 0 && dy == 0 {
                                continue;
                            }
                            let nx = cx as i64 + dx;
                            let ny = cy as i64 + dy;
                            if nx < 1 || ny < 1 || nx >= w as i64 - 1 || ny >= h as i64 - 1 {
                                continue;
                            }
                            let (nx, ny) = (nx as usize, ny as usize);
                            if nms[ny * w + nx] >= low && !edges.get(nx as u32, ny as u32) {
                                edges.set(nx as u32, ny as u32, true);
                                stack.push((nx, ny));
                            }
                        }
                    }
                }
            }
        }
    }

    remove_small_components(&edges, params.min_edge_size)
}

/// Drop 8-connected foreground components smaller than `min_size`.
pub fn remove_small_components(mask: &BinaryMask, min_size: usize) -> BinaryMask {
    if min_size <= 1 {
        return mask.clone();
    }
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let mut out = mask.clone();
    let mut visited = vec![false; (w * h) as usize];
    let mut component = Vec::new();
    let mut stack = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let idx = (y * w + x) as usize;
            if visited[idx] || !mask.get(x as u32, y as u32) {
                continue;
            }
            component.clear();
            stack.push((x, y));
            visited[idx] = true;
            while let Some((cx, cy)) = stack.pop() {
                component.push((cx, cy));
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (nx, ny) = (cx + dx, cy + dy);
                        if nx < 0 || ny < 0 || nx >= w || ny >= h {
                            continue;
                        }
                        let nidx = (ny * w + nx) as usize;
                        if !visited[nidx] && mask.get(nx as u32, ny as u32) {
                            visited[nidx] = true;
                            stack.push((nx, ny));
                        }
                    }
                }
            }
            if component.len() < min_size {
                for &(cx, cy) in &component {
                    out.set(cx as u32, cy as u32, false);
                }
            }
        }
    }
    out
}
