//! Histogram equalization and contrast-limited adaptive equalization.
//!
//! HE maps intensity v to `round(255 * CDF(v))` where the CDF accumulates the
//! normalized histogram; a constant image therefore maps to 255 (its single
//! level has CDF 1). CLAHE applies the same mapping per tile after clipping
//! the tile histogram at the limit of [`compute_clip_limit`] and spreading
//! the excess uniformly; pixel values bilinearly interpolate the mappings of
//! the surrounding tile centers.

use crate::error::{Error, Result};
use crate::raster::GrayImage;

/// 256-bin intensity histogram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub bins: [u64; 256],
    pub total: u64,
}

/// Count pixel intensities.
pub fn histogram(image: &GrayImage) -> Histogram {
    let mut bins = [0u64; 256];
    for &p in image.pixels() {
        bins[p as usize] += 1;
    }
    Histogram {
        bins,
        total: image.pixels().len() as u64,
    }
}

/// CLAHE parameters. `clip_alpha` is the clip factor in [0, 100]; `s_max`
/// the maximum-slope parameter of the clip-limit formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClaheParams {
    pub tiles_x: u32,
    pub tiles_y: u32,
    pub clip_alpha: f64,
    pub s_max: f64,
}

impl Default for ClaheParams {
    fn default() -> Self {
        ClaheParams {
            tiles_x: 8,
            tiles_y: 8,
            clip_alpha: 50.0,
            s_max: 4.0,
        }
    }
}

impl ClaheParams {
    pub fn validate(&self) -> Result<()> {
        if self.tiles_x < 1 || self.tiles_y < 1 {
            return Err(Error::InvalidConfig {
                message: "clahe_tiles must be at least 1x1".into(),
            });
        }
        if !(0.0..=100.0).contains(&self.clip_alpha) {
            return Err(Error::InvalidConfig {
                message: format!("clahe_alpha {} must lie in [0, 100]", self.clip_alpha),
            });
        }
        if self.s_max < 1.0 {
            return Err(Error::InvalidConfig {
                message: format!("clahe_smax {} must be at least 1", self.s_max),
            });
        }
        Ok(())
    }
}

/// Histogram clip limit `beta = (M/n) * (1 + alpha/100 * (s_max - 1))` with
/// M the tile pixel count and n = 256 gray levels.
pub fn compute_clip_limit(tile_pixels: usize, params: &ClaheParams) -> f64 {
    let m = tile_pixels as f64;
    let n = 256.0;
    (m / n) * (1.0 + params.clip_alpha / 100.0 * (params.s_max - 1.0))
}

/// Clip bins at `beta` and spread the excess uniformly over all 256 bins,
/// repeating until the residual excess is under one count. The total mass is
/// preserved and no bin ends more than one count above `beta`.
///
/// A limit below the average bin height is infeasible (the redistributed
/// mass would overflow forever) and is clamped up to it; the limits from
/// [`compute_clip_limit`] are always feasible.
pub fn clip_histogram(bins: &mut [f64; 256], beta: f64) {
    let total: f64 = bins.iter().sum();
    let beta = beta.max(total / 256.0);
    loop {
        let mut excess = 0.0;
        for b in bins.iter_mut() {
            if *b > beta {
                excess += *b - beta;
                *b = beta;
            }
        }
        if excess == 0.0 {
            return;
        }
        let share = excess / 256.0;
        for b in bins.iter_mut() {
            *b += share;
        }
        if excess < 1.0 {
            return;
        }
    }
}

/// Equalization transfer function for a (possibly fractional) histogram:
/// 255 times the cumulative distribution, before rounding.
fn equalize_lut(bins: &[f64; 256]) -> [f64; 256] {
    let total: f64 = bins.iter().sum();
    let mut lut = [0.0f64; 256];
    let mut cum = 0.0;
    for (out, &b) in lut.iter_mut().zip(bins.iter()) {
        cum += b;
        *out = 255.0 * cum / total;
    }
    lut
}

#[inline]
fn round_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Histogram equalization over the whole image.
pub fn equalize(image: &GrayImage) -> GrayImage {
    let hist = histogram(image);
    let mut bins = [0.0f64; 256];
    for (dst, &src) in bins.iter_mut().zip(hist.bins.iter()) {
        *dst = src as f64;
    }
    let lut = equalize_lut(&bins);
    let pixels = image.pixels().iter().map(|&p| round_u8(lut[p as usize])).collect();
    GrayImage::new(image.width(), image.height(), pixels).expect("dims unchanged")
}

/// Tile boundary k of `tiles` over an axis of `extent` pixels.
fn tile_edge(extent: u32, tiles: u32, k: u32) -> u32 {
    ((k as u64 * extent as u64) / tiles as u64) as u32
}

/// Contrast-limited adaptive histogram equalization.
///
/// The image must be at least one pixel per tile in each axis. With a 1x1
/// tile grid and a clip limit at or above the peak bin this reduces exactly
/// to [`equalize`].
pub fn clahe(image: &GrayImage, params: &ClaheParams) -> Result<GrayImage> {
    params.validate()?;
    let (w, h) = (image.width(), image.height());
    let (tx, ty) = (params.tiles_x, params.tiles_y);
    if w < tx || h < ty {
        return Err(Error::InvalidConfig {
            message: format!("image {w}x{h} is smaller than the {tx}x{ty} tile grid"),
        });
    }

    // Per-tile transfer functions and tile center coordinates.
    let mut luts = Vec::with_capacity((tx * ty) as usize);
    let mut centers_x = Vec::with_capacity(tx as usize);
    let mut centers_y = Vec::with_capacity(ty as usize);
    for j in 0..ty {
        let (y0, y1) = (tile_edge(h, ty, j), tile_edge(h, ty, j + 1));
        if j == 0 {
            for i in 0..tx {
                let (x0, x1) = (tile_edge(w, tx, i), tile_edge(w, tx, i + 1));
                centers_x.push((x0 + x1 - 1) as f64 / 2.0);
            }
        }
        centers_y.push((y0 + y1 - 1) as f64 / 2.0);
        for i in 0..tx {
            let (x0, x1) = (tile_edge(w, tx, i), tile_edge(w, tx, i + 1));
            let mut bins = [0.0f64; 256];
            for y in y0..y1 {
                for x in x0..x1 {
                    bins[image.get(x, y) as usize] += 1.0;
                }
            }
            let tile_pixels = ((x1 - x0) * (y1 - y0)) as usize;
            let beta = compute_clip_limit(tile_pixels, params);
            clip_histogram(&mut bins, beta);
            luts.push(equalize_lut(&bins));
        }
    }

    let lut_at = |i: usize, j: usize| -> &[f64; 256] { &luts[j * tx as usize + i] };
    // Neighboring tile indices and interpolation weight along one axis;
    // clamped at the borders.
    let axis = |coord: f64, centers: &[f64]| -> (usize, usize, f64) {
        if coord <= centers[0] {
            return (0, 0, 0.0);
        }
        if coord >= centers[centers.len() - 1] {
            let last = centers.len() - 1;
            return (last, last, 0.0);
        }
        let hi = centers.partition_point(|&c| c < coord);
        let lo = hi - 1;
        let t = (coord - centers[lo]) / (centers[hi] - centers[lo]);
        (lo, hi, t)
    };

    let mut pixels = Vec::with_capacity(w as usize * h as usize);
    for y in 0..h {
        let (j0, j1, wy) = axis(y as f64, &centers_y);
        for x in 0..w {
            let (i0, i1, wx) = axis(x as f64, &centers_x);
            let v = image.get(x, y) as usize;
            let top = (1.0 - wx) * lut_at(i0, j0)[v] + wx * lut_at(i1, j0)[v];
            let bottom = (1.0 - wx) * lut_at(i0, j1)[v] + wx * lut_at(i1, j1)[v];
            pixels.push(round_u8((1.0 - wy) * top + wy * bottom));
        }
    }
    Ok(GrayImage::new(w, h, pixels).expect("dims unchanged"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    #[test]
    fn histogram_counts_single_level() {
        let img = GrayImage::filled(2, 2, 7).unwrap();
        let hist = histogram(&img);
        assert_eq!(hist.bins[7], 4);
        assert_eq!(hist.total, 4);
        assert_eq!(hist.bins.iter().sum::<u64>(), 4);
    }

    #[test]
    fn histogram_of_minimal_image() {
        let img = GrayImage::filled(1, 1, 200).unwrap();
        assert_eq!(histogram(&img).total, 1);
    }

    #[test]
    fn histogram_two_levels() {
        let img = GrayImage::new(4, 1, vec![0, 0, 255, 255]).unwrap();
        let hist = histogram(&img);
        assert_eq!(hist.bins[0], 2);
        assert_eq!(hist.bins[255], 2);
    }

    #[test]
    fn equalize_constant_maps_to_255() {
        let img = GrayImage::filled(3, 3, 42).unwrap();
        assert!(equalize(&img).pixels().iter().all(|&p| p == 255));
    }

    #[test]
    fn equalize_hand_evaluated_fixture() {
        // CDF(0) = 3/4 -> round(255 * 0.75) = 191; CDF(255) = 1 -> 255.
        let img = GrayImage::new(4, 1, vec![0, 0, 0, 255]).unwrap();
        assert_eq!(equalize(&img).pixels(), &[191, 191, 191, 255]);
    }

    #[test]
    fn equalize_uniform_ramp_against_cdf_oracle() {
        // 16x16 ramp hitting every level once: CDF(v) = (v+1)/256, so the
        // mapping is round(255 * (v+1) / 256) -- the identity ramp shifted by
        // at most one level.
        let pixels: Vec<u8> = (0..=255).collect();
        let img = GrayImage::new(16, 16, pixels).unwrap();
        let out = equalize(&img);
        for v in 0..=255usize {
            let expect = (255.0 * (v as f64 + 1.0) / 256.0).round() as u8;
            assert_eq!(out.pixels()[v], expect, "level {v}");
            assert!((out.pixels()[v] as i16 - v as i16).abs() <= 1);
        }
    }

    #[test]
    fn equalize_mapping_is_monotone() {
        let mut rng = SplitMix64::new(3);
        for _ in 0..50 {
            let pixels: Vec<u8> = (0..256).map(|_| (rng.next_u64() & 0xff) as u8).collect();
            let img = GrayImage::new(16, 16, pixels).unwrap();
            let out = equalize(&img);
            let mut pairs: Vec<(u8, u8)> = img
                .pixels()
                .iter()
                .zip(out.pixels())
                .map(|(&a, &b)| (a, b))
                .collect();
            pairs.sort_unstable();
            for w in pairs.windows(2) {
                assert!(w[0].1 <= w[1].1, "not monotone: {:?}", &w[..2]);
            }
        }
    }

    #[test]
    fn clip_limit_alpha_zero_is_average_height() {
        let params = ClaheParams {
            clip_alpha: 0.0,
            ..ClaheParams::default()
        };
        assert_eq!(compute_clip_limit(4096, &params), 16.0);
    }

    #[test]
    fn clip_limit_direct_evaluations() {
        let p1 = ClaheParams {
            clip_alpha: 100.0,
            s_max: 4.0,
            ..ClaheParams::default()
        };
        assert_eq!(compute_clip_limit(4096, &p1), 64.0);
        let p2 = ClaheParams {
            clip_alpha: 50.0,
            s_max: 3.0,
            ..ClaheParams::default()
        };
        assert_eq!(compute_clip_limit(256, &p2), 2.0);
    }

    #[test]
    fn clipping_bounds_bins_and_preserves_mass() {
        let mut rng = SplitMix64::new(11);
        for _ in 0..100 {
            let mut bins = [0.0f64; 256];
            for b in bins.iter_mut() {
                *b = (rng.next_u64() % 50) as f64;
            }
            // A couple of tall spikes force redistribution.
            bins[(rng.next_u64() % 256) as usize] += 900.0;
            bins[(rng.next_u64() % 256) as usize] += 500.0;
            let total: f64 = bins.iter().sum();
            // Keep the limit feasible: at least the average bin height.
            let beta = (total / 256.0).max(30.0);
            clip_histogram(&mut bins, beta);
            for (i, &b) in bins.iter().enumerate() {
                assert!(b <= beta + 1.0, "bin {i} = {b} exceeds beta + 1");
            }
            let after: f64 = bins.iter().sum();
            assert!((after - total).abs() < 1e-6);
        }
    }

    #[test]
    fn infeasible_clip_limit_is_clamped_not_hung() {
        let mut bins = [10.0f64; 256];
        bins[0] = 500.0;
        let total: f64 = bins.iter().sum();
        clip_histogram(&mut bins, 1.0);
        let after: f64 = bins.iter().sum();
        assert!((after - total).abs() < 1e-6);
        let avg = total / 256.0;
        assert!(bins.iter().all(|&b| b <= avg + 1.0));
    }

    #[test]
    fn clahe_1x1_with_large_limit_equals_equalize() {
        let mut rng = SplitMix64::new(19);
        let pixels: Vec<u8> = (0..4096).map(|_| (rng.next_u64() & 0xff) as u8).collect();
        let img = GrayImage::new(64, 64, pixels).unwrap();
        // beta = (4096/256) * (1 + 1.0 * 299) = 4800 >= any bin count.
        let params = ClaheParams {
            tiles_x: 1,
            tiles_y: 1,
            clip_alpha: 100.0,
            s_max: 300.0,
        };
        assert_eq!(clahe(&img, &params).unwrap(), equalize(&img));
    }

    #[test]
    fn clahe_constant_image_without_clipping_is_255() {
        let img = GrayImage::filled(32, 32, 90).unwrap();
        let params = ClaheParams {
            tiles_x: 4,
            tiles_y: 4,
            clip_alpha: 100.0,
            s_max: 300.0,
        };
        let out = clahe(&img, &params).unwrap();
        assert!(out.pixels().iter().all(|&p| p == 255));
    }

    #[test]
    fn clahe_constant_image_is_spatially_constant_under_clipping() {
        // With the clip active the degenerate histogram is spread over all
        // bins, so the constant value maps through the redistributed CDF;
        // the output must still be constant across the image.
        let img = GrayImage::filled(32, 32, 90).unwrap();
        let out = clahe(&img, &ClaheParams::default()).unwrap();
        let first = out.pixels()[0];
        assert!(out.pixels().iter().all(|&p| p == first));
    }

    #[test]
    fn operators_idempotent_on_constant_inputs() {
        let img = GrayImage::filled(16, 16, 73).unwrap();
        let once = equalize(&img);
        assert_eq!(equalize(&once), once);
        // CLAHE under the same no-clip regime as the constant-to-255
        // convention.
        let params = ClaheParams {
            tiles_x: 2,
            tiles_y: 2,
            clip_alpha: 100.0,
            s_max: 300.0,
        };
        let once = clahe(&img, &params).unwrap();
        assert_eq!(clahe(&once, &params).unwrap(), once);
    }

    #[test]
    fn clahe_rejects_image_smaller_than_grid() {
        let img = GrayImage::filled(4, 4, 10).unwrap();
        let params = ClaheParams {
            tiles_x: 8,
            tiles_y: 8,
            ..ClaheParams::default()
        };
        assert!(matches!(
            clahe(&img, &params).unwrap_err(),
            Error::InvalidConfig { .. }
        ));
    }

    #[test]
    fn clahe_output_matches_tiled_he_oracle_without_clipping() {
        // With the clip limit above every bin, CLAHE is tiled HE with
        // interpolated mappings. In the corner zones (outside all tile
        // centers) the indices clamp to a single tile, so the output there
        // must equal plain per-tile HE.
        let mut rng = SplitMix64::new(23);
        let pixels: Vec<u8> = (0..4096).map(|_| (rng.next_u64() & 0xff) as u8).collect();
        let img = GrayImage::new(64, 64, pixels).unwrap();
        let params = ClaheParams {
            tiles_x: 2,
            tiles_y: 2,
            clip_alpha: 100.0,
            s_max: 300.0,
        };
        let out = clahe(&img, &params).unwrap();
        // Tile centers sit at 15.5 and 47.5; coordinates <= 15 clamp to the
        // first tile and >= 48 to the last.
        for (i, j, xs, ys) in [
            (0u32, 0u32, 0u32..=15, 0u32..=15),
            (1, 1, 48u32..=63, 48u32..=63),
        ] {
            let tile = img
                .crop(crate::raster::Rect::new(i * 32, j * 32, 32, 32))
                .unwrap();
            let oracle = equalize(&tile);
            for y in ys {
                for x in xs.clone() {
                    assert_eq!(
                        out.get(x, y),
                        oracle.get(x - i * 32, y - j * 32),
                        "pixel ({x},{y}) in tile ({i},{j})"
                    );
                }
            }
        }
    }
}
