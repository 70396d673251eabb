//! Lab-space segmentation and mapping of clusters onto candling regions.
//!
//! Clusters are ranked by their mean L*: the darkest cluster is named the
//! background (candling happens in a dark room), the brightest the egg, and
//! the middle-ranked one the yolk. The ranking is a heuristic and the
//! pipeline lets callers retain any region for the second phase.

use crate::colorspace::LabImage;
use crate::error::{Error, Result};
use crate::kmeans::{kmeans, ClusterModel, FeatureMatrix, FeatureMode, KmeansOptions};
use crate::raster::{BinaryMask, GrayImage};

/// Candling region names for the k = 3 clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Region {
    Background,
    Egg,
    Yolk,
}

impl Region {
    pub fn name(&self) -> &'static str {
        match self {
            Region::Background => "background",
            Region::Egg => "egg",
            Region::Yolk => "yolk",
        }
    }
}

/// Cluster ids for the three named regions. For k = 3 this is a bijection
/// onto the cluster ids; for other k the yolk takes the middle luminance
/// rank and may coincide with another region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionAssignment {
    pub background: usize,
    pub egg: usize,
    pub yolk: usize,
}

impl RegionAssignment {
    pub fn cluster_for(&self, region: Region) -> usize {
        match region {
            Region::Background => self.background,
            Region::Egg => self.egg,
            Region::Yolk => self.yolk,
        }
    }
}

/// Output of [`segment_lab`]: the label raster, per-cluster masks (pairwise
/// disjoint, union covering the image) and the region naming.
#[derive(Debug, Clone)]
pub struct SegmentationResult {
    /// Cluster id per pixel, stored as an 8-bit raster.
    pub label_map: GrayImage,
    pub region_assignment: RegionAssignment,
    pub cluster_masks: Vec<BinaryMask>,
    pub model: ClusterModel,
    /// Mean L* of each cluster, indexed by cluster id.
    pub cluster_mean_l: Vec<f64>,
}

impl SegmentationResult {
    pub fn mask_for(&self, region: Region) -> &BinaryMask {
        &self.cluster_masks[self.region_assignment.cluster_for(region)]
    }
}

/// Cluster a Lab image into k regions.
///
/// Features are built per `mode`, k-means runs with the given seed and
/// options, and clusters are named by ranking mean L* (computed from the L
/// plane, so the `ab` feature mode ranks correctly too).
pub fn segment_lab(
    image: &LabImage,
    k: usize,
    seed: u64,
    opts: KmeansOptions,
    mode: FeatureMode,
) -> Result<SegmentationResult> {
    if k > u8::MAX as usize {
        return Err(Error::InvalidConfig {
            message: format!("k = {k} exceeds the 255-cluster label raster"),
        });
    }
    let points = FeatureMatrix::from_lab(image, mode);
    let model = kmeans(&points, k, seed, opts)?;

    let n = points.len();
    let mut label_pixels = Vec::with_capacity(n);
    let mut l_sums = vec![0.0f64; k];
    let mut counts = vec![0usize; k];
    for (i, &label) in model.labels.iter().enumerate() {
        label_pixels.push(label as u8);
        l_sums[label as usize] += image.l_plane()[i] as f64;
        counts[label as usize] += 1;
    }
    let label_map = GrayImage::new(image.width(), image.height(), label_pixels)?;

    let mut cluster_masks = Vec::with_capacity(k);
    for j in 0..k {
        let pixels = model.labels.iter().map(|&l| l as usize == j).collect();
        cluster_masks.push(BinaryMask::new(image.width(), image.height(), pixels)?);
    }

    let cluster_mean_l: Vec<f64> = (0..k)
        .map(|j| {
            if counts[j] > 0 {
                l_sums[j] / counts[j] as f64
            } else {
                f64::INFINITY
            }
        })
        .collect();

    // Rank clusters dark to bright; ties resolve to the lower cluster id.
    let mut ranked: Vec<usize> = (0..k).collect();
    ranked.sort_by(|&a, &b| {
        cluster_mean_l[a]
            .partial_cmp(&cluster_mean_l[b])
            .unwrap()
            .then(a.cmp(&b))
    });
    let region_assignment = RegionAssignment {
        background: ranked[0],
        egg: ranked[k - 1],
        yolk: ranked[(k - 1).div_ceil(2)],
    };

    Ok(SegmentationResult {
        label_map,
        region_assignment,
        cluster_masks,
        model,
        cluster_mean_l,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colorspace::{rgb_to_lab, WhitePoint};
    use crate::raster::RasterImage;

    /// Three uniform horizontal bands: dark, bright, middle.
    fn banded_image() -> RasterImage {
        let mut img = RasterImage::filled(12, 12, [0, 0, 0]).unwrap();
        for y in 0..12 {
            let rgb = match y {
                0..=3 => [20, 22, 30],    // dark band
                4..=7 => [250, 200, 120], // bright band
                _ => [180, 90, 40],       // middle band
            };
            for x in 0..12 {
                img.set(x, y, rgb);
            }
        }
        img
    }

    #[test]
    fn recovers_three_constant_regions_exactly() {
        let lab = rgb_to_lab(&banded_image(), &WhitePoint::d65());
        let seg = segment_lab(&lab, 3, 7, KmeansOptions::default(), FeatureMode::Lab).unwrap();
        // Every band must be a single constant label.
        let is_constant_band = |y0: u32, y1: u32| {
            let first = seg.label_map.get(0, y0);
            (y0..=y1).all(|y| (0..12).all(|x| seg.label_map.get(x, y) == first))
        };
        assert!(is_constant_band(0, 3));
        assert!(is_constant_band(4, 7));
        assert!(is_constant_band(8, 11));
        // And the three bands get three different labels.
        let l0 = seg.label_map.get(0, 0);
        let l1 = seg.label_map.get(0, 4);
        let l2 = seg.label_map.get(0, 8);
        assert!(l0 != l1 && l1 != l2 && l0 != l2);
    }

    #[test]
    fn regions_rank_by_luminance() {
        let lab = rgb_to_lab(&banded_image(), &WhitePoint::d65());
        let seg = segment_lab(&lab, 3, 7, KmeansOptions::default(), FeatureMode::Lab).unwrap();
        let ra = seg.region_assignment;
        assert_eq!(ra.background as u8, seg.label_map.get(0, 0));
        assert_eq!(ra.egg as u8, seg.label_map.get(0, 4));
        assert_eq!(ra.yolk as u8, seg.label_map.get(0, 8));
        // Bijection for k = 3.
        let mut ids = [ra.background, ra.egg, ra.yolk];
        ids.sort_unstable();
        assert_eq!(ids, [0, 1, 2]);
    }

    #[test]
    fn masks_are_disjoint_and_covering() {
        let lab = rgb_to_lab(&banded_image(), &WhitePoint::d65());
        let seg = segment_lab(&lab, 3, 11, KmeansOptions::default(), FeatureMode::Lab).unwrap();
        let n = 12 * 12;
        for i in 0..n {
            let hits = seg
                .cluster_masks
                .iter()
                .filter(|m| m.pixels()[i])
                .count();
            assert_eq!(hits, 1, "pixel {i} covered {hits} times");
        }
    }

    #[test]
    fn constant_image_with_k3_is_infeasible() {
        let img = RasterImage::filled(8, 8, [100, 100, 100]).unwrap();
        let lab = rgb_to_lab(&img, &WhitePoint::d65());
        let err =
            segment_lab(&lab, 3, 1, KmeansOptions::default(), FeatureMode::Lab).unwrap_err();
        assert!(matches!(err, Error::InfeasibleK { .. }));
    }

    #[test]
    fn ab_mode_clusters_on_chroma_only() {
        let lab = rgb_to_lab(&banded_image(), &WhitePoint::d65());
        let seg = segment_lab(&lab, 3, 21, KmeansOptions::default(), FeatureMode::Ab).unwrap();
        assert_eq!(seg.model.d, 2);
        // Region ranking still has L* available.
        assert!(seg.cluster_mean_l.iter().all(|l| l.is_finite()));
    }
}
