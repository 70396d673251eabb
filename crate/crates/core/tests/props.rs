//! Property tests over the spec'd invariants.

use proptest::prelude::*;

use candleseg::colorspace::{lab_to_srgb, rgb_to_gray, srgb_to_lab, WhitePoint};
use candleseg::enhance::equalize;
use candleseg::io::{load_image, save_image};
use candleseg::kmeans::{assign_labels, kmeans, FeatureMatrix, KmeansOptions};
use candleseg::metrics::{mse_gray, ssim, MseScale, SsimParams};
use candleseg::morphology::{dilate, Strel};
use candleseg::raster::{BinaryMask, GrayImage, RasterImage, Rect};

fn raster_strategy(max_side: u32) -> impl Strategy<Value = RasterImage> {
    (1..=max_side, 1..=max_side)
        .prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<u8>(), (w * h * 3) as usize)
                .prop_map(move |pixels| RasterImage::new(w, h, pixels).unwrap())
        })
}

fn gray_strategy(min_side: u32, max_side: u32) -> impl Strategy<Value = GrayImage> {
    (min_side..=max_side, min_side..=max_side)
        .prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<u8>(), (w * h) as usize)
                .prop_map(move |pixels| GrayImage::new(w, h, pixels).unwrap())
        })
}

fn mask_strategy(max_side: u32) -> impl Strategy<Value = BinaryMask> {
    (1..=max_side, 1..=max_side)
        .prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<bool>(), (w * h) as usize)
                .prop_map(move |pixels| BinaryMask::new(w, h, pixels).unwrap())
        })
}

proptest! {
    /// Lossless roundtrip through both supported formats.
    #[test]
    fn save_load_identity(img in raster_strategy(16)) {
        let dir = tempfile::tempdir().unwrap();
        for name in ["img.png", "img.ppm"] {
            let path = dir.path().join(name);
            save_image(&img, &path).unwrap();
            let loaded = load_image(&path).unwrap();
            prop_assert_eq!(&loaded, &img);
            // Re-saving the loaded image reproduces the file bytes.
            let first = std::fs::read(&path).unwrap();
            save_image(&loaded, &path).unwrap();
            prop_assert_eq!(std::fs::read(&path).unwrap(), first);
        }
    }

    /// Nested crops compose; full-image crop is the identity.
    #[test]
    fn crop_composition(img in raster_strategy(24), seed in any::<u64>()) {
        let mut rng = candleseg::rng::SplitMix64::new(seed);
        let full = Rect::new(0, 0, img.width(), img.height());
        prop_assert_eq!(&img.crop(full).unwrap(), &img);

        let w1 = 1 + (rng.next_u64() % img.width() as u64) as u32;
        let h1 = 1 + (rng.next_u64() % img.height() as u64) as u32;
        let x1 = (rng.next_u64() % (img.width() - w1 + 1) as u64) as u32;
        let y1 = (rng.next_u64() % (img.height() - h1 + 1) as u64) as u32;
        let r1 = Rect::new(x1, y1, w1, h1);

        let w2 = 1 + (rng.next_u64() % w1 as u64) as u32;
        let h2 = 1 + (rng.next_u64() % h1 as u64) as u32;
        let x2 = (rng.next_u64() % (w1 - w2 + 1) as u64) as u32;
        let y2 = (rng.next_u64() % (h1 - h2 + 1) as u64) as u32;
        let r2 = Rect::new(x2, y2, w2, h2);

        let nested = img.crop(r1).unwrap().crop(r2).unwrap();
        let composed = img.crop(r1.compose(r2)).unwrap();
        prop_assert_eq!(nested, composed);
    }

    /// Gray conversion of an equal-channel pixel returns the channel value;
    /// Lab L* stays within [0, 100] and roundtrips within one step.
    #[test]
    fn colorspace_pixel_properties(r in any::<u8>(), g in any::<u8>(), b in any::<u8>()) {
        let wp = WhitePoint::d65();
        let lab = srgb_to_lab([r, g, b], &wp);
        prop_assert!(lab[0] >= 0.0 && lab[0] <= 100.0 + 1e-6);
        prop_assert!(lab[1].abs() <= 128.0 && lab[2].abs() <= 128.0);
        let back = lab_to_srgb(lab, &wp);
        prop_assert!((back[0] as i16 - r as i16).abs() <= 1);
        prop_assert!((back[1] as i16 - g as i16).abs() <= 1);
        prop_assert!((back[2] as i16 - b as i16).abs() <= 1);

        let img = RasterImage::filled(1, 1, [g, g, g]).unwrap();
        prop_assert_eq!(rgb_to_gray(&img).pixels()[0], g);
    }

    /// Equalize is monotone and preserves shape and range.
    #[test]
    fn equalize_monotone(img in gray_strategy(1, 16)) {
        let out = equalize(&img);
        prop_assert_eq!(out.width(), img.width());
        prop_assert_eq!(out.height(), img.height());
        let mut pairs: Vec<(u8, u8)> = img.pixels().iter().zip(out.pixels())
            .map(|(&a, &b)| (a, b)).collect();
        pairs.sort_unstable();
        for w in pairs.windows(2) {
            prop_assert!(w[0].1 <= w[1].1);
        }
    }

    /// Dilation with an origin-bearing strel is extensive and monotone;
    /// the origin strel is the identity.
    #[test]
    fn dilation_properties(mask in mask_strategy(16)) {
        prop_assert_eq!(&dilate(&mask, &Strel::line(1, 45.0)), &mask);
        let strel = Strel::line(3, 0.0);
        let grown = dilate(&mask, &strel);
        for i in 0..mask.pixels().len() {
            prop_assert!(!mask.pixels()[i] || grown.pixels()[i]);
        }
    }

    /// Lloyd's objective never increases and reruns are bit-identical.
    #[test]
    fn kmeans_trace_and_determinism(
        vals in proptest::collection::vec(-100.0f64..100.0, 8..40),
        seed in any::<u64>(),
    ) {
        let points = FeatureMatrix::from_rows(1, vals).unwrap();
        let k = 2;
        if let Ok(model) = kmeans(&points, k, seed, KmeansOptions::default()) {
            for pair in model.objective_trace.windows(2) {
                prop_assert!(pair[1] <= pair[0] + 1e-9);
            }
            let again = kmeans(&points, k, seed, KmeansOptions::default()).unwrap();
            prop_assert_eq!(&model, &again);
            prop_assert_eq!(assign_labels(&points, &model.centroids), model.labels);
        }
    }

    /// Metric identities and symmetry.
    #[test]
    fn metric_symmetry(a in gray_strategy(11, 14), b in gray_strategy(11, 14)) {
        prop_assert_eq!(mse_gray(&a, &a, MseScale::Unit).unwrap(), 0.0);
        let params = SsimParams::default();
        let (self_sim, _) = ssim(&a, &a, &params).unwrap();
        prop_assert!((self_sim - 1.0).abs() < 1e-9);
        if a.width() == b.width() && a.height() == b.height() {
            let (ab, _) = ssim(&a, &b, &params).unwrap();
            let (ba, _) = ssim(&b, &a, &params).unwrap();
            prop_assert!((ab - ba).abs() < 1e-9);
            prop_assert!((-1.0..=1.0).contains(&ab));
        }
    }
}
