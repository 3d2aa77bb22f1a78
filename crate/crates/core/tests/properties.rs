mod common;

use proptest::prelude::*;
use superpix_core::centroidx::{block_side, centroidx_update};
use superpix_core::clustering::{
    enforce_connectivity, segment, standard_centroid_update, ClusterParams, LabelMap, Method,
};
use superpix_core::imagecore::{lab_to_srgb_pixel, srgb_to_lab_pixel, LabImage, RgbImage};
use superpix_core::metrics::{
    boundary_recall, compactness, undersegmentation_error, GroundTruth,
};
use superpix_core::noise::{add_gaussian, add_salt_pepper};
use superpix_core::sbed::{eliminate_weak_edges, sbed_from_labels, superpixel_edges};

fn label_map(max_side: usize, max_label: u32) -> impl Strategy<Value = LabelMap> {
    (2..=max_side, 2..=max_side).prop_flat_map(move |(w, h)| {
        prop::collection::vec(0..max_label, w * h)
            .prop_map(move |v| LabelMap::new(w, h, v).unwrap())
    })
}

fn rgb_image(max_side: usize) -> impl Strategy<Value = RgbImage> {
    (4..=max_side, 4..=max_side).prop_flat_map(|(w, h)| {
        prop::collection::vec(any::<u8>(), w * h * 3).prop_map(move |v| RgbImage::new(w, h, v).unwrap())
    })
}

fn lab_image(w: usize, h: usize) -> impl Strategy<Value = LabImage> {
    prop::collection::vec((0.0..100.0f64, -60.0..60.0f64, -60.0..60.0f64), w * h)
        .prop_map(move |v| LabImage::new(w, h, v.into_iter().map(|(l, a, b)| [l, a, b]).collect()).unwrap())
}

/// Apply a label permutation given as a key per label.
fn permute(labels: &LabelMap, keys: &[u32]) -> LabelMap {
    let (w, h) = labels.dims();
    LabelMap::new(w, h, labels.as_slice().iter().map(|&l| keys[l as usize]).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_ranges(sp in label_map(9, 5), seed in any::<u64>()) {
        let (w, h) = sp.dims();
        let mut r = common::rng(seed);
        let gt = common::random_labels(&mut r, w, h, 3);
        let br = boundary_recall(&sp, &GroundTruth::new(gt.clone()), 1).unwrap();
        prop_assert!((0.0..=1.0).contains(&br));
        prop_assert!(undersegmentation_error(&sp, &gt).unwrap() >= 0.0);
        prop_assert!((0.0..=1.0).contains(&compactness(&sp)));
    }

    #[test]
    fn perfect_segmentation_scores(gt in label_map(10, 4)) {
        let g = GroundTruth::new(gt.clone());
        prop_assert_eq!(boundary_recall(&gt, &g, 0).unwrap(), 1.0);
        prop_assert_eq!(undersegmentation_error(&gt.relabeled(), &gt).unwrap(), 0.0);
    }

    #[test]
    fn metrics_ignore_label_names(sp in label_map(9, 6), seed in any::<u64>()) {
        let (w, h) = sp.dims();
        let gt = common::random_labels(&mut common::rng(seed), w, h, 3);
        let keys: Vec<u32> = (0..6).map(|i| (i * 7 + 3) % 11 + 20).collect();
        let renamed = permute(&sp, &keys);
        let g = GroundTruth::new(gt.clone());
        prop_assert_eq!(boundary_recall(&sp, &g, 1).unwrap(), boundary_recall(&renamed, &g, 1).unwrap());
        prop_assert_eq!(undersegmentation_error(&sp, &gt).unwrap(), undersegmentation_error(&renamed, &gt).unwrap());
        prop_assert!((compactness(&sp) - compactness(&renamed)).abs() < 1e-12);
    }

    #[test]
    fn connectivity_output_is_connected(labels in label_map(14, 5), min_size in 0usize..8) {
        let out = enforce_connectivity(&labels, min_size);
        prop_assert!(common::every_label_connected(&out));
        prop_assert_eq!(out.label_bound(), out.count());
    }

    #[test]
    fn spatial_part_is_shared(
        img in lab_image(12, 10),
        raw in prop::collection::vec(0u32..6, 120),
        k_req in 1usize..60,
    ) {
        let labels = LabelMap::new(12, 10, raw).unwrap();
        let a = standard_centroid_update(&img, &labels, 6, &[]);
        let b = centroidx_update(&img, &labels, 6, k_req, &[]);
        prop_assert_eq!(&a.empty, &b.empty);
        for (p, q) in a.centroids.iter().zip(&b.centroids) {
            prop_assert_eq!(p.x.to_bits(), q.x.to_bits());
            prop_assert_eq!(p.y.to_bits(), q.y.to_bits());
        }
    }

    #[test]
    fn block_side_formula(w in 2usize..600, h in 2usize..600, k in 1usize..2000) {
        let expected = (((w * h) as f64) / (2.0 * k as f64)).sqrt().round().max(1.0) as usize;
        prop_assert_eq!(block_side(w, h, k), expected);
    }

    #[test]
    fn lab_round_trip(r in any::<u8>(), g in any::<u8>(), b in any::<u8>()) {
        let back = lab_to_srgb_pixel(srgb_to_lab_pixel([r, g, b]));
        for (x, y) in back.iter().zip([r, g, b]) {
            prop_assert!((*x as i32 - y as i32).abs() <= 1);
        }
    }

    #[test]
    fn noise_is_deterministic_and_bounded(img in rgb_image(16), level in 0.0..1.0f64, seed in any::<u64>()) {
        let a = add_gaussian(&img, level, seed).unwrap();
        prop_assert_eq!(&a, &add_gaussian(&img, level, seed).unwrap());
        let s = add_salt_pepper(&img, level, seed).unwrap();
        for (p, q) in img.pixels().zip(s.pixels()) {
            prop_assert!(p == q || q == [0, 0, 0] || q == [255, 255, 255]);
        }
    }

    #[test]
    fn segmentation_is_a_connected_partition(
        img in rgb_image(24),
        k in 1usize..20,
        method in prop_oneof![Just(Method::Slic), Just(Method::Snic)],
        cx in any::<bool>(),
    ) {
        let lab = superpix_core::imagecore::rgb_to_lab(&img);
        prop_assume!(k <= img.width() * img.height());
        let seg = segment(method, cx, &lab, &ClusterParams::new(k)).unwrap();
        prop_assert!(common::every_label_connected(&seg.labels));
        prop_assert_eq!(seg.centroids.len(), seg.labels.count());
        prop_assert_eq!(seg.labels.label_bound(), seg.labels.count());
        let again = segment(method, cx, &lab, &ClusterParams::new(k)).unwrap();
        prop_assert_eq!(seg.labels, again.labels);
    }

    #[test]
    fn elimination_never_increases(labels in label_map(10, 4), img_seed in any::<u64>(), a_hat in 0.0..200.0f64) {
        let (w, h) = labels.dims();
        let mut r = common::rng(img_seed);
        let img = common::random_lab(&mut r, w, h);
        let means = superpix_core::sbed::superpixel_color_means(&img, &labels).unwrap();
        let adj = superpix_core::sbed::adjacency_distances(&means, &labels);
        let e = superpixel_edges(&labels);
        let out = eliminate_weak_edges(&e, &adj, a_hat, &labels).unwrap();
        for (a, b) in out.data().iter().zip(e.data()) {
            prop_assert!(a <= b);
        }
    }

    #[test]
    fn sbed_bounded_and_label_invariant(labels in label_map(12, 5), img_seed in any::<u64>()) {
        let (w, h) = labels.dims();
        prop_assume!(w >= 3 && h >= 3);
        let mut r = common::rng(img_seed);
        let img = common::random_lab(&mut r, w, h);
        let t = sbed_from_labels(&img, &labels).unwrap();
        for (e, g) in t.edges.data().iter().zip(t.gradient.data()) {
            prop_assert!(*e >= 0.0 && e <= g);
        }
        let renamed = permute(&labels, &[4, 2, 0, 3, 1]);
        let u = sbed_from_labels(&img, &renamed).unwrap();
        prop_assert_eq!(t.edges, u.edges);
    }
}
