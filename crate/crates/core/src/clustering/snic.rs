use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::centroidx::{BlockMeans, BlockSpec};
use crate::error::Result;
use crate::imagecore::LabImage;

use super::slic::{grid_step, init_centroids_grid, slic_distance_sq};
use super::update::CentroidUpdate;
use super::{enforce_connectivity, Centroid, ClusterParams, LabelMap, Segmentation};

/// Periodic replacement of a growing superpixel's color with a block mean
/// around its running spatial centroid.
pub struct ColorRefresh<'a> {
    pub means: &'a BlockMeans,
    pub side: usize,
    /// Refresh when the member count reaches `1 + m * every`.
    pub every: usize,
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    dist: f64,
    y: u32,
    x: u32,
    label: u32,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // Reversed so the max-heap pops the smallest (dist, y, x, label).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then(other.y.cmp(&self.y))
            .then(other.x.cmp(&self.x))
            .then(other.label.cmp(&self.label))
    }
}

/// Running sums for one growing superpixel. Colors are kept as offsets from
/// the seed color so constant regions stay exact.
#[derive(Clone, Copy)]
struct Accum {
    sx: f64,
    sy: f64,
    dcol: [f64; 3],
    origin: [f64; 3],
    n: usize,
}

/// Priority-queue region growing from grid seeds. Each popped unlabeled pixel
/// joins the superpixel of its queue element; its unlabeled 4-neighbors are
/// pushed with their SLIC distance to that superpixel's online centroid.
/// Ties pop in (y, x) order.
pub fn snic_grow(
    img: &LabImage,
    params: &ClusterParams,
    refresh: Option<&ColorRefresh<'_>>,
) -> Result<(LabelMap, usize)> {
    params.validate()?;
    let (w, h) = (img.width(), img.height());
    let seeds = init_centroids_grid(img, params.k, false)?;
    let step = grid_step(w, h, params.k);
    let spatial_weight = (params.compactness / step).powi(2);
    let pixels = img.data();

    let mut centers: Vec<Centroid> = seeds.clone();
    let mut acc: Vec<Accum> = seeds
        .iter()
        .map(|s| Accum { sx: 0.0, sy: 0.0, dcol: [0.0; 3], origin: s.lab, n: 0 })
        .collect();
    let mut labels = vec![u32::MAX; w * h];
    let mut heap = BinaryHeap::with_capacity(w * h);
    for (i, s) in seeds.iter().enumerate() {
        heap.push(Candidate { dist: 0.0, y: s.y as u32, x: s.x as u32, label: i as u32 });
    }

    while let Some(Candidate { x, y, label, .. }) = heap.pop() {
        let (x, y) = (x as usize, y as usize);
        let p = y * w + x;
        if labels[p] != u32::MAX {
            continue;
        }
        labels[p] = label;
        let k = label as usize;
        let a = &mut acc[k];
        a.sx += x as f64;
        a.sy += y as f64;
        for c in 0..3 {
            a.dcol[c] += pixels[p][c] - a.origin[c];
        }
        a.n += 1;
        let n = a.n as f64;
        let center = &mut centers[k];
        center.x = a.sx / n;
        center.y = a.sy / n;
        match refresh {
            Some(r) => {
                if (a.n - 1).is_multiple_of(r.every) {
                    let block = BlockSpec { cx: center.x, cy: center.y, side: r.side };
                    center.lab = r.means.mean(&block);
                }
            }
            None => {
                for c in 0..3 {
                    center.lab[c] = a.origin[c] + a.dcol[c] / n;
                }
            }
        }
        let center = *center;

        let mut push = |q: usize, qx: usize, qy: usize| {
            if labels[q] == u32::MAX {
                let dist = slic_distance_sq(pixels[q], qx as f64, qy as f64, &center, spatial_weight);
                heap.push(Candidate { dist, y: qy as u32, x: qx as u32, label });
            }
        };
        if x > 0 {
            push(p - 1, x - 1, y);
        }
        if x + 1 < w {
            push(p + 1, x + 1, y);
        }
        if y > 0 {
            push(p - w, x, y - 1);
        }
        if y + 1 < h {
            push(p + w, x, y + 1);
        }
    }
    Ok((LabelMap::new(w, h, labels).expect("dimensions match image"), seeds.len()))
}

/// SNIC followed by connectivity enforcement; final centroids come from
/// `updater` applied to the final labeling.
pub fn snic_with_update(
    img: &LabImage,
    params: &ClusterParams,
    updater: &dyn CentroidUpdate,
    refresh: Option<&ColorRefresh<'_>>,
) -> Result<Segmentation> {
    let (grown, _) = snic_grow(img, params, refresh)?;
    let labels = enforce_connectivity(&grown, params.min_size(img.width(), img.height()));
    let k_out = labels.count();
    let centroids = updater.update(img, &labels, k_out, &[]).centroids;
    Ok(Segmentation { labels, centroids, iterations: 1, residual: 0.0, empty_events: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::MeanUpdate;

    #[test]
    fn every_pixel_labeled_once_and_connected() {
        let data = (0..40 * 30)
            .map(|i| [((i * 37) % 101) as f64, ((i * 11) % 23) as f64 - 11.0, 0.0])
            .collect();
        let img = LabImage::new(40, 30, data).unwrap();
        let params = ClusterParams::new(12).with_compactness(10.0);
        let (labels, seeds) = snic_grow(&img, &params, None).unwrap();
        assert!(labels.as_slice().iter().all(|&l| (l as usize) < seeds));
        let (_, comps) = crate::clustering::connectivity::connected_components(&labels);
        assert_eq!(comps.len(), labels.count());
    }

    #[test]
    fn single_seed_covers_everything() {
        let data = (0..16 * 12).map(|i| [(i % 7) as f64 * 10.0, 1.0, 2.0]).collect();
        let img = LabImage::new(16, 12, data).unwrap();
        let params = ClusterParams::new(1);
        let seg = snic_with_update(&img, &params, &MeanUpdate, None).unwrap();
        assert!(seg.labels.as_slice().iter().all(|&l| l == 0));
        let mean_l = img.data().iter().map(|p| p[0]).sum::<f64>() / img.len() as f64;
        assert!((seg.centroids[0].lab[0] - mean_l).abs() < 1e-9);
        assert_eq!((seg.centroids[0].x, seg.centroids[0].y), (7.5, 5.5));
    }

    #[test]
    fn constant_image_gives_near_quadrants() {
        let img = LabImage::filled(64, 64, [40.0, 0.0, 0.0]).unwrap();
        let seg = snic_with_update(&img, &ClusterParams::new(4), &MeanUpdate, None).unwrap();
        assert_eq!(seg.labels.count(), 4);
        for s in seg.labels.sizes() {
            assert!((900..=1150).contains(&s), "size {s}");
        }
    }
}
