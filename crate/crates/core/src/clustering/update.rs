use crate::error::{Error, Result};
use crate::imagecore::LabImage;

use super::{Centroid, LabelMap};

/// Result of one centroid update pass.
#[derive(Clone, Debug, PartialEq)]
pub struct UpdateOutcome {
    pub centroids: Vec<Centroid>,
    /// Labels that had no pixels; their centroid was carried over from `prev`.
    pub empty: Vec<u32>,
}

/// A strategy for recomputing cluster centers from a labeling.
pub trait CentroidUpdate: Sync {
    /// Recompute `k` centroids. Labels with no pixels keep `prev[i]` (or the
    /// default centroid when `prev` is shorter) and are listed in `empty`.
    fn update(&self, img: &LabImage, labels: &LabelMap, k: usize, prev: &[Centroid])
        -> UpdateOutcome;
}

/// Mean of all member pixels in both position and color.
#[derive(Clone, Copy, Debug, Default)]
pub struct MeanUpdate;

impl CentroidUpdate for MeanUpdate {
    fn update(
        &self,
        img: &LabImage,
        labels: &LabelMap,
        k: usize,
        prev: &[Centroid],
    ) -> UpdateOutcome {
        standard_centroid_update(img, labels, k, prev)
    }
}

/// Per-label spatial means; `None` for labels without pixels.
///
/// This is the single source of the spatial part for every update strategy,
/// so all of them agree on it bit for bit.
pub fn spatial_means(labels: &LabelMap, k: usize) -> Vec<Option<(f64, f64)>> {
    let mut acc = vec![(0.0f64, 0.0f64, 0usize); k];
    let w = labels.width();
    for (i, &l) in labels.as_slice().iter().enumerate() {
        if let Some(a) = acc.get_mut(l as usize) {
            a.0 += (i % w) as f64;
            a.1 += (i / w) as f64;
            a.2 += 1;
        }
    }
    acc.into_iter()
        .map(|(sx, sy, n)| (n > 0).then(|| (sx / n as f64, sy / n as f64)))
        .collect()
}

/// Spatial centroid of a single label.
pub fn spatial_centroid(labels: &LabelMap, label: u32) -> Result<(f64, f64)> {
    spatial_means(labels, label as usize + 1)
        .pop()
        .flatten()
        .ok_or(Error::EmptyLabel(label))
}

/// Arithmetic mean of position and CIELAB color over each label.
///
/// Colors are accumulated as offsets from the first pixel so that a constant
/// region reproduces its color exactly.
pub fn standard_centroid_update(
    img: &LabImage,
    labels: &LabelMap,
    k: usize,
    prev: &[Centroid],
) -> UpdateOutcome {
    let origin = img.data()[0];
    let mut color = vec![[0.0f64; 3]; k];
    let mut count = vec![0usize; k];
    for (p, &l) in img.data().iter().zip(labels.as_slice()) {
        let l = l as usize;
        if l < k {
            for c in 0..3 {
                color[l][c] += p[c] - origin[c];
            }
            count[l] += 1;
        }
    }
    let spatial = spatial_means(labels, k);
    let mut empty = Vec::new();
    let centroids = (0..k)
        .map(|i| match spatial[i] {
            Some((x, y)) => {
                let n = count[i] as f64;
                Centroid {
                    x,
                    y,
                    lab: [
                        origin[0] + color[i][0] / n,
                        origin[1] + color[i][1] / n,
                        origin[2] + color[i][2] / n,
                    ],
                }
            }
            None => {
                empty.push(i as u32);
                prev.get(i).copied().unwrap_or_default()
            }
        })
        .collect();
    UpdateOutcome { centroids, empty }
}

/// Sum over centroids of the L1 displacement of their spatial positions.
pub fn residual_error(old: &[Centroid], new: &[Centroid]) -> Result<f64> {
    if old.len() != new.len() {
        return Err(Error::LengthMismatch { left: old.len(), right: new.len() });
    }
    Ok(old.iter().zip(new).map(|(a, b)| (a.x - b.x).abs() + (a.y - b.y).abs()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64, y: f64) -> Centroid {
        Centroid { x, y, lab: [0.0; 3] }
    }

    #[test]
    fn residual_cases() {
        let a = vec![c(1.0, 2.0), c(5.0, 5.0)];
        assert_eq!(residual_error(&a, &a).unwrap(), 0.0);
        let b = vec![c(4.0, 6.0), c(5.0, 5.0)];
        assert_eq!(residual_error(&a, &b).unwrap(), 7.0);
        assert!(matches!(residual_error(&a, &b[..1]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn singleton_clusters_equal_their_pixel() {
        let img = LabImage::new(2, 2, vec![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0], [
            10.0, 11.0, 12.0,
        ]])
        .unwrap();
        let labels = LabelMap::new(2, 2, vec![0, 1, 2, 3]).unwrap();
        let out = standard_centroid_update(&img, &labels, 4, &[]);
        assert!(out.empty.is_empty());
        for (i, cen) in out.centroids.iter().enumerate() {
            assert_eq!((cen.x, cen.y), ((i % 2) as f64, (i / 2) as f64));
            assert_eq!(cen.lab, img.data()[i]);
        }
    }

    #[test]
    fn empty_cluster_keeps_previous() {
        let img = LabImage::filled(3, 3, [50.0, 1.0, -1.0]).unwrap();
        let labels = LabelMap::filled(3, 3, 0);
        let prev = vec![c(0.0, 0.0), c(2.0, 2.0)];
        let out = standard_centroid_update(&img, &labels, 2, &prev);
        assert_eq!(out.empty, vec![1]);
        assert_eq!(out.centroids[1], prev[1]);
        assert_eq!(out.centroids[0].lab, [50.0, 1.0, -1.0]);
    }

    #[test]
    fn spatial_centroid_cases() {
        let labels = LabelMap::from_fn(3, 3, |x, y| u32::from(x % 2 == 1 || y % 2 == 1));
        assert_eq!(spatial_centroid(&labels, 0).unwrap(), (1.0, 1.0));
        let single = LabelMap::from_fn(8, 9, |x, y| u32::from((x, y) == (5, 7)));
        assert_eq!(spatial_centroid(&single, 1).unwrap(), (5.0, 7.0));
        assert!(matches!(spatial_centroid(&single, 4), Err(Error::EmptyLabel(4))));
    }
}
