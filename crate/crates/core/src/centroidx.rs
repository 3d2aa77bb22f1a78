//! Block-based centroid update.
//!
//! A superpixel's spatial centroid is the mean position of all its pixels, as
//! usual. Its color centroid is the mean color of a square block of side
//! `round(sqrt(N / 2k))` centered on that spatial centroid, taken over every
//! pixel in the block regardless of label. The block holds roughly half the
//! pixels of an average superpixel, sits in the superpixel's interior, and
//! so averages out impulse and Gaussian noise without being pulled toward
//! neighboring regions that a bad assignment has mixed in.
//!
//! Block means come from a per-channel summed-area table built once per
//! image, so each color update is O(1).

use crate::clustering::slic::slic_with_update;
use crate::clustering::snic::{snic_with_update, ColorRefresh};
use crate::clustering::update::{spatial_means, CentroidUpdate, UpdateOutcome};
use crate::clustering::{Centroid, ClusterParams, LabelMap, Method, Segmentation};
use crate::error::Result;
use crate::imagecore::LabImage;

/// Side of the color block: `round(sqrt(width * height / (2k)))`, at least 1.
pub fn block_side(width: usize, height: usize, k: usize) -> usize {
    let k = k.max(1);
    let side = ((width * height) as f64 / (2 * k) as f64).sqrt().round() as usize;
    side.max(1)
}

/// Round to the nearest integer, halves toward negative infinity.
#[inline]
pub fn round_half_down(v: f64) -> i64 {
    (v - 0.5).ceil() as i64
}

/// Square block of `side` pixels centered at `(cx, cy)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockSpec {
    pub cx: f64,
    pub cy: f64,
    pub side: usize,
}

impl BlockSpec {
    /// Inclusive bounds `(x0, y0, x1, y1)` after intersecting with the image.
    ///
    /// The block spans `[c - side/2, c - side/2 + side - 1]` on each axis around
    /// the rounded center, so even sides extend one pixel further toward the
    /// origin. The center is clamped into the image first, which keeps the
    /// intersection non-empty.
    pub fn clamped(&self, width: usize, height: usize) -> (usize, usize, usize, usize) {
        let side = self.side.max(1) as i64;
        let cx = round_half_down(self.cx).clamp(0, width as i64 - 1);
        let cy = round_half_down(self.cy).clamp(0, height as i64 - 1);
        let x0 = cx - side / 2;
        let y0 = cy - side / 2;
        let x1 = (x0 + side - 1).min(width as i64 - 1);
        let y1 = (y0 + side - 1).min(height as i64 - 1);
        (x0.max(0) as usize, y0.max(0) as usize, x1 as usize, y1 as usize)
    }

    /// Pixel count of the clamped block.
    pub fn area(&self, width: usize, height: usize) -> usize {
        let (x0, y0, x1, y1) = self.clamped(width, height);
        (x1 - x0 + 1) * (y1 - y0 + 1)
    }
}

/// Summed-area tables of the three CIELAB channels.
///
/// Values are stored as offsets from the image's first pixel, which keeps the
/// sums small and makes block means over constant regions exact.
#[derive(Clone, Debug)]
pub struct BlockMeans {
    width: usize,
    height: usize,
    origin: [f64; 3],
    // (width + 1) * (height + 1), first row and column zero.
    table: Vec<[f64; 3]>,
}

impl BlockMeans {
    pub fn new(img: &LabImage) -> Self {
        let (w, h) = (img.width(), img.height());
        let origin = img.data()[0];
        let stride = w + 1;
        let mut table = vec![[0.0f64; 3]; stride * (h + 1)];
        for y in 0..h {
            let mut row = [0.0f64; 3];
            for x in 0..w {
                let p = img.pixel(x, y);
                for c in 0..3 {
                    row[c] += p[c] - origin[c];
                }
                let above = table[y * stride + x + 1];
                table[(y + 1) * stride + x + 1] =
                    [above[0] + row[0], above[1] + row[1], above[2] + row[2]];
            }
        }
        Self { width: w, height: h, origin, table }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Mean color over the inclusive rectangle.
    pub fn rect_mean(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> [f64; 3] {
        let stride = self.width + 1;
        let a = self.table[y0 * stride + x0];
        let b = self.table[y0 * stride + x1 + 1];
        let c = self.table[(y1 + 1) * stride + x0];
        let d = self.table[(y1 + 1) * stride + x1 + 1];
        let n = ((x1 - x0 + 1) * (y1 - y0 + 1)) as f64;
        let mut out = [0.0; 3];
        for ch in 0..3 {
            out[ch] = self.origin[ch] + ((d[ch] - b[ch]) - (c[ch] - a[ch])) / n;
        }
        out
    }

    /// Mean color over the clamped block.
    pub fn mean(&self, block: &BlockSpec) -> [f64; 3] {
        let (x0, y0, x1, y1) = block.clamped(self.width, self.height);
        self.rect_mean(x0, y0, x1, y1)
    }
}

/// Mean CIELAB color of every pixel inside the clamped block.
pub fn block_color_centroid(img: &LabImage, block: &BlockSpec) -> [f64; 3] {
    BlockMeans::new(img).mean(block)
}

/// Centroid update with full-region spatial means and block color means.
#[derive(Clone, Debug)]
pub struct BlockUpdate {
    means: BlockMeans,
    side: usize,
}

impl BlockUpdate {
    /// `k_requested` fixes the block side for the whole run.
    pub fn new(img: &LabImage, k_requested: usize) -> Self {
        Self {
            means: BlockMeans::new(img),
            side: block_side(img.width(), img.height(), k_requested),
        }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn means(&self) -> &BlockMeans {
        &self.means
    }
}

impl CentroidUpdate for BlockUpdate {
    fn update(
        &self,
        _img: &LabImage,
        labels: &LabelMap,
        k: usize,
        prev: &[Centroid],
    ) -> UpdateOutcome {
        let mut empty = Vec::new();
        let centroids = spatial_means(labels, k)
            .into_iter()
            .enumerate()
            .map(|(i, spatial)| match spatial {
                Some((x, y)) => {
                    let lab = self.means.mean(&BlockSpec { cx: x, cy: y, side: self.side });
                    Centroid { x, y, lab }
                }
                None => {
                    empty.push(i as u32);
                    prev.get(i).copied().unwrap_or_default()
                }
            })
            .collect();
        UpdateOutcome { centroids, empty }
    }
}

/// One block-based update of `k` centroids.
pub fn centroidx_update(
    img: &LabImage,
    labels: &LabelMap,
    k: usize,
    k_requested: usize,
    prev: &[Centroid],
) -> UpdateOutcome {
    BlockUpdate::new(img, k_requested).update(img, labels, k, prev)
}

/// Run SLIC or SNIC with the block-based update in place of the mean update.
///
/// For SLIC the update replaces the standard one in every iteration. For SNIC
/// the running spatial mean is kept, and the color used for distances is
/// refreshed from the block around it each time the superpixel has grown by
/// `ceil(side^2 / refresh_divisor)` pixels (starting with the seed pixel).
pub fn centroidx_segment(
    method: Method,
    img: &LabImage,
    params: &ClusterParams,
) -> Result<Segmentation> {
    params.validate()?;
    let updater = BlockUpdate::new(img, params.k);
    match method {
        Method::Slic => slic_with_update(img, params, &updater),
        Method::Snic => {
            let area = updater.side() * updater.side();
            let refresh = ColorRefresh {
                means: updater.means(),
                side: updater.side(),
                every: area.div_ceil(params.refresh_divisor).max(1),
            };
            snic_with_update(img, params, &updater, Some(&refresh))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn side_formula() {
        assert_eq!(block_side(481, 321, 600), 11);
        assert_eq!(block_side(100, 100, 50), 10);
        assert_eq!(block_side(4, 4, 16), 1);
    }

    #[test]
    fn rounding_ties_go_down() {
        assert_eq!(round_half_down(2.5), 2);
        assert_eq!(round_half_down(2.51), 3);
        assert_eq!(round_half_down(-0.5), -1);
        assert_eq!(round_half_down(3.0), 3);
    }

    #[test]
    fn two_by_two_block_mean() {
        let data = [10.0, 20.0, 30.0, 40.0].iter().map(|&l| [l, 0.0, 0.0]).collect();
        let img = LabImage::new(2, 2, data).unwrap();
        // Center (1, 1) with side 2 spans [0, 1] on both axes.
        let m = block_color_centroid(&img, &BlockSpec { cx: 1.0, cy: 1.0, side: 2 });
        assert_eq!(m[0], 25.0);
    }

    #[test]
    fn clamped_block_at_corner() {
        let b = BlockSpec { cx: 0.2, cy: 9.7, side: 5 };
        assert_eq!(b.clamped(10, 10), (0, 7, 2, 9));
        assert_eq!(b.area(10, 10), 9);
        let oversized = BlockSpec { cx: 1.0, cy: 1.0, side: 50 };
        assert_eq!(oversized.area(3, 3), 9);
    }

    #[test]
    fn constant_region_is_exact() {
        let img = LabImage::filled(30, 20, [53.2, -11.7, 4.1]).unwrap();
        let m = BlockMeans::new(&img);
        for (cx, cy, side) in [(3.0, 3.0, 5), (29.0, 0.0, 7), (14.5, 9.5, 11)] {
            assert_eq!(m.mean(&BlockSpec { cx, cy, side }), [53.2, -11.7, 4.1]);
        }
    }

    #[test]
    fn spatial_part_matches_standard_update() {
        let data = (0..24 * 18).map(|i| [(i % 13) as f64 * 7.0, (i % 5) as f64, -1.0]).collect();
        let img = LabImage::new(24, 18, data).unwrap();
        let labels = LabelMap::from_fn(24, 18, |x, y| ((x / 6) + 4 * (y / 6)) as u32);
        let std = crate::clustering::standard_centroid_update(&img, &labels, 12, &[]);
        let cx = centroidx_update(&img, &labels, 12, 12, &[]);
        for (a, b) in std.centroids.iter().zip(&cx.centroids) {
            assert_eq!(a.x.to_bits(), b.x.to_bits());
            assert_eq!(a.y.to_bits(), b.y.to_bits());
        }
    }
}
