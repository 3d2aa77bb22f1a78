//! Superpixel metrics (boundary recall, undersegmentation error,
//! compactness) and edge-map metrics (PSNR, SSIM).

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::clustering::LabelMap;
use crate::error::{Error, Result};
use crate::imagecore::Plane;

/// Default boundary-recall tolerance in pixels.
pub const DEFAULT_EPS: usize = 2;
/// Minimum overlap fraction, as `1 / UE_TOLERANCE_DENOM`, for a superpixel to
/// count against a ground-truth segment.
pub const UE_TOLERANCE_DENOM: usize = 20;
/// Side of the square SSIM window.
pub const SSIM_WINDOW: usize = 8;
pub const SSIM_C1: f64 = 0.01 * 0.01;
pub const SSIM_C2: f64 = 0.03 * 0.03;

/// Pixels with a 4-neighbor of a different label. The image frame alone does
/// not make a pixel a boundary pixel.
pub fn boundary_mask(labels: &LabelMap) -> Vec<bool> {
    let (w, h) = labels.dims();
    let l = labels.as_slice();
    let mut mask = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w && l[i] != l[i + 1] {
                mask[i] = true;
                mask[i + 1] = true;
            }
            if y + 1 < h && l[i] != l[i + w] {
                mask[i] = true;
                mask[i + w] = true;
            }
        }
    }
    mask
}

/// Human segmentation with its derived boundary raster.
#[derive(Clone, Debug)]
pub struct GroundTruth {
    pub segmentation: LabelMap,
    pub boundaries: Vec<bool>,
}

impl GroundTruth {
    pub fn new(segmentation: LabelMap) -> Self {
        let boundaries = boundary_mask(&segmentation);
        Self { segmentation, boundaries }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.segmentation.dims()
    }

    /// Boundaries as a 0/1 plane.
    pub fn boundary_plane(&self) -> Plane {
        let (w, h) = self.dims();
        Plane::new(w, h, self.boundaries.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect())
            .expect("dimensions match")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub br: f64,
    pub ue: f64,
    pub co: f64,
    pub k_out: usize,
    pub runtime_ms: Option<f64>,
}

impl MetricsReport {
    pub fn evaluate(labels: &LabelMap, gt: &GroundTruth, eps: usize) -> Result<Self> {
        Ok(Self {
            br: boundary_recall(labels, gt, eps)?,
            ue: undersegmentation_error(labels, &gt.segmentation)?,
            co: compactness(labels),
            k_out: count_superpixels(labels),
            runtime_ms: None,
        })
    }
}

/// Fraction of ground-truth boundary pixels with a superpixel boundary pixel
/// within Chebyshev distance `eps`. An image without ground-truth boundaries
/// has recall 1.
pub fn boundary_recall(labels: &LabelMap, gt: &GroundTruth, eps: usize) -> Result<f64> {
    labels.check_dims(gt.dims())?;
    let (w, h) = labels.dims();
    let sp = boundary_mask(labels);
    // Integral image of superpixel boundary counts.
    let stride = w + 1;
    let mut sat = vec![0u32; stride * (h + 1)];
    for y in 0..h {
        let mut row = 0u32;
        for x in 0..w {
            row += sp[y * w + x] as u32;
            sat[(y + 1) * stride + x + 1] = sat[y * stride + x + 1] + row;
        }
    }
    let mut total = 0usize;
    let mut hit = 0usize;
    for y in 0..h {
        for x in 0..w {
            if !gt.boundaries[y * w + x] {
                continue;
            }
            total += 1;
            let x0 = x.saturating_sub(eps);
            let y0 = y.saturating_sub(eps);
            let x1 = (x + eps).min(w - 1) + 1;
            let y1 = (y + eps).min(h - 1) + 1;
            let n = sat[y1 * stride + x1] + sat[y0 * stride + x0]
                - sat[y0 * stride + x1]
                - sat[y1 * stride + x0];
            if n > 0 {
                hit += 1;
            }
        }
    }
    Ok(if total == 0 { 1.0 } else { hit as f64 / total as f64 })
}

/// Undersegmentation error with a 5% overlap tolerance:
/// `(1/N) * sum_G [ sum_{S : |S∩G| >= |S|/20} |S| - |G| ]`.
pub fn undersegmentation_error(labels: &LabelMap, gt_seg: &LabelMap) -> Result<f64> {
    labels.check_dims(gt_seg.dims())?;
    let mut overlap: HashMap<(u32, u32), usize> = HashMap::new();
    for (&s, &g) in labels.as_slice().iter().zip(gt_seg.as_slice()) {
        *overlap.entry((g, s)).or_default() += 1;
    }
    let sp_size = labels.sizes();
    let gt_size = gt_seg.sizes();
    let mut bleed: i64 = 0;
    for (&(_, s), &n) in &overlap {
        let size = sp_size[s as usize];
        if n * UE_TOLERANCE_DENOM >= size {
            bleed += size as i64;
        }
    }
    bleed -= gt_size.iter().sum::<usize>() as i64;
    Ok(bleed as f64 / labels.len() as f64)
}

/// Area-weighted isoperimetric quotient `sum_i (|S_i|/N) * 4π|S_i| / P_i²`,
/// where `P_i` counts the pixels of `S_i` that touch another label or the
/// image frame. Clipped to [0, 1].
pub fn compactness(labels: &LabelMap) -> f64 {
    let (w, h) = labels.dims();
    let l = labels.as_slice();
    let bound = labels.label_bound();
    let mut area = vec![0usize; bound];
    let mut perimeter = vec![0usize; bound];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let v = l[i];
            area[v as usize] += 1;
            let edge = x == 0
                || y == 0
                || x + 1 == w
                || y + 1 == h
                || l[i - 1] != v
                || l[i + 1] != v
                || l[i - w] != v
                || l[i + w] != v;
            if edge {
                perimeter[v as usize] += 1;
            }
        }
    }
    let n = (w * h) as f64;
    let co: f64 = area
        .iter()
        .zip(&perimeter)
        .filter(|(&a, _)| a > 0)
        .map(|(&a, &p)| {
            let (a, p) = (a as f64, p as f64);
            (a / n) * (4.0 * PI * a / (p * p))
        })
        .sum();
    co.clamp(0.0, 1.0)
}

/// Number of distinct labels.
pub fn count_superpixels(labels: &LabelMap) -> usize {
    labels.count()
}

fn check_planes(a: &Plane, b: &Plane) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch { left: a.dims(), right: b.dims() });
    }
    Ok(())
}

/// `10 log10(1 / MSE)` for rasters on the [0, 1] scale; `f64::INFINITY` when
/// they are identical.
pub fn psnr(edge: &Plane, reference: &Plane) -> Result<f64> {
    check_planes(edge, reference)?;
    let mse = edge
        .data()
        .iter()
        .zip(reference.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / edge.data().len() as f64;
    Ok(if mse == 0.0 { f64::INFINITY } else { 10.0 * (1.0 / mse).log10() })
}

/// Mean SSIM over all 8x8 windows (stride 1, uniform weights). Rasters
/// smaller than the window use a single window of the full extent.
pub fn ssim(edge: &Plane, reference: &Plane) -> Result<f64> {
    check_planes(edge, reference)?;
    let (w, h) = edge.dims();
    let (ww, wh) = (SSIM_WINDOW.min(w), SSIM_WINDOW.min(h));
    let n = (ww * wh) as f64;
    let (a, b) = (edge.data(), reference.data());
    let mut total = 0.0;
    let mut windows = 0usize;
    for y0 in 0..=h - wh {
        for x0 in 0..=w - ww {
            let (mut sa, mut sb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for y in y0..y0 + wh {
                for x in x0..x0 + ww {
                    let (u, v) = (a[y * w + x], b[y * w + x]);
                    sa += u;
                    sb += v;
                    saa += u * u;
                    sbb += v * v;
                    sab += u * v;
                }
            }
            let (ma, mb) = (sa / n, sb / n);
            let va = saa / n - ma * ma;
            let vb = sbb / n - mb * mb;
            let cov = sab / n - ma * mb;
            let num = (2.0 * ma * mb + SSIM_C1) * (2.0 * cov + SSIM_C2);
            let den = (ma * ma + mb * mb + SSIM_C1) * (va + vb + SSIM_C2);
            total += num / den;
            windows += 1;
        }
    }
    Ok(total / windows as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn halves(w: usize, h: usize, split: usize) -> LabelMap {
        LabelMap::from_fn(w, h, |x, _| u32::from(x >= split))
    }

    #[test]
    fn recall_perfect_and_empty() {
        let gt = GroundTruth::new(halves(10, 6, 5));
        assert_eq!(boundary_recall(&halves(10, 6, 5), &gt, 0).unwrap(), 1.0);
        assert_eq!(boundary_recall(&LabelMap::filled(10, 6, 0), &gt, 2).unwrap(), 0.0);
    }

    #[test]
    fn recall_shifted_boundary() {
        // gt boundary pixels at columns 4,5; superpixel boundary at 5,6.
        let gt = GroundTruth::new(halves(10, 6, 5));
        let sp = halves(10, 6, 6);
        assert_eq!(boundary_recall(&sp, &gt, 2).unwrap(), 1.0);
        assert_eq!(boundary_recall(&sp, &gt, 1).unwrap(), 1.0);
        // Column 5 is shared, so eps=0 recalls half of the gt pixels.
        assert_eq!(boundary_recall(&sp, &gt, 0).unwrap(), 0.5);
        // A shift by 2 leaves no shared pixel.
        let sp2 = halves(10, 6, 7);
        assert_eq!(boundary_recall(&sp2, &gt, 0).unwrap(), 0.0);
        assert_eq!(boundary_recall(&sp2, &gt, 2).unwrap(), 1.0);
    }

    #[test]
    fn ue_straddling_superpixel() {
        let gt = halves(10, 10, 6);
        let sp = LabelMap::filled(10, 10, 0);
        // The single superpixel counts against both segments: (100-60)+(100-40).
        assert_eq!(undersegmentation_error(&sp, &gt).unwrap(), 1.0);
        assert_eq!(undersegmentation_error(&gt, &gt).unwrap(), 0.0);
        let refined = LabelMap::from_fn(10, 10, |x, y| (u32::from(x >= 6)) * 2 + u32::from(y >= 5));
        assert_eq!(undersegmentation_error(&refined, &gt).unwrap(), 0.0);
    }

    #[test]
    fn ue_tolerance_threshold() {
        // A 40-pixel superpixel leaks exactly 2 pixels (5%) into segment 1: counted.
        let gt = LabelMap::from_fn(10, 4, |x, y| u32::from(x == 9 && y < 2));
        let sp = LabelMap::filled(10, 4, 0);
        assert_eq!(undersegmentation_error(&sp, &gt).unwrap(), 40.0 / 40.0);
        // One pixel (2.5%) is below the tolerance: (40 - 39) + (0 - 1) = 0.
        let gt1 = LabelMap::from_fn(10, 4, |x, y| u32::from(x == 9 && y == 0));
        assert_eq!(undersegmentation_error(&sp, &gt1).unwrap(), 0.0);
    }

    #[test]
    fn compactness_rectangle_and_strip() {
        // 4x4 single superpixel: 12 perimeter pixels, 4π·16/144 > 1 → clipped.
        assert_eq!(compactness(&LabelMap::filled(4, 4, 0)), 1.0);
        // 10x6: perimeter 60 - 32 = 28, 4π·60/784.
        let q = 4.0 * PI * 60.0 / 784.0;
        assert!((compactness(&LabelMap::filled(10, 6, 3)) - q).abs() < 1e-12);
        let square = compactness(&LabelMap::filled(8, 8, 0));
        let strip = compactness(&LabelMap::filled(64, 1, 0));
        assert!(square > strip);
        assert!((strip - 4.0 * PI * 64.0 / 4096.0).abs() < 1e-12);
    }

    #[test]
    fn compactness_is_label_invariant() {
        let a = LabelMap::from_fn(12, 9, |x, y| ((x / 4) + 3 * (y / 3)) as u32);
        let b = LabelMap::from_fn(12, 9, |x, y| 100 - ((x / 4) + 3 * (y / 3)) as u32);
        assert_eq!(compactness(&a), compactness(&b));
    }

    #[test]
    fn psnr_cases() {
        let ones = Plane::from_fn(5, 5, |_, _| 1.0);
        let zeros = Plane::zeros(5, 5);
        assert_eq!(psnr(&ones, &ones).unwrap(), f64::INFINITY);
        assert_eq!(psnr(&zeros, &ones).unwrap(), 0.0);
        assert!(psnr(&zeros, &Plane::zeros(4, 5)).is_err());
    }

    #[test]
    fn ssim_identity_is_one() {
        let p = Plane::from_fn(20, 13, |x, y| ((x * 7 + y * 3) % 11) as f64 / 10.0);
        assert_eq!(ssim(&p, &p).unwrap(), 1.0);
        let small = Plane::from_fn(5, 3, |x, y| (x + y) as f64 / 10.0);
        assert_eq!(ssim(&small, &small).unwrap(), 1.0);
    }

    #[test]
    fn counting() {
        assert_eq!(count_superpixels(&LabelMap::filled(3, 3, 7)), 1);
        let checker = LabelMap::from_fn(8, 8, |x, y| ((x / 2) % 2 + 2 * ((y / 2) % 2)) as u32);
        assert_eq!(count_superpixels(&checker), 4);
    }
}
