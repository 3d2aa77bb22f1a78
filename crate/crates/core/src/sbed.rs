//! Superpixel-based edge detection, with Sobel and Canny baselines.
//!
//! Pipeline: segment, mark superpixel boundaries, take the Sobel gradient of
//! that boundary raster, drop the response of every boundary between two
//! adjacent superpixels whose mean-color L1 distance is below the mean of all
//! non-zero adjacent distances, then apply the two gradient thresholds.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::clustering::{segment, ClusterParams, LabelMap, Method};
use crate::error::{Error, Result};
use crate::imagecore::{rgb_to_lab, sobel_gradient, GradientMap, LabImage, Plane, RgbImage};
use crate::metrics::boundary_mask;

/// Real-valued edge strength raster.
pub type EdgeMap = Plane;

/// Low gradient threshold as a fraction of the maximum gradient.
pub const G_LOW_RATIO: f64 = 0.1;
/// High gradient threshold as a fraction of the maximum gradient.
pub const G_HIGH_RATIO: f64 = 0.8;
/// Threshold for the Sobel and Canny baselines, as a fraction of the maximum.
pub const BASELINE_THRESHOLD: f64 = 0.1;
/// Canny hysteresis low threshold relative to the high one.
pub const CANNY_LOW_RATIO: f64 = 0.4;
pub const CANNY_SIGMA: f64 = 1.4;

/// Binary raster (0/1) of pixels with a 4-neighbor of a different label.
pub fn superpixel_edges(labels: &LabelMap) -> EdgeMap {
    let (w, h) = labels.dims();
    let data = boundary_mask(labels).into_iter().map(|b| if b { 1.0 } else { 0.0 }).collect();
    Plane::new(w, h, data).expect("dimensions match")
}

/// Mean CIELAB color per label id.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperpixelColorMeans {
    pub means: Vec<[f64; 3]>,
}

pub fn superpixel_color_means(img: &LabImage, labels: &LabelMap) -> Result<SuperpixelColorMeans> {
    labels.check_dims((img.width(), img.height()))?;
    let k = labels.label_bound();
    let mut sums = vec![[0.0f64; 3]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in img.data().iter().zip(labels.as_slice()) {
        let s = &mut sums[l as usize];
        s[0] += p[0];
        s[1] += p[1];
        s[2] += p[2];
        counts[l as usize] += 1;
    }
    let means = sums
        .into_iter()
        .zip(counts)
        .map(|(s, n)| {
            if n == 0 {
                [0.0; 3]
            } else {
                let n = n as f64;
                [s[0] / n, s[1] / n, s[2] / n]
            }
        })
        .collect();
    Ok(SuperpixelColorMeans { means })
}

/// Upper-triangular map of color distances between 4-adjacent superpixels.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AdjacencyMatrix {
    pub k: usize,
    /// Keyed by `(i, j)` with `i < j`.
    pub entries: BTreeMap<(u32, u32), f64>,
}

impl AdjacencyMatrix {
    pub fn get(&self, a: u32, b: u32) -> Option<f64> {
        self.entries.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// 4-adjacent label pairs `(i, j)`, `i < j`.
pub fn adjacent_pairs(labels: &LabelMap) -> Vec<(u32, u32)> {
    let (w, h) = labels.dims();
    let l = labels.as_slice();
    let mut pairs = std::collections::BTreeSet::new();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w && l[i] != l[i + 1] {
                pairs.insert((l[i].min(l[i + 1]), l[i].max(l[i + 1])));
            }
            if y + 1 < h && l[i] != l[i + w] {
                pairs.insert((l[i].min(l[i + w]), l[i].max(l[i + w])));
            }
        }
    }
    pairs.into_iter().collect()
}

/// L1 distance of mean Lab triples for every adjacent pair.
pub fn adjacency_distances(means: &SuperpixelColorMeans, labels: &LabelMap) -> AdjacencyMatrix {
    let entries = adjacent_pairs(labels)
        .into_iter()
        .map(|(i, j)| {
            let (a, b) = (means.means[i as usize], means.means[j as usize]);
            let d = (a[0] - b[0]).abs() + (a[1] - b[1]).abs() + (a[2] - b[2]).abs();
            ((i, j), d)
        })
        .collect();
    AdjacencyMatrix { k: means.means.len(), entries }
}

/// Mean of the strictly positive entries; 0 when every entry is zero.
pub fn mean_nonzero(a: &AdjacencyMatrix) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let (sum, n) = a
        .entries
        .values()
        .filter(|&&d| d > 0.0)
        .fold((0.0, 0usize), |(s, n), &d| (s + d, n + 1));
    Ok(if n == 0 { 0.0 } else { sum / n as f64 })
}

/// Mask of pixels on the common boundary of a pair with `A[i,j] < a_hat`:
/// a pixel of label i with a 4-neighbor of label j, or vice versa.
pub fn weak_boundary_mask(a: &AdjacencyMatrix, a_hat: f64, labels: &LabelMap) -> Vec<bool> {
    let (w, h) = labels.dims();
    let l = labels.as_slice();
    let weak = |p: u32, q: u32| a.get(p, q).is_some_and(|d| d < a_hat);
    let mut mask = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w && l[i] != l[i + 1] && weak(l[i], l[i + 1]) {
                mask[i] = true;
                mask[i + 1] = true;
            }
            if y + 1 < h && l[i] != l[i + w] && weak(l[i], l[i + w]) {
                mask[i] = true;
                mask[i + w] = true;
            }
        }
    }
    mask
}

/// Zero every pixel of `edges` lying on the common boundary of a weak pair
/// (`A[i,j] < a_hat`). Other pixels are left unchanged.
pub fn eliminate_weak_edges(
    edges: &EdgeMap,
    a: &AdjacencyMatrix,
    a_hat: f64,
    labels: &LabelMap,
) -> Result<EdgeMap> {
    labels.check_dims(edges.dims())?;
    let mask = weak_boundary_mask(a, a_hat, labels);
    let mut out = edges.clone();
    for (v, &m) in out.data_mut().iter_mut().zip(&mask) {
        if m {
            *v = 0.0;
        }
    }
    Ok(out)
}

/// `(0.1 * max(G), 0.8 * max(G))`.
pub fn threshold_levels(g: &GradientMap) -> (f64, f64) {
    let m = g.max();
    (G_LOW_RATIO * m, G_HIGH_RATIO * m)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbedParams {
    pub method: Method,
    pub centroidx: bool,
    pub cluster: ClusterParams,
}

impl SbedParams {
    /// Centroid-SLIC with compactness 30.
    pub fn new(k: usize) -> Self {
        Self { method: Method::Slic, centroidx: true, cluster: ClusterParams::new(k) }
    }
}

/// Intermediate products of an SBED run.
#[derive(Clone, Debug)]
pub struct SbedTrace {
    pub labels: LabelMap,
    /// Binary superpixel boundary raster.
    pub boundaries: EdgeMap,
    /// Sobel gradient of `boundaries`.
    pub gradient: GradientMap,
    pub adjacency: AdjacencyMatrix,
    pub a_hat: f64,
    pub g_low: f64,
    pub g_high: f64,
    /// Pixels whose response was removed by the weak-boundary rule.
    pub eliminated: Vec<bool>,
    /// Final edge strength, in gradient units.
    pub edges: EdgeMap,
}

impl SbedTrace {
    /// Edge strength divided by `max(G)`, in [0, 1].
    pub fn normalized(&self) -> EdgeMap {
        self.edges.scaled(self.gradient.max())
    }
}

/// SBED on an existing segmentation.
///
/// The Sobel response at a pixel comes from the boundary pixels in its 3x3
/// neighborhood. Once weak boundary pixels are removed, a pixel keeps its
/// response only if that neighborhood still contains a retained boundary
/// pixel. Eliminated pixels stay at zero through the threshold pass; the
/// `G > g_high` branch restores only pixels that were not eliminated.
pub fn sbed_from_labels(img: &LabImage, labels: &LabelMap) -> Result<SbedTrace> {
    let (w, h) = labels.dims();
    let boundaries = superpixel_edges(labels);
    let gradient = sobel_gradient(&boundaries)?;
    let means = superpixel_color_means(img, labels)?;
    let adjacency = adjacency_distances(&means, labels);
    let a_hat = if adjacency.is_empty() { 0.0 } else { mean_nonzero(&adjacency)? };
    let retained = eliminate_weak_edges(&boundaries, &adjacency, a_hat, labels)?;

    let mut edges = gradient.clone();
    let mut eliminated = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if gradient.data()[i] == 0.0 {
                continue;
            }
            let mut supported = false;
            'scan: for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    if retained.get(nx, ny) > 0.0 {
                        supported = true;
                        break 'scan;
                    }
                }
            }
            if !supported {
                edges.data_mut()[i] = 0.0;
                eliminated[i] = true;
            }
        }
    }

    let (g_low, g_high) = threshold_levels(&gradient);
    for (i, (e, &g)) in edges.data_mut().iter_mut().zip(gradient.data()).enumerate() {
        if g < g_low {
            *e = 0.0;
        }
        if g > g_high && !eliminated[i] {
            *e = g;
        }
    }

    Ok(SbedTrace {
        labels: labels.clone(),
        boundaries,
        gradient,
        adjacency,
        a_hat,
        g_low,
        g_high,
        eliminated,
        edges,
    })
}

/// Segment `img` and run SBED; full trace.
pub fn sbed_trace(img: &RgbImage, params: &SbedParams) -> Result<SbedTrace> {
    let lab = rgb_to_lab(img);
    let seg = segment(params.method, params.centroidx, &lab, &params.cluster)?;
    sbed_from_labels(&lab, &seg.labels)
}

/// SBED edge map normalized to [0, 1].
pub fn sbed(img: &RgbImage, k: usize, method: Method) -> Result<EdgeMap> {
    let params = SbedParams { method, ..SbedParams::new(k) };
    Ok(sbed_trace(img, &params)?.normalized())
}

/// Binary Sobel edges: magnitude of the luma gradient above `threshold * max`.
pub fn sobel_baseline(img: &RgbImage, threshold: f64) -> Result<EdgeMap> {
    let g = sobel_gradient(&img.to_gray())?;
    let t = threshold * g.max();
    let data = g.data().iter().map(|&v| if v > t { 1.0 } else { 0.0 }).collect();
    Plane::new(g.width(), g.height(), data)
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> =
        (-radius..=radius).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable Gaussian blur with edge replication.
pub fn gaussian_blur(plane: &Plane, sigma: f64) -> Plane {
    let (w, h) = plane.dims();
    let k = gaussian_kernel(sigma);
    let r = (k.len() / 2) as i64;
    let src = plane.data();
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] = k
                .iter()
                .enumerate()
                .map(|(t, kv)| {
                    let sx = (x as i64 + t as i64 - r).clamp(0, w as i64 - 1) as usize;
                    kv * src[y * w + sx]
                })
                .sum();
        }
    }
    Plane::from_fn(w, h, |x, y| {
        k.iter()
            .enumerate()
            .map(|(t, kv)| {
                let sy = (y as i64 + t as i64 - r).clamp(0, h as i64 - 1) as usize;
                kv * tmp[sy * w + x]
            })
            .sum()
    })
}

/// Binary Canny edges: Gaussian smoothing (sigma 1.4), Sobel gradients,
/// non-maximum suppression and hysteresis with `high = threshold * max` and
/// `low = 0.4 * high`.
pub fn canny_baseline(img: &RgbImage, threshold: f64) -> Result<EdgeMap> {
    let smooth = gaussian_blur(&img.to_gray(), CANNY_SIGMA);
    let (w, h) = smooth.dims();
    if w < 3 || h < 3 {
        return Err(Error::ImageTooSmall { width: w, height: h, min: 3 });
    }
    let s = smooth.data();
    let at = |x: i64, y: i64| s[y.clamp(0, h as i64 - 1) as usize * w + x.clamp(0, w as i64 - 1) as usize];
    let mut mag = vec![0.0; w * h];
    let mut dir = vec![0u8; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            let gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            let i = y as usize * w + x as usize;
            mag[i] = (gx * gx + gy * gy).sqrt();
            let angle = gy.atan2(gx).to_degrees().rem_euclid(180.0);
            dir[i] = if !(22.5..157.5).contains(&angle) {
                0
            } else if angle < 67.5 {
                1
            } else if angle < 112.5 {
                2
            } else {
                3
            };
        }
    }

    // Non-maximum suppression. Plateaus keep the pixel on the negative side.
    let mut thin = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let m = mag[i];
            if m == 0.0 {
                continue;
            }
            let (dx, dy): (i64, i64) = match dir[i] {
                0 => (1, 0),
                1 => (1, 1),
                2 => (0, 1),
                _ => (-1, 1),
            };
            let get = |ox: i64, oy: i64| {
                let (nx, ny) = (x as i64 + ox, y as i64 + oy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    0.0
                } else {
                    mag[ny as usize * w + nx as usize]
                }
            };
            if m > get(-dx, -dy) && m >= get(dx, dy) {
                thin[i] = m;
            }
        }
    }

    let max = mag.iter().copied().fold(0.0, f64::max);
    let high = threshold * max;
    let low = CANNY_LOW_RATIO * high;
    let mut out = vec![0.0; w * h];
    if max > 0.0 {
        let mut queue: VecDeque<usize> = VecDeque::new();
        for (i, &m) in thin.iter().enumerate() {
            if m >= high {
                out[i] = 1.0;
                queue.push_back(i);
            }
        }
        while let Some(i) = queue.pop_front() {
            let (x, y) = (i % w, i / w);
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let j = ny * w + nx;
                    if out[j] == 0.0 && thin[j] >= low {
                        out[j] = 1.0;
                        queue.push_back(j);
                    }
                }
            }
        }
    }
    Plane::new(w, h, out)
}

/// Edge detectors compared by the harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Detector {
    Sbed,
    Sobel,
    Canny,
}

impl Detector {
    pub const ALL: [Detector; 3] = [Detector::Sbed, Detector::Sobel, Detector::Canny];

    /// Edge map in [0, 1]. `k` is used by SBED only.
    pub fn detect(&self, img: &RgbImage, k: usize) -> Result<EdgeMap> {
        match self {
            Detector::Sbed => sbed(img, k, Method::Slic),
            Detector::Sobel => sobel_baseline(img, BASELINE_THRESHOLD),
            Detector::Canny => canny_baseline(img, BASELINE_THRESHOLD),
        }
    }
}

impl std::fmt::Display for Detector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Detector::Sbed => "sbed",
            Detector::Sobel => "sobel",
            Detector::Canny => "canny",
        })
    }
}

impl std::str::FromStr for Detector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sbed" => Ok(Detector::Sbed),
            "sobel" => Ok(Detector::Sobel),
            "canny" => Ok(Detector::Canny),
            other => Err(Error::InvalidParameter(format!("unknown detector {other:?}"))),
        }
    }
}
