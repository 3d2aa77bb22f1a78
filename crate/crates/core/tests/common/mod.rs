//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use superpix_core::clustering::{Centroid, LabelMap};
use superpix_core::imagecore::LabImage;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_labels(rng: &mut ChaCha8Rng, w: usize, h: usize, k: u32) -> LabelMap {
    LabelMap::from_fn(w, h, |_, _| rng.random_range(0..k))
}

pub fn random_lab(rng: &mut ChaCha8Rng, w: usize, h: usize) -> LabImage {
    let data = (0..w * h)
        .map(|_| {
            [
                rng.random_range(0.0..100.0),
                rng.random_range(-80.0..80.0),
                rng.random_range(-80.0..80.0),
            ]
        })
        .collect();
    LabImage::new(w, h, data).unwrap()
}

fn label_at(l: &LabelMap, x: i64, y: i64) -> Option<u32> {
    let (w, h) = l.dims();
    (x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h).then(|| l.get(x as usize, y as usize))
}

/// Pixel has a 4-neighbor inside the image with another label.
pub fn is_boundary(l: &LabelMap, x: usize, y: usize) -> bool {
    let v = l.get(x, y);
    [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)]
        .iter()
        .any(|(dx, dy)| label_at(l, x as i64 + dx, y as i64 + dy).is_some_and(|n| n != v))
}

pub fn br_oracle(labels: &LabelMap, gt: &LabelMap, eps: usize) -> f64 {
    let (w, h) = gt.dims();
    let mut total = 0;
    let mut hit = 0;
    for y in 0..h {
        for x in 0..w {
            if !is_boundary(gt, x, y) {
                continue;
            }
            total += 1;
            let e = eps as i64;
            let found = (-e..=e).any(|dy| {
                (-e..=e).any(|dx| {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    nx >= 0
                        && ny >= 0
                        && (nx as usize) < w
                        && (ny as usize) < h
                        && is_boundary(labels, nx as usize, ny as usize)
                })
            });
            if found {
                hit += 1;
            }
        }
    }
    if total == 0 { 1.0 } else { hit as f64 / total as f64 }
}

pub fn ue_oracle(labels: &LabelMap, gt: &LabelMap) -> f64 {
    let n = labels.len();
    let sp_ids: std::collections::BTreeSet<u32> = labels.as_slice().iter().copied().collect();
    let gt_ids: std::collections::BTreeSet<u32> = gt.as_slice().iter().copied().collect();
    let mut total = 0i64;
    for &g in &gt_ids {
        let g_size = gt.as_slice().iter().filter(|&&v| v == g).count() as i64;
        let mut covered = 0i64;
        for &s in &sp_ids {
            let s_size = labels.as_slice().iter().filter(|&&v| v == s).count();
            let inter = labels
                .as_slice()
                .iter()
                .zip(gt.as_slice())
                .filter(|(&a, &b)| a == s && b == g)
                .count();
            if inter > 0 && 20 * inter >= s_size {
                covered += s_size as i64;
            }
        }
        total += covered - g_size;
    }
    total as f64 / n as f64
}

pub fn co_oracle(labels: &LabelMap) -> f64 {
    let (w, h) = labels.dims();
    let n = (w * h) as f64;
    let ids: std::collections::BTreeSet<u32> = labels.as_slice().iter().copied().collect();
    let mut co = 0.0;
    for id in ids {
        let mut area = 0.0;
        let mut perim = 0.0;
        for y in 0..h {
            for x in 0..w {
                if labels.get(x, y) != id {
                    continue;
                }
                area += 1.0;
                let on_edge = [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)]
                    .iter()
                    .any(|(dx, dy)| label_at(labels, x as i64 + dx, y as i64 + dy) != Some(id));
                if on_edge {
                    perim += 1.0;
                }
            }
        }
        co += (area / n) * 4.0 * std::f64::consts::PI * area / (perim * perim);
    }
    co.clamp(0.0, 1.0)
}

/// Mean position and color over the pixels of `label`, summed naively.
pub fn centroid_oracle(img: &LabImage, labels: &LabelMap, label: u32) -> Option<Centroid> {
    let (w, h) = labels.dims();
    let (mut sx, mut sy, mut sc, mut n) = (0.0, 0.0, [0.0; 3], 0.0);
    for y in 0..h {
        for x in 0..w {
            if labels.get(x, y) == label {
                sx += x as f64;
                sy += y as f64;
                let p = img.pixel(x, y);
                for c in 0..3 {
                    sc[c] += p[c];
                }
                n += 1.0;
            }
        }
    }
    (n > 0.0).then(|| Centroid { x: sx / n, y: sy / n, lab: [sc[0] / n, sc[1] / n, sc[2] / n] })
}

/// Mean color over the pixels with `|x - cx| <= side/2`-style bounds given explicitly.
pub fn rect_mean_oracle(img: &LabImage, x0: usize, y0: usize, x1: usize, y1: usize) -> [f64; 3] {
    let mut s = [0.0; 3];
    let mut n = 0.0;
    for y in y0..=y1 {
        for x in x0..=x1 {
            let p = img.pixel(x, y);
            for c in 0..3 {
                s[c] += p[c];
            }
            n += 1.0;
        }
    }
    [s[0] / n, s[1] / n, s[2] / n]
}

/// Block bounds from the centroid, computed independently of the library:
/// nearest pixel (halves down), then `side/2` back and `side - 1` forward.
pub fn block_bounds_oracle(cx: f64, cy: f64, side: usize, w: usize, h: usize) -> (usize, usize, usize, usize) {
    let round = |v: f64| if v - v.floor() > 0.5 { v.floor() + 1.0 } else { v.floor() };
    let cx = (round(cx) as i64).clamp(0, w as i64 - 1);
    let cy = (round(cy) as i64).clamp(0, h as i64 - 1);
    let half = (side / 2) as i64;
    let lo = |c: i64| (c - half).max(0) as usize;
    let hi = |c: i64, lim: usize| ((c - half + side as i64 - 1).min(lim as i64 - 1)) as usize;
    (lo(cx), lo(cy), hi(cx, w), hi(cy, h))
}

/// Labels are each a single 4-connected region, checked by flood fill.
pub fn every_label_connected(labels: &LabelMap) -> bool {
    let (w, h) = labels.dims();
    let mut seen_label = std::collections::HashSet::new();
    let mut visited = vec![false; w * h];
    for start in 0..w * h {
        if visited[start] {
            continue;
        }
        let l = labels.as_slice()[start];
        if !seen_label.insert(l) {
            return false;
        }
        let mut stack = vec![start];
        visited[start] = true;
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            let mut push = |j: usize| {
                if !visited[j] && labels.as_slice()[j] == l {
                    visited[j] = true;
                    stack.push(j);
                }
            };
            if x > 0 {
                push(i - 1);
            }
            if x + 1 < w {
                push(i + 1);
            }
            if y > 0 {
                push(i - w);
            }
            if y + 1 < h {
                push(i + w);
            }
        }
    }
    true
}
