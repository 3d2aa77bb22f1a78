use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imagecore::LabImage;

use super::update::{residual_error, CentroidUpdate};
use super::{enforce_connectivity, Centroid, ClusterParams, LabelMap, Segmentation};

/// Grid step `sqrt(width * height / k)`.
pub fn grid_step(width: usize, height: usize, k: usize) -> f64 {
    ((width * height) as f64 / k as f64).sqrt()
}

/// Seed centroids on a regular grid with step `sqrt(N / k)`.
///
/// Columns are chosen as `round(width / step)`, rows as `round(k / columns)`,
/// and each seed sits on the integer pixel nearest the cell center (floored).
/// With `seed_perturb`, a seed moves to the lowest-gradient pixel of its 3x3
/// neighborhood; the center wins ties, so flat regions never move.
pub fn init_centroids_grid(img: &LabImage, k: usize, seed_perturb: bool) -> Result<Vec<Centroid>> {
    let (w, h) = (img.width(), img.height());
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if k > w * h {
        return Err(Error::TooManyClusters { k, pixels: w * h });
    }
    let step = grid_step(w, h, k);
    let nx = ((w as f64 / step).round() as usize).clamp(1, k.min(w));
    let ny = ((k as f64 / nx as f64).round() as usize).clamp(1, h);
    let (cw, ch) = (w as f64 / nx as f64, h as f64 / ny as f64);

    let mut seeds = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let mut x = (((i as f64 + 0.5) * cw) as usize).min(w - 1);
            let mut y = (((j as f64 + 0.5) * ch) as usize).min(h - 1);
            if seed_perturb {
                (x, y) = lowest_gradient_neighbor(img, x, y);
            }
            seeds.push(Centroid { x: x as f64, y: y as f64, lab: img.pixel(x, y) });
        }
    }
    Ok(seeds)
}

fn color_gradient(img: &LabImage, x: usize, y: usize) -> f64 {
    let (w, h) = (img.width(), img.height());
    let d = |a: [f64; 3], b: [f64; 3]| {
        (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
    };
    let gx = d(img.pixel((x + 1).min(w - 1), y), img.pixel(x.saturating_sub(1), y));
    let gy = d(img.pixel(x, (y + 1).min(h - 1)), img.pixel(x, y.saturating_sub(1)));
    gx + gy
}

fn lowest_gradient_neighbor(img: &LabImage, x: usize, y: usize) -> (usize, usize) {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut best = (x, y);
    let mut best_g = color_gradient(img, x, y);
    for dy in -1..=1i64 {
        for dx in -1..=1i64 {
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            if (dx, dy) == (0, 0) || nx < 0 || ny < 0 || nx >= w || ny >= h {
                continue;
            }
            let g = color_gradient(img, nx as usize, ny as usize);
            if g < best_g {
                best_g = g;
                best = (nx as usize, ny as usize);
            }
        }
    }
    best
}

/// Squared SLIC distance `d_color^2 + (d_spatial / step)^2 * compactness^2`.
#[inline]
pub fn slic_distance_sq(
    pixel: [f64; 3],
    x: f64,
    y: f64,
    c: &Centroid,
    spatial_weight: f64,
) -> f64 {
    let dl = pixel[0] - c.lab[0];
    let da = pixel[1] - c.lab[1];
    let db = pixel[2] - c.lab[2];
    let dx = x - c.x;
    let dy = y - c.y;
    dl * dl + da * da + db * db + (dx * dx + dy * dy) * spatial_weight
}

/// Inclusive pixel window `[x0, x1] x [y0, y1]` of points within `step` of
/// the centroid along each axis, clipped to the image. `None` when empty.
fn search_window(c: &Centroid, step: f64, w: usize, h: usize) -> Option<(usize, usize, usize, usize)> {
    let x0 = (c.x - step).ceil().max(0.0);
    let x1 = (c.x + step).floor().min(w as f64 - 1.0);
    let y0 = (c.y - step).ceil().max(0.0);
    let y1 = (c.y + step).floor().min(h as f64 - 1.0);
    (x0 <= x1 && y0 <= y1).then_some((x0 as usize, x1 as usize, y0 as usize, y1 as usize))
}

/// Assign every pixel to its nearest centroid among those whose 2S x 2S
/// window covers it (lowest index wins ties). Pixels outside every window go
/// to the globally nearest centroid.
///
/// Rows are processed in parallel; each pixel scans its candidates in
/// centroid order, so the result does not depend on the thread count.
pub fn slic_assign(img: &LabImage, centroids: &[Centroid], params: &ClusterParams) -> LabelMap {
    let (w, h) = (img.width(), img.height());
    let step = grid_step(w, h, params.k);
    let spatial_weight = (params.compactness / step).powi(2);
    let windows: Vec<_> = centroids.iter().map(|c| search_window(c, step, w, h)).collect();
    let pixels = img.data();

    let mut labels = vec![0u32; w * h];
    labels.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let mut best = vec![f64::INFINITY; w];
        let yf = y as f64;
        for (ci, (c, win)) in centroids.iter().zip(&windows).enumerate() {
            let Some((x0, x1, y0, y1)) = *win else { continue };
            if y < y0 || y > y1 {
                continue;
            }
            for x in x0..=x1 {
                let d = slic_distance_sq(pixels[y * w + x], x as f64, yf, c, spatial_weight);
                if d < best[x] {
                    best[x] = d;
                    row[x] = ci as u32;
                }
            }
        }
        for x in 0..w {
            if best[x].is_infinite() {
                let p = pixels[y * w + x];
                let mut bd = f64::INFINITY;
                for (ci, c) in centroids.iter().enumerate() {
                    let d = slic_distance_sq(p, x as f64, yf, c, spatial_weight);
                    if d < bd {
                        bd = d;
                        row[x] = ci as u32;
                    }
                }
            }
        }
    });
    LabelMap::new(w, h, labels).expect("dimensions match image")
}

/// Iterative SLIC loop with a pluggable centroid update.
pub fn slic_with_update(
    img: &LabImage,
    params: &ClusterParams,
    updater: &dyn CentroidUpdate,
) -> Result<Segmentation> {
    params.validate()?;
    let mut centroids = init_centroids_grid(img, params.k, params.seed_perturb)?;
    let k = centroids.len();
    let mut labels = LabelMap::filled(img.width(), img.height(), 0);
    let mut iterations = 0;
    let mut empty_events = 0;
    let mut residual = f64::INFINITY;
    while iterations < params.max_iters {
        labels = slic_assign(img, &centroids, params);
        let out = updater.update(img, &labels, k, &centroids);
        empty_events += out.empty.len();
        residual = residual_error(&centroids, &out.centroids)?;
        centroids = out.centroids;
        iterations += 1;
        if residual < params.threshold {
            break;
        }
    }
    let labels = enforce_connectivity(&labels, params.min_size(img.width(), img.height()));
    let k_out = labels.count();
    let centroids = updater.update(img, &labels, k_out, &[]).centroids;
    Ok(Segmentation { labels, centroids, iterations, residual, empty_events })
}
