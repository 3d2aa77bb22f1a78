//! Synthetic images with exactly known region boundaries.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clustering::LabelMap;
use crate::error::{Error, Result};
use crate::imagecore::{save_png, RgbImage};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FixtureKind {
    /// Two flat colors split by a straight line.
    TwoToneLine,
    /// A flat disc on a flat background.
    TwoToneCircle,
    Checkerboard,
    /// Two regions split by a line, each with a horizontal color ramp.
    Gradient,
    /// Voronoi cells of random flat colors, any aspect ratio.
    Mosaic,
}

impl FixtureKind {
    pub const ALL: [FixtureKind; 4] = [
        FixtureKind::TwoToneLine,
        FixtureKind::TwoToneCircle,
        FixtureKind::Checkerboard,
        FixtureKind::Gradient,
    ];

    fn tag(&self) -> &'static str {
        match self {
            FixtureKind::TwoToneLine => "line",
            FixtureKind::TwoToneCircle => "circle",
            FixtureKind::Checkerboard => "checker",
            FixtureKind::Gradient => "gradient",
            FixtureKind::Mosaic => "mosaic",
        }
    }
}

/// An image and its ground-truth segmentation.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub id: String,
    pub kind: FixtureKind,
    pub image: RgbImage,
    pub gt: LabelMap,
}

fn fixture_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn luma(c: [u8; 3]) -> f64 {
    0.299 * c[0] as f64 + 0.587 * c[1] as f64 + 0.114 * c[2] as f64
}

/// Two colors at least 80 apart in some channel and 60 apart in luma, so
/// that grayscale and color detectors both see the boundary.
fn color_pair(rng: &mut ChaCha8Rng) -> ([u8; 3], [u8; 3]) {
    loop {
        let a: [u8; 3] = std::array::from_fn(|_| rng.random_range(30..=225));
        let b: [u8; 3] = std::array::from_fn(|_| rng.random_range(30..=225));
        let gap = (0..3).map(|c| (a[c] as i32 - b[c] as i32).abs()).max().unwrap_or(0);
        if gap >= 80 && (luma(a) - luma(b)).abs() >= 60.0 {
            return (a, b);
        }
    }
}

/// Side predicate of a random line through the central half of the image.
fn random_line(rng: &mut ChaCha8Rng, size: usize) -> impl Fn(usize, usize) -> bool {
    let s = size as f64;
    let px = rng.random_range(0.25 * s..0.75 * s);
    let py = rng.random_range(0.25 * s..0.75 * s);
    let theta = rng.random_range(0.0..std::f64::consts::PI);
    let (nx, ny) = (theta.cos(), theta.sin());
    move |x, y| (x as f64 + 0.5 - px) * nx + (y as f64 + 0.5 - py) * ny >= 0.0
}

fn two_region(
    id: String,
    kind: FixtureKind,
    size: usize,
    inside: impl Fn(usize, usize) -> bool,
    color: impl Fn(usize, usize, bool) -> [u8; 3],
) -> Result<Fixture> {
    let gt = LabelMap::from_fn(size, size, |x, y| inside(x, y) as u32);
    if gt.count() != 2 {
        return Err(Error::InvalidRaster(format!("{id}: degenerate two-region fixture")));
    }
    let image = RgbImage::from_fn(size, size, |x, y| color(x, y, inside(x, y)))?;
    Ok(Fixture { id, kind, image, gt })
}

/// Generate fixture `index` of the given kind. The same `(kind, seed, index)`
/// always yields the same fixture.
pub fn generate(kind: FixtureKind, size: usize, seed: u64, index: usize) -> Result<Fixture> {
    if size < 16 {
        return Err(Error::ImageTooSmall { width: size, height: size, min: 16 });
    }
    let mut rng = fixture_rng(seed, index);
    let id = format!("{}_{index:03}", kind.tag());
    let (a, b) = color_pair(&mut rng);
    match kind {
        FixtureKind::Mosaic => mosaic(size, size, 12, seed, index),
        FixtureKind::TwoToneLine => {
            let side = random_line(&mut rng, size);
            two_region(id, kind, size, side, |_, _, s| if s { a } else { b })
        }
        FixtureKind::TwoToneCircle => {
            let s = size as f64;
            let r = rng.random_range(0.15 * s..0.3 * s);
            let cx = rng.random_range(r + 2.0..s - r - 2.0);
            let cy = rng.random_range(r + 2.0..s - r - 2.0);
            let inside = move |x: usize, y: usize| {
                let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                dx * dx + dy * dy <= r * r
            };
            two_region(id, kind, size, inside, |_, _, s| if s { a } else { b })
        }
        FixtureKind::Checkerboard => {
            let cell = rng.random_range(size / 8..=size / 4).max(2);
            let cols = size.div_ceil(cell);
            let gt = LabelMap::from_fn(size, size, |x, y| ((y / cell) * cols + x / cell) as u32);
            let image = RgbImage::from_fn(size, size, |x, y| {
                if (x / cell + y / cell) % 2 == 0 {
                    a
                } else {
                    b
                }
            })?;
            Ok(Fixture { id, kind, image, gt })
        }
        FixtureKind::Gradient => {
            let side = random_line(&mut rng, size);
            let span = size.max(2) as f64 - 1.0;
            let ramp = move |base: [u8; 3], x: usize, dir: f64| -> [u8; 3] {
                let t = dir * (x as f64 / span - 0.5) * 40.0;
                base.map(|v| (v as f64 + t).round().clamp(0.0, 255.0) as u8)
            };
            two_region(id, kind, size, side, move |x, _, s| {
                if s {
                    ramp(a, x, 1.0)
                } else {
                    ramp(b, x, -1.0)
                }
            })
        }
    }
}

/// Voronoi mosaic of `regions` cells with random flat colors.
pub fn mosaic(width: usize, height: usize, regions: usize, seed: u64, index: usize) -> Result<Fixture> {
    if width < 2 || height < 2 || regions == 0 {
        return Err(Error::ImageTooSmall { width, height, min: 2 });
    }
    let mut rng = fixture_rng(seed, index);
    let sites: Vec<(f64, f64, [u8; 3])> = (0..regions)
        .map(|_| {
            let x = rng.random_range(0.0..width as f64);
            let y = rng.random_range(0.0..height as f64);
            (x, y, std::array::from_fn(|_| rng.random_range(0..=255)))
        })
        .collect();
    let nearest = |x: usize, y: usize| {
        let mut best = (f64::INFINITY, 0usize);
        for (i, &(sx, sy, _)) in sites.iter().enumerate() {
            let d = (x as f64 + 0.5 - sx).powi(2) + (y as f64 + 0.5 - sy).powi(2);
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    };
    let gt = LabelMap::from_fn(width, height, |x, y| nearest(x, y) as u32);
    let image = RgbImage::from_fn(width, height, |x, y| sites[gt.get(x, y) as usize].2)?;
    let id = format!("{}_{index:03}", FixtureKind::Mosaic.tag());
    Ok(Fixture { id, kind: FixtureKind::Mosaic, image, gt })
}

/// `count` two-tone fixtures, alternating line and disc splits.
pub fn two_tone_set(count: usize, size: usize, seed: u64) -> Result<Vec<Fixture>> {
    (0..count)
        .map(|i| {
            let kind = if i % 2 == 0 { FixtureKind::TwoToneLine } else { FixtureKind::TwoToneCircle };
            generate(kind, size, seed, i)
        })
        .collect()
}

/// `count` fixtures cycling through the square kinds.
pub fn mixed_set(count: usize, size: usize, seed: u64) -> Result<Vec<Fixture>> {
    (0..count)
        .map(|i| generate(FixtureKind::ALL[i % FixtureKind::ALL.len()], size, seed, i))
        .collect()
}

/// Write fixtures in the dataset layout read by
/// [`ingest_dataset`](super::ingest_dataset).
pub fn write_fixtures(dir: impl AsRef<Path>, fixtures: &[Fixture]) -> Result<()> {
    let dir = dir.as_ref();
    let (images, truths) = (dir.join("images"), dir.join("groundtruth"));
    std::fs::create_dir_all(&images)?;
    std::fs::create_dir_all(&truths)?;
    for f in fixtures {
        save_png(&f.image, images.join(format!("{}.png", f.id)))?;
        f.gt.write_png16(truths.join(format!("{}.png", f.id)))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_distinct() {
        let a = two_tone_set(4, 64, 11).unwrap();
        let b = two_tone_set(4, 64, 11).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.image, y.image);
            assert_eq!(x.gt, y.gt);
        }
        assert_ne!(a[0].image, a[2].image);
    }

    #[test]
    fn two_tone_image_follows_labels() {
        for f in two_tone_set(6, 48, 3).unwrap() {
            assert_eq!(f.gt.count(), 2);
            let first = |l: u32| {
                let i = f.gt.as_slice().iter().position(|&v| v == l).unwrap();
                f.image.pixel(i % 48, i / 48)
            };
            let (c0, c1) = (first(0), first(1));
            assert_ne!(c0, c1);
            for (i, &l) in f.gt.as_slice().iter().enumerate() {
                let want = if l == 0 { c0 } else { c1 };
                assert_eq!(f.image.pixel(i % 48, i / 48), want);
            }
        }
    }

    #[test]
    fn checkerboard_cells_are_labels() {
        let f = generate(FixtureKind::Checkerboard, 64, 5, 0).unwrap();
        assert!(f.gt.count() >= 16);
        assert_eq!(f.id, "checker_000");
    }

    #[test]
    fn ids_are_unique_in_mixed_set() {
        let set = mixed_set(9, 32, 1).unwrap();
        let mut ids: Vec<_> = set.iter().map(|f| f.id.clone()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 9);
    }
}
