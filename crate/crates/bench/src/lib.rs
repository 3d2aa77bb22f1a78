//! Shared workloads for the criterion benchmarks.

use superpix_core::harness::fixtures::mosaic;
use superpix_core::imagecore::{rgb_to_lab, LabImage, RgbImage};
use superpix_core::noise::NoiseSpec;

/// Width and height of a Berkeley-benchmark landscape image.
pub const BSD_DIMS: (usize, usize) = (481, 321);

/// A 481x321 mosaic with mild Gaussian noise, fixed by `seed`.
pub fn bsd_sized_rgb(seed: u64) -> RgbImage {
    let (w, h) = BSD_DIMS;
    let clean = mosaic(w, h, 40, seed, 0).expect("valid mosaic").image;
    NoiseSpec::gaussian(0.05).apply(&clean, seed).expect("valid noise")
}

pub fn bsd_sized_lab(seed: u64) -> LabImage {
    rgb_to_lab(&bsd_sized_rgb(seed))
}
