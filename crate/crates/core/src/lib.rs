//! Noise-resistant superpixel segmentation.
//!
//! The crate provides SLIC and SNIC clustering with a pluggable centroid
//! update. The block-based update in [`centroidx`] computes each superpixel's
//! spatial centroid over the whole region but its color centroid over a fixed
//! square block centered on that spatial centroid, which keeps impulse and
//! Gaussian noise from dragging the color estimate. On top of the
//! segmentation sits a superpixel-based edge detector ([`sbed`]), the usual
//! superpixel and edge-map metrics ([`metrics`]), reproducible noise
//! injection ([`noise`]) and an experiment harness ([`harness`]).
//!
//! ```no_run
//! use superpix_core::prelude::*;
//!
//! let rgb = load_image("input.png").unwrap();
//! let lab = rgb_to_lab(&rgb);
//! let params = ClusterParams::new(600).with_compactness(30.0);
//! let out = segment(Method::Slic, true, &lab, &params).unwrap();
//! println!("{} superpixels", out.labels.count());
//! ```

pub mod centroidx;
pub mod clustering;
pub mod error;
pub mod harness;
pub mod imagecore;
pub mod metrics;
pub mod noise;
pub mod sbed;

pub use error::{Error, Result};

/// Re-exports of the types and entry points most callers need.
pub mod prelude {
    pub use crate::centroidx::{block_side, centroidx_update, BlockMeans, BlockSpec};
    pub use crate::clustering::{
        enforce_connectivity, segment, slic_segment, snic_segment, standard_centroid_update,
        Centroid, ClusterParams, LabelMap, Method, Segmentation,
    };
    pub use crate::error::{Error, Result};
    pub use crate::imagecore::{
        lab_to_rgb, load_image, rgb_to_lab, save_png, sobel_gradient, GradientMap, LabImage,
        Plane, RgbImage,
    };
    pub use crate::metrics::{
        boundary_recall, compactness, count_superpixels, psnr, ssim, undersegmentation_error,
        GroundTruth, MetricsReport,
    };
    pub use crate::noise::{add_gaussian, add_salt_pepper, NoiseKind, NoiseSpec};
    pub use crate::sbed::{canny_baseline, sbed, sobel_baseline, EdgeMap, SbedParams};
}
