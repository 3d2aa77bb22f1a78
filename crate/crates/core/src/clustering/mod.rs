//! SLIC and SNIC superpixels with a pluggable centroid update.

pub mod connectivity;
mod labels;
pub mod slic;
pub mod snic;
pub mod update;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::LabImage;

pub use connectivity::enforce_connectivity;
pub use labels::{sidecar_path, LabelMap};
pub use slic::{init_centroids_grid, slic_assign};
pub use update::{
    residual_error, spatial_centroid, spatial_means, standard_centroid_update, CentroidUpdate,
    MeanUpdate, UpdateOutcome,
};

/// Cluster center: spatial position (column `x`, row `y`) and CIELAB color.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Centroid {
    pub x: f64,
    pub y: f64,
    pub lab: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterParams {
    /// Requested superpixel count.
    pub k: usize,
    pub compactness: f64,
    pub max_iters: usize,
    /// Stop once the summed L1 centroid displacement drops below this.
    pub threshold: f64,
    pub seed_perturb: bool,
    /// Centroid-SNIC refreshes the block color every `ceil(block_area / divisor)` pixels.
    pub refresh_divisor: usize,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self {
            k: 600,
            compactness: 30.0,
            max_iters: 10,
            threshold: 0.5,
            seed_perturb: true,
            refresh_divisor: 4,
        }
    }
}

impl ClusterParams {
    pub fn new(k: usize) -> Self {
        Self { k, ..Self::default() }
    }

    pub fn with_compactness(mut self, compactness: f64) -> Self {
        self.compactness = compactness;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn with_seed_perturb(mut self, on: bool) -> Self {
        self.seed_perturb = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if !(self.compactness > 0.0) {
            return Err(Error::InvalidParameter("compactness must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        if !(self.threshold >= 0.0) {
            return Err(Error::InvalidParameter("threshold must be non-negative".into()));
        }
        if self.refresh_divisor == 0 {
            return Err(Error::InvalidParameter("refresh_divisor must be at least 1".into()));
        }
        Ok(())
    }

    /// Fragments smaller than a quarter of the nominal superpixel area are merged.
    pub fn min_size(&self, width: usize, height: usize) -> usize {
        (width * height / self.k) / 4
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Slic,
    Snic,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Slic => "slic",
            Method::Snic => "snic",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "slic" => Ok(Method::Slic),
            "snic" => Ok(Method::Snic),
            other => Err(Error::InvalidParameter(format!("unknown method {other:?}"))),
        }
    }
}

/// Output of a segmentation run.
#[derive(Clone, Debug)]
pub struct Segmentation {
    pub labels: LabelMap,
    /// One centroid per output label.
    pub centroids: Vec<Centroid>,
    pub iterations: usize,
    /// Residual of the last update (0 for SNIC).
    pub residual: f64,
    /// Total number of empty-cluster events during iteration.
    pub empty_events: usize,
}

pub fn slic_segment(img: &LabImage, params: &ClusterParams) -> Result<Segmentation> {
    slic::slic_with_update(img, params, &MeanUpdate)
}

pub fn snic_segment(img: &LabImage, params: &ClusterParams) -> Result<Segmentation> {
    snic::snic_with_update(img, params, &MeanUpdate, None)
}

/// Run `method`, optionally with the block-based centroid update.
pub fn segment(
    method: Method,
    centroidx: bool,
    img: &LabImage,
    params: &ClusterParams,
) -> Result<Segmentation> {
    if !centroidx {
        return match method {
            Method::Slic => slic_segment(img, params),
            Method::Snic => snic_segment(img, params),
        };
    }
    crate::centroidx::centroidx_segment(method, img, params)
}

