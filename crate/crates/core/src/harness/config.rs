use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clustering::{ClusterParams, Method};
use crate::error::{Error, Result};
use crate::metrics::{DEFAULT_EPS, SSIM_WINDOW};
use crate::noise::{NoiseSpec, RNG_ALGORITHM};
use crate::sbed::{Detector, CANNY_LOW_RATIO};

/// A clustering method with the block-based update switched on or off.
///
/// Written as `slic`, `snic`, `centroid-slic` or `centroid-snic`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MethodSpec {
    pub method: Method,
    pub centroidx: bool,
}

impl MethodSpec {
    pub const SLIC: MethodSpec = MethodSpec { method: Method::Slic, centroidx: false };
    pub const CENTROID_SLIC: MethodSpec = MethodSpec { method: Method::Slic, centroidx: true };
    pub const SNIC: MethodSpec = MethodSpec { method: Method::Snic, centroidx: false };
    pub const CENTROID_SNIC: MethodSpec = MethodSpec { method: Method::Snic, centroidx: true };

    pub const ALL: [MethodSpec; 4] =
        [Self::SLIC, Self::CENTROID_SLIC, Self::SNIC, Self::CENTROID_SNIC];
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.centroidx {
            write!(f, "centroid-{}", self.method)
        } else {
            write!(f, "{}", self.method)
        }
    }
}

impl FromStr for MethodSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (centroidx, base) = match lower.strip_prefix("centroid-") {
            Some(rest) => (true, rest),
            None => (false, lower.as_str()),
        };
        Ok(MethodSpec { method: base.parse()?, centroidx })
    }
}

impl TryFrom<String> for MethodSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MethodSpec> for String {
    fn from(m: MethodSpec) -> String {
        m.to_string()
    }
}

/// Experiment grid and fixed run settings.
///
/// Loaded from a flat `key = value` file:
///
/// ```text
/// dataset_dir = "data/bsds"
/// output_dir = "results"
/// methods = ["slic", "centroid-slic"]
/// k_values = [100, 300, 600]
/// noise = ["none", "gaussian:0.1", "sp:0.15"]
/// seeds = [0, 1, 2]
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub dataset_dir: PathBuf,
    pub output_dir: PathBuf,
    pub methods: Vec<MethodSpec>,
    pub k_values: Vec<usize>,
    /// Noise conditions; an empty list means the clean condition only.
    pub noise: Vec<NoiseSpec>,
    /// Boundary-recall tolerance in pixels.
    pub eps: usize,
    pub seeds: Vec<u64>,
    pub compactness: f64,
    pub max_iters: usize,
    pub threshold: f64,
    pub seed_perturb: bool,
    pub refresh_divisor: usize,
    pub detectors: Vec<Detector>,
    /// Superpixel count used by SBED in the edge benchmark.
    pub edge_k: usize,
    /// Write wall-clock runtimes into the CSV. Off by default since timings
    /// differ between runs.
    pub record_runtime: bool,
    pub rng: String,
    pub ssim_window: usize,
    pub canny_low_ratio: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        let cluster = ClusterParams::default();
        Self {
            dataset_dir: PathBuf::from("dataset"),
            output_dir: PathBuf::from("results"),
            methods: MethodSpec::ALL.to_vec(),
            k_values: vec![100, 200, 300, 400, 500, 600],
            noise: Vec::new(),
            eps: DEFAULT_EPS,
            seeds: vec![0],
            compactness: cluster.compactness,
            max_iters: cluster.max_iters,
            threshold: cluster.threshold,
            seed_perturb: cluster.seed_perturb,
            refresh_divisor: cluster.refresh_divisor,
            detectors: Detector::ALL.to_vec(),
            edge_k: 600,
            record_runtime: false,
            rng: RNG_ALGORITHM.to_string(),
            ssim_window: SSIM_WINDOW,
            canny_low_ratio: CANNY_LOW_RATIO,
        }
    }
}

impl BenchConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: BenchConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::FileNotFound(path.to_path_buf()));
        }
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.methods.is_empty() {
            return bad("methods must not be empty".into());
        }
        if self.k_values.is_empty() {
            return bad("k_values must not be empty".into());
        }
        if self.k_values.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("k_values must be strictly ascending: {:?}", self.k_values));
        }
        if self.seeds.is_empty() {
            return bad("seeds must not be empty".into());
        }
        if self.detectors.is_empty() {
            return bad("detectors must not be empty".into());
        }
        if self.edge_k == 0 {
            return bad("edge_k must be at least 1".into());
        }
        for n in &self.noise {
            n.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.rng != RNG_ALGORITHM {
            return bad(format!("unsupported rng {:?}; only {RNG_ALGORITHM:?} is available", self.rng));
        }
        if self.ssim_window != SSIM_WINDOW {
            return bad(format!("ssim_window is fixed at {SSIM_WINDOW}"));
        }
        if self.canny_low_ratio != CANNY_LOW_RATIO {
            return bad(format!("canny_low_ratio is fixed at {CANNY_LOW_RATIO}"));
        }
        for &k in &self.k_values {
            self.cluster_params(k).validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// Noise conditions to run, with the clean condition standing in for an empty list.
    pub fn noise_conditions(&self) -> Vec<NoiseSpec> {
        if self.noise.is_empty() {
            vec![NoiseSpec::CLEAN]
        } else {
            self.noise.clone()
        }
    }

    pub fn cluster_params(&self, k: usize) -> ClusterParams {
        ClusterParams {
            k,
            compactness: self.compactness,
            max_iters: self.max_iters,
            threshold: self.threshold,
            seed_perturb: self.seed_perturb,
            refresh_divisor: self.refresh_divisor,
        }
    }
}
