//! Reproducible Gaussian and salt-and-pepper corruption.
//!
//! Every pixel draws from its own ChaCha8 stream (`seed`, stream = pixel
//! index), so output is identical across runs, platforms and thread counts.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::RgbImage;

/// Name of the generator behind every noise stream.
pub const RNG_ALGORITHM: &str = "chacha8";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NoiseKind {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "gaussian")]
    Gaussian,
    #[serde(rename = "sp")]
    SaltPepper,
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseKind::None => "none",
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::SaltPepper => "sp",
        })
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "clean" => Ok(NoiseKind::None),
            "gaussian" | "gauss" => Ok(NoiseKind::Gaussian),
            "sp" | "salt-pepper" | "saltpepper" | "salt_pepper" => Ok(NoiseKind::SaltPepper),
            other => Err(Error::InvalidParameter(format!("unknown noise kind {other:?}"))),
        }
    }
}

/// Noise condition. `level` is the Gaussian standard deviation on the [0, 1]
/// channel scale, or the salt-and-pepper density.
///
/// Written as `kind:level` in config files (`gaussian:0.15`, `sp:0.1`, `none`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub level: f64,
}

impl NoiseSpec {
    pub const CLEAN: NoiseSpec = NoiseSpec { kind: NoiseKind::None, level: 0.0 };

    pub fn gaussian(std: f64) -> Self {
        Self { kind: NoiseKind::Gaussian, level: std }
    }

    pub fn salt_pepper(density: f64) -> Self {
        Self { kind: NoiseKind::SaltPepper, level: density }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.level) {
            return Err(Error::InvalidParameter(format!(
                "noise level {} outside [0, 1]",
                self.level
            )));
        }
        Ok(())
    }

    pub fn apply(&self, img: &RgbImage, seed: u64) -> Result<RgbImage> {
        self.validate()?;
        Ok(match self.kind {
            NoiseKind::None => img.clone(),
            NoiseKind::Gaussian => add_gaussian(img, self.level, seed)?,
            NoiseKind::SaltPepper => add_salt_pepper(img, self.level, seed)?,
        })
    }
}

impl fmt::Display for NoiseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            NoiseKind::None => f.write_str("none"),
            kind => write!(f, "{kind}:{}", self.level),
        }
    }
}

impl FromStr for NoiseSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, level) = match s.split_once(':') {
            Some((k, l)) => (k.trim().parse::<NoiseKind>()?, l.trim()),
            None => (s.trim().parse::<NoiseKind>()?, "0"),
        };
        let level = level
            .parse::<f64>()
            .map_err(|_| Error::InvalidParameter(format!("bad noise level in {s:?}")))?;
        let spec = if kind == NoiseKind::None { NoiseSpec::CLEAN } else { NoiseSpec { kind, level } };
        spec.validate()?;
        Ok(spec)
    }
}

impl TryFrom<String> for NoiseSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<NoiseSpec> for String {
    fn from(n: NoiseSpec) -> String {
        n.to_string()
    }
}

fn pixel_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Standard-normal draws for one pixel's three channels.
pub fn gaussian_draws(seed: u64, index: usize) -> [f64; 3] {
    let mut rng = pixel_rng(seed, index);
    [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)]
}

/// Add zero-mean Gaussian noise with standard deviation `std` to each channel
/// on the [0, 1] scale, clamp, and requantize to 8 bits.
pub fn add_gaussian(img: &RgbImage, std: f64, seed: u64) -> Result<RgbImage> {
    if !(std >= 0.0) {
        return Err(Error::InvalidParameter(format!("negative std {std}")));
    }
    if std == 0.0 {
        return Ok(img.clone());
    }
    let mut out = img.clone();
    out.data_mut().par_chunks_mut(3).enumerate().for_each(|(i, px)| {
        let z = gaussian_draws(seed, i);
        for c in 0..3 {
            let v = px[c] as f64 / 255.0 + std * z[c];
            px[c] = (v.clamp(0.0, 1.0) * 255.0).round() as u8;
        }
    });
    Ok(out)
}

/// Replace each pixel, with probability `density`, by pure black or pure
/// white (equally likely, all channels together).
pub fn add_salt_pepper(img: &RgbImage, density: f64, seed: u64) -> Result<RgbImage> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidParameter(format!("density {density} outside [0, 1]")));
    }
    let mut out = img.clone();
    out.data_mut().par_chunks_mut(3).enumerate().for_each(|(i, px)| {
        let mut rng = pixel_rng(seed, i);
        let u: f64 = rng.random();
        if u < density {
            let v = if rng.random::<bool>() { 255 } else { 0 };
            px.fill(v);
        }
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(w: usize, h: usize, v: u8) -> RgbImage {
        RgbImage::filled(w, h, [v, v, v]).unwrap()
    }

    #[test]
    fn zero_level_is_identity() {
        let img = RgbImage::from_fn(17, 9, |x, y| [x as u8 * 9, y as u8 * 20, 77]).unwrap();
        assert_eq!(add_gaussian(&img, 0.0, 5).unwrap(), img);
        assert_eq!(add_salt_pepper(&img, 0.0, 5).unwrap(), img);
    }

    #[test]
    fn full_density_is_all_extremes() {
        let img = gray(40, 40, 100);
        let out = add_salt_pepper(&img, 1.0, 9).unwrap();
        assert!(out.pixels().all(|p| p == [0, 0, 0] || p == [255, 255, 255]));
        let whites = out.pixels().filter(|p| p[0] == 255).count();
        assert!(whites > 600 && whites < 1000, "{whites}");
    }

    #[test]
    fn same_seed_same_bytes_different_seed_differs() {
        let img = gray(64, 48, 128);
        let a = add_gaussian(&img, 0.1, 42).unwrap();
        let b = add_gaussian(&img, 0.1, 42).unwrap();
        let c = add_gaussian(&img, 0.1, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let s1 = add_salt_pepper(&img, 0.2, 42).unwrap();
        assert_eq!(s1, add_salt_pepper(&img, 0.2, 42).unwrap());
        assert_ne!(s1, add_salt_pepper(&img, 0.2, 43).unwrap());
    }

    #[test]
    fn thread_count_does_not_matter() {
        let img = gray(50, 50, 90);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let single = pool.install(|| add_gaussian(&img, 0.2, 7).unwrap());
        assert_eq!(single, add_gaussian(&img, 0.2, 7).unwrap());
    }

    #[test]
    fn invalid_levels() {
        let img = gray(4, 4, 0);
        assert!(add_gaussian(&img, -0.1, 0).is_err());
        assert!(add_salt_pepper(&img, 1.5, 0).is_err());
        assert!(NoiseSpec::gaussian(2.0).apply(&img, 0).is_err());
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("sp".parse::<NoiseKind>().unwrap(), NoiseKind::SaltPepper);
        assert_eq!("Gaussian".parse::<NoiseKind>().unwrap(), NoiseKind::Gaussian);
        assert!("poisson".parse::<NoiseKind>().is_err());
        let spec: NoiseSpec = "sp:0.15".parse().unwrap();
        assert_eq!(spec, NoiseSpec::salt_pepper(0.15));
        assert_eq!(spec.to_string(), "sp:0.15");
        assert_eq!("none".parse::<NoiseSpec>().unwrap(), NoiseSpec::CLEAN);
        assert!("gaussian:1.5".parse::<NoiseSpec>().is_err());
    }
}
