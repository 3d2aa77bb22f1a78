use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageBuffer, ImageFormat, ImageReader, Luma};

use crate::error::{Error, Result};

/// Per-pixel superpixel assignment, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
}

impl LabelMap {
    pub fn new(width: usize, height: usize, labels: Vec<u32>) -> Result<Self> {
        if width == 0 || height == 0 || labels.len() != width * height {
            return Err(Error::InvalidRaster(format!(
                "expected {} labels for {width}x{height}, got {}",
                width * height,
                labels.len()
            )));
        }
        Ok(Self { width, height, labels })
    }

    pub fn filled(width: usize, height: usize, label: u32) -> Self {
        Self { width, height, labels: vec![label; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u32) -> Self {
        let mut labels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                labels.push(f(x, y));
            }
        }
        Self { width, height, labels }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    #[inline]
    pub fn as_slice(&self) -> &[u32] {
        &self.labels
    }

    pub fn as_mut_slice(&mut self) -> &mut [u32] {
        &mut self.labels
    }

    /// One past the largest label.
    pub fn label_bound(&self) -> usize {
        self.labels.iter().max().map_or(0, |&m| m as usize + 1)
    }

    /// Number of distinct labels present.
    pub fn count(&self) -> usize {
        let mut seen = vec![false; self.label_bound()];
        let mut n = 0;
        for &l in &self.labels {
            if !std::mem::replace(&mut seen[l as usize], true) {
                n += 1;
            }
        }
        n
    }

    /// Renumber labels to `0..count()` in order of first appearance (raster order).
    pub fn relabeled(&self) -> LabelMap {
        let mut map: HashMap<u32, u32> = HashMap::new();
        let labels = self
            .labels
            .iter()
            .map(|&l| {
                let next = map.len() as u32;
                *map.entry(l).or_insert(next)
            })
            .collect();
        LabelMap { width: self.width, height: self.height, labels }
    }

    /// True when both maps describe the same partition, ignoring label ids.
    pub fn same_partition(&self, other: &LabelMap) -> bool {
        self.dims() == other.dims() && self.relabeled().labels == other.relabeled().labels
    }

    pub fn check_dims(&self, other: (usize, usize)) -> Result<()> {
        if self.dims() != other {
            return Err(Error::DimensionMismatch { left: self.dims(), right: other });
        }
        Ok(())
    }

    /// Pixels per label, indexed by label id.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.label_bound()];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }

    /// Write as a 16-bit grayscale PNG plus a `K_out=<n>` sidecar next to it
    /// (same stem, `.txt` extension).
    pub fn save_png16(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        self.write_png16(path)?;
        fs::write(sidecar_path(path), format!("K_out={}\n", self.count()))?;
        Ok(())
    }

    /// Write as a 16-bit grayscale PNG without a sidecar.
    pub fn write_png16(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if self.label_bound() > u16::MAX as usize + 1 {
            return Err(Error::InvalidRaster(format!(
                "{} labels do not fit a 16-bit PNG",
                self.label_bound()
            )));
        }
        let raw: Vec<u16> = self.labels.iter().map(|&l| l as u16).collect();
        let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
            ImageBuffer::from_raw(self.width as u32, self.height as u32, raw)
                .expect("buffer length matches dimensions");
        buf.save_with_format(path, ImageFormat::Png)
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        Ok(())
    }

    /// Read a grayscale PNG label map (8- or 16-bit; value = label).
    pub fn load_png(path: impl AsRef<Path>) -> Result<LabelMap> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::FileNotFound(path.to_path_buf()));
        }
        let reader = ImageReader::open(path)?
            .with_guessed_format()
            .map_err(|e| Error::CorruptData(e.to_string()))?;
        if reader.format() != Some(ImageFormat::Png) {
            return Err(Error::UnsupportedFormat(path.display().to_string()));
        }
        let img = reader.decode().map_err(|e| Error::CorruptData(e.to_string()))?;
        let (w, h) = (img.width() as usize, img.height() as usize);
        let labels = match img {
            DynamicImage::ImageLuma16(buf) => buf.into_raw().into_iter().map(u32::from).collect(),
            DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(u32::from).collect(),
            other => {
                return Err(Error::UnsupportedFormat(format!(
                    "label maps must be grayscale, got {:?}",
                    other.color()
                )))
            }
        };
        LabelMap::new(w, h, labels)
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("txt")
}
