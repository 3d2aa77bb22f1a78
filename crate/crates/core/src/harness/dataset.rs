use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::clustering::LabelMap;
use crate::error::{Error, Result};
use crate::imagecore::{load_image, RgbImage};
use crate::metrics::GroundTruth;

/// An image paired with its ground-truth label map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetEntry {
    pub id: String,
    pub image_path: PathBuf,
    pub gt_label_path: PathBuf,
}

impl DatasetEntry {
    pub fn load(&self) -> Result<(RgbImage, GroundTruth)> {
        let img = load_image(&self.image_path)?;
        let gt = LabelMap::load_png(&self.gt_label_path)?;
        gt.check_dims((img.width(), img.height()))?;
        Ok((img, GroundTruth::new(gt)))
    }
}

/// A file that could not be paired.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkippedFile {
    pub id: String,
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Clone, Debug, Default)]
pub struct Dataset {
    /// Sorted by id.
    pub entries: Vec<DatasetEntry>,
    pub skipped: Vec<SkippedFile>,
}

fn png_stems(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    if !dir.is_dir() {
        return Ok(out);
    }
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let is_png = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if !is_png || !path.is_file() {
            continue;
        }
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            out.insert(stem.to_string(), path);
        }
    }
    Ok(out)
}

/// Pair `images/<id>.png` with `groundtruth/<id>.png` under `dir`.
///
/// Unpaired files and pairs whose dimensions differ are listed in
/// `skipped`. Fails with `EmptyDataset` if no pair survives.
pub fn ingest_dataset(dir: impl AsRef<Path>) -> Result<Dataset> {
    let dir = dir.as_ref();
    if !dir.is_dir() {
        return Err(Error::FileNotFound(dir.to_path_buf()));
    }
    let images = png_stems(&dir.join("images"))?;
    let mut truths = png_stems(&dir.join("groundtruth"))?;
    let mut ds = Dataset::default();

    for (id, image_path) in images {
        let Some(gt_label_path) = truths.remove(&id) else {
            log::warn!("{id}: no ground truth, skipped");
            ds.skipped.push(SkippedFile {
                id,
                path: image_path,
                reason: "missing ground truth".into(),
            });
            continue;
        };
        let dims = (image::image_dimensions(&image_path), image::image_dimensions(&gt_label_path));
        match dims {
            (Ok(a), Ok(b)) if a == b => {
                ds.entries.push(DatasetEntry { id, image_path, gt_label_path });
            }
            (Ok(a), Ok(b)) => {
                let err = Error::DimensionMismatch {
                    left: (a.0 as usize, a.1 as usize),
                    right: (b.0 as usize, b.1 as usize),
                };
                log::warn!("{id}: {err}, skipped");
                ds.skipped.push(SkippedFile { id, path: image_path, reason: err.to_string() });
            }
            (Err(e), _) | (_, Err(e)) => {
                log::warn!("{id}: unreadable ({e}), skipped");
                ds.skipped.push(SkippedFile { id, path: image_path, reason: e.to_string() });
            }
        }
    }
    for (id, path) in truths {
        log::warn!("{id}: ground truth without image, skipped");
        ds.skipped.push(SkippedFile { id, path, reason: "missing image".into() });
    }

    if ds.entries.is_empty() {
        return Err(Error::EmptyDataset(dir.display().to_string()));
    }
    Ok(ds)
}
