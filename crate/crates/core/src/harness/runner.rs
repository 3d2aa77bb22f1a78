use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::clustering::segment;
use crate::error::Result;
use crate::imagecore::{rgb_to_lab, RgbImage};
use crate::metrics::{psnr, ssim, GroundTruth, MetricsReport};
use crate::noise::NoiseSpec;
use crate::sbed::Detector;

use super::config::{BenchConfig, MethodSpec};
use super::dataset::ingest_dataset;
use super::fixtures::Fixture;

/// An image ready for evaluation.
#[derive(Clone, Debug)]
pub struct BenchItem {
    pub id: String,
    pub image: RgbImage,
    pub gt: GroundTruth,
}

impl From<&Fixture> for BenchItem {
    fn from(f: &Fixture) -> Self {
        Self { id: f.id.clone(), image: f.image.clone(), gt: GroundTruth::new(f.gt.clone()) }
    }
}

/// Ids of dataset entries that failed to load, with the error message.
pub type LoadFailures = Vec<(String, String)>;

/// Load every pair of the dataset. Entries that fail to decode become
/// failed rows in the reports rather than aborting the run.
pub fn load_items(dir: impl AsRef<Path>) -> Result<(Vec<BenchItem>, LoadFailures)> {
    let ds = ingest_dataset(dir)?;
    let loaded: Vec<_> = ds.entries.par_iter().map(|e| (e.id.clone(), e.load())).collect();
    let mut items = Vec::new();
    let mut failed = Vec::new();
    for (id, r) in loaded {
        match r {
            Ok((image, gt)) => items.push(BenchItem { id, image, gt }),
            Err(e) => {
                log::warn!("{id}: {e}");
                failed.push((id, e.to_string()));
            }
        }
    }
    Ok((items, failed))
}

fn cmp_noise(a: &NoiseSpec, b: &NoiseSpec) -> Ordering {
    a.kind.cmp(&b.kind).then(a.level.total_cmp(&b.level))
}

/// Totally ordered wrapper for grouping by noise condition.
#[derive(Clone, Copy, Debug)]
struct NoiseKey(NoiseSpec);

impl PartialEq for NoiseKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for NoiseKey {}

impl PartialOrd for NoiseKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for NoiseKey {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_noise(&self.0, &other.0)
    }
}

fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v}")
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 { f64::NAN } else { s / n as f64 }
}

/// One segmentation run.
#[derive(Clone, Debug)]
pub struct BenchRow {
    pub image_id: String,
    pub method: MethodSpec,
    pub noise: NoiseSpec,
    pub k_requested: usize,
    pub seed: u64,
    pub outcome: std::result::Result<MetricsReport, String>,
}

impl BenchRow {
    fn cmp_key(&self, other: &Self) -> Ordering {
        self.image_id
            .cmp(&other.image_id)
            .then(self.method.cmp(&other.method))
            .then(self.k_requested.cmp(&other.k_requested))
            .then(cmp_noise(&self.noise, &other.noise))
            .then(self.seed.cmp(&other.seed))
    }
}

/// Mean of the successful rows sharing `(method, k, noise)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchAggregate {
    pub method: MethodSpec,
    pub noise: NoiseSpec,
    pub k_requested: usize,
    pub n: usize,
    pub k_out: f64,
    pub br: f64,
    pub ue: f64,
    pub co: f64,
    pub runtime_ms: Option<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct BenchReport {
    /// Sorted by `(image_id, method, k, noise, seed)`.
    pub rows: Vec<BenchRow>,
}

pub const RAW_HEADER: [&str; 12] = [
    "image_id", "method", "noise_kind", "noise_level", "k_requested", "k_out", "br", "ue", "co",
    "runtime_ms", "seed", "status",
];

pub const AGGREGATE_HEADER: [&str; 10] = [
    "method", "noise_kind", "noise_level", "k_requested", "n", "k_out", "br", "ue", "co",
    "runtime_ms",
];

impl BenchReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome.is_err()).count()
    }

    /// Per `(method, noise, k)` means, in that order.
    pub fn aggregates(&self) -> Vec<BenchAggregate> {
        let mut groups: BTreeMap<(MethodSpec, NoiseKey, usize), Vec<&MetricsReport>> =
            BTreeMap::new();
        for row in &self.rows {
            let members = groups.entry((row.method, NoiseKey(row.noise), row.k_requested)).or_default();
            if let Ok(m) = &row.outcome {
                members.push(m);
            }
        }
        groups
            .into_iter()
            .map(|((method, NoiseKey(noise), k_requested), ms)| BenchAggregate {
                method,
                noise,
                k_requested,
                n: ms.len(),
                k_out: mean(ms.iter().map(|m| m.k_out as f64)),
                br: mean(ms.iter().map(|m| m.br)),
                ue: mean(ms.iter().map(|m| m.ue)),
                co: mean(ms.iter().map(|m| m.co)),
                runtime_ms: (!ms.is_empty() && ms.iter().all(|m| m.runtime_ms.is_some()))
                    .then(|| mean(ms.iter().filter_map(|m| m.runtime_ms))),
            })
            .collect()
    }

    pub fn raw_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(RAW_HEADER)?;
        for r in &self.rows {
            let (k_out, br, ue, co, rt, status) = match &r.outcome {
                Ok(m) => (
                    m.k_out.to_string(),
                    fmt_f64(m.br),
                    fmt_f64(m.ue),
                    fmt_f64(m.co),
                    m.runtime_ms.map(fmt_f64).unwrap_or_default(),
                    "ok".to_string(),
                ),
                Err(e) => {
                    let blank = String::new;
                    (blank(), blank(), blank(), blank(), blank(), format!("error: {e}"))
                }
            };
            w.write_record([
                r.image_id.clone(),
                r.method.to_string(),
                r.noise.kind.to_string(),
                fmt_f64(r.noise.level),
                r.k_requested.to_string(),
                k_out,
                br,
                ue,
                co,
                rt,
                r.seed.to_string(),
                status,
            ])?;
        }
        finish(w)
    }

    pub fn aggregate_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(AGGREGATE_HEADER)?;
        for a in self.aggregates() {
            w.write_record([
                a.method.to_string(),
                a.noise.kind.to_string(),
                fmt_f64(a.noise.level),
                a.k_requested.to_string(),
                a.n.to_string(),
                fmt_f64(a.k_out),
                fmt_f64(a.br),
                fmt_f64(a.ue),
                fmt_f64(a.co),
                a.runtime_ms.map(fmt_f64).unwrap_or_default(),
            ])?;
        }
        finish(w)
    }

    /// Write `benchmark.csv` and `benchmark_aggregate.csv` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
        write_pair(dir.as_ref(), "benchmark", self.raw_csv()?, self.aggregate_csv()?)
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn write_pair(dir: &Path, stem: &str, raw: String, agg: String) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let raw_path = dir.join(format!("{stem}.csv"));
    let agg_path = dir.join(format!("{stem}_aggregate.csv"));
    std::fs::write(&raw_path, raw)?;
    std::fs::write(&agg_path, agg)?;
    Ok((raw_path, agg_path))
}

/// Every `(item, noise, seed)` combination, in a fixed order.
fn noisy_tasks<'a>(items: &'a [BenchItem], cfg: &BenchConfig) -> Vec<(&'a BenchItem, NoiseSpec, u64)> {
    let mut tasks = Vec::new();
    for item in items {
        for noise in cfg.noise_conditions() {
            for &seed in &cfg.seeds {
                tasks.push((item, noise, seed));
            }
        }
    }
    tasks
}

/// Segment and score every combination of image, noise condition, seed,
/// method and k. Failures are recorded in their row and do not stop the run.
pub fn run_benchmark_on(items: &[BenchItem], cfg: &BenchConfig) -> BenchReport {
    let mut rows: Vec<BenchRow> = noisy_tasks(items, cfg)
        .into_par_iter()
        .flat_map_iter(|(item, noise, seed)| {
            let noisy = noise.apply(&item.image, seed).map(|img| rgb_to_lab(&img));
            let mut rows = Vec::with_capacity(cfg.methods.len() * cfg.k_values.len());
            for &method in &cfg.methods {
                for &k in &cfg.k_values {
                    let outcome = noisy.as_ref().map_err(|e| e.to_string()).and_then(|lab| {
                        let params = cfg.cluster_params(k);
                        let start = Instant::now();
                        let seg = segment(method.method, method.centroidx, lab, &params)
                            .map_err(|e| e.to_string())?;
                        let elapsed = start.elapsed().as_secs_f64() * 1e3;
                        let mut report = MetricsReport::evaluate(&seg.labels, &item.gt, cfg.eps)
                            .map_err(|e| e.to_string())?;
                        report.runtime_ms = cfg.record_runtime.then_some(elapsed);
                        Ok(report)
                    });
                    if let Err(e) = &outcome {
                        log::warn!("{} {method} k={k} {noise} seed={seed}: {e}", item.id);
                    }
                    rows.push(BenchRow {
                        image_id: item.id.clone(),
                        method,
                        noise,
                        k_requested: k,
                        seed,
                        outcome,
                    });
                }
            }
            rows
        })
        .collect();
    rows.sort_by(|a, b| a.cmp_key(b));
    BenchReport { rows }
}

/// Load the configured dataset and run the segmentation benchmark. Images
/// that fail to load contribute one failed row per grid point.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let (items, failed) = load_items(&cfg.dataset_dir)?;
    let mut report = run_benchmark_on(&items, cfg);
    for (id, err) in failed {
        for noise in cfg.noise_conditions() {
            for &seed in &cfg.seeds {
                for &method in &cfg.methods {
                    for &k in &cfg.k_values {
                        report.rows.push(BenchRow {
                            image_id: id.clone(),
                            method,
                            noise,
                            k_requested: k,
                            seed,
                            outcome: Err(err.clone()),
                        });
                    }
                }
            }
        }
    }
    report.rows.sort_by(|a, b| a.cmp_key(b));
    Ok(report)
}

/// PSNR and SSIM of one edge map against the ground-truth boundaries.
#[derive(Clone, Debug)]
pub struct EdgeRow {
    pub image_id: String,
    pub detector: Detector,
    pub noise: NoiseSpec,
    pub seed: u64,
    pub outcome: std::result::Result<(f64, f64), String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeAggregate {
    pub detector: Detector,
    pub noise: NoiseSpec,
    pub n: usize,
    pub psnr: f64,
    pub ssim: f64,
}

#[derive(Clone, Debug, Default)]
pub struct EdgeReport {
    pub k: usize,
    /// Sorted by `(image_id, detector, noise, seed)`.
    pub rows: Vec<EdgeRow>,
}

pub const EDGE_HEADER: [&str; 9] =
    ["image_id", "detector", "noise_kind", "noise_level", "seed", "k", "psnr", "ssim", "status"];

pub const EDGE_AGGREGATE_HEADER: [&str; 7] =
    ["detector", "noise_kind", "noise_level", "n", "psnr", "ssim", "ordering_holds"];

impl EdgeReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome.is_err()).count()
    }

    /// Per `(noise, detector)` means, in that order.
    pub fn aggregates(&self) -> Vec<EdgeAggregate> {
        let mut groups: BTreeMap<(NoiseKey, Detector), Vec<(f64, f64)>> = BTreeMap::new();
        for r in &self.rows {
            let members = groups.entry((NoiseKey(r.noise), r.detector)).or_default();
            if let Ok(v) = &r.outcome {
                members.push(*v);
            }
        }
        groups
            .into_iter()
            .map(|((NoiseKey(noise), detector), ok)| EdgeAggregate {
                detector,
                noise,
                n: ok.len(),
                psnr: mean(ok.iter().map(|v| v.0)),
                ssim: mean(ok.iter().map(|v| v.1)),
            })
            .collect()
    }

    /// Whether mean PSNR and mean SSIM are each ordered SBED >= Sobel >= Canny
    /// under `noise`. `None` if a detector is missing.
    pub fn ordering_holds(&self, noise: &NoiseSpec) -> Option<(bool, bool)> {
        let aggs = self.aggregates();
        let find = |d: Detector| aggs.iter().find(|a| a.detector == d && a.noise == *noise);
        let (s, b, c) = (find(Detector::Sbed)?, find(Detector::Sobel)?, find(Detector::Canny)?);
        Some((s.psnr >= b.psnr && b.psnr >= c.psnr, s.ssim >= b.ssim && b.ssim >= c.ssim))
    }

    pub fn raw_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(EDGE_HEADER)?;
        for r in &self.rows {
            let (p, s, status) = match &r.outcome {
                Ok((p, s)) => (fmt_f64(*p), fmt_f64(*s), "ok".to_string()),
                Err(e) => (String::new(), String::new(), format!("error: {e}")),
            };
            let k = if r.detector == Detector::Sbed { self.k.to_string() } else { String::new() };
            w.write_record([
                r.image_id.clone(),
                r.detector.to_string(),
                r.noise.kind.to_string(),
                fmt_f64(r.noise.level),
                r.seed.to_string(),
                k,
                p,
                s,
                status,
            ])?;
        }
        finish(w)
    }

    pub fn aggregate_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(EDGE_AGGREGATE_HEADER)?;
        for a in self.aggregates() {
            let ordering = match self.ordering_holds(&a.noise) {
                Some((p, s)) => (p && s).to_string(),
                None => String::new(),
            };
            w.write_record([
                a.detector.to_string(),
                a.noise.kind.to_string(),
                fmt_f64(a.noise.level),
                a.n.to_string(),
                fmt_f64(a.psnr),
                fmt_f64(a.ssim),
                ordering,
            ])?;
        }
        finish(w)
    }

    /// Write `edges.csv` and `edges_aggregate.csv` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
        write_pair(dir.as_ref(), "edges", self.raw_csv()?, self.aggregate_csv()?)
    }
}

/// Score every configured detector on every image, noise condition and seed.
pub fn run_edge_benchmark_on(items: &[BenchItem], cfg: &BenchConfig) -> EdgeReport {
    let mut rows: Vec<EdgeRow> = noisy_tasks(items, cfg)
        .into_par_iter()
        .flat_map_iter(|(item, noise, seed)| {
            let noisy = noise.apply(&item.image, seed).map_err(|e| e.to_string());
            let reference = item.gt.boundary_plane();
            cfg.detectors
                .iter()
                .map(|&detector| {
                    let outcome = noisy.as_ref().map_err(Clone::clone).and_then(|img| {
                        let edges = detector.detect(img, cfg.edge_k).map_err(|e| e.to_string())?;
                        let p = psnr(&edges, &reference).map_err(|e| e.to_string())?;
                        let s = ssim(&edges, &reference).map_err(|e| e.to_string())?;
                        Ok((p, s))
                    });
                    if let Err(e) = &outcome {
                        log::warn!("{} {detector} {noise} seed={seed}: {e}", item.id);
                    }
                    EdgeRow { image_id: item.id.clone(), detector, noise, seed, outcome }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    rows.sort_by(|a, b| {
        a.image_id
            .cmp(&b.image_id)
            .then(a.detector.cmp(&b.detector))
            .then(cmp_noise(&a.noise, &b.noise))
            .then(a.seed.cmp(&b.seed))
    });
    EdgeReport { k: cfg.edge_k, rows }
}

pub fn run_edge_benchmark(cfg: &BenchConfig) -> Result<EdgeReport> {
    cfg.validate()?;
    let (items, failed) = load_items(&cfg.dataset_dir)?;
    let mut report = run_edge_benchmark_on(&items, cfg);
    for (id, err) in failed {
        for noise in cfg.noise_conditions() {
            for &seed in &cfg.seeds {
                for &detector in &cfg.detectors {
                    report.rows.push(EdgeRow {
                        image_id: id.clone(),
                        detector,
                        noise,
                        seed,
                        outcome: Err(err.clone()),
                    });
                }
            }
        }
    }
    report.rows.sort_by(|a, b| {
        a.image_id
            .cmp(&b.image_id)
            .then(a.detector.cmp(&b.detector))
            .then(cmp_noise(&a.noise, &b.noise))
            .then(a.seed.cmp(&b.seed))
    });
    Ok(report)
}
