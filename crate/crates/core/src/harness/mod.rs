//! Benchmark harness: run configuration, dataset ingestion, synthetic
//! fixtures and the segmentation and edge-detection experiment runners.
//!
//! Output CSVs are sorted by their row key before writing, so they do not
//! depend on the number of worker threads.

pub mod config;
pub mod dataset;
pub mod fixtures;
pub mod runner;

pub use config::{BenchConfig, MethodSpec};
pub use dataset::{ingest_dataset, Dataset, DatasetEntry, SkippedFile};
pub use fixtures::{generate, mixed_set, mosaic, two_tone_set, write_fixtures, Fixture, FixtureKind};
pub use runner::{
    load_items, run_benchmark, run_benchmark_on, run_edge_benchmark, run_edge_benchmark_on,
    BenchAggregate, BenchItem, BenchReport, BenchRow, EdgeAggregate, EdgeReport, EdgeRow,
    LoadFailures,
};
