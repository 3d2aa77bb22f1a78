use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use superpix_core::clustering::{segment, LabelMap, Method};
use superpix_core::harness::{
    mixed_set, run_benchmark, run_edge_benchmark, two_tone_set, write_fixtures, BenchConfig,
};
use superpix_core::imagecore::{load_image, rgb_to_lab, save_gray_png, save_png, Plane};
use superpix_core::metrics::{psnr, ssim, GroundTruth, MetricsReport};
use superpix_core::noise::{NoiseKind, NoiseSpec};
use superpix_core::sbed::Detector;

const EXIT_PARTIAL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "superpix", version, about = "Noise-resistant superpixels, edge detection and benchmarks")]
struct Cli {
    /// Run configuration (flat `key = value` file).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Random seed. For `bench` it replaces the configured seed list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Segment an image into superpixels and write a 16-bit label PNG.
    Segment(SegmentArgs),
    /// Corrupt an image with Gaussian or salt-and-pepper noise.
    Noise(NoiseArgs),
    /// Write an edge map as an 8-bit grayscale PNG.
    Edges(EdgesArgs),
    /// Score a label map (BR, UE, CO) or an edge map (PSNR, SSIM) against ground truth.
    Eval(EvalArgs),
    /// Run the benchmark grid from the configuration and write CSVs.
    Bench(BenchArgs),
    /// Generate synthetic images with ground truth in the dataset layout.
    Fixtures(FixturesArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args, Debug)]
struct SegmentArgs {
    input: PathBuf,
    #[arg(long, value_parser = parse_method, default_value = "slic")]
    method: Method,
    #[arg(long, value_enum, default_value = "on")]
    centroidx: Switch,
    #[arg(long, default_value_t = 600)]
    k: usize,
    /// Overrides the configured compactness.
    #[arg(long)]
    compactness: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct NoiseArgs {
    input: PathBuf,
    #[arg(long, value_parser = parse_noise_kind)]
    kind: NoiseKind,
    #[arg(long)]
    level: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EdgesArgs {
    input: PathBuf,
    #[arg(long, value_parser = parse_detector, default_value = "sbed")]
    detector: Detector,
    /// Superpixel count for SBED.
    #[arg(long, default_value_t = 1500)]
    k: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Ground-truth label map (grayscale PNG).
    #[arg(long)]
    gt: PathBuf,
    /// Superpixel label map to score.
    #[arg(long, conflicts_with = "edges", required_unless_present = "edges")]
    labels: Option<PathBuf>,
    /// Edge map to score against the ground-truth boundaries.
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Boundary-recall tolerance; defaults to the configured value.
    #[arg(long)]
    eps: Option<usize>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Run the edge-detector comparison instead of the segmentation grid.
    #[arg(long)]
    edges: bool,
    /// Overrides the configured dataset directory.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Overrides the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FixtureSet {
    TwoTone,
    Mixed,
}

#[derive(Args, Debug)]
struct FixturesArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 128)]
    size: usize,
    #[arg(long, value_enum, default_value = "mixed")]
    set: FixtureSet,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: superpix_core::Error| e.to_string())
}

fn parse_noise_kind(s: &str) -> Result<NoiseKind, String> {
    s.parse().map_err(|e: superpix_core::Error| e.to_string())
}

fn parse_detector(s: &str) -> Result<Detector, String> {
    s.parse().map_err(|e: superpix_core::Error| e.to_string())
}

/// An error that maps to the configuration exit code.
#[derive(Debug)]
struct ConfigError(anyhow::Error);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_error(e: impl Into<anyhow::Error>) -> anyhow::Error {
    anyhow::Error::new(ConfigError(e.into()))
}

fn load_config(cli: &Cli) -> anyhow::Result<BenchConfig> {
    let mut cfg = match &cli.config {
        Some(path) => BenchConfig::load(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(config_error)?,
        None => BenchConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seeds = vec![seed];
    }
    cfg.validate().map_err(config_error)?;
    Ok(cfg)
}

fn ensure_parent(path: &Path) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

fn cmd_segment(cfg: &BenchConfig, args: &SegmentArgs) -> anyhow::Result<u8> {
    let rgb = load_image(&args.input).with_context(|| format!("loading {}", args.input.display()))?;
    let mut params = cfg.cluster_params(args.k);
    if let Some(c) = args.compactness {
        params.compactness = c;
    }
    params.validate().map_err(config_error)?;
    let seg = segment(args.method, args.centroidx == Switch::On, &rgb_to_lab(&rgb), &params)?;
    ensure_parent(&args.out)?;
    seg.labels.save_png16(&args.out)?;
    println!("K_out={} iterations={}", seg.labels.count(), seg.iterations);
    Ok(0)
}

fn cmd_noise(seed: u64, args: &NoiseArgs) -> anyhow::Result<u8> {
    let spec = NoiseSpec { kind: args.kind, level: args.level };
    spec.validate().map_err(config_error)?;
    let rgb = load_image(&args.input).with_context(|| format!("loading {}", args.input.display()))?;
    let noisy = spec.apply(&rgb, seed)?;
    ensure_parent(&args.out)?;
    save_png(&noisy, &args.out)?;
    Ok(0)
}

fn cmd_edges(args: &EdgesArgs) -> anyhow::Result<u8> {
    let rgb = load_image(&args.input).with_context(|| format!("loading {}", args.input.display()))?;
    let edges = args.detector.detect(&rgb, args.k)?;
    ensure_parent(&args.out)?;
    save_gray_png(&edges, &args.out)?;
    Ok(0)
}

fn cmd_eval(cfg: &BenchConfig, args: &EvalArgs) -> anyhow::Result<u8> {
    let gt = GroundTruth::new(
        LabelMap::load_png(&args.gt).with_context(|| format!("loading {}", args.gt.display()))?,
    );
    if let Some(path) = &args.labels {
        let labels = LabelMap::load_png(path).with_context(|| format!("loading {}", path.display()))?;
        let m = MetricsReport::evaluate(&labels, &gt, args.eps.unwrap_or(cfg.eps))?;
        println!("br={} ue={} co={} k_out={}", m.br, m.ue, m.co, m.k_out);
    } else if let Some(path) = &args.edges {
        let img = load_image(path).with_context(|| format!("loading {}", path.display()))?;
        let data = img.pixels().map(|p| p[0] as f64 / 255.0).collect();
        let edges = Plane::new(img.width(), img.height(), data)?;
        let reference = gt.boundary_plane();
        println!("psnr={} ssim={}", psnr(&edges, &reference)?, ssim(&edges, &reference)?);
    } else {
        bail!("either --labels or --edges is required");
    }
    Ok(0)
}

fn cmd_bench(mut cfg: BenchConfig, args: &BenchArgs) -> anyhow::Result<u8> {
    if let Some(d) = &args.dataset {
        cfg.dataset_dir = d.clone();
    }
    if let Some(o) = &args.out {
        cfg.output_dir = o.clone();
    }
    let (paths, failures) = if args.edges {
        let report = run_edge_benchmark(&cfg).map_err(config_error)?;
        for a in report.aggregates() {
            println!("{:>6} {:>14} psnr={:.4} ssim={:.4} n={}", a.detector, a.noise, a.psnr, a.ssim, a.n);
        }
        (report.write(&cfg.output_dir)?, report.failures())
    } else {
        let report = run_benchmark(&cfg).map_err(config_error)?;
        (report.write(&cfg.output_dir)?, report.failures())
    };
    println!("wrote {} and {}", paths.0.display(), paths.1.display());
    if failures > 0 {
        eprintln!("{failures} run(s) failed; see the status column");
        return Ok(EXIT_PARTIAL);
    }
    Ok(0)
}

fn cmd_fixtures(seed: u64, args: &FixturesArgs) -> anyhow::Result<u8> {
    let set = match args.set {
        FixtureSet::TwoTone => two_tone_set(args.count, args.size, seed)?,
        FixtureSet::Mixed => mixed_set(args.count, args.size, seed)?,
    };
    write_fixtures(&args.out, &set)?;
    println!("wrote {} fixtures to {}", set.len(), args.out.display());
    Ok(0)
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(config_error)?;
    }
    let cfg = load_config(&cli)?;
    let seed = cli.seed.unwrap_or(cfg.seeds[0]);
    match &cli.command {
        Command::Segment(a) => cmd_segment(&cfg, a),
        Command::Noise(a) => cmd_noise(seed, a),
        Command::Edges(a) => cmd_edges(a),
        Command::Eval(a) => cmd_eval(&cfg, a),
        Command::Bench(a) => cmd_bench(cfg, a),
        Command::Fixtures(a) => cmd_fixtures(seed, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::from(EXIT_PARTIAL)
            }
        }
    }
}
