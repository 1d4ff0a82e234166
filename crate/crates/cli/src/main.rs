//! `sciencemap`: build science basemaps and project document sets onto them.
//!
//! Exit codes: 0 success, 1 data or processing error, 2 usage error.

/// `println!` that stops quietly once stdout is closed (e.g. piped to `head`).
macro_rules! say {
    ($($arg:tt)*) => {
        $crate::say_line(format_args!($($arg)*))
    };
}

mod commands;
mod config;
mod io;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use io::{CountingArg, Format};

/// Invalid flag values or combinations; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Parser)]
#[command(
    name = "sciencemap",
    version,
    about = "Global science maps and document-set overlays"
)]
pub struct Cli {
    /// More diagnostics on stderr (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    /// key = value file mirroring the long flags; flags win on conflict.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a basemap from a category citation matrix.
    Basemap(BasemapArgs),
    /// Project an Analyze.txt, tagged-field or .vec file onto a basemap.
    Overlay(OverlayArgs),
    /// Minimum papers per category for a reliable overlay.
    Reliability(ReliabilityArgs),
    /// Average annual growth per category across yearly inputs.
    Growth(GrowthArgs),
    /// Variety, balance, disparity and Rao-Stirling diversity of an input.
    Diversity(DiversityArgs),
    /// Write Pajek, SVG or table exports of a basemap.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
struct BasemapArgs {
    /// Square citing-by-cited count matrix (TAB separated, header of names).
    #[arg(long)]
    matrix: PathBuf,
    /// Category registry (`id<TAB>name[<TAB>alias;alias]`).
    #[arg(long)]
    registry: PathBuf,
    /// Similarity threshold; an edge needs sim > threshold.
    #[arg(long, default_value_t = 0.15)]
    threshold: f64,
    /// Number of macro-disciplines.
    #[arg(long, default_value_t = 18)]
    factors: usize,
    /// Layout seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Drop self-citation coordinates from the cosine.
    #[arg(long)]
    exclude_diagonal: bool,
    /// Macro-discipline names, one per line, largest factor first.
    #[arg(long, value_name = "FILE")]
    factor_labels: Option<PathBuf>,
    /// Layout iteration cap (single-node moves).
    #[arg(long, default_value_t = 100_000)]
    max_steps: usize,
    /// Layout convergence tolerance on the largest node gradient.
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
    /// Basemap file to write.
    #[arg(long)]
    out: PathBuf,
    /// Also write a plain basemap SVG.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Also write a Pajek network.
    #[arg(long)]
    net: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct RenderArgs {
    /// Multiplier on the largest node radius.
    #[arg(long, default_value_t = 1.0)]
    node_scale: f64,
    /// Node size mapping.
    #[arg(long, value_enum, default_value_t = SizeArg::Area)]
    size: SizeArg,
    /// Labels: off, all, or top:K.
    #[arg(long, default_value = "all", value_parser = parse_labels)]
    labels: sciencemap_core::render::LabelMode,
    #[arg(long, default_value_t = 8.0)]
    font_size: f64,
    /// Hide edges with weight <= this (defaults to the basemap threshold).
    #[arg(long)]
    edge_threshold: Option<f64>,
    /// Canvas width and height in pixels.
    #[arg(long, default_value_t = 1000)]
    canvas: u32,
    /// Node colors.
    #[arg(long, value_enum, default_value_t = ColorArg::Factor)]
    color: ColorArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SizeArg {
    /// Area proportional to the value.
    Area,
    /// Radius proportional to the value.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ColorArg {
    Factor,
    Uniform,
}

fn parse_labels(s: &str) -> Result<sciencemap_core::render::LabelMode, String> {
    use sciencemap_core::render::LabelMode;
    match s {
        "off" => Ok(LabelMode::Off),
        "all" => Ok(LabelMode::All),
        _ => s
            .strip_prefix("top:")
            .and_then(|k| k.parse().ok())
            .map(LabelMode::Top)
            .ok_or_else(|| format!("expected off, all or top:K, got {s:?}")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NormalizeArg {
    Raw,
    ByTotal,
    ByCategory,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Basemap file.
    #[arg(long, env = "SCIENCEMAP_BASEMAP")]
    basemap: PathBuf,
    /// Input format; `auto` sniffs the content.
    #[arg(long, value_enum, default_value_t = Format::Auto)]
    format: Format,
    /// Counting for tagged-field records.
    #[arg(long, value_enum, default_value_t = CountingArg::Whole)]
    counting: CountingArg,
}

#[derive(Debug, Args)]
struct OverlayArgs {
    #[command(flatten)]
    input_opts: InputArgs,
    /// Analyze.txt, tagged-field or .vec file.
    #[arg(long)]
    input: PathBuf,
    /// Output prefix: writes PREFIX.vec, PREFIX.svg, PREFIX.tsv and
    /// PREFIX.unmatched.tsv.
    #[arg(long)]
    out: PathBuf,
    /// Title for the map (defaults to the input file name).
    #[arg(long)]
    label: Option<String>,
    #[arg(long, value_enum, default_value_t = NormalizeArg::Raw)]
    normalize: NormalizeArg,
    /// World counts (.vec) for by-category normalization.
    #[arg(long)]
    world: Option<PathBuf>,
    #[command(flatten)]
    render: RenderArgs,
}

#[derive(Debug, Args)]
struct ReliabilityArgs {
    /// Probability that a paper is assigned to the right category.
    #[arg(long)]
    p: f64,
    /// Lowest acceptable proportion of correctly assigned papers.
    #[arg(long)]
    m: f64,
    /// One-sided significance level.
    #[arg(long, default_value_t = 0.05)]
    sigma: f64,
    /// Round up instead of to the nearest integer.
    #[arg(long)]
    conservative: bool,
}

#[derive(Debug, Args)]
struct GrowthArgs {
    #[command(flatten)]
    input_opts: InputArgs,
    /// YEAR=PATH, at least twice.
    #[arg(long = "input", value_name = "YEAR=PATH", value_parser = parse_year_input)]
    inputs: Vec<(i32, PathBuf)>,
    /// Output prefix: writes PREFIX.svg and PREFIX.tsv.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    render: RenderArgs,
}

fn parse_year_input(s: &str) -> Result<(i32, PathBuf), String> {
    let (year, path) = s
        .split_once('=')
        .ok_or_else(|| format!("expected YEAR=PATH, got {s:?}"))?;
    let year = year
        .trim()
        .parse()
        .map_err(|_| format!("bad year {year:?}"))?;
    Ok((year, PathBuf::from(path)))
}

#[derive(Debug, Args)]
struct DiversityArgs {
    #[command(flatten)]
    input_opts: InputArgs,
    #[arg(long)]
    input: PathBuf,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[arg(long, env = "SCIENCEMAP_BASEMAP")]
    basemap: PathBuf,
    /// Pajek network with layout coordinates.
    #[arg(long)]
    net: Option<PathBuf>,
    /// Basemap SVG.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Similarity matrix as a TAB-separated table.
    #[arg(long)]
    similarity: Option<PathBuf>,
    /// Registry embedded in the basemap.
    #[arg(long)]
    registry: Option<PathBuf>,
    /// Per-category node table (id, name, x, y, factor, macro label).
    #[arg(long)]
    nodes: Option<PathBuf>,
    #[command(flatten)]
    render: RenderArgs,
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let args = match config::apply(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    if let Some(path) = &cli.config {
        log::info!("flags merged with config file {}", path.display());
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn say_line(args: std::fmt::Arguments<'_>) {
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_fmt(args).and_then(|()| out.write_all(b"\n")) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            log::warn!("cannot write to stdout: {e}");
        }
    }
}
