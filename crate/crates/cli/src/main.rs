mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use regsparse_core::ablation::AblationSuite;
use regsparse_core::{Error as CoreError, PatternKind};

use crate::report::Format;

/// Exit status for malformed or unreadable input.
const EXIT_INPUT: u8 = 2;
/// Exit status when a mask fails the regularity gate.
const EXIT_VERDICT: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "regsparse",
    version,
    about = "Analyse, tile and simulate regularly sparse attention masks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Add wall-clock timing of the tool itself to the report.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Regularity verdict, row metadata and density class of a mask.
    Analyze(AnalyzeArgs),
    /// Poset tiling with stretch selection, compared against the row-patch baseline.
    Tile(TileArgs),
    /// Compile and run sparse attention, checked against the dense reference.
    Mhsa(MhsaArgs),
    /// Density sweep of one optimization against its baseline.
    Ablate(AblateArgs),
}

#[derive(Args, Debug, Clone)]
pub struct MaskArgs {
    #[arg(long, value_parser = parse_kind, conflicts_with = "mask", requires_all = ["param", "seq"])]
    pub pattern: Option<PatternKind>,
    /// Window radius, block size or stride.
    #[arg(long)]
    pub param: Option<usize>,
    #[arg(long)]
    pub seq: Option<usize>,
    /// Mask file: one row per line of 0/1 characters.
    #[arg(long)]
    pub mask: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub source: MaskArgs,
    #[arg(long, default_value_t = regsparse_core::masks::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// List the metadata of every row.
    #[arg(long)]
    pub rows: bool,
}

#[derive(Args, Debug)]
pub struct TileArgs {
    #[command(flatten)]
    pub source: MaskArgs,
    /// Block shape as ROWSxCOLS.
    #[arg(long, default_value = "16x16", value_parser = parse_shape)]
    pub tb: (usize, usize),
    /// Also run the exhaustive optimal-cover search (small masks only).
    #[arg(long)]
    pub optimal: bool,
}

#[derive(Args, Debug)]
pub struct MhsaArgs {
    #[command(flatten)]
    pub source: MaskArgs,
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    /// Seed for uniform [-1, 1] inputs; used when no matrix files are given.
    #[arg(long, conflicts_with_all = ["q", "k", "v"])]
    pub random: Option<u64>,
    #[arg(long, requires_all = ["k", "v"])]
    pub q: Option<PathBuf>,
    #[arg(long, requires_all = ["q", "v"])]
    pub k: Option<PathBuf>,
    #[arg(long, requires_all = ["q", "k"])]
    pub v: Option<PathBuf>,
    #[arg(long, default_value = "16x16", value_parser = parse_shape)]
    pub tb: (usize, usize),
    #[arg(long, default_value_t = 32)]
    pub warp: usize,
    #[arg(long, default_value_t = regsparse_core::masks::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Multiply scores by 1/sqrt(dim) before the softmax.
    #[arg(long)]
    pub scale: bool,
    #[arg(long)]
    pub no_span: bool,
    #[arg(long)]
    pub no_alignment: bool,
    /// Run the simulated kernels on one thread.
    #[arg(long)]
    pub sequential: bool,
    /// Write the plan text here.
    #[arg(long)]
    pub plan_out: Option<PathBuf>,
    /// Write the attention output matrix here.
    #[arg(long)]
    pub output_matrix: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AblateArgs {
    #[arg(value_parser = parse_suite)]
    pub suite: AblationSuite,
    #[arg(long, default_value_t = regsparse_core::ablation::ABLATION_SEQ_LEN)]
    pub seq: usize,
    #[arg(long, default_value_t = regsparse_core::ablation::ABLATION_HEAD_DIM)]
    pub dim: usize,
    #[arg(long, default_value = "16x16", value_parser = parse_shape)]
    pub tb: (usize, usize),
    #[arg(long, default_value_t = 32)]
    pub warp: usize,
}

fn parse_kind(s: &str) -> Result<PatternKind, String> {
    s.parse().map_err(|e: CoreError| e.to_string())
}

fn parse_suite(s: &str) -> Result<AblationSuite, String> {
    s.parse().map_err(|e: CoreError| e.to_string())
}

fn parse_shape(s: &str) -> Result<(usize, usize), String> {
    let (m, n) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected ROWSxCOLS, got '{s}'"))?;
    let m: usize = m
        .trim()
        .parse()
        .map_err(|_| format!("bad row count in '{s}'"))?;
    let n: usize = n
        .trim()
        .parse()
        .map_err(|_| format!("bad column count in '{s}'"))?;
    if m == 0 || n == 0 {
        return Err(format!("block shape must be positive, got '{s}'"));
    }
    Ok((m, n))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<std::io::Error>().is_some() {
        return EXIT_INPUT;
    }
    match err.downcast_ref::<CoreError>() {
        Some(CoreError::Regularity { .. }) => EXIT_VERDICT,
        Some(
            CoreError::InvalidSpec(_)
            | CoreError::Shape(_)
            | CoreError::Parse { .. }
            | CoreError::Empty(_)
            | CoreError::Budget { .. },
        ) => EXIT_INPUT,
        Some(CoreError::Index { .. } | CoreError::Coverage { .. }) | None => EXIT_INTERNAL,
    }
}

fn run(cli: &Cli, echo: &str) -> anyhow::Result<()> {
    let start = Instant::now();
    let mut report = match &cli.command {
        Command::Analyze(a) => commands::analyze(a, echo)?,
        Command::Tile(a) => commands::tile(a, echo)?,
        Command::Mhsa(a) => commands::mhsa(a, echo)?,
        Command::Ablate(a) => commands::ablate(a, echo)?,
    };
    if cli.timing {
        report.set(
            "timing_ms",
            (start.elapsed().as_secs_f64() * 1e3 * 1e3).round() / 1e3,
        );
    }
    let text = report.render(cli.format);
    match &cli.out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let echo = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    match run(&cli, &echo) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
