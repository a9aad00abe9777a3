use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use treescan::baseline::{Strategy, DEFAULT_BLOCK};
use treescan::bench::{parse_sizes, BenchStrategy};
use treescan::metrics::DEFAULT_DEPTH_EPS;
use treescan::mos::{Spread, DEFAULT_OUTLIER_RATE_CAP};
use treescan::scan::{ScanVariant, DEFAULT_FD_STEP};

mod commands;

#[derive(Debug, Parser)]
#[command(name = "treescan", version, about = "Tree-aware selective scan kernels and evaluation tools")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the tree scan on a TSR1 feature map.
    Scan(ScanArgs),
    /// Run a fixed-order sequence scan on a TSR1 feature map.
    Baseline(BaselineArgs),
    /// Print the minimum spanning tree of a feature map.
    Mst(MstArgs),
    /// Compare analytic gradients with central differences.
    Gradcheck(GradcheckArgs),
    /// Depth-evaluation metrics between a prediction and a reference.
    Metrics(MetricsArgs),
    /// Rater screening, score normalisation, MOS and depth-map selection.
    Mos(MosArgs),
    /// Time the tree scan against the sequence baselines.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct IoArgs {
    /// Input feature map (TSR1).
    #[arg(long)]
    input: PathBuf,
    /// Output feature map (TSR1).
    #[arg(long)]
    output: PathBuf,
    /// Seed for the coefficient projection weights.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write channel 0 of the output as a 16-bit PGM.
    #[arg(long)]
    pgm: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[command(flatten)]
    io: IoArgs,
    #[arg(long, default_value_t = 0)]
    root: usize,
    /// matrix or literal.
    #[arg(long, default_value = "matrix")]
    variant: ScanVariant,
}

#[derive(Debug, Args)]
struct BaselineArgs {
    #[command(flatten)]
    io: IoArgs,
    /// raster, continuous, diagonal or nesteds.
    #[arg(long)]
    strategy: Strategy,
    /// Tile side for the nested strategy.
    #[arg(long, default_value_t = DEFAULT_BLOCK)]
    block: usize,
}

#[derive(Debug, Args)]
struct MstArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    root: usize,
}

#[derive(Debug, Args)]
struct GradcheckArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "matrix")]
    variant: ScanVariant,
    /// Grid size as HxW.
    #[arg(long, default_value = "4x4")]
    size: String,
    #[arg(long, default_value_t = DEFAULT_FD_STEP)]
    step: f64,
    /// Exit with status 2 when the error exceeds this.
    #[arg(long, default_value_t = 1e-4)]
    threshold: f64,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    /// Predicted depth (PGM or single-channel TSR1).
    #[arg(long)]
    pred: PathBuf,
    /// Reference depth (PGM or single-channel TSR1).
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Print one comma-separated line of values instead of "name value" lines.
    #[arg(long)]
    csv: bool,
    /// Min-max normalise both maps before comparing.
    #[arg(long)]
    align: bool,
    /// Substituted for zero depths in ratios and logarithms.
    #[arg(long, default_value_t = DEFAULT_DEPTH_EPS)]
    eps: f64,
}

#[derive(Debug, Args)]
struct MosArgs {
    /// Ratings CSV with header rater,item,dimension,score.
    #[arg(long)]
    scores: PathBuf,
    /// Per-item MOS CSV; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Candidate CSV with header item,source,score.
    #[arg(long, requires = "selection")]
    candidates: Option<PathBuf>,
    /// Selection CSV written from the candidates.
    #[arg(long, requires = "candidates")]
    selection: Option<PathBuf>,
    /// Raters whose outlier fraction exceeds this are excluded.
    #[arg(long, default_value_t = DEFAULT_OUTLIER_RATE_CAP)]
    outlier_cap: f64,
    /// Skip rater screening.
    #[arg(long)]
    no_filter: bool,
    /// Use the n-1 standard deviation when standardising.
    #[arg(long)]
    sample_sd: bool,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, default_value = "64x64,128x128,256x256")]
    sizes: String,
    /// Comma-separated strategies (tree, raster, continuous, diagonal, nesteds); all when omitted.
    #[arg(long, value_delimiter = ',')]
    strategy: Vec<BenchStrategy>,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    channels: usize,
    #[arg(long, default_value = "matrix")]
    variant: ScanVariant,
    #[arg(long, default_value_t = DEFAULT_BLOCK)]
    block: usize,
    #[arg(long, default_value_t = 0)]
    root: usize,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

/// A failed internal check, reported with exit status 2.
#[derive(Debug)]
pub struct InternalFailure(pub String);

impl fmt::Display for InternalFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InternalFailure {}

fn exit_code(err: &anyhow::Error) -> u8 {
    let internal = err.chain().any(|e| {
        e.is::<InternalFailure>() || e.downcast_ref::<treescan::Error>().is_some_and(treescan::Error::is_internal)
    });
    if internal {
        2
    } else {
        1
    }
}

fn dispatch(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::Scan(a) => commands::scan(&a.io, a.root, a.variant),
        Command::Baseline(a) => commands::baseline(&a.io, a.strategy, a.block),
        Command::Mst(a) => commands::mst(&a.input, a.root),
        Command::Gradcheck(a) => {
            let (h, w) = match parse_sizes(&a.size)?.as_slice() {
                [one] => *one,
                _ => anyhow::bail!("--size takes a single HxW"),
            };
            commands::gradcheck(a.seed, h, w, a.variant, a.step, a.threshold)
        }
        Command::Metrics(a) => commands::metrics(&a.pred, &a.reference, a.eps, a.align, a.csv),
        Command::Mos(a) => commands::mos(&commands::MosJob {
            scores: a.scores,
            output: a.output,
            candidates: a.candidates.zip(a.selection),
            outlier_cap: a.outlier_cap,
            filter: !a.no_filter,
            spread: if a.sample_sd { Spread::Sample } else { Spread::Population },
        }),
        Command::Bench(a) => {
            let cfg = treescan::bench::BenchConfig {
                sizes: parse_sizes(&a.sizes)?,
                strategies: if a.strategy.is_empty() { BenchStrategy::ALL.to_vec() } else { a.strategy },
                reps: a.reps,
                seed: a.seed,
                channels: a.channels,
                variant: a.variant,
                block: a.block,
                root: a.root,
            };
            commands::bench(&cfg, a.output.as_deref())
        }
    }
}

fn run(args: impl IntoIterator<Item = OsString>) -> u8 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}
