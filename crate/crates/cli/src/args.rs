use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::report::Format;

#[derive(Debug, Parser)]
#[command(name = "eseries", version, about = "Coefficients, error orders and Carleman weights for the asymptotic series of (1+1/x)^x")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Mantissa bits for extended-precision arithmetic.
    #[arg(long, global = true, default_value_t = 256)]
    pub precision_bits: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Absolute tolerance for numeric checks, as a decimal or p/q.
    #[arg(long, global = true, default_value = "1e-12")]
    pub tolerance: String,
    /// Significant digits in decimal renderings.
    #[arg(long, global = true, default_value_t = 20)]
    pub digits: usize,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; never changes the output.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact coefficient table for one route.
    Coeffs {
        #[arg(long)]
        route: String,
        #[arg(long)]
        max: usize,
    },
    /// Route agreement and positivity checks.
    Verify {
        #[arg(long)]
        max: usize,
        /// Perturbs one recurrence-route coefficient, to exercise the failure path.
        #[arg(long, hide = true)]
        inject_corruption: Option<usize>,
    },
    /// Integral representation checks.
    Quad {
        #[arg(long, value_enum)]
        target: QuadTarget,
        /// Index for `--target d`.
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Argument for `--target h`, as a decimal or p/q.
        #[arg(long, default_value = "1")]
        x: String,
        #[arg(long, default_value = "de")]
        rule: String,
    },
    /// Error-order experiments.
    Order {
        #[arg(long, value_enum)]
        experiment: Experiment,
        /// Truncation depth for `shift-compare`.
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Carleman weight margins, finite reports and rankings.
    Carleman(CarlemanArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum QuadTarget {
    GMass,
    H,
    D,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    ShiftCompare,
    CFit,
    DFit,
}

#[derive(Debug, Args)]
pub struct CarlemanArgs {
    /// Weight family, e.g. classical, bicheng-debnath, ping-guozheng, yang, b-series, d-series.
    #[arg(long, default_value = "classical")]
    pub family: String,
    /// Depth for the series families.
    #[arg(long = "K")]
    pub depth: Option<usize>,
    /// Parameter of the yang family.
    #[arg(long = "c")]
    pub c: Option<String>,
    /// Report the pointwise margin instead of a finite inequality.
    #[arg(long)]
    pub margin: bool,
    /// Range of the margin scan.
    #[arg(long, default_value_t = eseries::carleman::DEFAULT_MARGIN_N)]
    pub max: usize,
    /// Sequence for the finite report: geometric[:r], power-decay[:p], finite[:a1,a2,...].
    #[arg(long, default_value = "geometric")]
    pub seq: String,
    /// Number of terms in finite reports and rankings.
    #[arg(long = "N", default_value_t = eseries::carleman::DEFAULT_REPORT_N)]
    pub terms: usize,
    /// Comma-separated families to rank by total slack.
    #[arg(long)]
    pub rank: Option<String>,
}
