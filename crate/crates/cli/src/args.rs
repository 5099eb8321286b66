use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use seqentropy::{ColumnRef, Format, Role, SelectorKind, TrendAxis};
use serde::Serialize;

use crate::output::Emit;

#[derive(Debug, Parser)]
#[command(
    name = "seqentropy",
    version,
    about = "Node, edge and succession entropy of temporal event sequences"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cumulative entropy series of the input sequence
    Analyze(AnalyzeArgs),
    /// Mean and deviation of entropy across randomized replicas
    Baseline(BaselineArgs),
    /// Z-scores of the real series against a randomized ensemble
    Zscore(ZscoreArgs),
    /// Report self-loops and ordering violations
    Validate(ValidateArgs),
    /// Split the input into time segments, one file per segment
    Segment(SegmentArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InputArgs {
    /// Delimited event file
    #[arg(long)]
    pub input: PathBuf,

    /// Sender, receiver and timestamp columns as 0-based indices or header
    /// names; names imply --header
    #[arg(long, default_value = "0,1,2")]
    pub format: String,

    /// Field delimiter: a single character, or `tab`, `space`, `comma`, `semicolon`
    #[arg(long, default_value = ",")]
    pub delimiter: String,

    /// First line is a header
    #[arg(long)]
    pub header: bool,

    /// Stable-sort unordered input by timestamp instead of rejecting it
    #[arg(long)]
    pub sort: bool,

    /// Read every row as two events, a->b and b->a
    #[arg(long)]
    pub both_directions: bool,
}

impl InputArgs {
    pub fn to_format(&self) -> Result<Format> {
        let delimiter = match self.delimiter.as_str() {
            "tab" | "\\t" | "\t" => b'\t',
            "space" => b' ',
            "comma" => b',',
            "semicolon" => b';',
            d if d.len() == 1 => d.as_bytes()[0],
            d => bail!("unsupported delimiter `{d}`"),
        };
        let cols: Vec<ColumnRef> = self
            .format
            .split(',')
            .map(|c| c.parse().expect("infallible"))
            .collect();
        let [sender, receiver, timestamp]: [ColumnRef; 3] = match cols.try_into() {
            Ok(c) => c,
            Err(_) => bail!("--format needs exactly three columns: sender,receiver,timestamp"),
        };
        let named = [&sender, &receiver, &timestamp]
            .iter()
            .any(|c| matches!(c, ColumnRef::Name(_)));
        Ok(Format {
            delimiter,
            has_header: self.header || named,
            sender,
            receiver,
            timestamp,
            sort_if_unordered: self.sort,
            both_directions: self.both_directions,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RoleArg {
    #[default]
    Sender,
    Receiver,
    Either,
}

impl From<RoleArg> for Role {
    fn from(r: RoleArg) -> Self {
        match r {
            RoleArg::Sender => Role::Sender,
            RoleArg::Receiver => Role::Receiver,
            RoleArg::Either => Role::Either,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectorArg {
    #[default]
    Uniform,
    Normal,
    Exponential,
}

impl From<SelectorArg> for SelectorKind {
    fn from(s: SelectorArg) -> Self {
        match s {
            SelectorArg::Uniform => SelectorKind::Uniform,
            SelectorArg::Normal => SelectorKind::Normal,
            SelectorArg::Exponential => SelectorKind::Exponential,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TrendAxisArg {
    #[default]
    Index,
    Timestamp,
}

impl From<TrendAxisArg> for TrendAxis {
    fn from(a: TrendAxisArg) -> Self {
        match a {
            TrendAxisArg::Index => TrendAxis::Index,
            TrendAxisArg::Timestamp => TrendAxis::Timestamp,
        }
    }
}

/// Parameters shared by every entropy run.
#[derive(Debug, Clone, Args, Serialize)]
pub struct SeriesArgs {
    /// Node role for first-order entropy
    #[arg(long, value_enum, default_value_t)]
    pub role: RoleArg,

    /// Segment boundaries t0,t1,... (half-open intervals, raw timestamps)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub segments: Option<Vec<i64>>,

    /// Emit every n-th event (and the last one)
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub stride: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EnsembleArgs {
    /// Number of randomized replicas K
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(2..))]
    pub replicas: u64,

    #[arg(long, value_enum, default_value_t)]
    pub selector: SelectorArg,

    /// Master seed; replica r uses seed + r
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (defaults to all cores); does not affect output
    #[arg(long)]
    #[serde(skip)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Output file
    #[arg(long)]
    pub out: PathBuf,

    #[arg(long, value_enum, default_value_t)]
    pub emit: Emit,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ZscoreArgs {
    /// Single-shot mode: event file to analyze and randomize in one run
    #[arg(long, conflicts_with_all = ["real", "stats"], required_unless_present = "real")]
    pub input: Option<PathBuf>,

    #[arg(long, default_value = "0,1,2")]
    pub format: String,
    #[arg(long, default_value = ",")]
    pub delimiter: String,
    #[arg(long)]
    pub header: bool,
    #[arg(long)]
    pub sort: bool,
    #[arg(long)]
    pub both_directions: bool,

    /// Split mode: output of `analyze`
    #[arg(long, requires = "stats")]
    pub real: Option<PathBuf>,

    /// Split mode: output of `baseline`
    #[arg(long, requires = "real")]
    pub stats: Option<PathBuf>,

    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub ensemble: EnsembleArgs,

    /// Add OLS trend and residual-deviation columns per measure
    #[arg(long)]
    pub trend: bool,

    /// Trend x-axis
    #[arg(long, value_enum, default_value_t)]
    pub trend_x: TrendAxisArg,

    #[command(flatten)]
    pub output: OutputArgs,
}

impl ZscoreArgs {
    pub fn input_args(&self) -> Option<InputArgs> {
        self.input.as_ref().map(|input| InputArgs {
            input: input.clone(),
            format: self.format.clone(),
            delimiter: self.delimiter.clone(),
            header: self.header,
            sort: self.sort,
            both_directions: self.both_directions,
        })
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Write the report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SegmentArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Segment boundaries t0,t1,...
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_hyphen_values = true
    )]
    pub segments: Vec<i64>,

    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
}
