use std::fmt;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use volsel_core::Subroutine;

#[derive(Debug, Parser)]
#[command(name = "volsel", version, about = "Volume sampling and deterministic row-subset selection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Report format. CSV carries only the selected row indices.
    #[arg(long, value_enum, default_value_t = OutputFormat::Json, global = true)]
    pub output: OutputFormat,

    /// Worker threads for the per-row loops.
    #[arg(long, env = "VOLSEL_THREADS", global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a k-subset of rows by exact volume sampling.
    Sample {
        #[command(flatten)]
        input: MatrixArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SubroutineArg::Gram)]
        subroutine: SubroutineArg,
        /// Number of draws; the histogram of subsets is reported when > 1.
        #[arg(long, default_value_t = 1)]
        trials: usize,
    },
    /// Deterministic selection with the (k+1) Frobenius guarantee.
    Select {
        #[command(flatten)]
        input: MatrixArgs,
    },
    /// Volume sampling after a Gaussian sketch of the columns.
    ApproxSample {
        #[command(flatten)]
        input: MatrixArgs,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Constant in the sketch dimension d = c·k²·ln m / eps².
        #[arg(long, default_value_t = volsel_core::sketch::DEFAULT_DIMENSION_CONSTANT)]
        c_dim: f64,
    },
    /// Compare the sampler against exhaustive enumeration.
    Verify {
        #[command(flatten)]
        input: MatrixArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SubroutineArg::Gram)]
        subroutine: SubroutineArg,
        #[arg(long, default_value_t = 200_000)]
        trials: usize,
    },
    /// Spectral ratios of the single-row lower-bound family.
    Lowerbound {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: f64,
    },
    /// Per-round timings of both marginal subroutines on random matrices.
    Bench {
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated list of MxN sizes.
        #[arg(long, default_value = "100x10,200x20,400x40,800x80")]
        sizes: String,
    },
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    /// CSV file with one matrix row per line.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SubroutineArg {
    Gram,
    Svd,
}

impl From<SubroutineArg> for Subroutine {
    fn from(s: SubroutineArg) -> Self {
        match s {
            SubroutineArg::Gram => Subroutine::Gram,
            SubroutineArg::Svd => Subroutine::Svd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Sample,
    Select,
    ApproxSample,
    Verify,
    Lowerbound,
    Bench,
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CommandKind::Sample => "sample",
            CommandKind::Select => "select",
            CommandKind::ApproxSample => "approx-sample",
            CommandKind::Verify => "verify",
            CommandKind::Lowerbound => "lowerbound",
            CommandKind::Bench => "bench",
        })
    }
}

/// Validated settings for one invocation. Fields a command does not use keep
/// their defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub input: Option<PathBuf>,
    pub k: usize,
    pub eps: Option<f64>,
    pub seed: u64,
    pub subroutine: Subroutine,
    pub trials: usize,
    pub output: OutputFormat,
    pub c_dim: f64,
    /// Size of the lower-bound matrix.
    pub n: usize,
    pub sizes: Vec<(usize, usize)>,
}

impl RunConfig {
    fn base(command: CommandKind, output: OutputFormat) -> Self {
        Self {
            command,
            input: None,
            k: 1,
            eps: None,
            seed: 0,
            subroutine: Subroutine::Gram,
            trials: 1,
            output,
            c_dim: volsel_core::sketch::DEFAULT_DIMENSION_CONSTANT,
            n: 0,
            sizes: Vec::new(),
        }
    }

    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let mut cfg;
        match &cli.command {
            Command::Sample { input, seed, subroutine, trials } => {
                cfg = Self::base(CommandKind::Sample, cli.output);
                cfg.set_matrix(input);
                cfg.seed = *seed;
                cfg.subroutine = (*subroutine).into();
                cfg.trials = *trials;
            }
            Command::Select { input } => {
                cfg = Self::base(CommandKind::Select, cli.output);
                cfg.set_matrix(input);
            }
            Command::ApproxSample { input, eps, seed, c_dim } => {
                cfg = Self::base(CommandKind::ApproxSample, cli.output);
                cfg.set_matrix(input);
                cfg.eps = Some(*eps);
                cfg.seed = *seed;
                cfg.c_dim = *c_dim;
            }
            Command::Verify { input, seed, subroutine, trials } => {
                cfg = Self::base(CommandKind::Verify, cli.output);
                cfg.set_matrix(input);
                cfg.seed = *seed;
                cfg.subroutine = (*subroutine).into();
                cfg.trials = *trials;
            }
            Command::Lowerbound { n, eps } => {
                cfg = Self::base(CommandKind::Lowerbound, cli.output);
                cfg.n = *n;
                cfg.eps = Some(*eps);
            }
            Command::Bench { k, seed, sizes } => {
                cfg = Self::base(CommandKind::Bench, cli.output);
                cfg.k = *k;
                cfg.seed = *seed;
                cfg.sizes = parse_sizes(sizes)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set_matrix(&mut self, args: &MatrixArgs) {
        self.input = Some(args.input.clone());
        self.k = args.k;
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            bail!("--k must be at least 1");
        }
        if self.trials == 0 {
            bail!("--trials must be at least 1");
        }
        match (self.command, self.eps) {
            (CommandKind::ApproxSample, Some(eps)) if !(eps > 0.0 && eps <= 0.5) => {
                bail!("--eps must lie in (0, 0.5], got {eps}")
            }
            (CommandKind::Lowerbound, Some(eps)) if !(eps > 0.0 && eps < 1.0) => {
                bail!("--eps must lie in (0, 1), got {eps}")
            }
            _ => {}
        }
        if self.command == CommandKind::Lowerbound && self.n < 2 {
            bail!("--n must be at least 2");
        }
        if self.output == OutputFormat::Csv
            && !matches!(self.command, CommandKind::Sample | CommandKind::Select | CommandKind::ApproxSample)
        {
            bail!("--output csv is only available for commands that select rows");
        }
        Ok(())
    }
}

fn parse_sizes(s: &str) -> Result<Vec<(usize, usize)>> {
    s.split(',')
        .map(|part| {
            let (m, n) = part
                .trim()
                .split_once(['x', 'X'])
                .ok_or_else(|| anyhow::anyhow!("size {part:?} is not of the form MxN"))?;
            let (m, n): (usize, usize) = (m.parse()?, n.parse()?);
            if m == 0 || n == 0 {
                bail!("size {part:?} has a zero dimension");
            }
            Ok((m, n))
        })
        .collect()
}
