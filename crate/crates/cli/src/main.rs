//! `krbp`: command-line front end for the K_r-bootstrap percolation library.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Format versions of every JSON document the tool emits.
const LONG_VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (schemas: trace/1 graph/1 layout/1 verify/1 sources/1 audit/1 search/1 threshold/1)"
);

#[derive(Parser, Debug)]
#[command(name = "krbp", version, long_version = LONG_VERSION, about = "K_r-bootstrap percolation laboratory")]
pub struct Cli {
    /// Worker threads for searches and sampling (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Shorthand for `--format json`.
    #[arg(long, conflicts_with = "format")]
    pub json: bool,
}

impl OutputArgs {
    pub fn format(&self) -> Format {
        if self.json {
            Format::Json
        } else {
            self.format
        }
    }
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct GraphInput {
    /// Edge-list file (`n m` header, one `u v` per line); `-` reads stdin.
    #[arg(long)]
    pub graph: Option<String>,
    /// Edge list given inline; `;` separates lines.
    #[arg(long)]
    pub inline: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct ProcessArgs {
    /// Clique size r (the process completes copies of K_r).
    #[arg(long)]
    pub r: usize,
    #[command(flatten)]
    pub input: GraphInput,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the process to saturation and print the infection trace.
    Close(ProcessArgs),
    /// Print the saturation time.
    Tau(ProcessArgs),
    /// Generate a family member.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Check a graph against a family layout.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Track sources, expansions and mergers.
    Sources(ProcessArgs),
    /// Evaluate the time and edge bounds on a run.
    Audit(ProcessArgs),
    /// Exhaustive search over all labeled graphs.
    #[command(subcommand)]
    Search(SearchCommand),
    /// Monte Carlo critical threshold on G(n, p).
    Threshold(ThresholdArgs),
}

#[derive(Args, Debug, Clone)]
pub struct GenOutput {
    /// Also write the vertex-role layout as JSON to this path.
    #[arg(long)]
    pub layout: Option<String>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Subcommand, Debug)]
pub enum GenCommand {
    /// K_r minus one edge.
    Krminuse {
        #[arg(long)]
        r: usize,
        #[command(flatten)]
        out: GenOutput,
    },
    /// Path with m edges.
    Path {
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        out: GenOutput,
    },
    /// Chain family member H_t.
    Ht {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        t: usize,
        #[command(flatten)]
        out: GenOutput,
    },
    /// Layered family member L_h (h prime).
    Lh {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        h: usize,
        /// Emit the reduced graph R(L_h) (one vertex per source, edges for
        /// intersecting sources) instead of L_h.
        #[arg(long, conflicts_with = "layout")]
        reduced: bool,
        #[command(flatten)]
        out: GenOutput,
    },
}

#[derive(Subcommand, Debug)]
pub enum VerifyCommand {
    /// Check the H_t conditions.
    Ht {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        t: usize,
        /// Layout JSON from `gen ht --layout`; defaults to the canonical one.
        #[arg(long)]
        layout: Option<String>,
        #[command(flatten)]
        input: GraphInput,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Check the L_h intersection pattern and pieces.
    Lh {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        h: usize,
        /// Layout JSON from `gen lh --layout`; defaults to the canonical one.
        #[arg(long)]
        layout: Option<String>,
        #[command(flatten)]
        input: GraphInput,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub r: usize,
    /// Number of shards the mask space is split into.
    #[arg(long, default_value_t = krbp::search::DEFAULT_SHARDS)]
    pub shards: usize,
    /// Run a single shard only.
    #[arg(long)]
    pub shard_index: Option<usize>,
    /// Largest n accepted (8 at most).
    #[arg(long, default_value_t = krbp::search::DEFAULT_BUDGET)]
    pub budget: usize,
    /// Skip isomorphic copies (per shard).
    #[arg(long)]
    pub dedup: bool,
    /// Leave the wall-time field out of JSON output.
    #[arg(long)]
    pub no_timing: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Subcommand, Debug)]
pub enum SearchCommand {
    /// Maximum saturation time over n-vertex graphs.
    Taumax(SearchArgs),
    /// Minimum edges of a percolating n-vertex graph.
    Minsat(SearchArgs),
    /// Minimum edges for saturation time exactly t (graphs on at most n vertices).
    Minedges {
        #[arg(long)]
        t: u32,
        #[command(flatten)]
        args: SearchArgs,
    },
}

#[derive(Args, Debug, Clone)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub r: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also report the empirical percolation probability at this p.
    #[arg(long)]
    pub at: Option<f64>,
    /// With `--at`: add the exact probability by exhaustive summation (n <= 7).
    #[arg(long, requires = "at")]
    pub exact: bool,
    /// Emit the empirical curve on this many grid points (csv) instead of quantiles.
    #[arg(long)]
    pub curve: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .expect("thread pool is configured once");
    }
    match commands::run(cli.command) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            if let Some(body) = &err.output {
                print!("{body}");
            }
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
