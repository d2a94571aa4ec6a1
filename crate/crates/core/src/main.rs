use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use geomds::cli::{self, RunConfig};
use geomds::decompose::DEFAULT_MU;

#[derive(Parser)]
#[command(
    name = "geomds",
    version,
    about = "Low-rank geodesic distances and multidimensional scaling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Farthest point sampling; writes indices.csv and F.bin.
    Sample(Opts),
    /// Builds S.bin, T.bin and header.json.
    Decompose(Opts),
    /// Embeds from stored factors; writes Z.csv and Z.bin.
    Embed(Opts),
    /// Answers distance queries; writes distances.csv.
    Query(Opts),
    /// Writes metrics.jsonl.
    Eval(Opts),
}

#[derive(Args)]
struct Opts {
    /// Mesh (.off, .obj) or point cloud (.csv).
    #[arg(long)]
    input: Option<PathBuf>,
    /// off, obj or csv; defaults to the input extension.
    #[arg(long)]
    format: Option<String>,
    /// dijkstra, plane or sphere.
    #[arg(long, default_value = "dijkstra")]
    backend: String,
    /// Neighbors per point when building a graph from a point cloud.
    #[arg(long, default_value_t = 10)]
    knn: usize,
    /// fmds, nmds or cur.
    #[arg(long, default_value = "nmds")]
    method: String,
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long)]
    n1: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_MU)]
    mu: f64,
    /// Embedding dimension.
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// Work with cos(D / r) and embed onto a sphere.
    #[arg(long)]
    sphere: bool,
    /// Sphere dimension.
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    normalize: bool,
    /// First farthest-point sample.
    #[arg(long, default_value_t = 0)]
    first: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV of `i,j` rows for `query`.
    #[arg(long)]
    pairs: Option<PathBuf>,
    /// Random pairs used by the rms metric.
    #[arg(long, default_value_t = 1000)]
    pair_count: usize,
    /// Metrics to evaluate: frobenius, rms, stress, triangle, best.
    #[arg(long, value_delimiter = ',')]
    metrics: Vec<String>,
    /// Sample counts for an error-versus-n sweep.
    #[arg(long, value_delimiter = ',')]
    sweep_n: Vec<usize>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

impl From<Opts> for RunConfig {
    fn from(o: Opts) -> Self {
        RunConfig {
            input: o.input,
            format: o.format,
            backend: o.backend,
            knn: o.knn,
            method: o.method,
            n: o.n,
            n1: o.n1,
            mu: o.mu,
            dim: o.dim,
            sphere: o.sphere,
            k: o.k,
            radius: o.radius,
            normalize: o.normalize,
            first: o.first,
            seed: o.seed,
            pairs: o.pairs,
            pair_count: o.pair_count,
            metrics: o.metrics,
            sweep: o.sweep_n,
            out: o.out,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let result = match Cli::parse().command {
        Command::Sample(o) => cli::cmd_sample(&o.into()).map(drop),
        Command::Decompose(o) => cli::cmd_decompose(&o.into()).map(drop),
        Command::Embed(o) => cli::cmd_embed(&o.into()).map(drop),
        Command::Query(o) => cli::cmd_query(&o.into()).map(drop),
        Command::Eval(o) => cli::cmd_eval(&o.into()).map(drop),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("geomds: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
