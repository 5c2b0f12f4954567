use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use easort::amj::{JoinShape, JoinStrategy};
use easort::{Error, StoreImage};
use easort_cli::{
    bounds_report, gen_image, index_report, is_parameter_error, join_report, query_report, sort_report, JoinArgs, Query,
    SortArgs,
};

#[derive(Parser)]
#[command(name = "easort", version, about = "Approximate external sorting experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    OneSide,
    TwoSide,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    m: usize,
    #[arg(long, default_value_t = 10)]
    b: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Repeat each key up to this many times.
    #[arg(long, default_value_t = 1)]
    duplicates: usize,
    /// Key file written by `gen`; replaces generated input.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a uniform random permutation of 1..n as a key file.
    Gen {
        #[command(flatten)]
        common: Common,
    },
    /// Run EASORT and report I/O, distortion and bounds per trial.
    Sort {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        /// Write the first trial's bucket manifest here.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Build a VBF-Tree over an EASORT run and report its shape.
    Index {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 0.01)]
        fpp: f64,
    },
    /// Run point or range queries against a freshly built VBF-Tree.
    Query {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 0.01)]
        fpp: f64,
        #[arg(long)]
        point: Vec<u64>,
        /// Inclusive range as LO HI; may repeat.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        range: Vec<u64>,
    },
    /// Join two generated relations and report measured and predicted I/O.
    Join {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Shape::OneSide)]
        shape: Shape,
        /// Right relation size; defaults to n.
        #[arg(long)]
        n2: Option<usize>,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        /// Re-scan the sorted side for oversized buckets instead of using temp files.
        #[arg(long)]
        alt_rescan: bool,
    },
    /// Evaluate the distortion bounds for given parameters.
    Bounds {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t: u64,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
}

fn read_keys(path: &Path) -> Result<StoreImage, Error> {
    StoreImage::from_bytes(&fs::read(path)?)
}

fn emit(common: &Common, csv: &str) -> Result<(), Error> {
    let Format::Csv = common.format;
    match &common.output {
        Some(path) => fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn input_keys(common: &Common) -> Result<Vec<u64>, Error> {
    match &common.input {
        Some(path) => Ok(read_keys(path)?.all_keys()),
        None => Ok(easort_cli::generate_keys(common.n, common.seed, 0, common.duplicates)),
    }
}

fn run(cmd: Cmd) -> Result<(), Error> {
    match cmd {
        Cmd::Gen { common } => {
            let image = gen_image(common.n, common.m, common.b, common.seed, common.duplicates)?;
            match &common.output {
                Some(path) => fs::write(path, image.to_bytes())?,
                None => return Err(Error::InvalidParams("gen needs --output".into())),
            }
        }
        Cmd::Sort { common, k, trials, manifest } => {
            let input = common.input.as_deref().map(read_keys).transpose()?.map(|img| img.all_keys());
            let (csv, text) = sort_report(&SortArgs {
                input: input.as_deref(),
                n: common.n,
                m: common.m,
                b: common.b,
                k,
                seed: common.seed,
                trials,
                duplicates: common.duplicates,
            })?;
            if let Some(path) = manifest {
                fs::write(path, text)?;
            }
            emit(&common, &csv)?;
        }
        Cmd::Index { common, k, fpp } => {
            let csv = index_report(&input_keys(&common)?, common.m, common.b, k, fpp)?;
            emit(&common, &csv)?;
        }
        Cmd::Query { common, k, fpp, point, range } => {
            let mut queries: Vec<Query> = point.into_iter().map(Query::Point).collect();
            queries.extend(range.chunks(2).map(|r| Query::Range(r[0], r[1])));
            if queries.is_empty() {
                return Err(Error::InvalidParams("give at least one --point or --range".into()));
            }
            let csv = query_report(&input_keys(&common)?, common.m, common.b, k, fpp, &queries)?;
            emit(&common, &csv)?;
        }
        Cmd::Join { common, shape, n2, k, trials, alt_rescan } => {
            let csv = join_report(&JoinArgs {
                shape: match shape {
                    Shape::OneSide => JoinShape::OneSide,
                    Shape::TwoSide => JoinShape::TwoSide,
                },
                n1: common.n,
                n2: n2.unwrap_or(common.n),
                m: common.m,
                b: common.b,
                k,
                seed: common.seed,
                trials,
                duplicates: common.duplicates,
                strategy: if alt_rescan { JoinStrategy::Rescan } else { JoinStrategy::TempFile },
            })?;
            emit(&common, &csv)?;
        }
        Cmd::Bounds { common, t, k } => {
            let csv = bounds_report(common.n, common.m, common.b, t, k)?;
            emit(&common, &csv)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse().cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if is_parameter_error(&e) { 2 } else { 1 })
        }
    }
}
