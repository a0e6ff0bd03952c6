//! `mln` — generate, transform, benchmark, and analyze multilayer networks.
//!
//! Exit codes: 0 on success, 1 on runtime errors (bad input data, unknown
//! layers, unreadable files), 2 on usage errors (unknown flags, unknown
//! subcommands, invalid configuration). The `MLN_SEED` environment variable,
//! when set, overrides any `--seed` flag.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mln_cli::bench::{
    run_bench, BenchConfig, BenchError, BenchOperator, DEFAULT_DEGREE, DEFAULT_REPETITIONS,
    DEFAULT_SIZES, DEFAULT_WARMUPS,
};
use mln_cli::fit::{fit_scaling, FitError};
use mln_core::{
    diff_layer, filter_layer, flatten_layer, generate_er, new_store, parse_predicate,
    project_layer, read_mln, write_mln, BackendKind, ErConfig, LayerRef, MultilayerStore,
};

#[derive(Parser)]
#[command(name = "mln", version, about = "Multilayer network engine driver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded random multilayer network document
    Generate(GenerateArgs),
    /// Time a layer operator across backends and network sizes
    Bench(BenchArgs),
    /// Apply a layer operator to a network document
    Op(OpArgs),
    /// Estimate per-backend scaling exponents from a benchmark CSV
    Fit(FitArgs),
    /// Re-serialize a network document in canonical order
    Convert(ConvertArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of node-aligned layers
    #[arg(long, default_value_t = 2)]
    layers: usize,
    /// Actors per layer
    #[arg(long)]
    nodes: usize,
    /// Target mean intralayer degree
    #[arg(long, default_value_t = DEFAULT_DEGREE)]
    degree: f64,
    /// Wiring probability for node pairs in adjacent layers
    #[arg(long, default_value_t = 0.0)]
    interlayer_prob: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output path ("-" for stdout)
    #[arg(long)]
    out: String,
}

#[derive(Args)]
struct BenchArgs {
    /// Operator to time: flatten, diff, or noop
    #[arg(long, default_value = "flatten", value_parser = parse_operator)]
    operator: BenchOperator,
    /// Backend to include (repeatable)
    #[arg(long = "backend", value_name = "NAME", default_values_t = [BackendKind::Adjacency, BackendKind::Matrix])]
    backends: Vec<BackendKind>,
    /// Comma-separated node counts, strictly increasing
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SIZES)]
    sizes: Vec<usize>,
    /// Mean intralayer degree of the generated networks
    #[arg(long, default_value_t = DEFAULT_DEGREE)]
    degree: f64,
    /// Timed repetitions per cell
    #[arg(long, default_value_t = DEFAULT_REPETITIONS)]
    reps: usize,
    /// Untimed executions before the repetitions
    #[arg(long, default_value_t = DEFAULT_WARMUPS)]
    warmups: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// CSV output path ("-" for stdout)
    #[arg(long)]
    out: String,
}

#[derive(Args)]
struct OpArgs {
    /// Input document ("-" for stdin)
    #[arg(long = "in", global = true, default_value = "-")]
    input: String,
    /// Output document ("-" for stdout)
    #[arg(long, global = true, default_value = "-")]
    out: String,
    /// Backend to load the document into
    #[arg(long, global = true, default_value_t = BackendKind::Adjacency)]
    backend: BackendKind,
    #[command(subcommand)]
    operator: OpKind,
}

#[derive(Args, Clone)]
struct BinaryOpArgs {
    /// Dimension holding both input layers
    #[arg(long)]
    dim: String,
    /// First input layer
    #[arg(long)]
    from: String,
    /// Second input layer
    #[arg(long)]
    from2: String,
    /// Name of the result layer
    #[arg(long)]
    into: String,
}

#[derive(Subcommand)]
enum OpKind {
    /// Weighted union of two layers' intralayer edges
    Flatten(BinaryOpArgs),
    /// One-mode projection of interlayer edges onto the second layer
    Project(BinaryOpArgs),
    /// Edges of the first layer with no counterpart in the second
    Diff(BinaryOpArgs),
    /// Vertex-induced subgraph of one layer under a predicate
    Filter {
        /// Layer to filter
        #[arg(long)]
        layer: String,
        /// Dimension of the layer (may be omitted when unambiguous)
        #[arg(long)]
        dim: Option<String>,
        /// Node predicate, e.g. "degree >= 2 and not group == \"b\""
        #[arg(long = "where")]
        predicate: String,
        /// Name of the result layer
        #[arg(long)]
        into: String,
    },
}

#[derive(Args)]
struct FitArgs {
    /// Benchmark CSV produced by `mln bench`
    #[arg(long)]
    csv: PathBuf,
}

#[derive(Args)]
struct ConvertArgs {
    /// Input document ("-" for stdin)
    #[arg(long = "in", default_value = "-")]
    input: String,
    /// Output document ("-" for stdout)
    #[arg(long, default_value = "-")]
    out: String,
    /// Backend to load the document into
    #[arg(long, default_value_t = BackendKind::Adjacency)]
    backend: BackendKind,
}

fn parse_operator(name: &str) -> Result<BenchOperator, String> {
    BenchOperator::parse(name).map_err(|e| e.to_string())
}

/// Errors split by exit code: usage problems exit 2, runtime problems 1.
enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn runtime(err: impl std::fmt::Display) -> Self {
        CliError::Runtime(err.to_string())
    }
}

impl From<BenchError> for CliError {
    fn from(err: BenchError) -> Self {
        match err {
            BenchError::UnknownOperator(_) | BenchError::InvalidConfig(_) => {
                CliError::Usage(err.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Runtime(message)) => {
            eprintln!("mln: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(message)) => {
            eprintln!("mln: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate(args) => generate(args),
        Command::Bench(args) => bench(args),
        Command::Op(args) => op(args),
        Command::Fit(args) => fit(args),
        Command::Convert(args) => convert(args),
    }
}

/// `MLN_SEED`, when set, wins over any `--seed` flag.
fn effective_seed(flag: u64) -> Result<u64, CliError> {
    match std::env::var("MLN_SEED") {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("MLN_SEED must be an unsigned integer, got \"{text}\""))),
        Err(std::env::VarError::NotPresent) => Ok(flag),
        Err(std::env::VarError::NotUnicode(_)) => {
            Err(CliError::Usage("MLN_SEED is not valid UTF-8".into()))
        }
    }
}

fn open_sink(path: &str) -> Result<Box<dyn Write>, CliError> {
    if path == "-" {
        Ok(Box::new(std::io::stdout().lock()))
    } else {
        let file = File::create(path)
            .map_err(|e| CliError::Runtime(format!("cannot create {path}: {e}")))?;
        Ok(Box::new(BufWriter::new(file)))
    }
}

fn load_store(path: &str, backend: BackendKind) -> Result<Box<dyn MultilayerStore>, CliError> {
    let mut text = String::new();
    if path == "-" {
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| CliError::Runtime(format!("cannot read stdin: {e}")))?;
    } else {
        let file =
            File::open(path).map_err(|e| CliError::Runtime(format!("cannot open {path}: {e}")))?;
        BufReader::new(file)
            .read_to_string(&mut text)
            .map_err(|e| CliError::Runtime(format!("cannot read {path}: {e}")))?;
    }
    let mut store = new_store(backend);
    read_mln(text.as_bytes(), store.as_mut()).map_err(CliError::runtime)?;
    Ok(store)
}

fn write_store(store: &dyn MultilayerStore, path: &str) -> Result<(), CliError> {
    let mut sink = open_sink(path)?;
    write_mln(store, sink.as_mut()).map_err(CliError::runtime)?;
    sink.flush()
        .map_err(|e| CliError::Runtime(format!("cannot finish writing {path}: {e}")))?;
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<(), CliError> {
    let config = ErConfig {
        layers: args.layers,
        nodes: args.nodes,
        mean_degree: args.degree,
        interlayer_prob: args.interlayer_prob,
        seed: effective_seed(args.seed)?,
        dimension: "layer".to_owned(),
    };
    let mut store = new_store(BackendKind::Adjacency);
    generate_er(&config, store.as_mut()).map_err(CliError::runtime)?;
    write_store(store.as_ref(), &args.out)
}

fn bench(args: BenchArgs) -> Result<(), CliError> {
    let config = BenchConfig {
        operator: args.operator,
        backends: args.backends,
        sizes: args.sizes,
        mean_degree: args.degree,
        repetitions: args.reps,
        warmups: args.warmups,
        seed: effective_seed(args.seed)?,
    };
    let mut sink = open_sink(&args.out)?;
    run_bench(&config, sink.as_mut())?;
    sink.flush()
        .map_err(|e| CliError::Runtime(format!("cannot finish writing {}: {e}", args.out)))?;
    Ok(())
}

/// Finds the dimension of `layer` when `--dim` was omitted; the layer must
/// then exist in exactly one dimension.
fn resolve_dimension(
    store: &dyn MultilayerStore,
    layer: &str,
    dim: Option<String>,
) -> Result<String, CliError> {
    if let Some(dim) = dim {
        return Ok(dim);
    }
    let schema = store.schema();
    let mut holders = schema
        .dimensions
        .iter()
        .filter(|d| d.layers.iter().any(|l| l == layer));
    match (holders.next(), holders.next()) {
        (Some(d), None) => Ok(d.name.clone()),
        (None, _) => Err(CliError::Runtime(format!(
            "no dimension contains a layer named \"{layer}\""
        ))),
        (Some(a), Some(b)) => Err(CliError::Runtime(format!(
            "layer \"{layer}\" exists in dimensions \"{}\" and \"{}\"; pass --dim",
            a.name, b.name
        ))),
    }
}

fn op(args: OpArgs) -> Result<(), CliError> {
    let mut store = load_store(&args.input, args.backend)?;
    match args.operator {
        OpKind::Flatten(b) => {
            flatten_layer(store.as_mut(), &b.dim, &b.from, &b.from2, &b.into)
                .map_err(CliError::runtime)?;
        }
        OpKind::Project(b) => {
            project_layer(store.as_mut(), &b.dim, &b.from, &b.from2, &b.into)
                .map_err(CliError::runtime)?;
        }
        OpKind::Diff(b) => {
            diff_layer(store.as_mut(), &b.dim, &b.from, &b.from2, &b.into)
                .map_err(CliError::runtime)?;
        }
        OpKind::Filter {
            layer,
            dim,
            predicate,
            into,
        } => {
            let parsed = parse_predicate(&predicate)
                .map_err(|e| CliError::Usage(format!("invalid --where predicate: {e}")))?;
            let dimension = resolve_dimension(store.as_ref(), &layer, dim)?;
            filter_layer(
                store.as_mut(),
                &LayerRef::new(dimension, layer),
                &parsed,
                &into,
            )
            .map_err(CliError::runtime)?;
        }
    }
    write_store(store.as_ref(), &args.out)
}

fn fit(args: FitArgs) -> Result<(), CliError> {
    let csv = std::fs::read_to_string(&args.csv)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", args.csv.display())))?;
    let fits = fit_scaling(&csv).map_err(|e| match e {
        FitError::InsufficientData { .. } | FitError::Parse { .. } => CliError::runtime(e),
        FitError::Source(e) => CliError::runtime(e),
    })?;
    for line in fits {
        println!("{line}");
    }
    Ok(())
}

fn convert(args: ConvertArgs) -> Result<(), CliError> {
    let store = load_store(&args.input, args.backend)?;
    write_store(store.as_ref(), &args.out)
}
