//! Layer-aggregation scaling benchmark.
//!
//! For every (backend, size) cell the harness builds a fresh two-layer
//! node-aligned random network with the configured mean degree and no
//! interlayer edges, runs the requested warmups, then times `repetitions`
//! executions of the operator with a monotonic clock. Each repetition gets a
//! fresh result-layer name, and the result layer is deleted between
//! repetitions so every execution sees the same input; generation, naming,
//! and cleanup all happen outside the timed span. Records stream to the sink
//! in execution order as CSV rows. A cell that runs out of memory (the dense
//! matrix demo past its capacity) produces a "did not finish" row with the
//! seconds column empty, and the run moves on to the next cell.

use std::io::Write;
use std::time::Instant;

use mln_core::{
    diff_layer, flatten_layer, generate_er, new_store, BackendKind, ErConfig, MultilayerStore,
    StoreError,
};

pub const CSV_HEADER: &str = "backend,operator,size,rep,seconds";
pub const DEFAULT_SIZES: [usize; 10] = [
    100, 200, 500, 1000, 2000, 5000, 10_000, 20_000, 50_000, 100_000,
];
pub const DEFAULT_DEGREE: f64 = 4.0;
pub const DEFAULT_REPETITIONS: usize = 5;
pub const DEFAULT_WARMUPS: usize = 1;

/// Operators the benchmark can time. `Noop` measures an empty body and is
/// the harness self-test: its per-repetition time must stay far below the
/// cost of any real operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchOperator {
    Flatten,
    Diff,
    Noop,
}

impl BenchOperator {
    pub fn parse(name: &str) -> Result<Self, BenchError> {
        match name {
            "flatten" => Ok(BenchOperator::Flatten),
            "diff" => Ok(BenchOperator::Diff),
            "noop" => Ok(BenchOperator::Noop),
            other => Err(BenchError::UnknownOperator(other.to_owned())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BenchOperator::Flatten => "flatten",
            BenchOperator::Diff => "diff",
            BenchOperator::Noop => "noop",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub operator: BenchOperator,
    pub backends: Vec<BackendKind>,
    pub sizes: Vec<usize>,
    pub mean_degree: f64,
    pub repetitions: usize,
    pub warmups: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            operator: BenchOperator::Flatten,
            backends: vec![BackendKind::Adjacency, BackendKind::Matrix],
            sizes: DEFAULT_SIZES.to_vec(),
            mean_degree: DEFAULT_DEGREE,
            repetitions: DEFAULT_REPETITIONS,
            warmups: DEFAULT_WARMUPS,
            seed: 42,
        }
    }
}

impl BenchConfig {
    fn validate(&self) -> Result<(), BenchError> {
        if self.repetitions < 1 {
            return Err(BenchError::InvalidConfig(
                "repetitions must be >= 1".into(),
            ));
        }
        if self.backends.is_empty() {
            return Err(BenchError::InvalidConfig("no backends selected".into()));
        }
        if self.sizes.is_empty() || self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(BenchError::InvalidConfig(
                "sizes must be non-empty and strictly increasing".into(),
            ));
        }
        Ok(())
    }
}

/// One timed execution. `seconds` is `None` for a cell that did not finish.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub backend: String,
    pub operator: String,
    pub size: usize,
    pub rep: usize,
    pub seconds: Option<f64>,
}

impl BenchRecord {
    pub fn csv_row(&self) -> String {
        let seconds = match self.seconds {
            Some(s) => s.to_string(),
            None => String::new(),
        };
        format!(
            "{},{},{},{},{}",
            self.backend, self.operator, self.size, self.rep, seconds
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("unknown operator \"{0}\" (expected flatten, diff, or noop)")]
    UnknownOperator(String),
    #[error("invalid benchmark configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("cannot write results: {0}")]
    Sink(#[from] std::io::Error),
}

/// Dimension and layer names [`generate_er`] gives a two-layer benchmark
/// network: the timed operators read layers `l0` and `l1` of `layer`.
const DIM: &str = "layer";
const SOURCE: &str = "l0";
const TARGET: &str = "l1";

fn run_operator(
    store: &mut dyn MultilayerStore,
    operator: BenchOperator,
    result: &str,
) -> Result<(), StoreError> {
    match operator {
        BenchOperator::Flatten => flatten_layer(store, DIM, SOURCE, TARGET, result).map(|_| ()),
        BenchOperator::Diff => diff_layer(store, DIM, SOURCE, TARGET, result).map(|_| ()),
        BenchOperator::Noop => Ok(()),
    }
}

/// Runs the full benchmark grid, streaming one CSV row per record to `sink`
/// (header first) and returning the records. Cells are executed strictly
/// sequentially on the calling thread.
pub fn run_bench(config: &BenchConfig, sink: &mut dyn Write) -> Result<Vec<BenchRecord>, BenchError> {
    config.validate()?;
    writeln!(sink, "{CSV_HEADER}")?;
    let mut records = Vec::new();
    let mut emit = |record: BenchRecord, sink: &mut dyn Write| -> Result<(), BenchError> {
        writeln!(sink, "{}", record.csv_row())?;
        sink.flush()?;
        records.push(record);
        Ok(())
    };

    for &backend in &config.backends {
        for &size in &config.sizes {
            match run_cell(config, backend, size) {
                Ok(cell) => {
                    for record in cell {
                        emit(record, sink)?;
                    }
                }
                Err(StoreError::OutOfMemory(_)) => {
                    // did not finish: keep the row, continue with the grid
                    emit(
                        BenchRecord {
                            backend: backend.name().to_owned(),
                            operator: config.operator.name().to_owned(),
                            size,
                            rep: 1,
                            seconds: None,
                        },
                        sink,
                    )?;
                }
                Err(other) => return Err(other.into()),
            }
        }
    }
    Ok(records)
}

/// Times one (backend, size) cell: fresh network, warmups, then the timed
/// repetitions. Any `OutOfMemory` bubbles up so the caller can mark the cell.
fn run_cell(
    config: &BenchConfig,
    backend: BackendKind,
    size: usize,
) -> Result<Vec<BenchRecord>, StoreError> {
    let mut store = new_store(backend);
    generate_er(
        &ErConfig::benchmark(size, config.mean_degree, config.seed),
        store.as_mut(),
    )?;

    for i in 0..config.warmups {
        let result = format!("bench_w{i}");
        run_operator(store.as_mut(), config.operator, &result)?;
        if config.operator != BenchOperator::Noop {
            store.delete_layer(DIM, &result)?;
        }
    }

    let mut cell = Vec::with_capacity(config.repetitions);
    for rep in 1..=config.repetitions {
        let result = format!("bench_r{rep}");
        let started = Instant::now();
        run_operator(store.as_mut(), config.operator, &result)?;
        let seconds = started.elapsed().as_secs_f64();
        if config.operator != BenchOperator::Noop {
            store.delete_layer(DIM, &result)?;
        }
        cell.push(BenchRecord {
            backend: backend.name().to_owned(),
            operator: config.operator.name().to_owned(),
            size,
            rep,
            seconds: Some(seconds.max(f64::MIN_POSITIVE)),
        });
    }
    Ok(cell)
}
