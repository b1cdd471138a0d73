//! Grid execution and the CSV artifacts it produces.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};
use std::sync::{mpsc, Arc, Mutex};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gray::GrayImage;
use crate::hadamard::{build_hadamard, HadamardMatrix};
use crate::metrics::{psnr, ssim};
use crate::orderings::{order_rows, RowOrdering, Strategy};
use crate::sampling::{acquire, derive_cell_seed, measurement_count};
use crate::tv::{reconstruct, write_trace_csv, SolverConfig};

use super::config::{ExperimentGrid, OutputOptions};
use super::imageio::save_png;

pub const CELLS_FILE: &str = "cells.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const TIMINGS_FILE: &str = "timings.csv";
pub const IMAGES_DIR: &str = "images";
pub const TRACES_DIR: &str = "traces";

pub const CELLS_SCHEMA: &str = "# spi-bench cells v1";
pub const AGGREGATE_SCHEMA: &str = "# spi-bench aggregate v1";
pub const TIMINGS_SCHEMA: &str = "# spi-bench timings v1";

/// Computes each strategy's ordering once and hands out shared copies.
pub struct OrderingCache<'a> {
    h: &'a HadamardMatrix,
    slots: Mutex<BTreeMap<Strategy, Arc<RowOrdering>>>,
}

impl<'a> OrderingCache<'a> {
    pub fn new(h: &'a HadamardMatrix) -> Self {
        Self {
            h,
            slots: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn get(&self, strategy: Strategy) -> Result<Arc<RowOrdering>> {
        let mut slots = self.slots.lock().expect("ordering cache lock");
        if let Some(o) = slots.get(&strategy) {
            return Ok(Arc::clone(o));
        }
        let o = Arc::new(order_rows(self.h, strategy)?);
        slots.insert(strategy, Arc::clone(&o));
        Ok(o)
    }

    pub fn len(&self) -> usize {
        self.slots.lock().expect("ordering cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    /// The solver produced non-finite values.
    Diverged,
    /// Any other per-cell error.
    Failed,
}

impl CellStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::Diverged => "diverged",
            CellStatus::Failed => "failed",
        }
    }
}

/// One row of `cells.csv`. Metrics are absent for cells that did not finish.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    #[serde(rename = "image")]
    pub image_id: String,
    pub strategy: Strategy,
    #[serde(rename = "sr")]
    pub sampling_ratio: f64,
    #[serde(rename = "c")]
    pub noise_c: f64,
    pub run: usize,
    pub m: usize,
    pub seed: u64,
    pub ssim: Option<f64>,
    pub psnr: Option<f64>,
    pub iterations: Option<usize>,
    pub converged: bool,
    pub status: CellStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub record: CellRecord,
    pub wall_time: Duration,
    /// Error message for cells that did not finish.
    pub error: Option<String>,
}

#[derive(Serialize)]
struct TimingRow<'a> {
    image: &'a str,
    strategy: Strategy,
    sr: f64,
    c: f64,
    run: usize,
    wall_time_s: f64,
}

/// Mean and sample standard deviation of one `(strategy, SR, c)` group over
/// its finished cells. Both are NaN for an empty group; the deviation is 0 for
/// a single cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub strategy: Strategy,
    #[serde(rename = "sr")]
    pub sampling_ratio: f64,
    #[serde(rename = "c")]
    pub noise_c: f64,
    pub cells: usize,
    pub ssim_mean: f64,
    pub ssim_std: f64,
    pub psnr_mean: f64,
    pub psnr_std: f64,
}

pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

type GroupKey = (Strategy, u64, u64);

/// Groups records by `(strategy, SR, c)` in order of first appearance.
pub fn aggregate(records: &[CellRecord]) -> Vec<AggregateRow> {
    let mut groups: Vec<(GroupKey, Vec<&CellRecord>)> = Vec::new();
    for r in records {
        let key = (r.strategy, r.sampling_ratio.to_bits(), r.noise_c.to_bits());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|((strategy, sr, c), members)| {
            let ok: Vec<_> = members
                .iter()
                .filter(|r| r.status == CellStatus::Ok)
                .collect();
            let ssims: Vec<f64> = ok.iter().filter_map(|r| r.ssim).collect();
            let psnrs: Vec<f64> = ok.iter().filter_map(|r| r.psnr).collect();
            let (ssim_mean, ssim_std) = mean_and_std(&ssims);
            let (psnr_mean, psnr_std) = mean_and_std(&psnrs);
            AggregateRow {
                strategy,
                sampling_ratio: f64::from_bits(sr),
                noise_c: f64::from_bits(c),
                cells: ok.len(),
                ssim_mean,
                ssim_std,
                psnr_mean,
                psnr_std,
            }
        })
        .collect()
}

fn csv_error(e: csv::Error) -> Error {
    Error::Config(format!("malformed CSV: {e}"))
}

/// Checks the schema line, then deserializes the rows under the header.
fn parse_csv<T: DeserializeOwned>(text: &str, schema: &str) -> Result<Vec<T>> {
    let body = text
        .strip_prefix(schema)
        .and_then(|rest| rest.strip_prefix('\n'))
        .ok_or_else(|| Error::Config(format!("expected a CSV starting with {schema:?}")))?;
    csv::Reader::from_reader(body.as_bytes())
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_error)
}

pub fn parse_cells_csv(text: &str) -> Result<Vec<CellRecord>> {
    parse_csv(text, CELLS_SCHEMA)
}

pub fn parse_aggregate_csv(text: &str) -> Result<Vec<AggregateRow>> {
    parse_csv(text, AGGREGATE_SCHEMA)
}

/// A CSV file that starts with a schema line and is flushed after every batch.
struct CsvSink {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvSink {
    fn create(path: PathBuf, schema: &str) -> Result<Self> {
        let mut file = File::create(&path)
            .map(BufWriter::new)
            .map_err(|e| Error::io(&path, e))?;
        writeln!(file, "{schema}").map_err(|e| Error::io(&path, e))?;
        Ok(Self {
            writer: csv::Writer::from_writer(file),
            path,
        })
    }

    fn write_all<T: Serialize>(&mut self, rows: impl IntoIterator<Item = T>) -> Result<()> {
        for row in rows {
            self.writer.serialize(row).map_err(|e| self.error(e))?;
        }
        self.writer.flush().map_err(|e| Error::io(&self.path, e))
    }

    fn error(&self, e: csv::Error) -> Error {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(&self.path, io),
            other => Error::Config(format!("cannot serialize row: {other:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridReport {
    pub cells: Vec<CellResult>,
    pub aggregates: Vec<AggregateRow>,
    pub output_dir: PathBuf,
}

impl GridReport {
    pub fn failed(&self) -> impl Iterator<Item = &CellResult> {
        self.cells
            .iter()
            .filter(|c| c.record.status != CellStatus::Ok)
    }

    pub fn all_failed(&self) -> bool {
        self.failed().count() == self.cells.len()
    }

    pub fn cells_path(&self) -> PathBuf {
        self.output_dir.join(CELLS_FILE)
    }

    pub fn aggregate_path(&self) -> PathBuf {
        self.output_dir.join(AGGREGATE_FILE)
    }
}

/// Artifact file stem of one cell.
pub fn cell_stem(image_id: &str, strategy: Strategy, sr: f64, c: f64, run: usize) -> String {
    format!("{image_id}_{strategy}_sr{sr}_c{c}_run{run}")
}

struct CellContext<'a> {
    h: &'a HadamardMatrix,
    solver: SolverConfig,
    base_seed: u64,
    images_dir: Option<PathBuf>,
    traces_dir: Option<PathBuf>,
}

/// Work unit: all noise levels and runs of one `(image, strategy, SR)`.
struct Chunk<'a> {
    image_id: &'a str,
    image: &'a GrayImage,
    ordering: Arc<RowOrdering>,
    sampling_ratio: f64,
}

fn run_cell(ctx: &CellContext, chunk: &Chunk, noise_c: f64, run: usize) -> Result<CellResult> {
    let start = Instant::now();
    let strategy = chunk.ordering.strategy();
    let sr = chunk.sampling_ratio;
    let seed = derive_cell_seed(ctx.base_seed, chunk.image_id, strategy, sr, noise_c, run);
    let m = measurement_count(chunk.ordering.len(), sr)?;
    let mut record = CellRecord {
        image_id: chunk.image_id.to_string(),
        strategy,
        sampling_ratio: sr,
        noise_c,
        run,
        m,
        seed,
        ssim: None,
        psnr: None,
        iterations: None,
        converged: false,
        status: CellStatus::Ok,
    };
    let outcome = acquire(chunk.image, ctx.h, &chunk.ordering, sr, noise_c, seed)
        .and_then(|ms| reconstruct(&ms, ctx.h, &ctx.solver));
    let mut error = None;
    match outcome {
        Ok(rec) => {
            record.ssim = Some(ssim(chunk.image, &rec.image)?);
            record.psnr = Some(psnr(chunk.image, &rec.image)?);
            record.iterations = Some(rec.outer_iterations);
            record.converged = rec.converged;
            let stem = cell_stem(chunk.image_id, strategy, sr, noise_c, run);
            if let Some(dir) = &ctx.images_dir {
                save_png(&rec.image, &dir.join(format!("{stem}.png")))?;
            }
            if let Some(dir) = &ctx.traces_dir {
                let path = dir.join(format!("{stem}.csv"));
                let mut w = BufWriter::new(File::create(&path).map_err(|e| Error::io(&path, e))?);
                write_trace_csv(&rec.trace, &mut w)
                    .and_then(|_| w.flush())
                    .map_err(|e| Error::io(&path, e))?;
            }
        }
        Err(e) => {
            record.status = match e {
                Error::Diverged { .. } => CellStatus::Diverged,
                _ => CellStatus::Failed,
            };
            error = Some(e.to_string());
        }
    }
    Ok(CellResult {
        record,
        wall_time: start.elapsed(),
        error,
    })
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Runs every cell of `grid` and writes `cells.csv`, `timings.csv` and
/// `aggregate.csv` (plus optional images and traces) under the output directory.
///
/// Cells are computed in parallel but written in cell-key order (image,
/// strategy, SR, c, run), each `(image, strategy, SR)` block flushed as soon as
/// all blocks before it are done. Per-cell solver failures are recorded in the
/// status column; I/O errors abort the run.
pub fn run_grid(grid: &ExperimentGrid, opts: &OutputOptions) -> Result<GridReport> {
    grid.validate()?;
    for img in &grid.images {
        let id = img.id();
        if id.contains([',', '\n', '\r', '"']) {
            return Err(Error::Config(format!(
                "image id {id:?} contains characters not allowed in CSV fields"
            )));
        }
    }
    let out = &opts.output_dir;
    create_dir(out)?;
    let images_dir = opts.write_images.then(|| out.join(IMAGES_DIR));
    let traces_dir = opts.write_traces.then(|| out.join(TRACES_DIR));
    for dir in images_dir.iter().chain(&traces_dir) {
        create_dir(dir)?;
    }

    let ids: Vec<String> = grid.images.iter().map(|s| s.id()).collect();
    let images: Vec<GrayImage> = grid
        .images
        .iter()
        .map(|s| s.load(grid.side))
        .collect::<Result<_>>()?;
    if let Some(dir) = &images_dir {
        for (id, img) in ids.iter().zip(&images) {
            save_png(img, &dir.join(format!("{id}_reference.png")))?;
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;

    let k = 2 * grid.side.trailing_zeros();
    let h = build_hadamard(k)?;
    let cache = OrderingCache::new(&h);
    let orderings: Vec<Arc<RowOrdering>> = pool.install(|| {
        grid.strategies
            .iter()
            .map(|&s| cache.get(s))
            .collect::<Result<_>>()
    })?;

    let mut chunks = Vec::new();
    for (id, img) in ids.iter().zip(&images) {
        for ordering in &orderings {
            for &sr in &grid.sampling_ratios {
                chunks.push(Chunk {
                    image_id: id,
                    image: img,
                    ordering: Arc::clone(ordering),
                    sampling_ratio: sr,
                });
            }
        }
    }

    let ctx = CellContext {
        h: &h,
        solver: SolverConfig {
            record_trace: grid.solver.record_trace || opts.write_traces,
            ..grid.solver
        },
        base_seed: grid.base_seed,
        images_dir,
        traces_dir,
    };
    let mut cells_csv = CsvSink::create(out.join(CELLS_FILE), CELLS_SCHEMA)?;
    let mut timings_csv = CsvSink::create(out.join(TIMINGS_FILE), TIMINGS_SCHEMA)?;
    let mut write_batch = |rows: &[CellResult]| -> Result<()> {
        cells_csv.write_all(rows.iter().map(|r| &r.record))?;
        timings_csv.write_all(rows.iter().map(|r| TimingRow {
            image: &r.record.image_id,
            strategy: r.record.strategy,
            sr: r.record.sampling_ratio,
            c: r.record.noise_c,
            run: r.record.run,
            wall_time_s: r.wall_time.as_secs_f64(),
        }))
    };
    let abort = AtomicBool::new(false);
    let mut results: Vec<CellResult> = Vec::with_capacity(grid.cell_count());

    let run_chunk = |chunk: &Chunk| -> Result<Vec<CellResult>> {
        let mut rows = Vec::with_capacity(grid.noise_levels.len() * grid.runs);
        for &c in &grid.noise_levels {
            for run in 0..grid.runs {
                if abort.load(AtomicOrdering::Relaxed) {
                    return Ok(rows);
                }
                rows.push(run_cell(&ctx, chunk, c, run)?);
            }
        }
        Ok(rows)
    };

    let mut first_error: Option<Error> = None;
    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<(usize, Result<Vec<CellResult>>)>();
        let chunks = &chunks;
        let pool = &pool;
        let run_chunk = &run_chunk;
        scope.spawn(move || {
            pool.install(|| {
                chunks
                    .par_iter()
                    .enumerate()
                    .for_each_with(tx, |tx, (i, chunk)| {
                        let _ = tx.send((i, run_chunk(chunk)));
                    })
            })
        });
        let mut pending = BTreeMap::new();
        let mut next = 0;
        for (i, res) in rx {
            pending.insert(i, res);
            while let Some(res) = pending.remove(&next) {
                next += 1;
                if first_error.is_some() {
                    continue;
                }
                match res.and_then(|rows| write_batch(&rows).map(|_| rows)) {
                    Ok(rows) => results.extend(rows),
                    Err(e) => {
                        abort.store(true, AtomicOrdering::Relaxed);
                        first_error = Some(e);
                    }
                }
            }
        }
    });
    if let Some(e) = first_error {
        return Err(e);
    }

    let records: Vec<CellRecord> = results.iter().map(|r| r.record.clone()).collect();
    let aggregates = aggregate(&records);
    CsvSink::create(out.join(AGGREGATE_FILE), AGGREGATE_SCHEMA)?.write_all(&aggregates)?;

    Ok(GridReport {
        cells: results,
        aggregates,
        output_dir: out.clone(),
    })
}

/// Writes the permutation of `strategy` on `H_{2^k}` as one natural index per line.
pub fn export_ordering(strategy: Strategy, k: u32, path: &Path) -> Result<RowOrdering> {
    let h = build_hadamard(k)?;
    let ordering = order_rows(&h, strategy)?;
    ordering.save(path)?;
    Ok(ordering)
}
