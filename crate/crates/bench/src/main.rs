//! `spi-bench`: runs single-pixel imaging experiment grids, exports row
//! orderings and scores image pairs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spi_core::harness::imageio::load_gray;
use spi_core::harness::{export_ordering, run_grid, GridConfig};
use spi_core::metrics::{psnr, ssim_global, SsimConstants};
use spi_core::{Error, Strategy};

#[derive(Debug, Parser)]
#[command(
    name = "spi-bench",
    version,
    about = "Single-pixel imaging ordering benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment grid described by a TOML file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Shrink to 64x64 images, sampling ratios 0.05/0.1/0.2 and 3 runs.
        #[arg(long)]
        desk: bool,
        /// Output directory (overrides the config file).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (overrides the config file; 0 = all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Skip the per-cell reconstruction PNGs.
        #[arg(long)]
        no_images: bool,
    },
    /// Write a row ordering of H_{2^k}, one natural index per line.
    Order {
        #[arg(long)]
        strategy: Strategy,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print SSIM (with its l, c, s factors) and PSNR of a test image against a reference.
    Metrics {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        test: PathBuf,
    },
}

enum Failure {
    Error(Error),
    AllCellsFailed,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } | Error::Format { .. } => 2,
        _ => 1,
    }
}

fn run(
    config: &Path,
    desk: bool,
    out: Option<PathBuf>,
    workers: Option<usize>,
    no_images: bool,
) -> Result<(), Failure> {
    let cfg = GridConfig::load(config)?;
    let base = config.parent().unwrap_or(Path::new("."));
    let (mut grid, mut opts) = cfg.resolve(base)?;
    if desk {
        grid = grid.desk();
    }
    if let Some(dir) = out {
        opts.output_dir = dir;
    }
    if let Some(n) = workers {
        opts.workers = n;
    }
    if no_images {
        opts.write_images = false;
    }
    eprintln!(
        "running {} cells ({} images, {} strategies, side {}) into {}",
        grid.cell_count(),
        grid.images.len(),
        grid.strategies.len(),
        grid.side,
        opts.output_dir.display()
    );
    let report = run_grid(&grid, &opts)?;
    for cell in report.failed() {
        let r = &cell.record;
        eprintln!(
            "cell {} {} sr={} c={} run={} {}: {}",
            r.image_id,
            r.strategy,
            r.sampling_ratio,
            r.noise_c,
            r.run,
            r.status.as_str(),
            cell.error.as_deref().unwrap_or("")
        );
    }
    println!("strategy\tsr\tc\tcells\tssim\t\tpsnr");
    for a in &report.aggregates {
        println!(
            "{}\t{}\t{}\t{}\t{:.4}±{:.4}\t{:.2}±{:.2}",
            a.strategy,
            a.sampling_ratio,
            a.noise_c,
            a.cells,
            a.ssim_mean,
            a.ssim_std,
            a.psnr_mean,
            a.psnr_std
        );
    }
    println!("cells: {}", report.cells_path().display());
    println!("aggregate: {}", report.aggregate_path().display());
    if report.all_failed() {
        return Err(Failure::AllCellsFailed);
    }
    Ok(())
}

fn metrics(reference: &Path, test: &Path) -> Result<(), Failure> {
    let a = load_gray(reference)?;
    let b = load_gray(test)?;
    let s = ssim_global(&a, &b, &SsimConstants::default())?;
    println!("ssim\t{}", s.ssim);
    println!("luminance\t{}", s.luminance);
    println!("contrast\t{}", s.contrast);
    println!("structure\t{}", s.structure);
    println!("psnr\t{}", psnr(&a, &b)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Run {
            config,
            desk,
            out,
            workers,
            no_images,
        } => run(&config, desk, out, workers, no_images),
        Command::Order { strategy, k, out } => export_ordering(strategy, k, &out)
            .map(|o| println!("wrote {} indices to {}", o.len(), out.display()))
            .map_err(Failure::from),
        Command::Metrics { reference, test } => metrics(&reference, &test),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::AllCellsFailed) => {
            eprintln!("error: every grid cell failed");
            ExitCode::from(3)
        }
    }
}
