use std::path::Path;

use spi_core::harness::scenes::Scene;
use spi_core::harness::{
    aggregate, export_ordering, parse_aggregate_csv, parse_cells_csv, run_grid, ExperimentGrid,
    ImageSource, OutputOptions,
};
use spi_core::{SolverConfig, Strategy};

fn grid(side: usize, srs: &[f64], cs: &[f64], runs: usize) -> ExperimentGrid {
    ExperimentGrid {
        images: vec![ImageSource::Bundled(Scene::Cameraman)],
        side,
        strategies: Strategy::ALL.to_vec(),
        sampling_ratios: srs.to_vec(),
        noise_levels: cs.to_vec(),
        runs,
        base_seed: 11,
        solver: SolverConfig::default(),
    }
}

fn quiet(dir: &Path) -> OutputOptions {
    OutputOptions {
        write_images: false,
        ..OutputOptions::new(dir)
    }
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn full_sampling_without_noise_is_exact_for_every_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_grid(&grid(16, &[1.0], &[0.0], 1), &quiet(dir.path())).unwrap();
    assert_eq!(report.aggregates.len(), Strategy::ALL.len());
    for row in &report.aggregates {
        assert!(
            (row.ssim_mean - 1.0).abs() < 1e-6,
            "{}: {}",
            row.strategy,
            row.ssim_mean
        );
        assert!(row.psnr_mean > 60.0, "{}: {}", row.strategy, row.psnr_mean);
    }
}

#[test]
fn noiseless_runs_repeat_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_grid(&grid(16, &[0.2], &[0.0], 3), &quiet(dir.path())).unwrap();
    for row in &report.aggregates {
        assert_eq!(row.cells, 3);
        assert!(row.ssim_std < 1e-12 && row.psnr_std < 1e-9);
    }
    for chunk in report.cells.chunks(3) {
        assert!(chunk.iter().all(|c| c.record.run < 3));
        let first = &chunk[0].record;
        for c in &chunk[1..] {
            assert_eq!((c.record.ssim, c.record.psnr), (first.ssim, first.psnr));
            assert_ne!(c.record.seed, first.seed);
        }
    }
}

#[test]
fn aggregate_file_can_be_recomputed_from_cells() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_grid(&grid(16, &[0.1, 0.3], &[0.0, 0.1], 2), &quiet(dir.path())).unwrap();
    let cells = parse_cells_csv(&read(report.cells_path())).unwrap();
    assert_eq!(cells.len(), 5 * 2 * 2 * 2);
    let written = parse_aggregate_csv(&read(report.aggregate_path())).unwrap();
    let recomputed = aggregate(&cells);
    assert_eq!(written.len(), recomputed.len());
    for (w, r) in written.iter().zip(&recomputed) {
        assert_eq!((w.strategy, w.cells), (r.strategy, r.cells));
        for (a, b) in [
            (w.ssim_mean, r.ssim_mean),
            (w.ssim_std, r.ssim_std),
            (w.psnr_mean, r.psnr_mean),
            (w.psnr_std, r.psnr_std),
        ] {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let g = grid(16, &[0.1, 0.25], &[0.0, 0.5], 2);
    let mut outputs = Vec::new();
    for workers in [1, 3, 1] {
        let dir = tempfile::tempdir().unwrap();
        let opts = OutputOptions {
            workers,
            ..OutputOptions::new(dir.path())
        };
        let report = run_grid(&g, &opts).unwrap();
        outputs.push((read(report.cells_path()), read(report.aggregate_path())));
        assert!(dir
            .path()
            .join("images")
            .join("cameraman_reference.png")
            .is_file());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn file_images_are_loaded_and_named_by_stem() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("ramp.png");
    let ramp = spi_core::GrayImage::from_fn(32, |i, j| (i * 8 + j) as f64 / 2.0);
    spi_core::harness::imageio::save_png(&ramp, &src).unwrap();
    let mut g = grid(16, &[0.5], &[0.0], 1);
    g.images = vec![ImageSource::File(src)];
    g.strategies = vec![Strategy::CakeCutting];
    let report = run_grid(&g, &quiet(&dir.path().join("out"))).unwrap();
    assert_eq!(report.cells[0].record.image_id, "ramp");
    assert!(report.cells[0].record.ssim.unwrap() > 0.9);
}

#[test]
fn ascending_scale_beats_total_gradient_on_cameraman() {
    let dir = tempfile::tempdir().unwrap();
    let mut g = grid(64, &[0.1], &[0.1], 5);
    g.strategies = vec![Strategy::TotalGradient, Strategy::AscendingScale];
    let report = run_grid(&g, &quiet(dir.path())).unwrap();
    let mean = |s| {
        report
            .aggregates
            .iter()
            .find(|r| r.strategy == s)
            .unwrap()
            .ssim_mean
    };
    assert!(
        mean(Strategy::AscendingScale) > mean(Strategy::TotalGradient),
        "AS {} vs TG {}",
        mean(Strategy::AscendingScale),
        mean(Strategy::TotalGradient)
    );
}

#[test]
fn exported_orderings_list_natural_indices() {
    let dir = tempfile::tempdir().unwrap();
    let lines = |s, k| {
        let path = dir.path().join(format!("{s}_{k}.txt"));
        export_ordering(s, k, &path).unwrap();
        read(&path)
            .lines()
            .map(|l| l.trim().parse::<usize>().unwrap())
            .collect::<Vec<_>>()
    };
    assert_eq!(lines(Strategy::Natural, 4), (0..16).collect::<Vec<_>>());
    assert_eq!(lines(Strategy::CakeCutting, 4)[0], 0);
    let as_order = lines(Strategy::AscendingScale, 4);
    let pos = |i| as_order.iter().position(|&r| r == i).unwrap();
    assert!(pos(10) < pos(1) && pos(10) < pos(4));
}

#[test]
fn invalid_grids_are_rejected_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let mut g = grid(12, &[0.1], &[0.0], 1);
    assert!(matches!(
        run_grid(&g, &quiet(&out)),
        Err(spi_core::Error::Config(_))
    ));
    g.side = 16;
    g.noise_levels = vec![-1.0];
    assert!(run_grid(&g, &quiet(&out)).is_err());
    assert!(!out.join("cells.csv").exists());
}
