//! Experiment harness: image ingestion, bundled test scenes and the seeded
//! strategy x sampling-ratio x noise x run grid with its CSV outputs.

pub mod config;
pub mod grid;
pub mod imageio;
pub mod scenes;

pub use config::{ExperimentGrid, GridConfig, ImageSource, OutputOptions};
pub use grid::{
    aggregate, export_ordering, parse_aggregate_csv, parse_cells_csv, run_grid, AggregateRow,
    CellRecord, CellResult, CellStatus, GridReport, OrderingCache,
};
pub use imageio::load_and_normalize;
pub use scenes::Scene;
