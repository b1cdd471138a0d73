//! Simulation toolkit for compressive single-pixel imaging with Hadamard patterns.
//!
//! The crate covers the whole acquisition/reconstruction loop:
//!
//! * [`hadamard`]: Sylvester Hadamard matrices, Walsh rows, column-major reshaping
//!   and the fast Walsh-Hadamard transform.
//! * [`orderings`]: per-pattern scores and the cake-cutting, total-gradient,
//!   ascending-scale and ascending-inertia row orderings.
//! * [`sampling`]: row selection by sampling ratio, projection and the proportional
//!   Gaussian noise model.
//! * [`tv`]: total-variation reconstruction by an augmented-Lagrangian,
//!   alternating-direction scheme.
//! * [`metrics`]: global SSIM and PSNR.
//! * [`harness`]: image ingestion and the seeded experiment grid with CSV outputs.

pub mod error;
pub mod gray;
pub mod hadamard;
pub mod harness;
pub mod metrics;
pub mod orderings;
pub mod sampling;
pub mod tv;

pub use error::{Error, Result};
pub use gray::GrayImage;
pub use hadamard::{build_hadamard, HadamardMatrix, Pattern2D};
pub use orderings::{order_rows, RowOrdering, Strategy};
pub use sampling::{MeasurementSet, SensingConfig};
pub use tv::{reconstruct, ReconstructionResult, SolverConfig};
