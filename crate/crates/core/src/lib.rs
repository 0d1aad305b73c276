//! Attractors of generalized iterated function systems (GIFS) on `[0, D]^M`.
//!
//! A GIFS of order `p` is a finite family of contractions
//! `f_i : ([0, D]^M)^p -> [0, D]^M`. Its attractor is the unique nonempty
//! compact set `A` with `A = f_1(A, ..., A) ∪ ... ∪ f_L(A, ..., A)`.
//!
//! The crate provides the plain fixed-point iteration ([`deterministic_run`]),
//! the lattice-snapping grid iteration ([`grid_run`]) with error schedules
//! and certificates, exact Hausdorff distances, cost models, a small text
//! format for systems and a PPM renderer.

pub mod affine;
pub mod algorithms;
pub mod complexity;
pub mod error;
pub mod metrics;
pub mod pointset;
pub mod render;
pub mod schedule;
pub mod sysio;
pub mod system;

pub use affine::AffineMap;
pub use algorithms::{
    deterministic_run, fractal_step, g_step, grid_run, grid_step, memory_p_run, snap, snapping_gap, GapCertificate,
    RunOutcome, RunStats, RunStatus, SnapMode, StepStats, DEFAULT_TUPLE_BUDGET,
};
pub use error::{AlgoError, CostError, FormatError, MetricError, RenderError, ScheduleError, SystemError};
pub use metrics::{directed_distance, hausdorff, DistanceReport};
pub use pointset::{Lattice, PointSet};
pub use render::{rasterize, write_ppm, Raster};
pub use schedule::{error_bound, optimal_plan, GridSchedule, OptimalPlan};
pub use sysio::{builtin, parse_document, parse_system, Example, SystemDocument};
pub use system::{GifsSystem, RangePolicy};
