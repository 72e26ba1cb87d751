//! Design optimization: cavity structure search, lens placement, worst-case
//! distance, functional parameters and the power-rate boundary.

mod baseline;
mod cavity;
mod config;
mod functional;
mod link;
pub mod monte_carlo;
mod placement;
pub mod rng;
mod tradeoff;
mod worst_distance;

use serde::Serialize;

pub use baseline::{symmetric_baseline, SymmetricBaseline};
pub use cavity::optimize_cavity_mc;
pub use config::{OptimizerConfig, FULL_BUDGET_SAMPLES};
pub use functional::{grid_oracle, optimize_functional, FunctionalObjective, FunctionalOptimum};
pub use link::{evaluate_link, linspace, sweep_distance, LinkPerformance};
pub use monte_carlo::{IterationRecord, SearchOutcome, WindowSearch};
pub use placement::{optimize_placement, POLISH_STEP};
pub use tradeoff::{thickness_grid, tradeoff_boundary, BoundaryPoint};
pub use worst_distance::{find_worst_distance, WorstDistance};

use crate::optics::CavityGeometry;

/// Result of a structure search, optionally carrying functional parameters
/// and a power-rate boundary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignReport {
    pub v_star: CavityGeometry,
    /// `(a_g, R_M2)`
    pub m_star: Option<(f64, f64)>,
    /// `w00(z_g)` minimum [m] for structure searches, `eta_trans` otherwise.
    pub objective: f64,
    pub d_m: Option<f64>,
    pub samples: u64,
    pub iterations: u32,
    pub seed: u64,
    pub boundary: Vec<BoundaryPoint>,
    pub history: Vec<IterationRecord>,
}
