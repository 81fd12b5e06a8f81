//! Phase-field simulation of the Allen-Cahn equation with geometric-measure
//! diagnostics.
//!
//! The library evolves `∂t u = Δu − f(u)/ε²` on rectilinear grids (Neumann
//! boxes or flat tori), builds the associated energy and discrepancy
//! densities, and measures them against the quantities that control the
//! sharp-interface limit: backward-Gaussian integrals, their supremum over
//! centers and scales (the entropy), volume-growth ratios, and
//! codimension-one densities.
//!
//! Modules follow the pipeline:
//!
//! * [`grid`] — grids, fields, stencils, quadrature
//! * [`potential`] — double-well potentials and the 1D standing wave
//! * [`dynamics`] — explicit time stepping with stability control
//! * [`measures`] — energy/discrepancy densities and their sign checks
//! * [`kernel`] — backward heat kernels (free and wrapped)
//! * [`entropy`] — Gaussian-density suprema, monotonicity and growth checks
//! * [`density`] — codimension-one density probes and unit-density verdicts
//! * [`scenarios`] — well-prepared initial data and reference solutions
//! * [`io`] — binary/CSV field snapshots

pub mod density;
pub mod dynamics;
pub mod entropy;
pub mod grid;
pub mod io;
pub mod kernel;
pub mod measures;
pub mod potential;
pub mod quad;
pub mod report;
pub mod scenarios;

pub use grid::{GridSpec, ScalarField, Topology};
pub use potential::Potential;
pub use report::CheckVerdict;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("step size {dt} exceeds stability limit {limit}")]
    Unstable { dt: f64, limit: f64 },
    #[error("non-finite value produced at cell {index}")]
    NonFinite { index: usize },
    #[error("energy constant routes disagree: standing-wave quadrature {wave} vs well integral {well}")]
    EnergyRoutesDisagree { wave: f64, well: f64 },
    #[error("growth bound violated: sup x^2 F(q(x)) = {supremum} exceeds {bound}")]
    GrowthBound { supremum: f64, bound: f64 },
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("no interface: field does not change sign")]
    Extinct,
    #[error("initial data failed its sign guarantee: max discrepancy {max}")]
    IllPrepared { max: f64 },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed snapshot: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
