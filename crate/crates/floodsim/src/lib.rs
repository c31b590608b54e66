//! Coupled 1D channel / 2D floodplain shallow-water solver.
//!
//! The channel is modelled with the 1D Saint-Venant equations (wetted area
//! and frontal discharge) solved by a quasi-linear Roe scheme, the floodplain
//! with the 2D shallow-water equations solved by a well-balanced HLL /
//! hydrostatic-reconstruction finite-volume scheme. The two are coupled
//! horizontally: the 1D model receives a discrete source term assembled from
//! the 2D numerical fluxes through the channel's lateral boundaries, and the
//! channel carries two per-cell lateral discharges (one per side) evolved by
//! a subcell scheme so that flooding does not force a spurious zero lateral
//! velocity inside the channel.
//!
//! Three run modes are provided:
//! - `full2d`: the whole domain, channel included, as one 2D simulation
//!   (reference solution);
//! - `hcm`: the horizontal coupling with lateral-discharge recovery;
//! - `fbm`: the flux-based baseline (same coupling fluxes, lateral
//!   discharges pinned to zero).

pub mod cases;
pub mod config;
pub mod coupling;
pub mod geometry;
pub mod lateral;
pub mod mesh;
pub mod output;
pub mod sim;
pub mod solver1d;
pub mod solver2d;
pub mod stoker;
pub mod verify;

pub use geometry::{ChannelCrossSection, SectionState};
pub use mesh::{ChannelGrid1D, CoupledMesh, EdgeAdjacency, Grid2D};
pub use sim::{Mode, ProbeRecord, RunResult, Sim, SimConfig};
pub use solver2d::State2D;

/// Gravitational acceleration, m/s^2.
pub const GRAVITY: f64 = 9.81;

/// Depth below which a 2D cell (or channel depth) is treated as dry:
/// velocities are taken as zero and dry branches apply.
pub const DRY_DEPTH: f64 = 1e-8;

/// Depths more negative than this abort the run as a CFL violation;
/// anything in (-NEGATIVE_DEPTH_TOL, 0) is treated as roundoff and clipped.
pub const NEGATIVE_DEPTH_TOL: f64 = 1e-12;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("mesh build failed: {0}")]
    MeshBuild(String),
    #[error("friction slope undefined on a dry section with nonzero discharge")]
    DryFriction,
    #[error("negative depth {depth:.3e} in {location} after update; time step violates CFL")]
    CflViolation { location: String, depth: f64 },
    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("unknown test case id {0} (expected 1, 2 or 3)")]
    UnknownCase(u32),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
