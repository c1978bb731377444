//! Steklov spectra of balls, annuli, ball-tube and necklace domains.
//!
//! The crate pairs closed-form spectra ([`analytic`]) with an axisymmetric
//! finite-element pipeline: exact meridian geometry ([`domain`]), quality
//! triangulation ([`mesh`]), per-Fourier-mode pencils ([`fem`]), a boundary
//! Schur-complement eigensolver ([`eigen`], [`solver`]), and convergence
//! studies built on top ([`experiments`]). [`io`] holds run configuration and
//! the result cache.

pub mod analytic;
pub mod domain;
pub mod eigen;
pub mod error;
pub mod experiments;
pub mod fem;
pub mod io;
pub mod mesh;
pub mod solver;
pub mod spectrum;

pub use analytic::CutoffSpec;
pub use domain::{BoundaryTag, DomainSpec, Family, NecklaceBase};

pub use error::{Error, Result};

pub use eigen::BoundaryPencil;
pub use experiments::{StudyKind, StudyReport};
pub use fem::{Mode, ModePencil};
pub use io::RunConfig;
pub use mesh::Mesh;
pub use solver::{SolveResult, SolverConfig};

pub use spectrum::Spectrum;

/// Version string embedded in every artifact written to disk.
pub const VERSION: &str = concat!("steklov ", env!("CARGO_PKG_VERSION"));
