//! Shared fixtures for the pipeline benchmarks.

use steklov_core::mesh::{triangulate, Mesh};
use steklov_core::DomainSpec;

/// Unit ball meridian meshed at size `h`.
pub fn ball_mesh(h: f64) -> Mesh {
    triangulate(&DomainSpec::ball(3).expect("ball"), h, 1.0).expect("ball mesh")
}

/// Ball-tube domain at a witness-like parameter point.
pub fn witness_domain() -> DomainSpec {
    DomainSpec::ball_tube(3, 0.15, 0.0075).expect("ball-tube")
}
