//! Exact meridian geometry of every domain family, with tagged boundaries.
//!
//! A domain of revolution about the `z`-axis is described by its meridian: a
//! closed, positively oriented chain of segments and arcs in the half-plane
//! `ρ ≥ 0`. Pieces lying on `ρ = 0` are tagged [`BoundaryTag::Axis`]; all
//! other pieces carry the Steklov condition. For `dim = 2` the same chain is
//! read as one half of a planar domain symmetric about the `z`-axis.

mod fillet;
pub mod geometry;
mod validate;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use geometry::{BoundaryTag, Curve, Piece, Point};
pub use validate::{validate_domain, Diagnostics, Issue};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Family {
    Ball,
    Annulus { eps: f64 },
    BallTube { eps: f64, delta: f64 },
    Necklace { l: usize, eps: f64, base: NecklaceBase },
}

/// Building block of a necklace: plain unit balls, or ball-tube copies whose
/// inner balls and tubes sit on the shared axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum NecklaceBase {
    Ball,
    BallTube { eps: f64, delta: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub family: Family,
    pub dim: usize,
    pub meridian: Vec<Piece>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corner_fillet: Option<f64>,
    /// Corner points (tube junctions, necks) around which meshes are graded.
    #[serde(default)]
    pub features: Vec<Point>,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "meridian domains exist for dimension 2 or 3, got {dim}"
        )))
    }
}

fn geometry(msg: impl Into<String>) -> Error {
    Error::Geometry(msg.into())
}

fn origin() -> Point {
    Point::new(0.0, 0.0)
}

/// Corner points between two Steklov pieces where the tangent jumps.
fn steklov_corners(chain: &[Piece]) -> Vec<Point> {
    let n = chain.len();
    (0..n)
        .filter_map(|i| {
            let a = &chain[i];
            let b = &chain[(i + 1) % n];
            if a.tag != BoundaryTag::Steklov || b.tag != BoundaryTag::Steklov {
                return None;
            }
            let t_in = a.curve.tangent_at(1.0);
            let t_out = b.curve.tangent_at(0.0);
            (t_in.cross(t_out).abs() > 1e-9 || t_in.dot(t_out) < 0.0).then(|| a.curve.end())
        })
        .collect()
}

impl DomainSpec {
    fn from_chain(family: Family, dim: usize, meridian: Vec<Piece>) -> Result<Self> {
        check_dim(dim)?;
        let features = steklov_corners(&meridian);
        let spec = DomainSpec { family, dim, meridian, corner_fillet: None, features };
        let diag = validate_domain(&spec);
        if !diag.ok {
            return Err(geometry(diag.summary()));
        }
        Ok(spec)
    }

    /// Half-disc meridian of the unit ball.
    pub fn ball(dim: usize) -> Result<Self> {
        let (s, n) = (Point::new(0.0, -1.0), Point::new(0.0, 1.0));
        let chain = vec![
            Piece::steklov(Curve::arc(origin(), 1.0, s, n, true)),
            Piece::axis(n, s),
        ];
        Self::from_chain(Family::Ball, dim, chain)
    }

    /// Half-annulus meridian of `B ∖ B_ε`.
    pub fn annulus(dim: usize, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(geometry(format!("annulus inner radius must lie in (0,1), got {eps}")));
        }
        let chain = vec![
            Piece::steklov(Curve::arc(origin(), 1.0, Point::new(0.0, -1.0), Point::new(0.0, 1.0), true)),
            Piece::axis(Point::new(0.0, 1.0), Point::new(0.0, eps)),
            Piece::steklov(Curve::arc(origin(), eps, Point::new(0.0, eps), Point::new(0.0, -eps), false)),
            Piece::axis(Point::new(0.0, -eps), Point::new(0.0, -1.0)),
        ];
        Self::from_chain(Family::Annulus { eps }, dim, chain)
    }

    /// `B ∖ B_ε` with the tube `{ρ < δ, z > 0}` removed.
    ///
    /// The outer sphere is split at the equator so that arcs never span more
    /// than a quarter turn from the tube exit.
    pub fn ball_tube(dim: usize, eps: f64, delta: f64) -> Result<Self> {
        if !(0.0 < delta && delta < eps && eps < 1.0) {
            return Err(geometry(format!(
                "ball-tube needs 0 < delta < eps < 1 (eps={eps}, delta={delta})"
            )));
        }
        let outer_top = Point::new(delta, (1.0 - delta * delta).sqrt());
        let inner_top = Point::new(delta, (eps * eps - delta * delta).sqrt());
        let chain = vec![
            Piece::steklov(Curve::arc(origin(), 1.0, Point::new(0.0, -1.0), Point::new(1.0, 0.0), true)),
            Piece::steklov(Curve::arc(origin(), 1.0, Point::new(1.0, 0.0), outer_top, true)),
            Piece::steklov(Curve::segment(outer_top, inner_top)),
            Piece::steklov(Curve::arc(origin(), eps, inner_top, Point::new(0.0, -eps), false)),
            Piece::axis(Point::new(0.0, -eps), Point::new(0.0, -1.0)),
        ];
        Self::from_chain(Family::BallTube { eps, delta }, dim, chain)
    }

    /// `l` unit balls centred at `z_i = i(2 − ε²)`, adjacent balls overlapping
    /// to depth `ε²` along the axis.
    pub fn necklace(dim: usize, l: usize, eps: f64, base: NecklaceBase) -> Result<Self> {
        if l < 2 {
            return Err(geometry(format!("a necklace needs at least two balls, got {l}")));
        }
        if !(eps > 0.0 && eps < 0.9) {
            return Err(geometry(format!("necklace overlap parameter must lie in (0, 0.9), got {eps}")));
        }
        let neck = neck_radius(eps);
        let spacing = 2.0 - eps * eps;
        let half = 1.0 - eps * eps / 2.0;
        let family = Family::Necklace { l, eps, base };
        match base {
            NecklaceBase::Ball => {
                let mut chain = Vec::with_capacity(l + 1);
                for i in 0..l {
                    let c = Point::new(0.0, i as f64 * spacing);
                    let start = if i == 0 { Point::new(0.0, c.z - 1.0) } else { Point::new(neck, c.z - half) };
                    let end = if i + 1 == l { Point::new(0.0, c.z + 1.0) } else { Point::new(neck, c.z + half) };
                    chain.push(Piece::steklov(Curve::arc(c, 1.0, start, end, true)));
                }
                let top = (l - 1) as f64 * spacing + 1.0;
                chain.push(Piece::axis(Point::new(0.0, top), Point::new(0.0, -1.0)));
                Self::from_chain(family, dim, chain)
            }
            NecklaceBase::BallTube { eps: e2, delta } => {
                if !(0.0 < delta && delta < e2 && e2 < 1.0) {
                    return Err(geometry(format!(
                        "ball-tube base needs 0 < delta < eps < 1 (eps={e2}, delta={delta})"
                    )));
                }
                if delta >= neck {
                    return Err(geometry(format!(
                        "tube radius {delta} must be smaller than the neck radius {neck:.6}"
                    )));
                }
                if e2 >= 1.0 - eps * eps {
                    return Err(geometry(format!(
                        "inner ball radius {e2} reaches the neck region (limit {})",
                        1.0 - eps * eps
                    )));
                }
                if l != 2 {
                    return Err(geometry(
                        "ball-tube necklaces are limited to two balls: an interior ball has \
                         no outward axis direction for its tube that avoids both necks",
                    ));
                }
                Self::from_chain(family, dim, two_ball_tube_chain(eps, e2, delta))
            }
        }
    }

    /// Rebuilds the domain with every Steklov corner rounded by radius `r`.
    pub fn with_fillet(&self, r: f64) -> Result<Self> {
        if !(r >= 0.0) {
            return Err(geometry("fillet radius must be nonnegative"));
        }
        if r == 0.0 {
            return Ok(DomainSpec { corner_fillet: Some(0.0), ..self.clone() });
        }
        let meridian = fillet::round_corners(&self.meridian, r)?;
        let spec = DomainSpec { meridian, corner_fillet: Some(r), ..self.clone() };
        let diag = validate_domain(&spec);
        if !diag.ok {
            return Err(geometry(format!("fillet radius {r} is infeasible: {}", diag.summary())));
        }
        Ok(spec)
    }

    /// Thinnest geometric feature a mesh must resolve.
    pub fn feature_size(&self) -> Option<f64> {
        match self.family {
            Family::Ball => None,
            Family::Annulus { eps } => Some(eps),
            Family::BallTube { delta, .. } => Some(delta),
            Family::Necklace { eps, base, .. } => {
                let neck = neck_radius(eps);
                Some(match base {
                    NecklaceBase::Ball => neck,
                    NecklaceBase::BallTube { delta, .. } => neck.min(delta),
                })
            }
        }
    }

    /// `|∂Ω|`: `2π ∫ ρ ds` over Steklov pieces for `dim = 3`; twice the
    /// Steklov chain length for `dim = 2`, where the chain is half the boundary.
    pub fn boundary_measure(&self) -> f64 {
        let steklov = self.meridian.iter().filter(|p| p.tag == BoundaryTag::Steklov);
        if self.dim == 3 {
            2.0 * PI * steklov.map(|p| p.curve.rho_moment()).sum::<f64>()
        } else {
            2.0 * steklov.map(|p| p.curve.length()).sum::<f64>()
        }
    }

    /// Area of the meridian region (half the planar area when `dim = 2`).
    pub fn meridian_area(&self) -> f64 {
        self.meridian.iter().map(|p| p.curve.area_term()).sum()
    }

    /// Number of connected components of the domain.
    pub fn components(&self) -> usize {
        1
    }

    pub fn steklov_pieces(&self) -> usize {
        self.meridian.iter().filter(|p| p.tag == BoundaryTag::Steklov).count()
    }

    pub fn axis_pieces(&self) -> usize {
        self.meridian.iter().filter(|p| p.tag == BoundaryTag::Axis).count()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses and re-validates a serialized domain.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: DomainSpec = serde_json::from_str(text)?;
        check_dim(spec.dim)?;
        let diag = validate_domain(&spec);
        if !diag.ok {
            return Err(geometry(diag.summary()));
        }
        Ok(spec)
    }
}

/// Meridian radius of the circle where two unit balls at distance `2 − ε²` meet.
pub fn neck_radius(eps: f64) -> f64 {
    (eps * eps - eps.powi(4) / 4.0).sqrt()
}

/// Two overlapping ball-tube copies: the lower copy's tube runs down the
/// axis, the upper copy's tube runs up, and the inner balls are joined along
/// the axis between them.
fn two_ball_tube_chain(eps: f64, e2: f64, delta: f64) -> Vec<Piece> {
    let neck = neck_radius(eps);
    let z1 = 2.0 - eps * eps;
    let half = 1.0 - eps * eps / 2.0;
    let out = (1.0 - delta * delta).sqrt();
    let inn = (e2 * e2 - delta * delta).sqrt();
    let c0 = Point::new(0.0, 0.0);
    let c1 = Point::new(0.0, z1);
    vec![
        Piece::steklov(Curve::arc(c0, 1.0, Point::new(delta, -out), Point::new(neck, half), true)),
        Piece::steklov(Curve::arc(c1, 1.0, Point::new(neck, z1 - half), Point::new(delta, z1 + out), true)),
        Piece::steklov(Curve::segment(Point::new(delta, z1 + out), Point::new(delta, z1 + inn))),
        Piece::steklov(Curve::arc(c1, e2, Point::new(delta, z1 + inn), Point::new(0.0, z1 - e2), false)),
        Piece::axis(Point::new(0.0, z1 - e2), Point::new(0.0, e2)),
        Piece::steklov(Curve::arc(c0, e2, Point::new(0.0, e2), Point::new(delta, -inn), false)),
        Piece::steklov(Curve::segment(Point::new(delta, -inn), Point::new(delta, -out))),
    ]
}
