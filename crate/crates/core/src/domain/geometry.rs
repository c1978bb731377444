use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// A point `(ρ, z)` of the meridian half-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub rho: f64,
    pub z: f64,
}

impl Point {
    pub const fn new(rho: f64, z: f64) -> Self {
        Self { rho, z }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.rho - other.rho).hypot(self.z - other.z)
    }

    pub fn sub(self, o: Point) -> Point {
        Point::new(self.rho - o.rho, self.z - o.z)
    }

    pub fn add(self, o: Point) -> Point {
        Point::new(self.rho + o.rho, self.z + o.z)
    }

    pub fn scale(self, s: f64) -> Point {
        Point::new(self.rho * s, self.z * s)
    }

    pub fn dot(self, o: Point) -> f64 {
        self.rho * o.rho + self.z * o.z
    }

    pub fn cross(self, o: Point) -> f64 {
        self.rho * o.z - self.z * o.rho
    }

    pub fn norm(self) -> f64 {
        self.rho.hypot(self.z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryTag {
    Steklov,
    Axis,
}

impl BoundaryTag {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryTag::Steklov => "steklov",
            BoundaryTag::Axis => "axis",
        }
    }
}

/// A straight segment or a circular arc with exact endpoints.
///
/// Arc endpoints are stored verbatim so that chains close exactly and points
/// on the symmetry axis keep `ρ = 0` bit-for-bit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Curve {
    Segment {
        start: Point,
        end: Point,
    },
    Arc {
        center: Point,
        radius: f64,
        start: Point,
        end: Point,
        ccw: bool,
    },
}

impl Curve {
    pub fn segment(start: Point, end: Point) -> Self {
        Curve::Segment { start, end }
    }

    pub fn arc(center: Point, radius: f64, start: Point, end: Point, ccw: bool) -> Self {
        Curve::Arc { center, radius, start, end, ccw }
    }

    pub fn start(&self) -> Point {
        match *self {
            Curve::Segment { start, .. } | Curve::Arc { start, .. } => start,
        }
    }

    pub fn end(&self) -> Point {
        match *self {
            Curve::Segment { end, .. } | Curve::Arc { end, .. } => end,
        }
    }

    /// Start angle and signed sweep of an arc.
    pub fn angles(&self) -> Option<(f64, f64)> {
        match *self {
            Curve::Segment { .. } => None,
            Curve::Arc { center, start, end, ccw, .. } => {
                let a0 = angle_of(start.sub(center));
                let a1 = angle_of(end.sub(center));
                let mut sweep = a1 - a0;
                if ccw {
                    while sweep <= 0.0 {
                        sweep += 2.0 * PI;
                    }
                    while sweep > 2.0 * PI {
                        sweep -= 2.0 * PI;
                    }
                } else {
                    while sweep >= 0.0 {
                        sweep -= 2.0 * PI;
                    }
                    while sweep < -2.0 * PI {
                        sweep += 2.0 * PI;
                    }
                }
                Some((a0, sweep))
            }
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Curve::Segment { start, end } => start.dist(end),
            Curve::Arc { radius, .. } => radius * self.angles().unwrap().1.abs(),
        }
    }

    /// Point at normalized arc-length parameter `t ∈ [0, 1]`; endpoints exact.
    pub fn point_at(&self, t: f64) -> Point {
        if t <= 0.0 {
            return self.start();
        }
        if t >= 1.0 {
            return self.end();
        }
        match *self {
            Curve::Segment { start, end } => start.add(end.sub(start).scale(t)),
            Curve::Arc { center, radius, .. } => {
                let (a0, sweep) = self.angles().unwrap();
                let a = a0 + t * sweep;
                Point::new(center.rho + radius * a.cos(), center.z + radius * a.sin())
            }
        }
    }

    /// Unit tangent in the direction of travel at parameter `t`.
    pub fn tangent_at(&self, t: f64) -> Point {
        match *self {
            Curve::Segment { start, end } => {
                let d = end.sub(start);
                d.scale(1.0 / d.norm())
            }
            Curve::Arc { .. } => {
                let (a0, sweep) = self.angles().unwrap();
                let a = a0 + t.clamp(0.0, 1.0) * sweep;
                let s = sweep.signum();
                Point::new(-a.sin() * s, a.cos() * s)
            }
        }
    }

    /// Nearest point of the curve to `p`, with its parameter.
    pub fn project(&self, p: Point) -> (f64, Point) {
        match *self {
            Curve::Segment { start, end } => {
                let d = end.sub(start);
                let t = (p.sub(start).dot(d) / d.dot(d)).clamp(0.0, 1.0);
                (t, self.point_at(t))
            }
            Curve::Arc { center, radius, .. } => {
                let (a0, sweep) = self.angles().unwrap();
                let a = angle_of(p.sub(center));
                let mut rel = (a - a0) * sweep.signum();
                rel = rel.rem_euclid(2.0 * PI);
                let span = sweep.abs();
                let t = if rel <= span {
                    rel / span
                } else if (rel - span) < (2.0 * PI - rel) {
                    1.0
                } else {
                    0.0
                };
                if t > 0.0 && t < 1.0 {
                    let a = a0 + t * sweep;
                    (t, Point::new(center.rho + radius * a.cos(), center.z + radius * a.sin()))
                } else {
                    (t, self.point_at(t))
                }
            }
        }
    }

    /// `∫ ρ ds` along the curve, in closed form.
    pub fn rho_moment(&self) -> f64 {
        match *self {
            Curve::Segment { start, end } => start.dist(end) * 0.5 * (start.rho + end.rho),
            Curve::Arc { center, radius, .. } => {
                let (a0, sweep) = self.angles().unwrap();
                let a1 = a0 + sweep;
                sweep.signum() * radius * (center.rho * sweep + radius * (a1.sin() - a0.sin()))
            }
        }
    }

    /// `½ ∫ (ρ dz − z dρ)`, the curve's contribution to the enclosed area.
    pub fn area_term(&self) -> f64 {
        match *self {
            Curve::Segment { start, end } => 0.5 * (start.rho * end.z - start.z * end.rho),
            Curve::Arc { center, radius, .. } => {
                let (a0, sweep) = self.angles().unwrap();
                let a1 = a0 + sweep;
                0.5 * (radius * center.rho * (a1.sin() - a0.sin())
                    - radius * center.z * (a1.cos() - a0.cos())
                    + radius * radius * sweep)
            }
        }
    }

    /// Smallest `ρ` attained along the curve.
    pub fn min_rho(&self) -> f64 {
        let ends = self.start().rho.min(self.end().rho);
        match *self {
            Curve::Segment { .. } => ends,
            Curve::Arc { center, radius, .. } => {
                let (a0, sweep) = self.angles().unwrap();
                // the leftmost point of the circle sits at angle π
                let rel = ((PI - a0) * sweep.signum()).rem_euclid(2.0 * PI);
                if rel < sweep.abs() {
                    ends.min(center.rho - radius)
                } else {
                    ends
                }
            }
        }
    }

    /// Same curve traversed in the opposite direction.
    pub fn reversed(&self) -> Curve {
        match *self {
            Curve::Segment { start, end } => Curve::segment(end, start),
            Curve::Arc { center, radius, start, end, ccw } => Curve::arc(center, radius, end, start, !ccw),
        }
    }

    /// Mirror image under `z ↦ 2c − z`; orientation flips.
    pub fn reflect_z(&self, c: f64) -> Curve {
        let f = |p: Point| Point::new(p.rho, 2.0 * c - p.z);
        match *self {
            Curve::Segment { start, end } => Curve::segment(f(start), f(end)),
            Curve::Arc { center, radius, start, end, ccw } => Curve::arc(f(center), radius, f(start), f(end), !ccw),
        }
    }

    /// Polyline through `k + 1` equally spaced parameter values.
    pub fn sample(&self, k: usize) -> Vec<Point> {
        (0..=k).map(|i| self.point_at(i as f64 / k as f64)).collect()
    }
}

fn angle_of(v: Point) -> f64 {
    v.z.atan2(v.rho)
}

/// A tagged boundary curve of a meridian chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub curve: Curve,
    pub tag: BoundaryTag,
}

impl Piece {
    pub fn steklov(curve: Curve) -> Self {
        Self { curve, tag: BoundaryTag::Steklov }
    }

    pub fn axis(start: Point, end: Point) -> Self {
        Self { curve: Curve::segment(start, end), tag: BoundaryTag::Axis }
    }
}
