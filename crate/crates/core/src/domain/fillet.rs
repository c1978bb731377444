//! Rounding of Steklov corners by tangent circular arcs.

use super::geometry::{BoundaryTag, Curve, Piece, Point};
use crate::error::{Error, Result};

/// Offset of a curve by signed distance `d` to its left (interior side of a
/// positively oriented chain): a line `n·x = c` or a circle.
enum Offset {
    Line { normal: Point, c: f64 },
    Circle { center: Point, radius: f64 },
}

fn offset(curve: &Curve, d: f64) -> Option<Offset> {
    match *curve {
        Curve::Segment { start, end } => {
            let dir = end.sub(start);
            let len = dir.norm();
            let normal = Point::new(-dir.z / len, dir.rho / len);
            Some(Offset::Line { normal, c: normal.dot(start) + d })
        }
        Curve::Arc { center, radius, ccw, .. } => {
            let r = if ccw { radius - d } else { radius + d };
            (r > 0.0).then_some(Offset::Circle { center, radius: r })
        }
    }
}

fn intersect(a: &Offset, b: &Offset) -> Vec<Point> {
    match (a, b) {
        (Offset::Line { normal: n1, c: c1 }, Offset::Line { normal: n2, c: c2 }) => {
            let det = n1.cross(*n2);
            if det.abs() < 1e-14 {
                return vec![];
            }
            vec![Point::new((c1 * n2.z - c2 * n1.z) / det, (n1.rho * c2 - n2.rho * c1) / det)]
        }
        (Offset::Line { normal, c }, Offset::Circle { center, radius })
        | (Offset::Circle { center, radius }, Offset::Line { normal, c }) => {
            let dist = c - normal.dot(*center);
            let h2 = radius * radius - dist * dist;
            if h2 < 0.0 {
                return vec![];
            }
            let foot = center.add(normal.scale(dist));
            let along = Point::new(-normal.z, normal.rho).scale(h2.sqrt());
            vec![foot.add(along), foot.sub(along)]
        }
        (Offset::Circle { center: p, radius: r1 }, Offset::Circle { center: q, radius: r2 }) => {
            let d = p.dist(*q);
            if d < 1e-15 || d > r1 + r2 || d < (r1 - r2).abs() {
                return vec![];
            }
            let a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
            let h = (r1 * r1 - a * a).max(0.0).sqrt();
            let u = q.sub(*p).scale(1.0 / d);
            let base = p.add(u.scale(a));
            let perp = Point::new(-u.z, u.rho).scale(h);
            vec![base.add(perp), base.sub(perp)]
        }
    }
}

fn replace_start(curve: &Curve, p: Point) -> Curve {
    match *curve {
        Curve::Segment { end, .. } => Curve::segment(p, end),
        Curve::Arc { center, radius, end, ccw, .. } => Curve::arc(center, radius, p, end, ccw),
    }
}

fn replace_end(curve: &Curve, p: Point) -> Curve {
    match *curve {
        Curve::Segment { start, .. } => Curve::segment(start, p),
        Curve::Arc { center, radius, start, ccw, .. } => Curve::arc(center, radius, start, p, ccw),
    }
}

/// Replaces every non-smooth junction between two Steklov pieces by an arc
/// of radius `r` tangent to both.
pub(super) fn round_corners(chain: &[Piece], r: f64) -> Result<Vec<Piece>> {
    let mut out: Vec<Piece> = chain.to_vec();
    let mut i = 0;
    while i < out.len() {
        let j = (i + 1) % out.len();
        let (a, b) = (out[i], out[j]);
        if a.tag != BoundaryTag::Steklov || b.tag != BoundaryTag::Steklov {
            i += 1;
            continue;
        }
        let t_in = a.curve.tangent_at(1.0);
        let t_out = b.curve.tangent_at(0.0);
        let turn = t_in.cross(t_out);
        if turn.abs() <= 1e-9 && t_in.dot(t_out) > 0.0 {
            i += 1;
            continue;
        }
        let corner = a.curve.end();
        let side = if turn > 0.0 { 1.0 } else { -1.0 };
        let infeasible = || Error::Geometry(format!("fillet radius {r} does not fit the corner at ({:.6}, {:.6})", corner.rho, corner.z));
        let (oa, ob) = match (offset(&a.curve, side * r), offset(&b.curve, side * r)) {
            (Some(x), Some(y)) => (x, y),
            _ => return Err(infeasible()),
        };
        let mut best: Option<(f64, Point, Point, Point)> = None;
        for c in intersect(&oa, &ob) {
            let (ta, pa) = a.curve.project(c);
            let (tb, pb) = b.curve.project(c);
            let ok = ta > 0.0 && ta < 1.0 && tb > 0.0 && tb < 1.0
                && (pa.dist(c) - r).abs() < 1e-9 * r.max(1.0)
                && (pb.dist(c) - r).abs() < 1e-9 * r.max(1.0);
            if !ok {
                continue;
            }
            let score = pa.dist(corner).max(pb.dist(corner));
            if best.map_or(true, |(s, ..)| score < s) {
                best = Some((score, c, pa, pb));
            }
        }
        let (_, c, pa, pb) = best.ok_or_else(infeasible)?;
        out[i].curve = replace_end(&a.curve, pa);
        out[j].curve = replace_start(&b.curve, pb);
        let arc = Piece::steklov(Curve::arc(c, r, pa, pb, side > 0.0));
        out.insert(i + 1, arc);
        i += 2;
    }
    Ok(out)
}
