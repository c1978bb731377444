use serde::{Deserialize, Serialize};

use super::geometry::{BoundaryTag, Point};
use super::{DomainSpec, Family, NecklaceBase};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Issue {
    pub message: String,
    pub pieces: Vec<usize>,
}

/// Outcome of [`validate_domain`]: closure, orientation, simplicity, tags and
/// parameter ranges.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub ok: bool,
    pub issues: Vec<Issue>,
    pub signed_area: f64,
}

impl Diagnostics {
    pub fn summary(&self) -> String {
        self.issues
            .iter()
            .map(|i| {
                if i.pieces.is_empty() {
                    i.message.clone()
                } else {
                    format!("{} (pieces {:?})", i.message, i.pieces)
                }
            })
            .collect::<Vec<_>>()
            .join("; ")
    }
}

const CLOSE_TOL: f64 = 1e-12;

pub fn validate_domain(spec: &DomainSpec) -> Diagnostics {
    let mut issues = Vec::new();
    let mut push = |message: String, pieces: Vec<usize>| issues.push(Issue { message, pieces });
    let chain = &spec.meridian;
    let n = chain.len();

    check_params(spec, &mut push);
    if n < 2 {
        push("chain needs at least two pieces".into(), vec![]);
        return Diagnostics { ok: false, issues, signed_area: 0.0 };
    }
    for i in 0..n {
        let j = (i + 1) % n;
        let gap = chain[i].curve.end().dist(chain[j].curve.start());
        if gap > CLOSE_TOL {
            push(format!("chain is open between pieces ({gap:.3e})"), vec![i, j]);
        }
    }
    for (i, p) in chain.iter().enumerate() {
        if p.curve.length() <= 0.0 {
            push("degenerate piece".into(), vec![i]);
        }
        if p.curve.min_rho() < -CLOSE_TOL {
            push("piece leaves the half-plane rho >= 0".into(), vec![i]);
        }
        if p.tag == BoundaryTag::Axis {
            let on_axis = matches!(p.curve, super::Curve::Segment { start, end } if start.rho == 0.0 && end.rho == 0.0);
            if !on_axis {
                push("axis piece does not lie on rho = 0".into(), vec![i]);
            }
        } else if p.curve.rho_moment() <= 0.0 && spec.dim == 3 {
            push("Steklov piece has zero measure".into(), vec![i]);
        }
    }
    if !chain.iter().any(|p| p.tag == BoundaryTag::Steklov) {
        push("no Steklov piece".into(), vec![]);
    }
    let signed_area: f64 = chain.iter().map(|p| p.curve.area_term()).sum();
    if signed_area <= 0.0 {
        push(format!("chain is not positively oriented (signed area {signed_area:.6})"), vec![]);
    }
    for (a, b) in crossings(spec) {
        push("chain self-intersects".into(), vec![a, b]);
    }
    Diagnostics { ok: issues.is_empty(), issues, signed_area }
}

fn check_params(spec: &DomainSpec, push: &mut impl FnMut(String, Vec<usize>)) {
    match spec.family {
        Family::Ball => {}
        Family::Annulus { eps } => {
            if !(eps > 0.0 && eps < 1.0) {
                push(format!("annulus eps {eps} outside (0,1)"), vec![]);
            }
        }
        Family::BallTube { eps, delta } => {
            if !(0.0 < delta && delta < eps && eps < 1.0) {
                push(format!("ball-tube needs 0 < delta < eps < 1 (eps={eps}, delta={delta})"), vec![]);
            }
        }
        Family::Necklace { l, eps, base } => {
            if l < 2 {
                push(format!("necklace needs l >= 2, got {l}"), vec![]);
            }
            if !(eps > 0.0 && eps < 0.9) {
                push(format!("necklace eps {eps} outside (0, 0.9)"), vec![]);
            }
            if let NecklaceBase::BallTube { eps: e2, delta } = base {
                if !(0.0 < delta && delta < e2 && e2 < 1.0) {
                    push(format!("ball-tube base needs 0 < delta < eps < 1 (eps={e2}, delta={delta})"), vec![]);
                }
            }
        }
    }
}

fn polyline(spec: &DomainSpec, i: usize) -> Vec<Point> {
    let c = &spec.meridian[i].curve;
    let k = match c.angles() {
        None => 1,
        Some((_, sweep)) => ((sweep.abs() / (std::f64::consts::PI / 96.0)).ceil() as usize).max(8),
    };
    c.sample(k)
}

fn proper_cross(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = p2.sub(p1).cross(q1.sub(p1));
    let d2 = p2.sub(p1).cross(q2.sub(p1));
    let d3 = q2.sub(q1).cross(p1.sub(q1));
    let d4 = q2.sub(q1).cross(p2.sub(q1));
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) && d1 != 0.0 && d2 != 0.0 && d3 != 0.0 && d4 != 0.0
}

/// Pairs of pieces whose sampled polylines cross anywhere other than at a
/// shared vertex.
fn crossings(spec: &DomainSpec) -> Vec<(usize, usize)> {
    let n = spec.meridian.len();
    let lines: Vec<Vec<Point>> = (0..n).map(|i| polyline(spec, i)).collect();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a..n {
            let hit = lines[a].windows(2).enumerate().any(|(ia, sa)| {
                lines[b].windows(2).enumerate().any(|(ib, sb)| {
                    if a == b && ia.abs_diff(ib) <= 1 {
                        return false;
                    }
                    let shared = sa.iter().any(|p| sb.contains(p));
                    !shared && proper_cross(sa[0], sa[1], sb[0], sb[1])
                })
            });
            if hit {
                out.push((a, b));
            }
        }
    }
    out
}
