//! Constrained Delaunay triangulation of a sized boundary polygon, followed
//! by angle-bounded Delaunay refinement and projection onto the exact curves.

use std::collections::HashMap;

use log::debug;
use spade::{
    AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation,
};

use super::{audit, project_onto, BoundaryEdge, Mesh};
use crate::domain::{Curve, DomainSpec, Point};
use crate::error::{Error, Result};

/// Angle bound requested from the refinement; the projection step afterwards
/// moves boundary nodes slightly, so it sits above the audited floor.
const REFINE_ANGLE_DEG: f64 = 28.0;

/// Largest edge length relative to the radius allowed along an arc.
const ARC_SIZE_FACTOR: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshOptions {
    /// Target edge length at feature corners (everywhere, without features).
    pub h: f64,
    /// Growth exponent of the size field away from feature corners.
    pub grading: f64,
    /// Coarsest allowed edge length; defaults to `max(h, 0.1)`.
    pub h_max: Option<f64>,
}

impl MeshOptions {
    pub fn new(h: f64, grading: f64) -> Self {
        Self { h, grading, h_max: None }
    }

    pub fn h_max(&self) -> f64 {
        self.h_max.unwrap_or(self.h.max(0.1))
    }
}

pub fn triangulate(spec: &DomainSpec, h: f64, grading: f64) -> Result<Mesh> {
    triangulate_with(spec, &MeshOptions::new(h, grading))
}

struct SizeField {
    h: f64,
    h_max: f64,
    grading: f64,
    scale: f64,
    corners: Vec<Point>,
}

impl SizeField {
    fn at(&self, p: Point) -> f64 {
        let mut s = self.h_max;
        for c in &self.corners {
            let d = p.dist(*c);
            s = s.min(self.h * (1.0 + d / self.scale).powf(self.grading));
        }
        s.max(self.h)
    }
}

/// Parameter values `0 = t_0 < … < t_N = 1` equidistributing `∫ ds / size`.
fn distribute(curve: &Curve, size: &dyn Fn(Point) -> f64) -> Vec<f64> {
    let len = curve.length();
    let mut ts = vec![0.0];
    let mut acc = vec![0.0];
    let mut t = 0.0;
    while t < 1.0 {
        let s0 = size(curve.point_at(t));
        let dt = (0.1 * s0 / len).min(1.0 - t);
        let s1 = size(curve.point_at(t + dt));
        let inc = 0.5 * dt * len * (1.0 / s0 + 1.0 / s1);
        t += dt;
        ts.push(t);
        acc.push(acc.last().unwrap() + inc);
    }
    let total = *acc.last().unwrap();
    let n = (total.round() as usize).max(1);
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    let mut k = 1;
    for i in 1..n {
        let target = total * i as f64 / n as f64;
        while acc[k] < target {
            k += 1;
        }
        let w = (target - acc[k - 1]) / (acc[k] - acc[k - 1]);
        out.push(ts[k - 1] + w * (ts[k] - ts[k - 1]));
    }
    out.push(1.0);
    out
}

pub fn triangulate_with(spec: &DomainSpec, opts: &MeshOptions) -> Result<Mesh> {
    let h = opts.h;
    let h_max = opts.h_max();
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("mesh size must be positive, got {h}")));
    }
    if !(opts.grading >= 0.0) {
        return Err(Error::InvalidParameter("grading exponent must be nonnegative".into()));
    }
    if h_max < h {
        return Err(Error::InvalidParameter(format!("h_max {h_max} is below h {h}")));
    }
    if let Some(f) = spec.feature_size() {
        if h >= f {
            let name = match spec.family {
                crate::domain::Family::BallTube { .. } => "tube radius delta",
                crate::domain::Family::Annulus { .. } => "inner radius eps",
                _ => "neck radius",
            };
            return Err(Error::Mesh(format!("h = {h} exceeds feature size {name} = {f}")));
        }
    }
    let field = SizeField {
        h,
        h_max,
        grading: opts.grading,
        scale: spec.feature_size().unwrap_or(1.0),
        corners: spec.features.clone(),
    };

    // Boundary polygon: piece `i` contributes its start point and interior points.
    let mut poly: Vec<Point> = Vec::new();
    let mut seg_piece: Vec<usize> = Vec::new();
    for (i, piece) in spec.meridian.iter().enumerate() {
        let cap = match piece.curve {
            Curve::Arc { radius, .. } => ARC_SIZE_FACTOR * radius,
            Curve::Segment { .. } => f64::INFINITY,
        };
        let size = |p: Point| field.at(p).min(cap);
        let ts = distribute(&piece.curve, &size);
        for &t in &ts[..ts.len() - 1] {
            poly.push(piece.curve.point_at(t));
            seg_piece.push(i);
        }
    }
    let n = poly.len();
    debug!("boundary polygon with {n} vertices");

    let vertices: Vec<Point2<f64>> = poly.iter().map(|p| Point2::new(p.rho, p.z)).collect();
    let edges: Vec<[usize; 2]> = (0..n).map(|i| [i, (i + 1) % n]).collect();
    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> =
        ConstrainedDelaunayTriangulation::bulk_load_cdt(vertices, edges)
            .map_err(|e| Error::Mesh(format!("constrained triangulation failed: {e:?}")))?;
    let params = RefinementParameters::<f64>::new()
        .with_angle_limit(AngleLimit::from_deg(REFINE_ANGLE_DEG))
        .with_max_allowed_area(3f64.sqrt() / 4.0 * h_max * h_max)
        .exclude_outer_faces(true)
        .with_max_additional_vertices(2_000_000);
    let result = cdt.refine(params);
    if !result.refinement_complete {
        return Err(Error::Mesh("refinement did not reach the angle bound within the vertex budget".into()));
    }

    // Keep inner faces and the vertices they use.
    let original: HashMap<(u64, u64), usize> =
        poly.iter().enumerate().map(|(i, p)| ((p.rho.to_bits(), p.z.to_bits()), i)).collect();
    let mut index: HashMap<usize, usize> = HashMap::new();
    let mut nodes: Vec<[f64; 2]> = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    let mut boundary: Vec<(usize, usize)> = Vec::new();
    for face in cdt.inner_faces() {
        if result.excluded_faces.contains(&face.fix()) {
            continue;
        }
        let vs = face.vertices();
        let mut tri = [0usize; 3];
        for (k, v) in vs.iter().enumerate() {
            let key = v.fix().index();
            let next = nodes.len();
            tri[k] = *index.entry(key).or_insert_with(|| {
                let p = v.position();
                nodes.push([p.x, p.y]);
                next
            });
        }
        triangles.push(tri);
        for e in face.adjacent_edges() {
            if cdt.is_constraint_edge(e.as_undirected().fix()) {
                let a = index[&e.from().fix().index()];
                let b = index[&e.to().fix().index()];
                boundary.push((a, b));
            }
        }
    }

    // Attribute each boundary edge to the polygon segment it lies on.
    let seg_of = |p: [f64; 2]| -> usize {
        let q = Point::new(p[0], p[1]);
        let mut best = (f64::INFINITY, 0);
        for i in 0..n {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            let d = b.sub(a);
            let t = (q.sub(a).dot(d) / d.dot(d)).clamp(0.0, 1.0);
            let dist = q.dist(a.add(d.scale(t)));
            if dist < best.0 {
                best = (dist, i);
            }
        }
        best.1
    };
    let mut boundary_edges = Vec::with_capacity(boundary.len());
    let mut node_piece: HashMap<usize, usize> = HashMap::new();
    for (a, b) in boundary {
        let m = [0.5 * (nodes[a][0] + nodes[b][0]), 0.5 * (nodes[a][1] + nodes[b][1])];
        let piece = seg_piece[seg_of(m)];
        boundary_edges.push(BoundaryEdge { a, b, tag: spec.meridian[piece].tag, piece });
        node_piece.entry(a).or_insert(piece);
        node_piece.entry(b).or_insert(piece);
    }
    for (&v, &piece) in &node_piece {
        let p = nodes[v];
        if !original.contains_key(&(p[0].to_bits(), p[1].to_bits())) {
            nodes[v] = project_onto(&spec.meridian[piece], p);
        }
    }

    let quality = Mesh::compute_quality(&nodes, &triangles);
    let mut mesh = Mesh {
        dim: 3,
        nodes,
        triangles,
        boundary_edges,
        h,
        grading: opts.grading,
        quality,
        geometry: Some(spec.meridian.clone()),
    };
    if spec.dim == 2 {
        mesh = mesh.mirrored();
    }
    let report = audit(&mesh);
    if !report.ok {
        return Err(Error::Mesh(format!("mesh failed its audit: {}", report.issues.join("; "))));
    }
    debug!(
        "mesh: {} nodes, {} triangles, min angle {:.2}",
        mesh.nodes.len(),
        mesh.triangles.len(),
        mesh.quality.min_angle_deg
    );
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::NecklaceBase;

    #[test]
    fn ball_mesh_passes_audit() {
        let m = triangulate(&DomainSpec::ball(3).unwrap(), 0.1, 0.0).unwrap();
        assert!(m.quality.min_angle_deg >= 20.0);
        assert!((m.area() - std::f64::consts::FRAC_PI_2).abs() < 5e-3);
    }

    #[test]
    fn tube_guard() {
        let spec = DomainSpec::ball_tube(3, 0.1, 0.02).unwrap();
        let err = triangulate(&spec, 0.05, 1.0).unwrap_err().to_string();
        assert!(err.contains("h = 0.05 exceeds feature size"), "{err}");
        assert!(err.contains("delta"));
    }

    #[test]
    fn graded_meshes_for_every_family() {
        let specs = [
            DomainSpec::annulus(3, 0.3).unwrap(),
            DomainSpec::ball_tube(3, 0.2, 0.02).unwrap(),
            DomainSpec::necklace(3, 2, 0.3, NecklaceBase::Ball).unwrap(),
            DomainSpec::necklace(3, 2, 0.4, NecklaceBase::BallTube { eps: 0.3, delta: 0.05 }).unwrap(),
            DomainSpec::ball_tube(2, 0.2, 0.02).unwrap(),
        ];
        for spec in &specs {
            let h = spec.feature_size().unwrap() / 4.0;
            let m = triangulate(spec, h, 1.0).unwrap();
            let rep = audit(&m);
            assert!(rep.ok, "{:?}: {:?}", spec.family, rep.issues);
            let expected = if spec.dim == 2 { 2.0 } else { 1.0 } * spec.meridian_area();
            assert!((m.area() - expected).abs() < 2e-2 * expected, "{:?}", spec.family);
        }
    }

    #[test]
    fn deterministic() {
        let spec = DomainSpec::ball_tube(3, 0.2, 0.05).unwrap();
        let a = triangulate(&spec, 0.0125, 1.0).unwrap();
        let b = triangulate(&spec, 0.0125, 1.0).unwrap();
        assert_eq!(a, b);
    }
}
