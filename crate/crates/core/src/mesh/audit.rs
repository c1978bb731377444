//! Independent check of every mesh invariant.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{project_onto, signed_area, Mesh};
use crate::domain::BoundaryTag;

/// Quality floor every mesh must meet.
pub const MIN_ANGLE_DEG: f64 = 20.0;

const ON_CURVE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub ok: bool,
    pub issues: Vec<String>,
    pub min_angle_deg: f64,
    pub min_area: f64,
}

pub fn audit(mesh: &Mesh) -> AuditReport {
    let mut issues = Vec::new();
    let n = mesh.nodes.len();
    let mut used = vec![false; n];
    let mut min_area = f64::INFINITY;
    for (k, t) in mesh.triangles.iter().enumerate() {
        if t.iter().any(|&v| v >= n) {
            issues.push(format!("triangle {k} references a missing node"));
            continue;
        }
        for &v in t {
            used[v] = true;
        }
        let a = signed_area(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]);
        min_area = min_area.min(a);
        if !(a > 0.0) {
            issues.push(format!("triangle {k} has nonpositive signed area {a:.3e}"));
        }
    }
    if !issues.is_empty() {
        return AuditReport { ok: false, issues, min_angle_deg: f64::NAN, min_area };
    }
    if let Some(v) = used.iter().position(|u| !u) {
        issues.push(format!("node {v} belongs to no triangle"));
    }
    let quality = Mesh::compute_quality(&mesh.nodes, &mesh.triangles);
    if quality.min_angle_deg < MIN_ANGLE_DEG {
        issues.push(format!("minimum angle {:.2} below {MIN_ANGLE_DEG}", quality.min_angle_deg));
    }

    // Directed edge counts: conforming meshes have each interior edge once in
    // each direction and each boundary edge once.
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for t in &mesh.triangles {
        for k in 0..3 {
            *directed.entry((t[k], t[(k + 1) % 3])).or_default() += 1;
        }
    }
    if directed.values().any(|&c| c > 1) {
        issues.push("an oriented edge is shared by two triangles (overlap or flipped element)".into());
    }
    let mut open: Vec<(usize, usize)> =
        directed.keys().filter(|(a, b)| !directed.contains_key(&(*b, *a))).copied().collect();
    open.sort_unstable();
    let mut tagged: Vec<(usize, usize)> = mesh.boundary_edges.iter().map(|e| (e.a, e.b)).collect();
    tagged.sort_unstable();
    if open != tagged {
        issues.push(format!(
            "boundary edges do not tile the mesh boundary ({} open edges, {} tagged)",
            open.len(),
            tagged.len()
        ));
    }

    for (k, e) in mesh.boundary_edges.iter().enumerate() {
        if e.tag == BoundaryTag::Axis {
            if mesh.dim == 2 {
                issues.push(format!("planar mesh keeps axis edge {k}"));
            } else if mesh.nodes[e.a][0] != 0.0 || mesh.nodes[e.b][0] != 0.0 {
                issues.push(format!("axis edge {k} has a node off rho = 0"));
            }
        }
        if let Some(geo) = &mesh.geometry {
            let Some(piece) = geo.get(e.piece) else {
                issues.push(format!("boundary edge {k} names missing piece {}", e.piece));
                continue;
            };
            if piece.tag != e.tag {
                issues.push(format!("boundary edge {k} tag disagrees with piece {}", e.piece));
            }
            for v in [e.a, e.b] {
                let p = mesh.nodes[v];
                let q = project_onto(piece, p);
                let d = (p[0] - q[0]).hypot(p[1] - q[1]);
                if d > ON_CURVE_TOL {
                    issues.push(format!("boundary node {v} lies {d:.2e} off piece {}", e.piece));
                }
            }
        }
    }
    if mesh.dim == 3 && mesh.nodes.iter().any(|p| p[0] < 0.0) {
        issues.push("meridian mesh has nodes with rho < 0".into());
    }
    AuditReport { ok: issues.is_empty(), issues, min_angle_deg: quality.min_angle_deg, min_area }
}
