//! Conforming triangulations of meridian domains.

mod audit;
mod build;
mod format;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::domain::{BoundaryTag, Piece, Point};
pub use audit::{audit, AuditReport, MIN_ANGLE_DEG};
pub use build::{triangulate, triangulate_with, MeshOptions};
pub use format::{load_mesh, read_mesh, save_mesh, write_mesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub tag: BoundaryTag,
    /// Index of the originating piece in the domain's meridian chain.
    pub piece: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quality {
    pub min_angle_deg: f64,
    /// Circumradius over twice the inradius; 1 for an equilateral triangle.
    pub max_aspect: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub dim: usize,
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub h: f64,
    pub grading: f64,
    pub quality: Quality,
    /// Exact boundary curves, used to project nodes created by refinement.
    /// Not part of the file format.
    pub geometry: Option<Vec<Piece>>,
}

pub(crate) fn signed_area(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
}

fn angles(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> [f64; 3] {
    let ang = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
        let u = [b[0] - a[0], b[1] - a[1]];
        let v = [c[0] - a[0], c[1] - a[1]];
        (u[0] * v[1] - u[1] * v[0]).abs().atan2(u[0] * v[0] + u[1] * v[1])
    };
    [ang(p, q, r), ang(q, r, p), ang(r, p, q)]
}

fn aspect(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    let a = (q[0] - r[0]).hypot(q[1] - r[1]);
    let b = (p[0] - r[0]).hypot(p[1] - r[1]);
    let c = (p[0] - q[0]).hypot(p[1] - q[1]);
    let area = signed_area(p, q, r).abs();
    let s = 0.5 * (a + b + c);
    let inr = area / s;
    let circ = a * b * c / (4.0 * area);
    circ / (2.0 * inr)
}

/// Projects `p` onto a piece; nodes with `ρ < 0` (mirrored planar meshes) are
/// projected through their mirror image.
pub(crate) fn project_onto(piece: &Piece, p: [f64; 2]) -> [f64; 2] {
    let sign = if p[0] < 0.0 { -1.0 } else { 1.0 };
    let (_, q) = piece.curve.project(Point::new(p[0] * sign, p[1]));
    [q.rho * sign, q.z]
}

impl Mesh {
    pub fn compute_quality(nodes: &[[f64; 2]], triangles: &[[usize; 3]]) -> Quality {
        let mut min_angle = f64::INFINITY;
        let mut max_aspect: f64 = 0.0;
        for t in triangles {
            let (p, q, r) = (nodes[t[0]], nodes[t[1]], nodes[t[2]]);
            for a in angles(p, q, r) {
                min_angle = min_angle.min(a);
            }
            max_aspect = max_aspect.max(aspect(p, q, r));
        }
        Quality { min_angle_deg: min_angle.to_degrees(), max_aspect }
    }

    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| signed_area(self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]))
            .sum()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes touched by an edge with the given tag.
    pub fn tagged_nodes(&self, tag: BoundaryTag) -> Vec<bool> {
        let mut out = vec![false; self.nodes.len()];
        for e in self.boundary_edges.iter().filter(|e| e.tag == tag) {
            out[e.a] = true;
            out[e.b] = true;
        }
        out
    }

    /// Number of connected components of the triangle adjacency graph.
    pub fn components(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.nodes.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for t in &self.triangles {
            for k in 1..3 {
                let (a, b) = (find(&mut parent, t[0]), find(&mut parent, t[k]));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        let mut used = vec![false; self.nodes.len()];
        for t in &self.triangles {
            for &v in t {
                used[v] = true;
            }
        }
        let mut roots: Vec<usize> = (0..self.nodes.len()).filter(|&v| used[v]).map(|v| find(&mut parent, v)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }

    /// Uniform red refinement: every triangle splits into four, boundary
    /// midpoints are projected back onto the exact curves, and `h` halves.
    pub fn refine(&self) -> Mesh {
        let mut nodes = self.nodes.clone();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut boundary_piece: HashMap<(usize, usize), usize> = HashMap::new();
        for e in &self.boundary_edges {
            boundary_piece.insert((e.a.min(e.b), e.a.max(e.b)), e.piece);
        }
        let mut midpoint = |a: usize, b: usize, nodes: &mut Vec<[f64; 2]>| -> usize {
            let key = (a.min(b), a.max(b));
            *mid.entry(key).or_insert_with(|| {
                let (p, q) = (nodes[a], nodes[b]);
                let mut m = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
                if let (Some(pid), Some(geo)) = (boundary_piece.get(&key), &self.geometry) {
                    m = project_onto(&geo[*pid], m);
                }
                nodes.push(m);
                nodes.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[a, b, c] in &self.triangles {
            let ab = midpoint(a, b, &mut nodes);
            let bc = midpoint(b, c, &mut nodes);
            let ca = midpoint(c, a, &mut nodes);
            triangles.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        let mut boundary_edges = Vec::with_capacity(2 * self.boundary_edges.len());
        for e in &self.boundary_edges {
            let m = midpoint(e.a, e.b, &mut nodes);
            boundary_edges.push(BoundaryEdge { a: e.a, b: m, ..*e });
            boundary_edges.push(BoundaryEdge { a: m, b: e.b, ..*e });
        }
        let quality = Mesh::compute_quality(&nodes, &triangles);
        Mesh {
            dim: self.dim,
            nodes,
            triangles,
            boundary_edges,
            h: self.h / 2.0,
            grading: self.grading,
            quality,
            geometry: self.geometry.clone(),
        }
    }

    /// Reflects a half-plane mesh across `ρ = 0` into a full planar mesh.
    /// Axis edges become interior; Steklov edges are duplicated.
    pub(crate) fn mirrored(&self) -> Mesh {
        let mut nodes = self.nodes.clone();
        let mut image = vec![0usize; nodes.len()];
        for (i, p) in self.nodes.iter().enumerate() {
            if p[0] == 0.0 {
                image[i] = i;
            } else {
                image[i] = nodes.len();
                nodes.push([-p[0], p[1]]);
            }
        }
        let mut triangles = self.triangles.clone();
        triangles.extend(self.triangles.iter().map(|&[a, b, c]| [image[a], image[c], image[b]]));
        let kept: Vec<BoundaryEdge> =
            self.boundary_edges.iter().copied().filter(|e| e.tag == BoundaryTag::Steklov).collect();
        let mut boundary_edges = kept.clone();
        boundary_edges.extend(kept.iter().map(|e| BoundaryEdge { a: image[e.b], b: image[e.a], ..*e }));
        Mesh {
            dim: 2,
            nodes,
            triangles,
            boundary_edges,
            quality: self.quality,
            ..self.clone()
        }
    }

    /// Applies a node permutation: node `i` moves to position `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Mesh {
        let mut nodes = vec![[0.0; 2]; self.nodes.len()];
        for (i, p) in self.nodes.iter().enumerate() {
            nodes[perm[i]] = *p;
        }
        let triangles = self.triangles.iter().map(|t| [perm[t[0]], perm[t[1]], perm[t[2]]]).collect();
        let boundary_edges = self
            .boundary_edges
            .iter()
            .map(|e| BoundaryEdge { a: perm[e.a], b: perm[e.b], ..*e })
            .collect();
        Mesh { nodes, triangles, boundary_edges, ..self.clone() }
    }
}
