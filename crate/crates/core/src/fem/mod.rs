//! Stiffness and boundary-mass pencils for one azimuthal Fourier mode.
//!
//! For an axisymmetric domain and `u(ρ, z) cos(mφ)` the Dirichlet energy and
//! boundary mass reduce to meridian integrals
//!
//! ```text
//! K_m(u, v) = ∫ (∇u·∇v + m²uv/ρ²) ρ dρ dz,    M(u, v) = ∫_Steklov u v ρ ds,
//! ```
//!
//! with `u = 0` on the axis for `m ≥ 1`. Planar problems use weight 1.

pub mod quadrature;

use std::collections::HashMap;
use std::fmt::Write as _;

use faer::sparse::{SparseColMat, Triplet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::BoundaryTag;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use quadrature::{gauss3, triangle_rule};

pub type SparseMat = SparseColMat<usize, f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// The two-dimensional problem on a full planar domain.
    Planar,
    /// Azimuthal Fourier index `m` of a domain of revolution.
    Azimuthal(usize),
}

impl Mode {
    /// Number of eigenfunctions each pencil eigenvalue stands for.
    pub fn multiplicity(self) -> usize {
        match self {
            Mode::Planar | Mode::Azimuthal(0) => 1,
            Mode::Azimuthal(_) => 2,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Mode::Planar => 0,
            Mode::Azimuthal(m) => m,
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Planar => write!(f, "planar"),
            Mode::Azimuthal(m) => write!(f, "m={m}"),
        }
    }
}

/// Finite-element nodes of a mesh and their unknown numbering.
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    pub order: usize,
    /// Coordinates of every finite-element node (mesh nodes, then edge midpoints for P2).
    pub coords: Vec<[f64; 2]>,
    /// Local-to-global node lists: 3 per triangle for P1, 6 for P2.
    pub elements: Vec<Vec<usize>>,
    /// Steklov boundary edges as node lists (2 for P1, 3 for P2 with the midpoint last).
    pub steklov_edges: Vec<Vec<usize>>,
    /// Unknown index of each node; `None` marks an axis constraint `u = 0`.
    pub unknown: Vec<Option<usize>>,
    pub on_steklov: Vec<bool>,
    pub on_axis: Vec<bool>,
    pub n_unknowns: usize,
}

impl DofMap {
    pub fn new(mesh: &Mesh, order: usize, mode: Mode) -> Result<Self> {
        if order != 1 && order != 2 {
            return Err(Error::Assembly(format!("element order must be 1 or 2, got {order}")));
        }
        let mut coords = mesh.nodes.clone();
        let mut elements = Vec::with_capacity(mesh.triangles.len());
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, coords: &mut Vec<[f64; 2]>| -> usize {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (p, q) = (coords[a], coords[b]);
                coords.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
                coords.len() - 1
            })
        };
        for &[a, b, c] in &mesh.triangles {
            if order == 1 {
                elements.push(vec![a, b, c]);
            } else {
                let ab = midpoint(a, b, &mut coords);
                let bc = midpoint(b, c, &mut coords);
                let ca = midpoint(c, a, &mut coords);
                elements.push(vec![a, b, c, bc, ca, ab]);
            }
        }
        let n = coords.len();
        let mut on_steklov = vec![false; n];
        let mut steklov_edges = Vec::new();
        for e in mesh.boundary_edges.iter().filter(|e| e.tag == BoundaryTag::Steklov) {
            let mut nodes = vec![e.a, e.b];
            if order == 2 {
                nodes.push(midpoint(e.a, e.b, &mut coords));
            }
            for &v in &nodes {
                on_steklov[v] = true;
            }
            steklov_edges.push(nodes);
        }
        let on_axis: Vec<bool> = match mode {
            Mode::Planar => vec![false; n],
            Mode::Azimuthal(_) => coords.iter().map(|p| p[0] == 0.0).collect(),
        };
        let constrain = matches!(mode, Mode::Azimuthal(m) if m >= 1);
        let mut unknown = vec![None; n];
        let mut next = 0;
        for v in 0..n {
            if !(constrain && on_axis[v]) {
                unknown[v] = Some(next);
                next += 1;
            }
        }
        Ok(DofMap { order, coords, elements, steklov_edges, unknown, on_steklov, on_axis, n_unknowns: next })
    }
}

/// Stiffness/boundary-mass pair for one mode.
#[derive(Clone, Debug)]
pub struct ModePencil {
    pub mode: Mode,
    pub k: SparseMat,
    pub m: SparseMat,
    pub dofs: DofMap,
    pub quadrature_order: usize,
}

/// Shape function values and reference gradients (in barycentric
/// derivatives) at barycentric point `l`.
fn shape(order: usize, l: [f64; 3]) -> (Vec<f64>, Vec<[f64; 3]>) {
    if order == 1 {
        let g = vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        return (l.to_vec(), g);
    }
    let v = vec![
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
        4.0 * l[0] * l[1],
    ];
    let g = vec![
        [4.0 * l[0] - 1.0, 0.0, 0.0],
        [0.0, 4.0 * l[1] - 1.0, 0.0],
        [0.0, 0.0, 4.0 * l[2] - 1.0],
        [0.0, 4.0 * l[2], 4.0 * l[1]],
        [4.0 * l[2], 0.0, 4.0 * l[0]],
        [4.0 * l[1], 4.0 * l[0], 0.0],
    ];
    (v, g)
}

fn edge_shape(order: usize, t: f64) -> Vec<f64> {
    if order == 1 {
        vec![1.0 - t, t]
    } else {
        vec![(1.0 - t) * (1.0 - 2.0 * t), t * (2.0 * t - 1.0), 4.0 * t * (1.0 - t)]
    }
}

pub fn assemble(mesh: &Mesh, mode: Mode, element_order: usize) -> Result<ModePencil> {
    assemble_with(mesh, mode, element_order, 4.max(2 * element_order))
}

pub fn assemble_with(mesh: &Mesh, mode: Mode, element_order: usize, quadrature_order: usize) -> Result<ModePencil> {
    let dofs = DofMap::new(mesh, element_order, mode)?;
    assemble_on(mesh.dim, dofs, mode, quadrature_order)
}

/// Assembles on a given node numbering.
pub fn assemble_on(dim: usize, dofs: DofMap, mode: Mode, quadrature_order: usize) -> Result<ModePencil> {
    match (dim, mode) {
        (2, Mode::Planar) | (3, Mode::Azimuthal(_)) => {}
        _ => {
            return Err(Error::Assembly(format!(
                "mode {mode} does not apply to a dimension-{dim} mesh"
            )))
        }
    }
    let order = dofs.order;
    if quadrature_order < 2 * order {
        return Err(Error::Assembly(format!(
            "quadrature order {quadrature_order} is below twice the element order {order}"
        )));
    }
    let m_idx = mode.index() as f64;
    if m_idx >= 1.0 {
        if let Some(v) = (0..dofs.coords.len()).find(|&v| dofs.on_axis[v] && dofs.unknown[v].is_some()) {
            return Err(Error::Assembly(format!(
                "axis node {v} is unconstrained for azimuthal mode {}",
                mode.index()
            )));
        }
    }
    let rule = triangle_rule(quadrature_order)?;
    let weighted = dim == 3;
    let shapes: Vec<_> = rule.points.iter().map(|&l| shape(order, l)).collect();

    let k_trip: Vec<Triplet<usize, usize, f64>> = dofs
        .elements
        .par_iter()
        .flat_map_iter(|el| {
            let p: Vec<[f64; 2]> = el[..3].iter().map(|&v| dofs.coords[v]).collect();
            let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
            let area = 0.5 * det;
            // gradients of the barycentric coordinates
            let gl = [
                [(p[1][1] - p[2][1]) / det, (p[2][0] - p[1][0]) / det],
                [(p[2][1] - p[0][1]) / det, (p[0][0] - p[2][0]) / det],
                [(p[0][1] - p[1][1]) / det, (p[1][0] - p[0][0]) / det],
            ];
            let nl = el.len();
            let mut ke = vec![0.0; nl * nl];
            for (q, (vals, dl)) in shapes.iter().enumerate() {
                let l = rule.points[q];
                let rho = l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0];
                let w = rule.weights[q] * area * if weighted { rho } else { 1.0 };
                let grads: Vec<[f64; 2]> = dl
                    .iter()
                    .map(|d| {
                        [
                            d[0] * gl[0][0] + d[1] * gl[1][0] + d[2] * gl[2][0],
                            d[0] * gl[0][1] + d[1] * gl[1][1] + d[2] * gl[2][1],
                        ]
                    })
                    .collect();
                let reaction = if m_idx > 0.0 { m_idx * m_idx / (rho * rho) } else { 0.0 };
                for i in 0..nl {
                    for j in 0..nl {
                        let g = grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1];
                        ke[i * nl + j] += w * (g + reaction * vals[i] * vals[j]);
                    }
                }
            }
            let mut out = Vec::with_capacity(nl * nl);
            for i in 0..nl {
                for j in 0..nl {
                    if let (Some(a), Some(b)) = (dofs.unknown[el[i]], dofs.unknown[el[j]]) {
                        out.push(Triplet::new(a, b, ke[i * nl + j]));
                    }
                }
            }
            out.into_iter()
        })
        .collect();

    let (gt, gw) = gauss3();
    let mut m_trip = Vec::new();
    for e in &dofs.steklov_edges {
        let (a, b) = (dofs.coords[e[0]], dofs.coords[e[1]]);
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        let ne = e.len();
        let mut me = vec![0.0; ne * ne];
        for (t, w) in gt.iter().zip(gw) {
            let rho = (1.0 - t) * a[0] + t * b[0];
            let ww = w * len * if weighted { rho } else { 1.0 };
            let phi = edge_shape(order, *t);
            for i in 0..ne {
                for j in 0..ne {
                    me[i * ne + j] += ww * phi[i] * phi[j];
                }
            }
        }
        for i in 0..ne {
            for j in 0..ne {
                if let (Some(x), Some(y)) = (dofs.unknown[e[i]], dofs.unknown[e[j]]) {
                    m_trip.push(Triplet::new(x, y, me[i * ne + j]));
                }
            }
        }
    }
    let n = dofs.n_unknowns;
    let k = SparseColMat::try_new_from_triplets(n, n, &k_trip)
        .map_err(|e| Error::Assembly(format!("stiffness matrix: {e:?}")))?;
    let m = SparseColMat::try_new_from_triplets(n, n, &m_trip)
        .map_err(|e| Error::Assembly(format!("boundary mass matrix: {e:?}")))?;
    Ok(ModePencil { mode, k, m, dofs, quadrature_order })
}

impl ModePencil {
    /// Unknown indices on the Steklov boundary, in increasing order.
    pub fn boundary_unknowns(&self) -> Vec<usize> {
        let mut b: Vec<usize> = (0..self.dofs.coords.len())
            .filter(|&v| self.dofs.on_steklov[v])
            .filter_map(|v| self.dofs.unknown[v])
            .collect();
        b.sort_unstable();
        b
    }

    pub fn n_unknowns(&self) -> usize {
        self.dofs.n_unknowns
    }
}

/// Coordinate-format dump of a symmetric sparse matrix (lower triangle).
pub fn matrix_market(a: &SparseMat) -> String {
    let mut entries = Vec::new();
    for j in 0..a.ncols() {
        let range = a.symbolic().col_range(j);
        for (i, v) in a.symbolic().row_idx()[range.clone()].iter().zip(&a.val()[range]) {
            if *i >= j {
                entries.push((*i, j, *v));
            }
        }
    }
    let mut s = String::from("%%MatrixMarket matrix coordinate real symmetric\n");
    let _ = writeln!(s, "{} {} {}", a.nrows(), a.ncols(), entries.len());
    for (i, j, v) in entries {
        let _ = writeln!(s, "{} {} {:.16e}", i + 1, j + 1, v);
    }
    s
}

/// Dense copy of a sparse matrix, for verification at small sizes.
pub fn to_dense(a: &SparseMat) -> faer::Mat<f64> {
    let mut d = faer::Mat::zeros(a.nrows(), a.ncols());
    for j in 0..a.ncols() {
        let range = a.symbolic().col_range(j);
        for (i, v) in a.symbolic().row_idx()[range.clone()].iter().zip(&a.val()[range]) {
            d[(*i, j)] += *v;
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainSpec;
    use crate::mesh::triangulate;

    fn ball(h: f64) -> Mesh {
        triangulate(&DomainSpec::ball(3).unwrap(), h, 0.0).unwrap()
    }

    #[test]
    fn constants_span_the_kernel_of_mode_zero() {
        let mesh = ball(0.2);
        for order in [1, 2] {
            let p = assemble(&mesh, Mode::Azimuthal(0), order).unwrap();
            let k = to_dense(&p.k);
            let worst = (0..k.nrows())
                .map(|i| (0..k.ncols()).map(|j| k[(i, j)]).sum::<f64>().abs())
                .fold(0.0, f64::max);
            assert!(worst < 1e-12, "order {order}: {worst}");
        }
    }

    #[test]
    fn boundary_mass_totals() {
        let mesh = ball(0.1);
        let p = assemble(&mesh, Mode::Azimuthal(0), 1).unwrap();
        let m = to_dense(&p.m);
        let total: f64 = (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| (i, j))).map(|(i, j)| m[(i, j)]).sum();
        let poly: f64 = mesh
            .boundary_edges
            .iter()
            .filter(|e| e.tag == BoundaryTag::Steklov)
            .map(|e| {
                let (a, b) = (mesh.nodes[e.a], mesh.nodes[e.b]);
                (b[0] - a[0]).hypot(b[1] - a[1]) * 0.5 * (a[0] + b[0])
            })
            .sum();
        assert!((total - poly).abs() < 1e-13);
        assert!((total - 2.0).abs() < 1e-2);
        let disc = triangulate(&DomainSpec::ball(2).unwrap(), 0.1, 0.0).unwrap();
        let p = assemble(&disc, Mode::Planar, 1).unwrap();
        let m = to_dense(&p.m);
        let total: f64 = (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| (i, j))).map(|(i, j)| m[(i, j)]).sum();
        assert!((total - 2.0 * std::f64::consts::PI).abs() < 1e-2);
    }

    #[test]
    fn axis_is_constrained_for_positive_modes() {
        let mesh = ball(0.2);
        let p0 = assemble(&mesh, Mode::Azimuthal(0), 1).unwrap();
        let p1 = assemble(&mesh, Mode::Azimuthal(1), 1).unwrap();
        let axis = mesh.nodes.iter().filter(|p| p[0] == 0.0).count();
        assert!(axis > 2);
        assert_eq!(p0.n_unknowns() - p1.n_unknowns(), axis);
        let mut dofs = DofMap::new(&mesh, 1, Mode::Azimuthal(0)).unwrap();
        dofs.on_axis = mesh.nodes.iter().map(|p| p[0] == 0.0).collect();
        assert!(assemble_on(3, dofs, Mode::Azimuthal(2), 4).is_err());
    }

    #[test]
    fn rejects_bad_orders_and_modes() {
        let mesh = ball(0.3);
        assert!(assemble_with(&mesh, Mode::Azimuthal(0), 2, 2).is_err());
        assert!(assemble_with(&mesh, Mode::Azimuthal(0), 1, 3).is_err());
        assert!(assemble(&mesh, Mode::Azimuthal(0), 3).is_err());
        assert!(assemble(&mesh, Mode::Planar, 1).is_err());
    }

    #[test]
    fn matrix_market_dump_lists_lower_triangle() {
        let p = assemble(&ball(0.4), Mode::Azimuthal(1), 1).unwrap();
        let text = matrix_market(&p.k);
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("%%MatrixMarket"));
        let dims: Vec<usize> = lines.next().unwrap().split(' ').map(|x| x.parse().unwrap()).collect();
        assert_eq!(dims[0], p.n_unknowns());
        assert_eq!(lines.count(), dims[2]);
    }
}
