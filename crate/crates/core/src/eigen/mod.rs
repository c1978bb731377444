//! Boundary reduction of a mode pencil and its dense eigensolve.
//!
//! Eliminating interior unknowns from `K` gives the Schur complement
//! `S = K_bb − K_bi K_ii⁻¹ K_ib`, the discrete Dirichlet-to-Neumann map. The
//! Steklov eigenvalues are those of the definite pencil `S v = σ M_bb v`.

mod merge;

use faer::linalg::solvers::SolveCore;
use faer::{Conj, Mat, MatMut, Par, Side};
use log::debug;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{Mode, ModePencil, SparseMat};
pub use merge::{cluster_multiplicities, merge_modes, Cluster, Clustered, ZERO_TOL};

/// Largest admissible relative residual of the interior solves.
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-8;
/// Largest admissible relative asymmetry of the Schur complement.
pub const SYMMETRY_TOL: f64 = 1e-10;

const BLOCK: usize = 48;

#[derive(Clone, Debug)]
pub struct BoundaryPencil {
    pub mode: Mode,
    pub s: Mat<f64>,
    pub m_bb: Mat<f64>,
    /// Unknown indices (in the mode pencil) of the boundary rows.
    pub boundary: Vec<usize>,
    /// Largest relative residual `‖K_ii X − K_ib‖ / ‖K_ib‖` over column blocks.
    pub solve_residual: f64,
}

#[derive(Clone, Debug)]
pub struct PencilSolution {
    pub values: Vec<f64>,
    /// `M_bb`-orthonormal eigenvectors, one column per value.
    pub vectors: Mat<f64>,
}

/// Splits a sparse matrix into the blocks indexed by `b` (boundary) and its
/// complement (interior), returning `(K_ii, K_ib as columns, K_bb dense)`.
struct Split {
    interior: SparseMat,
    /// For each boundary unknown: the interior rows and values of its column.
    coupling: Vec<Vec<(usize, f64)>>,
    bb: Mat<f64>,
}

fn split(k: &SparseMat, b: &[usize]) -> Result<Split> {
    let n = k.nrows();
    let mut slot = vec![usize::MAX; n];
    let mut is_b = vec![false; n];
    for (r, &v) in b.iter().enumerate() {
        is_b[v] = true;
        slot[v] = r;
    }
    let mut ni = 0;
    for v in 0..n {
        if !is_b[v] {
            slot[v] = ni;
            ni += 1;
        }
    }
    let nb = b.len();
    let mut trip = Vec::new();
    let mut coupling = vec![Vec::new(); nb];
    let mut bb = Mat::zeros(nb, nb);
    for j in 0..n {
        let range = k.symbolic().col_range(j);
        for (&i, &v) in k.symbolic().row_idx()[range.clone()].iter().zip(&k.val()[range]) {
            match (is_b[i], is_b[j]) {
                (false, false) => trip.push(faer::sparse::Triplet::new(slot[i], slot[j], v)),
                (false, true) => coupling[slot[j]].push((slot[i], v)),
                (true, true) => bb[(slot[i], slot[j])] += v,
                (true, false) => {}
            }
        }
    }
    let interior = SparseMat::try_new_from_triplets(ni, ni, &trip)
        .map_err(|e| Error::Factorization(format!("interior block: {e:?}")))?;
    Ok(Split { interior, coupling, bb })
}

fn dense_block(m: &SparseMat, b: &[usize]) -> Mat<f64> {
    let mut slot = vec![usize::MAX; m.nrows()];
    for (r, &v) in b.iter().enumerate() {
        slot[v] = r;
    }
    let mut out = Mat::zeros(b.len(), b.len());
    for j in 0..m.ncols() {
        let range = m.symbolic().col_range(j);
        for (&i, &v) in m.symbolic().row_idx()[range.clone()].iter().zip(&m.val()[range]) {
            if slot[i] != usize::MAX && slot[j] != usize::MAX {
                out[(slot[i], slot[j])] += v;
            } else if v != 0.0 {
                debug!("boundary mass entry off the Steklov unknowns at ({i}, {j})");
            }
        }
    }
    out
}

fn sym_error(a: &Mat<f64>) -> f64 {
    let n = a.nrows();
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            diff = diff.max((a[(i, j)] - a[(j, i)]).abs());
            scale = scale.max(a[(i, j)].abs());
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

fn symmetrize(a: &mut Mat<f64>) {
    let n = a.nrows();
    for j in 0..n {
        for i in 0..j {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

/// Sparse product `y = A x` for a column-major sparse matrix.
fn spmv(a: &SparseMat, x: faer::ColRef<'_, f64>, mut y: faer::ColMut<'_, f64>) {
    y.fill(0.0);
    for j in 0..a.ncols() {
        let xj = x[j];
        if xj == 0.0 {
            continue;
        }
        let range = a.symbolic().col_range(j);
        for (&i, &v) in a.symbolic().row_idx()[range.clone()].iter().zip(&a.val()[range]) {
            y[i] += v * xj;
        }
    }
}

pub fn boundary_schur(pencil: &ModePencil) -> Result<BoundaryPencil> {
    let b = pencil.boundary_unknowns();
    if b.is_empty() {
        return Err(Error::Eigen("the pencil has no Steklov unknowns".into()));
    }
    let parts = split(&pencil.k, &b)?;
    let m_bb = dense_block(&pencil.m, &b);
    let nb = b.len();
    let ni = parts.interior.nrows();
    let mut s = parts.bb.clone();
    let mut worst: f64 = 0.0;
    if ni > 0 {
        let llt = parts.interior.sp_cholesky(Side::Lower).map_err(|e| {
            let diag_min = (0..ni)
                .map(|j| {
                    let r = parts.interior.symbolic().col_range(j);
                    parts.interior.symbolic().row_idx()[r.clone()]
                        .iter()
                        .zip(&parts.interior.val()[r])
                        .find(|(i, _)| **i == j)
                        .map_or(0.0, |(_, v)| *v)
                })
                .fold(f64::INFINITY, f64::min);
            Error::Factorization(format!(
                "interior stiffness block ({ni} unknowns) is not positive definite: {e:?}; smallest diagonal entry {diag_min:.3e}"
            ))
        })?;
        let blocks: Vec<usize> = (0..nb).step_by(BLOCK).collect();
        let results: Vec<Result<(usize, Mat<f64>, f64)>> = blocks
            .par_iter()
            .map(|&c0| {
                let w = BLOCK.min(nb - c0);
                let mut rhs = Mat::<f64>::zeros(ni, w);
                for c in 0..w {
                    for &(i, v) in &parts.coupling[c0 + c] {
                        rhs[(i, c)] = v;
                    }
                }
                let mut x = rhs.clone();
                llt.solve_in_place_with_conj(Conj::No, x.as_mut());
                // residual of the interior solves
                let mut r = Mat::<f64>::zeros(ni, w);
                let mut num: f64 = 0.0;
                let mut den: f64 = 0.0;
                for c in 0..w {
                    spmv(&parts.interior, x.col(c), r.col_mut(c));
                    for i in 0..ni {
                        num += (r[(i, c)] - rhs[(i, c)]).powi(2);
                        den += rhs[(i, c)].powi(2);
                    }
                }
                let rel = if den > 0.0 { (num / den).sqrt() } else { 0.0 };
                // K_bi X for this block of columns
                let mut prod = Mat::<f64>::zeros(nb, w);
                for (row, col) in parts.coupling.iter().enumerate() {
                    for c in 0..w {
                        let mut acc = 0.0;
                        for &(i, v) in col {
                            acc += v * x[(i, c)];
                        }
                        prod[(row, c)] = acc;
                    }
                }
                Ok((c0, prod, rel))
            })
            .collect();
        for res in results {
            let (c0, prod, rel) = res?;
            worst = worst.max(rel);
            for c in 0..prod.ncols() {
                for r in 0..nb {
                    s[(r, c0 + c)] -= prod[(r, c)];
                }
            }
        }
        if worst > SOLVE_RESIDUAL_TOL {
            return Err(Error::Factorization(format!(
                "interior solve residual {worst:.3e} exceeds {SOLVE_RESIDUAL_TOL:.0e}"
            )));
        }
    }
    let asym = sym_error(&s);
    if asym > SYMMETRY_TOL {
        return Err(Error::Eigen(format!("Schur complement asymmetry {asym:.3e} exceeds {SYMMETRY_TOL:.0e}")));
    }
    symmetrize(&mut s);
    debug!("{}: boundary pencil of size {nb} from {ni} interior unknowns", pencil.mode);
    Ok(BoundaryPencil { mode: pencil.mode, s, m_bb, boundary: b, solve_residual: worst })
}

fn lower_solve(l: faer::MatRef<'_, f64>, rhs: MatMut<'_, f64>) {
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(l, rhs, Par::Seq);
}

/// Smallest `count` eigenpairs of `S v = σ M_bb v`.
pub fn solve_pencil(bp: &BoundaryPencil, count: usize) -> Result<PencilSolution> {
    let n = bp.s.nrows();
    if count > n {
        return Err(Error::Eigen(format!("requested {count} eigenvalues from a pencil of size {n}")));
    }
    let llt = bp
        .m_bb
        .llt(Side::Lower)
        .map_err(|e| Error::Eigen(format!("boundary mass is not positive definite ({e:?}); check Steklov tags")))?;
    let l = llt.L();
    // C = L⁻¹ S L⁻ᵀ, using the symmetry of S
    let mut w = bp.s.clone();
    lower_solve(l, w.as_mut());
    let mut c = w.transpose().to_owned();
    lower_solve(l, c.as_mut());
    symmetrize(&mut c);
    let eig = c
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("dense eigensolver failed: {e:?}")))?;
    let vals = eig.S().column_vector();
    let values: Vec<f64> = (0..count).map(|i| vals[i]).collect();
    let mut vectors = eig.U().subcols(0, count).to_owned();
    faer::linalg::triangular_solve::solve_upper_triangular_in_place(l.transpose(), vectors.as_mut(), Par::Seq);
    Ok(PencilSolution { values, vectors })
}
