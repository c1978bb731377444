//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use faer::{Mat, Side};
use steklov_core::fem::{to_dense, ModePencil};

/// Finite eigenvalues of the full pencil `K x = σ M x`, computed densely on
/// the whole unknown space without any boundary reduction.
///
/// With `A = K + M` (positive definite whenever `M` is nonzero on every
/// kernel direction of `K`), the nonzero eigenvalues `μ` of `L⁻¹ M L⁻ᵀ`
/// (`A = L Lᵀ`) give `σ = 1/μ - 1`; zero `μ` are the infinite eigenvalues.
pub fn full_pencil_values(p: &ModePencil) -> Vec<f64> {
    let k = to_dense(&p.k);
    let m = to_dense(&p.m);
    let n = k.nrows();
    let a = Mat::from_fn(n, n, |i, j| k[(i, j)] + m[(i, j)]);
    let l = a.llt(Side::Lower).expect("K + M is positive definite").L().to_owned();
    // C = L^{-1} M L^{-T}
    let mut x = m.clone();
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(l.as_ref(), x.as_mut(), faer::Par::Seq);
    let mut c = x.transpose().to_owned();
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(l.as_ref(), c.as_mut(), faer::Par::Seq);
    let c = Mat::from_fn(n, n, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
    let mu = c.self_adjoint_eigenvalues(Side::Lower).expect("symmetric eigensolve");
    let top = mu.iter().cloned().fold(0.0, f64::max);
    let mut out: Vec<f64> = mu.iter().filter(|v| **v > 1e-12 * top).map(|v| 1.0 / v - 1.0).collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Exponent vectors of all monomials of degree `k` in `n` variables.
pub fn monomials(n: usize, k: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![k]];
    }
    let mut out = Vec::new();
    for first in (0..=k).rev() {
        for mut rest in monomials(n - 1, k - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Integer matrix of the Laplacian from degree-`k` to degree-`k-2` monomials.
pub fn laplacian_matrix(n: usize, k: usize) -> Vec<Vec<i128>> {
    let cols = monomials(n, k);
    let rows = if k >= 2 { monomials(n, k - 2) } else { Vec::new() };
    let mut a = vec![vec![0i128; cols.len()]; rows.len()];
    for (c, e) in cols.iter().enumerate() {
        for i in 0..n {
            if e[i] >= 2 {
                let mut t = e.clone();
                t[i] -= 2;
                let r = rows.iter().position(|x| *x == t).unwrap();
                a[r][c] += (e[i] * (e[i] - 1)) as i128;
            }
        }
    }
    a
}

/// Rank by fraction-free (Bareiss) elimination; exact over the integers.
pub fn bareiss_rank(mut a: Vec<Vec<i128>>) -> usize {
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let mut rank = 0;
    let mut prev = 1i128;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| a[r][c] != 0) else { continue };
        a.swap(rank, p);
        for r in rank + 1..rows {
            for cc in c + 1..cols {
                a[r][cc] = (a[r][cc] * a[rank][c] - a[r][c] * a[rank][cc]) / prev;
            }
            a[r][c] = 0;
        }
        prev = a[rank][c];
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Dimension of degree-`k` harmonic polynomials in `n` variables, as the
/// kernel dimension of the Laplacian.
pub fn harmonic_kernel_dim(n: usize, k: usize) -> usize {
    monomials(n, k).len() - bareiss_rank(laplacian_matrix(n, k))
}

pub fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}
