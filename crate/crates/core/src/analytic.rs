//! Closed-form Steklov spectra and limit values.
//!
//! Everything here is exact up to floating-point rounding and serves as the
//! oracle side of every numerical comparison in the crate.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spectrum::Spectrum;

/// Surface measure of the unit sphere `S^d ⊂ R^{d+1}`.
pub fn sphere_measure(d: usize) -> f64 {
    match d {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (d as f64 - 1.0) * sphere_measure(d - 2),
    }
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Dimension of the space of degree-`k` spherical harmonics on `S^{n-1}`.
pub fn harmonic_dimension(n: usize, k: usize) -> usize {
    let (n, k) = (n as u64, k as u64);
    let all = binomial(n - 1 + k, k);
    let lower = if k >= 2 { binomial(n + k - 3, k - 2) } else { 0 };
    (all - lower) as usize
}

/// Harmonic degree `k` with `σ_j(B^n) = k`.
pub fn ball_degree(n: usize, j: usize) -> usize {
    let mut seen = 0usize;
    let mut k = 0usize;
    loop {
        seen += harmonic_dimension(n, k);
        if j < seen {
            return k;
        }
        k += 1;
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(invalid(format!("dimension must be at least 2, got {n}")));
    }
    Ok(())
}

fn check_count(count: usize) -> Result<()> {
    if count < 1 {
        return Err(invalid("eigenvalue count must be at least 1"));
    }
    Ok(())
}

/// First `count` Steklov eigenvalues of the unit ball `B^n`.
pub fn ball_spectrum(n: usize, count: usize) -> Result<Spectrum> {
    check_dim(n)?;
    check_count(count)?;
    let values = (0..count).map(|j| ball_degree(n, j) as f64).collect();
    Spectrum::new(n, values, 1, Some(sphere_measure(n - 1)))
}

/// The two eigenvalues contributed by harmonic degree `k` to the spectrum of
/// `B^n \ B^n_eps`, in increasing order.
///
/// The radial profile is `a r^k + b r^{2-n-k}` (or `a + b ln r` when `n = 2,
/// k = 0`); the Steklov conditions on both spheres give a 2×2 pencil whose
/// characteristic quadratic is solved in closed form.
pub fn annulus_block(n: usize, k: usize, eps: f64) -> Result<[f64; 2]> {
    check_dim(n)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("inner radius must lie in (0,1), got {eps}")));
    }
    if n == 2 && k == 0 {
        return Ok([0.0, (1.0 + eps) / (eps * (1.0 / eps).ln())]);
    }
    let p = k as f64;
    let q = 2.0 - n as f64 - k as f64;
    let rho = eps.powi((2 * k + n - 2) as i32);
    let a2 = eps * (1.0 - rho);
    let a1 = q * (1.0 + eps * rho) - p * (eps + rho);
    let a0 = p * q * (rho - 1.0);
    let disc = (a1 * a1 - 4.0 * a2 * a0).max(0.0);
    let big = (-a1 + disc.sqrt()) / (2.0 * a2);
    let small = if a0 == 0.0 { 0.0 } else { a0 / (a2 * big) };
    Ok([small, big])
}

/// First `count` Steklov eigenvalues of the spherical shell `B^n \ B^n_eps`.
pub fn annulus_spectrum(n: usize, eps: f64, count: usize) -> Result<Spectrum> {
    check_dim(n)?;
    check_count(count)?;
    let mut pool: Vec<f64> = Vec::new();
    let mut k = 0usize;
    loop {
        let block = annulus_block(n, k, eps)?;
        let mult = harmonic_dimension(n, k);
        for v in block {
            pool.extend(std::iter::repeat_n(v, mult));
        }
        pool.sort_by(f64::total_cmp);
        // Lower roots increase with k, so later blocks cannot undercut this bound.
        if pool.len() >= count && block[0] > pool[count - 1] {
            break;
        }
        k += 1;
    }
    pool.truncate(count);
    let measure = sphere_measure(n - 1) * (1.0 + eps.powi(n as i32 - 1));
    Spectrum::new(n, pool, 1, Some(measure))
}

/// Spectrum of a disjoint union: the sorted multiset union of the parts.
pub fn disjoint_union_spectrum(parts: &[Spectrum], count: usize) -> Result<Spectrum> {
    check_count(count)?;
    let first = parts.first().ok_or_else(|| invalid("disjoint union needs at least one part"))?;
    if parts.iter().any(|p| p.dim != first.dim) {
        return Err(invalid("all parts of a disjoint union must share one dimension"));
    }
    if let Some(p) = parts.iter().position(|p| p.len() < count) {
        return Err(invalid(format!(
            "part {p} supplies {} eigenvalues, {count} required",
            parts[p].len()
        )));
    }
    let mut values: Vec<f64> = parts.iter().flat_map(|p| p.values.iter().copied()).collect();
    values.sort_by(f64::total_cmp);
    values.truncate(count);
    let components = parts.iter().map(|p| p.components).sum();
    let measure = parts
        .iter()
        .map(|p| p.boundary_measure)
        .sum::<Option<f64>>();
    Spectrum::new(first.dim, values, components, measure)
}

/// Scale-invariant eigenvalue `σ |∂Ω|^{1/(n-1)}`.
pub fn normalize(sigma: f64, boundary_measure: f64, n: usize) -> Result<f64> {
    check_dim(n)?;
    if !(boundary_measure > 0.0) {
        return Err(invalid("boundary measure must be positive"));
    }
    Ok(sigma * boundary_measure.powf(1.0 / (n as f64 - 1.0)))
}

/// Limit of the normalized `j`-th eigenvalue of a necklace of `l` unit balls:
/// `σ_j(⊔_l B^n) · (l |S^{n-1}|)^{1/(n-1)}`.
pub fn necklace_limit_value(n: usize, j: usize, l: usize) -> Result<f64> {
    check_dim(n)?;
    if l < 1 {
        return Err(invalid("ball count must be at least 1"));
    }
    let ball = ball_spectrum(n, j + 1)?;
    let union = disjoint_union_spectrum(&vec![ball; l], j + 1)?;
    normalize(union.values[j], l as f64 * sphere_measure(n - 1), n)
}

/// Whether `j^{1/(n-1)} > σ_j(B^n)`, decided in integer arithmetic as
/// `j > σ_j^{n-1}`. Equality returns false.
pub fn ball_beating_predicate(n: usize, j: usize) -> Result<bool> {
    check_dim(n)?;
    if j < 1 {
        return Err(invalid("index j must be at least 1"));
    }
    let k = ball_degree(n, j) as u128;
    let power = (0..n - 1).try_fold(1u128, |acc, _| acc.checked_mul(k));
    Ok(match power {
        Some(p) => (j as u128) > p,
        None => false,
    })
}

/// Parameters of the logarithmic cutoff around an `m`-dimensional
/// submanifold `Σ` of an `n`-dimensional domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub n: usize,
    pub m: usize,
    pub delta: f64,
    pub r0: f64,
    pub sigma_measure: f64,
}

impl CutoffSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < self.m + 2 {
            return Err(invalid(format!(
                "codimension n-m must be at least 2 (n={}, m={})",
                self.n, self.m
            )));
        }
        let d = self.delta;
        if !(d > 0.0 && d < 1.0 && d * d < d && d < self.r0) {
            return Err(invalid(format!(
                "cutoff requires 0 < delta^2 < delta < r0 with delta < 1 (delta={d}, r0={})",
                self.r0
            )));
        }
        if !(self.sigma_measure > 0.0) {
            return Err(invalid("|Σ| must be positive"));
        }
        Ok(())
    }

    pub fn codimension(&self) -> usize {
        self.n - self.m
    }
}

/// Logarithmic cutoff profile: 0 inside `r ≤ δ²`, 1 outside `r ≥ δ`.
pub fn log_cutoff(r: f64, delta: f64) -> f64 {
    if r <= delta * delta {
        0.0
    } else if r >= delta {
        1.0
    } else {
        (2.0 * delta.ln() - r.ln()) / delta.ln()
    }
}

/// Radial derivative of [`log_cutoff`].
pub fn log_cutoff_slope(r: f64, delta: f64) -> f64 {
    if r <= delta * delta || r >= delta {
        0.0
    } else {
        -1.0 / (r * delta.ln())
    }
}

/// `∫_{δ²}^{δ} r^{k-1} dr` for `k = n - m - 2 ≥ 0`, in closed form.
fn shell_moment(k: usize, delta: f64) -> f64 {
    if k == 0 {
        -delta.ln()
    } else {
        let k = k as i32;
        (delta.powi(k) - delta.powi(2 * k)) / k as f64
    }
}

/// Exact product-metric Dirichlet energy of the logarithmic cutoff:
/// `|Σ| |S^{n-m-1}| (ln δ)^{-2} ∫_{δ²}^{δ} r^{n-m-3} dr`.
pub fn cutoff_energy_surgery(spec: &CutoffSpec) -> Result<f64> {
    spec.validate()?;
    let c = spec.codimension();
    let ln = spec.delta.ln();
    Ok(spec.sigma_measure * sphere_measure(c - 1) * shell_moment(c - 2, spec.delta) / (ln * ln))
}

/// Rate factor of the necklace cutoff: `-1/ln ε` for `n = 2`, and
/// `ε^{n-2}(1-ε^{n-2})/(ln ε)²` for `n ≥ 3`.
pub fn necklace_rate(n: usize, eps: f64) -> f64 {
    let ln = eps.ln();
    if n == 2 {
        -1.0 / ln
    } else {
        let p = eps.powi(n as i32 - 2);
        p * (1.0 - p) / (ln * ln)
    }
}

/// Envelope constant `(2l-2)|S^{n-1}|`: one full sphere per cutoff centre.
pub fn necklace_constant(n: usize, l: usize) -> f64 {
    (2 * l - 2) as f64 * sphere_measure(n - 1)
}

/// Upper-bound envelope of the necklace cutoff energy, `C(n,l) ε_n(ε)`.
pub fn cutoff_energy_necklace(n: usize, l: usize, eps: f64) -> Result<f64> {
    check_dim(n)?;
    if l < 2 {
        return Err(invalid("a necklace has at least two balls"));
    }
    if !(eps > 0.0 && eps < 0.9) {
        return Err(invalid(format!(
            "overlap parameter must lie in (0, 0.9), got {eps}"
        )));
    }
    Ok(necklace_constant(n, l) * necklace_rate(n, eps))
}

/// Necklace cutoff profile centred at a contact point: 0 for `r < ε²`,
/// 1 for `r > ε`, logarithmic in between.
pub fn necklace_cutoff(r: f64, eps: f64) -> f64 {
    if r < eps * eps {
        0.0
    } else if r > eps {
        1.0
    } else {
        (r.ln() - 2.0 * eps.ln()) / (eps.ln() - 2.0 * eps.ln())
    }
}

/// Radial derivative of [`necklace_cutoff`].
pub fn necklace_cutoff_slope(r: f64, eps: f64) -> f64 {
    if r < eps * eps || r > eps {
        0.0
    } else {
        1.0 / (r * (eps.ln() - 2.0 * eps.ln()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_spectrum_examples() {
        let s = ball_spectrum(3, 10).unwrap();
        assert_eq!(s.values, vec![0.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0, 2.0, 3.0]);
        assert_eq!(s.multiplicities, vec![1, 3, 5, 1]);
        let s = ball_spectrum(2, 5).unwrap();
        assert_eq!(s.values, vec![0.0, 1.0, 1.0, 2.0, 2.0]);
        for n in 2..6 {
            assert_eq!(ball_spectrum(n, 1).unwrap().values, vec![0.0]);
        }
        assert!(ball_spectrum(1, 3).is_err());
        assert!(ball_spectrum(3, 0).is_err());
        assert!((s.boundary_measure.unwrap() - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn sphere_measures() {
        assert!((sphere_measure(2) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_measure(3) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_measure(4) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn annulus_degree_zero_block() {
        let [lo, hi] = annulus_block(3, 0, 0.1).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - 101.0 / 9.0).abs() < 1e-12);
        // n = 2 logarithmic branch: f = a + b ln r
        let eps: f64 = 0.3;
        let [lo, hi] = annulus_block(2, 0, eps).unwrap();
        assert_eq!(lo, 0.0);
        // hand check: b = σ a, -b/ε = σ(a + b ln ε)
        let (a, b) = (1.0, hi);
        assert!((-b / eps - hi * (a + b * eps.ln())).abs() < 1e-12);
    }

    #[test]
    fn annulus_blocks_satisfy_the_boundary_conditions() {
        for n in 2..5 {
            for k in 0..6 {
                if n == 2 && k == 0 {
                    continue;
                }
                for &eps in &[0.05, 0.3, 0.7] {
                    let p = k as f64;
                    let q = 2.0 - n as f64 - k as f64;
                    for s in annulus_block(n, k, eps).unwrap() {
                        // rows: outer f'(1) = σ f(1), inner -f'(ε) = σ f(ε), in (a, b)
                        let r1 = [p - s, q - s];
                        let r2 = [
                            -p * eps.powf(p - 1.0) - s * eps.powf(p),
                            -q * eps.powf(q - 1.0) - s * eps.powf(q),
                        ];
                        let det = r1[0] * r2[1] - r1[1] * r2[0];
                        let terms = (p * eps.powf(p - 1.0)).abs()
                            + s * eps.powf(p)
                            + (q * eps.powf(q - 1.0)).abs()
                            + s * eps.powf(q);
                        let scale = r1[0].hypot(r1[1]) * terms;
                        assert!(det.abs() < 1e-10 * scale, "n={n} k={k} eps={eps}");
                    }
                }
            }
        }
    }

    #[test]
    fn annulus_lower_roots_increase_with_degree() {
        for n in 2..5 {
            for &eps in &[0.01, 0.2, 0.5, 0.9] {
                let lows: Vec<f64> = (0..12).map(|k| annulus_block(n, k, eps).unwrap()[0]).collect();
                assert!(lows.windows(2).all(|w| w[0] < w[1]), "n={n} eps={eps}: {lows:?}");
            }
        }
    }

    #[test]
    fn annulus_approaches_ball_values() {
        let target = [0.0, 1.0, 1.0, 1.0];
        let mut prev = f64::INFINITY;
        for &eps in &[1e-2, 1e-3, 1e-4] {
            let s = annulus_spectrum(3, eps, 4).unwrap();
            let gap: f64 = s.values.iter().zip(target).map(|(a, b)| (a - b).abs()).sum();
            assert!(gap < prev);
            prev = gap;
        }
        assert!(prev < 1e-6);
        assert!(annulus_spectrum(3, 0.0, 3).is_err());
        assert!(annulus_spectrum(3, 1.0, 3).is_err());
        assert!(annulus_spectrum(3, 0.5, 0).is_err());
    }

    #[test]
    fn disjoint_union_examples() {
        let b = ball_spectrum(3, 4).unwrap();
        let u = disjoint_union_spectrum(&[b.clone(), b.clone()], 4).unwrap();
        assert_eq!(u.values, vec![0.0, 0.0, 1.0, 1.0]);
        assert_eq!(u.components, 2);
        assert_eq!(u.values[2], 1.0);
        let three = disjoint_union_spectrum(&[b.clone(), b.clone(), b.clone()], 4).unwrap();
        assert_eq!(three.multiplicities[0], 3);
        let p = Spectrum::new(3, vec![0.0, 1.0, 2.0], 1, None).unwrap();
        let q = Spectrum::new(3, vec![0.0, 1.5], 1, None).unwrap();
        assert_eq!(disjoint_union_spectrum(&[p.clone(), q.clone()], 2).unwrap().values, vec![0.0, 0.0]);
        // [0,1,2] ∪ [0,1.5] needs five values from each part to certify the merge
        assert!(disjoint_union_spectrum(&[p.clone(), q.clone()], 5).is_err());
        let p5 = Spectrum::new(3, vec![0.0, 1.0, 2.0, 3.0, 4.0], 1, None).unwrap();
        let q5 = Spectrum::new(3, vec![0.0, 1.5, 5.0, 6.0, 7.0], 1, None).unwrap();
        let pq = disjoint_union_spectrum(&[p5, q5], 5).unwrap();
        assert_eq!(pq.values, vec![0.0, 0.0, 1.0, 1.5, 2.0]);
        assert!(disjoint_union_spectrum(&[p.clone(), q], 3).is_err());
        let planar = ball_spectrum(2, 3).unwrap();
        assert!(disjoint_union_spectrum(&[p, planar], 2).is_err());
    }

    #[test]
    fn normalize_examples() {
        let v = normalize(1.0, 4.0 * PI, 3).unwrap();
        assert!((v - (4.0 * PI).sqrt()).abs() < 1e-14);
        assert!((v - 3.5449).abs() < 1e-4);
        assert_eq!(normalize(0.0, 7.0, 4).unwrap(), 0.0);
        assert!(normalize(1.0, 0.0, 3).is_err());
        assert!(normalize(1.0, -1.0, 3).is_err());
    }

    #[test]
    fn necklace_limit_examples() {
        let v = necklace_limit_value(3, 2, 2).unwrap();
        assert!((v - (8.0 * PI).sqrt()).abs() < 1e-12);
        assert!((v - 5.0133).abs() < 1e-4);
        for j in 1..8 {
            let v = necklace_limit_value(2, j, j).unwrap();
            assert!((v - 2.0 * PI * j as f64).abs() < 1e-12);
        }
        assert_eq!(necklace_limit_value(3, 0, 4).unwrap(), 0.0);
        assert!(necklace_limit_value(3, 1, 0).is_err());
    }

    #[test]
    fn predicate_examples() {
        assert!(ball_beating_predicate(3, 5).unwrap());
        assert!(!ball_beating_predicate(3, 4).unwrap());
        assert!(!ball_beating_predicate(3, 1).unwrap());
        assert!(ball_beating_predicate(3, 0).is_err());
        let failures: Vec<usize> = (1..=100).filter(|&j| !ball_beating_predicate(3, j).unwrap()).collect();
        let squares: Vec<usize> = (1..=10).map(|k| k * k).collect();
        assert_eq!(failures, squares);
    }

    #[test]
    fn cutoff_surgery_examples() {
        let spec = CutoffSpec { n: 3, m: 1, delta: (-10.0f64).exp(), r0: 0.5, sigma_measure: 1.0 };
        let e = cutoff_energy_surgery(&spec).unwrap();
        assert!((e - 2.0 * PI / 10.0).abs() < 1e-14);
        let halves: Vec<f64> = [5.0, 10.0, 20.0]
            .iter()
            .map(|t| cutoff_energy_surgery(&CutoffSpec { delta: (-t as f64).exp(), ..spec }).unwrap())
            .collect();
        assert!((halves[0] / halves[1] - 2.0).abs() < 1e-14);
        assert!((halves[1] / halves[2] - 2.0).abs() < 1e-14);
        // n - m = 3: ratio to (δ - δ²)/(ln δ)² is the constant |Σ||S²|
        for &d in &[1e-2, 1e-3, 1e-4] {
            let s = CutoffSpec { n: 4, m: 1, delta: d, r0: 0.5, sigma_measure: 2.0 };
            let ln: f64 = d.ln();
            let ratio = cutoff_energy_surgery(&s).unwrap() / ((d - d * d) / (ln * ln));
            assert!((ratio - 2.0 * 4.0 * PI).abs() < 1e-10);
        }
        let bad = CutoffSpec { n: 3, m: 2, ..spec };
        assert!(cutoff_energy_surgery(&bad).is_err());
        let bad = CutoffSpec { delta: 0.6, r0: 0.5, ..spec };
        assert!(cutoff_energy_surgery(&bad).is_err());
    }

    #[test]
    fn cutoff_necklace_examples() {
        let e = cutoff_energy_necklace(2, 2, (-5.0f64).exp()).unwrap();
        assert!((e - 4.0 * PI / 5.0).abs() < 1e-13);
        assert!((e - 2.5133).abs() < 1e-4);
        let vals: Vec<f64> = [0.1, 0.01, 0.001].iter().map(|&x| cutoff_energy_necklace(3, 2, x).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
        assert!(cutoff_energy_necklace(3, 2, 0.9).is_err());
        assert!(cutoff_energy_necklace(3, 1, 0.1).is_err());
    }

    #[test]
    fn cutoff_profiles_are_continuous() {
        let d: f64 = 1e-3;
        assert!((log_cutoff(d * d * (1.0 + 1e-12), d)).abs() < 1e-10);
        assert!((log_cutoff(d * (1.0 - 1e-12), d) - 1.0).abs() < 1e-10);
        let e: f64 = 0.05;
        assert!(necklace_cutoff(e * e * (1.0 + 1e-12), e).abs() < 1e-10);
        assert!((necklace_cutoff(e * (1.0 - 1e-12), e) - 1.0).abs() < 1e-10);
        // slopes match centred differences
        for &r in &[2e-6, 1e-5, 5e-4] {
            let h = r * 1e-6;
            let fd = (log_cutoff(r + h, d) - log_cutoff(r - h, d)) / (2.0 * h);
            assert!((fd - log_cutoff_slope(r, d)).abs() < 1e-6 * fd.abs());
        }
    }
}
