//! Symmetric triangle rules (barycentric points, weights summing to 1) and
//! Gauss–Legendre rules on `[0, 1]`.

use crate::error::{Error, Result};

pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

fn orbit3(a: f64, w: f64, pts: &mut Vec<[f64; 3]>, ws: &mut Vec<f64>) {
    let b = 1.0 - 2.0 * a;
    for p in [[a, a, b], [a, b, a], [b, a, a]] {
        pts.push(p);
        ws.push(w);
    }
}

/// Dunavant rules of polynomial degree 2, 4 and 5. All points are interior.
pub fn triangle_rule(order: usize) -> Result<TriangleRule> {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match order {
        2 => orbit3(1.0 / 6.0, 1.0 / 3.0, &mut points, &mut weights),
        4 => {
            orbit3(0.445948490915965, 0.223381589678011, &mut points, &mut weights);
            orbit3(0.091576213509771, 0.109951743655322, &mut points, &mut weights);
        }
        5 => {
            points.push([1.0 / 3.0; 3]);
            weights.push(0.225);
            orbit3(0.470142064105115, 0.132394152788506, &mut points, &mut weights);
            orbit3(0.101286507323456, 0.125939180544827, &mut points, &mut weights);
        }
        _ => {
            return Err(Error::Assembly(format!(
                "no triangle rule of order {order}; available orders are 2, 4 and 5"
            )))
        }
    }
    Ok(TriangleRule { points, weights })
}

/// Three-point Gauss–Legendre rule on `[0, 1]`, exact to degree 5.
pub fn gauss3() -> ([f64; 3], [f64; 3]) {
    let r = (0.6f64).sqrt() / 2.0;
    ([0.5 - r, 0.5, 0.5 + r], [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0])
}

/// `n`-point Gauss–Legendre nodes and weights on `[-1, 1]` by Newton
/// iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn triangle_rules_integrate_polynomials() {
        for order in [2, 4, 5] {
            let rule = triangle_rule(order).unwrap();
            for a in 0..=order as u32 {
                for b in 0..=(order as u32 - a) {
                    // ∫ over the reference triangle of x^a y^b, divided by its area 1/2
                    let exact = 2.0 * factorial(a) * factorial(b) / factorial(a + b + 2);
                    let q: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                        .sum();
                    assert!((q - exact).abs() < 1e-13, "order {order}: x^{a} y^{b}");
                }
            }
        }
        assert!(triangle_rule(3).is_err());
    }

    #[test]
    fn gauss_legendre_is_exact_to_degree_2n_minus_1() {
        for n in [1, 2, 5, 12] {
            let (x, w) = gauss_legendre(n);
            for d in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d as i32)).sum();
                let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} d={d}");
            }
        }
    }
}
