//! Cutoff energies: closed forms checked against radial quadrature.

use std::collections::BTreeMap;
use std::time::Instant;

use serde_json::json;

use crate::analytic::{
    cutoff_energy_necklace, cutoff_energy_surgery, log_cutoff_slope, necklace_cutoff_slope, sphere_measure,
    CutoffSpec,
};
use crate::error::{invalid, Result};
use crate::fem::quadrature::gauss_legendre;

use super::report::{check_schedule, Oracle, Row, StudyKind, StudyPoint, StudyReport};
use super::tolerances_for;

const PANELS: usize = 16;
const NODES: usize = 20;

/// `∫_{a}^{b} f(r) dr` with composite Gauss-Legendre in `t = ln r`, where the
/// integrands here are smooth.
pub fn radial_integral(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (x, w) = gauss_legendre(NODES);
    let (ta, tb) = (a.ln(), b.ln());
    let width = (tb - ta) / PANELS as f64;
    let mut total = 0.0;
    for p in 0..PANELS {
        let lo = ta + p as f64 * width;
        for (xi, wi) in x.iter().zip(&w) {
            let t = lo + 0.5 * width * (xi + 1.0);
            let r = t.exp();
            total += 0.5 * width * wi * f(r) * r;
        }
    }
    total
}

/// Dirichlet energy of the logarithmic cutoff around `Σ` by quadrature of
/// `|φ'(r)|² r^{n-m-1}` over the shell `δ² < r < δ`.
pub fn surgery_energy_quadrature(spec: &CutoffSpec) -> Result<f64> {
    spec.validate()?;
    let c = spec.codimension() as i32;
    let d = spec.delta;
    let radial = radial_integral(d * d, d, |r| log_cutoff_slope(r, d).powi(2) * r.powi(c - 1));
    Ok(spec.sigma_measure * sphere_measure(spec.codimension() - 1) * radial)
}

/// Energy of the necklace cutoff over full spherical shells `ε² < r < ε`
/// around each of the `2l - 2` centres.
pub fn necklace_energy_quadrature(n: usize, l: usize, eps: f64) -> Result<f64> {
    if n < 2 || l < 2 || !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("invalid necklace cutoff parameters n={n}, l={l}, eps={eps}")));
    }
    let radial = radial_integral(eps * eps, eps, |r| necklace_cutoff_slope(r, eps).powi(2) * r.powi(n as i32 - 1));
    Ok((2 * l - 2) as f64 * sphere_measure(n - 1) * radial)
}

/// Shape of the surgery energy in `δ`: `-1/ln δ` in codimension two,
/// `(δ^k - δ^{2k}) / (k (ln δ)²)` with `k = n - m - 2` above.
pub fn surgery_envelope(codim: usize, delta: f64) -> f64 {
    let ln = delta.ln();
    if codim == 2 {
        -1.0 / ln
    } else {
        let k = (codim - 2) as i32;
        (delta.powi(k) - delta.powi(2 * k)) / (k as f64 * ln * ln)
    }
}

/// Ratio of the necklace envelope to the full-shell energy: the envelope is
/// exact for `n ≤ 3` and exceeds the shell energy by `n - 2` above.
pub fn necklace_envelope_factor(n: usize) -> f64 {
    if n <= 3 {
        1.0
    } else {
        (n - 2) as f64
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn verify_cutoff_surgery(
    n: usize,
    m: usize,
    deltas: &[f64],
    r0: f64,
    sigma_measure: f64,
    overrides: &BTreeMap<String, f64>,
) -> Result<StudyReport> {
    check_schedule(deltas, 1)?;
    let start = Instant::now();
    let mut points = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let spec = CutoffSpec { n, m, delta, r0, sigma_measure };
        let closed = cutoff_energy_surgery(&spec)?;
        let quad = surgery_energy_quadrature(&spec)?;
        let mut row = Row::exact(0, closed);
        row.oracle = Some(quad);
        row.reference = Some(surgery_envelope(n - m, delta));
        row.gap = Some(rel(closed, quad));
        points.push(StudyPoint::analytic(delta, vec![row]));
    }
    let oracles = vec![Oracle {
        name: "radial quadrature".into(),
        value: points[0].rows[0].oracle.unwrap_or(0.0),
        source: format!("composite Gauss-Legendre, {PANELS} panels of {NODES} nodes in ln r"),
    }];
    let config = json!({ "kind": "surgery", "n": n, "m": m, "deltas": deltas, "r0": r0, "sigma_measure": sigma_measure });
    StudyReport::assemble(
        StudyKind::CutoffSurgery,
        deltas.to_vec(),
        config,
        tolerances_for(StudyKind::CutoffSurgery, overrides),
        oracles,
        points,
        start.elapsed().as_secs_f64(),
    )
}

pub fn verify_cutoff_necklace(
    n: usize,
    l: usize,
    eps: &[f64],
    overrides: &BTreeMap<String, f64>,
) -> Result<StudyReport> {
    check_schedule(eps, 1)?;
    let start = Instant::now();
    let factor = necklace_envelope_factor(n);
    let mut points = Vec::with_capacity(eps.len());
    for &e in eps {
        let closed = cutoff_energy_necklace(n, l, e)?;
        let quad = necklace_energy_quadrature(n, l, e)?;
        let mut row = Row::exact(0, closed);
        row.oracle = Some(quad);
        row.reference = Some(factor);
        row.gap = Some(rel(closed, factor * quad));
        points.push(StudyPoint::analytic(e, vec![row]));
    }
    let oracles = vec![Oracle {
        name: "radial quadrature".into(),
        value: points[0].rows[0].oracle.unwrap_or(0.0),
        source: format!("composite Gauss-Legendre over full shells, scaled by the envelope factor {factor}"),
    }];
    let config = json!({ "kind": "necklace", "n": n, "l": l, "eps": eps });
    let mut report = StudyReport::assemble(
        StudyKind::CutoffNecklace,
        eps.to_vec(),
        config,
        tolerances_for(StudyKind::CutoffNecklace, overrides),
        oracles,
        points,
        start.elapsed().as_secs_f64(),
    )?;
    if n >= 4 {
        report.notes.push(format!(
            "for n = {n} the envelope is an upper bound, {factor} times the shell energy"
        ));
    }
    Ok(report)
}
