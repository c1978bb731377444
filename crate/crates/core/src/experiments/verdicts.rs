//! Pass/fail clauses. Everything here reads only the stored points and
//! tolerances of a report, so verdicts can be recomputed from disk.

use std::collections::BTreeMap;

use crate::error::{invalid, Result};

use super::report::{Row, StudyKind, StudyPoint, StudyReport, Verdict};

type Judged = (Vec<Verdict>, BTreeMap<String, f64>);

pub(crate) fn judge(report: &StudyReport) -> Result<Judged> {
    if report.points.is_empty() {
        return Err(invalid("report has no points"));
    }
    let mut summary = BTreeMap::new();
    let mut verdicts = match report.kind {
        StudyKind::Surgery => surgery(report, &mut summary)?,
        StudyKind::Necklace => necklace(report, &mut summary)?,
        StudyKind::AnnulusContinuity => continuity(report, &mut summary)?,
        StudyKind::Witness => witness(report, &mut summary)?,
        StudyKind::CutoffSurgery => cutoff_surgery(report)?,
        StudyKind::CutoffNecklace => cutoff_necklace(report)?,
    };
    if report.kind.is_numerical() {
        verdicts.push(galerkin(&report.points, report.tolerance("galerkin_slack")?));
    }
    Ok((verdicts, summary))
}

fn verdict(clause: &str, passed: bool, observed: f64, oracle: (&str, f64), tolerance: f64, detail: String) -> Verdict {
    Verdict {
        clause: clause.to_string(),
        passed,
        // empty sequences leave -inf behind; JSON cannot carry it
        observed: if observed.is_finite() { observed } else { 0.0 },
        oracle: oracle.0.to_string(),
        oracle_value: oracle.1,
        tolerance,
        detail,
    }
}

fn row(p: &StudyPoint, j: usize) -> Result<&Row> {
    p.row(j).ok_or_else(|| invalid(format!("point {} lacks index {j}", p.parameter)))
}

fn field(r: &Row, name: &str, v: Option<f64>) -> Result<f64> {
    v.ok_or_else(|| invalid(format!("row j={} lacks {name}", r.j)))
}

/// Largest step `x[k+1] - x[k]`; negative when strictly decreasing.
fn max_increase(xs: &[f64]) -> f64 {
    xs.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
}

/// Least-squares slope of `ln y` against `ln x`, over positive pairs.
fn log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn the_j(report: &StudyReport) -> Result<usize> {
    report.points[0].rows.first().map(|r| r.j).ok_or_else(|| invalid("point without rows"))
}

fn surgery(report: &StudyReport, summary: &mut BTreeMap<String, f64>) -> Result<Vec<Verdict>> {
    let j = the_j(report)?;
    let rows: Vec<&Row> = report.points.iter().map(|p| row(p, j)).collect::<Result<_>>()?;
    let gaps: Vec<f64> = rows.iter().map(|r| field(r, "gap", r.gap)).collect::<Result<_>>()?;
    let oracle = field(rows[0], "oracle", rows[0].oracle)?;
    let noise = report.tolerance("gap_noise")?;
    let terminal = report.tolerance("terminal_gap")?;
    let deltas: Vec<f64> = report.points.iter().map(|p| p.parameter).collect();
    let envelope: Vec<f64> = rows.iter().filter_map(|r| r.reference).collect();
    if let Some(s) = log_slope(&deltas, &gaps) {
        summary.insert("gap_rate_delta".into(), s);
    }
    if envelope.len() == gaps.len() {
        if let Some(s) = log_slope(&envelope, &gaps) {
            summary.insert("gap_rate_envelope".into(), s);
        }
    }
    let last = *gaps.last().unwrap();
    summary.insert("terminal_gap".into(), last);
    let name = format!("annulus sigma_bar_{j}");
    let inc = if gaps.len() > 1 { max_increase(&gaps) } else { f64::NEG_INFINITY };
    Ok(vec![
        verdict(
            "gap sequence strictly decreasing",
            inc < noise,
            inc,
            (&name, oracle),
            noise,
            format!("relative gaps {gaps:?}"),
        ),
        verdict(
            "terminal gap below tolerance",
            last < terminal,
            last,
            (&name, oracle),
            terminal,
            format!("relative gap {last:.3e} at delta = {}", deltas.last().unwrap()),
        ),
    ])
}

fn necklace(report: &StudyReport, summary: &mut BTreeMap<String, f64>) -> Result<Vec<Verdict>> {
    let noise = report.tolerance("trend_noise")?;
    let terminal = report.tolerance("terminal_gap")?;
    let s1: Vec<f64> = report.points.iter().map(|p| row(p, 1).map(|r| r.value)).collect::<Result<_>>()?;
    let s2: Vec<f64> = report.points.iter().map(|p| row(p, 2).map(|r| r.value)).collect::<Result<_>>()?;
    let last = row(report.points.last().unwrap(), 2)?;
    let limit = field(last, "oracle", last.oracle)?;
    let bar = field(last, "normalized", last.normalized)?;
    let gap = (bar - limit).abs() / limit;
    let inc1 = if s1.len() > 1 { max_increase(&s1) } else { f64::NEG_INFINITY };
    let far = |v: &f64| (v - 1.0).abs();
    let approach = far(s2.last().unwrap()) - far(&s2[0]);
    summary.insert("terminal_sigma_1".into(), *s1.last().unwrap());
    summary.insert("terminal_sigma_2".into(), *s2.last().unwrap());
    summary.insert("terminal_sigma_bar_2".into(), bar);
    summary.insert("terminal_gap".into(), gap);
    Ok(vec![
        verdict(
            "sigma_1 decreases toward 0",
            inc1 < 0.0 && *s1.last().unwrap() < s1[0],
            inc1,
            ("disjoint union sigma_1", 0.0),
            0.0,
            format!("sigma_1 along the ladder {s1:?}"),
        ),
        verdict(
            "sigma_2 approaches 1",
            approach <= noise,
            approach,
            ("disjoint union sigma_2", 1.0),
            noise,
            format!("sigma_2 along the ladder {s2:?}"),
        ),
        verdict(
            "terminal sigma_bar_2 near the necklace limit",
            gap < terminal,
            gap,
            ("necklace limit sigma_bar_2", limit),
            terminal,
            format!("sigma_bar_2 = {bar:.8} against {limit:.8}"),
        ),
    ])
}

fn continuity(report: &StudyReport, summary: &mut BTreeMap<String, f64>) -> Result<Vec<Verdict>> {
    let noise = report.tolerance("gap_noise")?;
    let terminal = report.tolerance("terminal_gap")?;
    let js: Vec<usize> = report.points[0].rows.iter().map(|r| r.j).collect();
    let mut zero = 0.0f64;
    let mut worst_inc = (f64::NEG_INFINITY, 0usize);
    let mut worst_last = (0.0f64, 0usize, 0.0f64);
    for &j in &js {
        let rows: Vec<&Row> = report.points.iter().map(|p| row(p, j)).collect::<Result<_>>()?;
        let gaps: Vec<f64> = rows.iter().map(|r| field(r, "gap", r.gap)).collect::<Result<_>>()?;
        if j == 0 {
            zero = gaps.iter().fold(0.0, |a, g| a.max(*g));
            continue;
        }
        if gaps.len() > 1 {
            let inc = max_increase(&gaps);
            if inc > worst_inc.0 {
                worst_inc = (inc, j);
            }
        }
        let g = *gaps.last().unwrap();
        if g >= worst_last.0 {
            worst_last = (g, j, field(rows[0], "oracle", rows[0].oracle)?);
        }
    }
    summary.insert("max_terminal_gap".into(), worst_last.0);
    Ok(vec![
        verdict(
            "zero eigenvalue gap vanishes",
            zero == 0.0,
            zero,
            ("ball sigma_0", 0.0),
            0.0,
            "the constant is an eigenfunction of every annulus".into(),
        ),
        verdict(
            "gaps nonincreasing as eps shrinks",
            worst_inc.0 <= noise,
            worst_inc.0,
            ("ball sigma_j", 0.0),
            noise,
            format!("largest increase at j = {}", worst_inc.1),
        ),
        verdict(
            "terminal gaps below tolerance",
            worst_last.0 < terminal,
            worst_last.0,
            (&format!("ball sigma_{}", worst_last.1), worst_last.2),
            terminal,
            format!("largest terminal gap at j = {}", worst_last.1),
        ),
    ])
}

fn witness(report: &StudyReport, summary: &mut BTreeMap<String, f64>) -> Result<Vec<Verdict>> {
    let j = the_j(report)?;
    let factor = report.tolerance("residual_factor")?;
    let mut best: Option<(&StudyPoint, &Row, f64)> = None;
    for p in &report.points {
        let r = row(p, j)?;
        let bar = field(r, "normalized", r.normalized)?;
        if best.map_or(true, |b| bar > b.2) {
            best = Some((p, r, bar));
        }
    }
    let (p, r, bar) = best.unwrap();
    let ball = field(r, "oracle", r.oracle)?;
    let margin = bar - ball;
    let res = r.normalized_residual();
    summary.insert("best_eps".into(), p.parameter);
    summary.insert("best_delta".into(), p.secondary.unwrap_or(0.0));
    summary.insert("best_sigma_bar".into(), bar);
    summary.insert("margin".into(), margin);
    summary.insert("normalized_residual".into(), res);
    let at = format!("eps = {}, delta = {}", p.parameter, p.secondary.unwrap_or(0.0));
    let name = format!("ball sigma_bar_{j}");
    Ok(vec![
        verdict(
            "positive margin over the ball",
            margin > 0.0,
            margin,
            (&name, ball),
            0.0,
            format!("best point {at}, sigma_bar = {bar:.10}"),
        ),
        verdict(
            "margin exceeds the fit residual",
            margin > factor * res,
            margin,
            (&name, ball),
            factor * res,
            format!("{factor} x normalized residual {res:.3e} at {at}"),
        ),
    ])
}

/// Closed form against quadrature plus the exactness of the decay ladder.
fn cutoff_common(report: &StudyReport, rel: f64) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, Verdict)> {
    let values: Vec<f64> = report.points.iter().map(|p| row(p, 0).map(|r| r.value)).collect::<Result<_>>()?;
    let quad: Vec<f64> = report
        .points
        .iter()
        .map(|p| row(p, 0).and_then(|r| field(r, "oracle", r.oracle)))
        .collect::<Result<_>>()?;
    let errs: Vec<f64> = report
        .points
        .iter()
        .map(|p| row(p, 0).and_then(|r| field(r, "gap", r.gap)))
        .collect::<Result<_>>()?;
    let worst = errs.iter().fold(0.0f64, |a, e| a.max(*e));
    let k = errs.iter().position(|e| *e == worst).unwrap_or(0);
    let v = verdict(
        "closed form matches quadrature",
        worst < rel,
        worst,
        ("radial quadrature", quad[k]),
        rel,
        format!("largest relative error at {} = {}", report.parameter, report.points[k].parameter),
    );
    Ok((values, quad, errs, v))
}

fn cutoff_surgery(report: &StudyReport) -> Result<Vec<Verdict>> {
    let (values, _, _, first) = cutoff_common(report, report.tolerance("quadrature_rel")?)?;
    let exact = report.tolerance("decay_exact")?;
    let shape: Vec<f64> = report
        .points
        .iter()
        .map(|p| row(p, 0).and_then(|r| field(r, "reference", r.reference)))
        .collect::<Result<_>>()?;
    // successive ratios of the energy must equal those of the envelope
    let mut worst = 0.0f64;
    let mut ratios = Vec::new();
    for k in 1..values.len() {
        let got = values[k - 1] / values[k];
        let want = shape[k - 1] / shape[k];
        ratios.push(got);
        worst = worst.max((got - want).abs() / want);
    }
    let dec = if values.len() > 1 { max_increase(&values) } else { f64::NEG_INFINITY };
    Ok(vec![
        first,
        verdict(
            "decay ladder follows the envelope",
            worst < exact,
            worst,
            ("envelope ratio", shape.first().zip(shape.get(1)).map_or(1.0, |(a, b)| a / b)),
            exact,
            format!("successive energy ratios {ratios:?}"),
        ),
        verdict(
            "energy decreases along the ladder",
            dec < 0.0,
            dec,
            ("limit energy", 0.0),
            0.0,
            format!("energies {values:?}"),
        ),
    ])
}

fn cutoff_necklace(report: &StudyReport) -> Result<Vec<Verdict>> {
    let rel = report.tolerance("quadrature_rel")?;
    let (values, quad, _, first) = cutoff_common(report, rel)?;
    // relative excess of the shell energy over its envelope; rounding only
    let excess = values.iter().zip(&quad).map(|(v, q)| (q - v) / q).fold(f64::NEG_INFINITY, f64::max);
    let dec = if values.len() > 1 { max_increase(&values) } else { f64::NEG_INFINITY };
    Ok(vec![
        first,
        verdict(
            "envelope bounds the shell energy",
            excess <= rel,
            excess,
            ("radial quadrature", quad[0]),
            rel,
            "largest relative excess of quadrature over envelope".into(),
        ),
        verdict(
            "energy decreases as eps shrinks",
            dec < 0.0,
            dec,
            ("limit energy", 0.0),
            0.0,
            format!("energies {values:?}"),
        ),
    ])
}

/// Raw values must not increase under refinement and must stay above the
/// extrapolated limit, up to the fit residual.
fn galerkin(points: &[StudyPoint], slack: f64) -> Verdict {
    let mut worst = f64::NEG_INFINITY;
    let mut at = String::new();
    for p in points {
        for r in p.rows.iter().filter(|r| !r.raw.is_empty()) {
            let scale = r.value.abs().max(1.0);
            let mono = if r.raw.len() > 1 { max_increase(&r.raw) / scale } else { f64::NEG_INFINITY };
            let bound = (r.value - r.residual - r.raw.last().unwrap()) / scale;
            let v = mono.max(bound);
            if v > worst {
                worst = v;
                at = format!("parameter {} index {}", p.parameter, r.j);
            }
        }
    }
    verdict(
        "raw values bound the limit from above",
        worst <= slack,
        worst,
        ("extrapolated limit", 0.0),
        slack,
        format!("worst case at {at}"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn increases_and_slopes() {
        assert!(max_increase(&[3.0, 2.0, 1.0]) < 0.0);
        assert_eq!(max_increase(&[3.0, 2.0, 2.5]), 0.5);
        let x = [0.1, 0.01, 0.001];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(2)).collect();
        assert!((log_slope(&x, &y).unwrap() - 2.0).abs() < 1e-12);
        assert!(log_slope(&[1.0], &[1.0]).is_none());
    }
}
