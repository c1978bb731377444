//! Convergence sweeps, the ball-beating witness search and cutoff checks.
//!
//! Each study returns a [`StudyReport`] whose verdicts are derived from the
//! stored per-point data only. Oracle values come from [`crate::analytic`],
//! never from the finite-element side.

pub mod cutoff;
pub mod extrapolate;
pub mod report;
mod verdicts;

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analytic::{annulus_spectrum, ball_spectrum, disjoint_union_spectrum, necklace_limit_value};
use crate::domain::{DomainSpec, NecklaceBase};
use crate::error::{invalid, Result};
use crate::solver::{solve_spectrum, SolveResult, SolverConfig};

pub use cutoff::{verify_cutoff_necklace, verify_cutoff_surgery};
pub use extrapolate::{extrapolate, Extrapolation};
pub use report::{Oracle, Row, StudyKind, StudyPoint, StudyReport, Verdict, REPORT_SCHEMA};

/// Solver hook, so callers can route solves through a cache.
pub type SolveFn<'a> = dyn Fn(&DomainSpec, &SolverConfig) -> Result<SolveResult> + Sync + 'a;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyOptions {
    /// Template for every point; `h` and `count` are set per point.
    pub solver: SolverConfig,
    /// Coarsest mesh size as a fraction of the thinnest feature.
    pub h_factor: f64,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            solver: SolverConfig { levels: 4, m_max: 3, ..SolverConfig::default() },
            h_factor: 0.25,
        }
    }
}

impl StudyOptions {
    pub fn point_config(&self, spec: &DomainSpec, count: usize) -> SolverConfig {
        let feature = spec.feature_size().unwrap_or(1.0);
        SolverConfig { h: feature * self.h_factor, count, ..self.solver.clone() }
    }
}

/// Default tolerances of a study kind, with `overrides` applied on top.
pub fn tolerances_for(kind: StudyKind, overrides: &BTreeMap<String, f64>) -> BTreeMap<String, f64> {
    let base: &[(&str, f64)] = match kind {
        StudyKind::Surgery => &[("terminal_gap", 0.02), ("gap_noise", 0.0), ("galerkin_slack", 1e-9)],
        StudyKind::Necklace => &[("terminal_gap", 0.03), ("trend_noise", 1e-6), ("galerkin_slack", 1e-9)],
        StudyKind::AnnulusContinuity => &[("terminal_gap", 1e-2), ("gap_noise", 0.0)],
        StudyKind::Witness => &[("residual_factor", 3.0), ("galerkin_slack", 1e-9)],
        StudyKind::CutoffSurgery => &[("quadrature_rel", 1e-8), ("decay_exact", 1e-12)],
        StudyKind::CutoffNecklace => &[("quadrature_rel", 1e-8)],
    };
    let mut out: BTreeMap<String, f64> = base.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    for (k, v) in overrides {
        if out.contains_key(k) {
            out.insert(k.clone(), *v);
        }
    }
    out
}

/// Runs studies with a given solver and tolerance overrides.
pub struct Runner<'a> {
    pub options: StudyOptions,
    pub overrides: BTreeMap<String, f64>,
    pub solve: &'a SolveFn<'a>,
}

impl Runner<'static> {
    pub fn new(options: StudyOptions) -> Self {
        Self { options, overrides: BTreeMap::new(), solve: &solve_spectrum }
    }
}

fn relative_gap(value: f64, oracle: f64) -> f64 {
    if oracle == 0.0 {
        value.abs()
    } else {
        (value - oracle).abs() / oracle.abs()
    }
}

fn decreasing_ladder(schedule: &[f64], min: usize) -> Result<()> {
    report::check_schedule(schedule, min)?;
    if schedule.windows(2).any(|w| w[1] > w[0]) {
        return Err(invalid(format!("ladder must decrease toward the limit: {schedule:?}")));
    }
    Ok(())
}

impl Runner<'_> {
    fn solve_points(&self, specs: &[DomainSpec], count: usize) -> Result<Vec<SolveResult>> {
        specs
            .par_iter()
            .map(|s| (self.solve)(s, &self.options.point_config(s, count)))
            .collect()
    }

    fn config(&self, study: serde_json::Value) -> serde_json::Value {
        json!({ "study": study, "options": self.options })
    }

    /// Ball-tube domains against the annulus they degenerate to as `δ → 0`.
    pub fn surgery_study(&self, eps: f64, deltas: &[f64], j: usize) -> Result<StudyReport> {
        decreasing_ladder(deltas, 3)?;
        if j < 1 {
            return Err(invalid("index j must be at least 1"));
        }
        let start = Instant::now();
        let annulus = annulus_spectrum(3, eps, j + 1)?;
        let target = annulus.normalized(j).ok_or_else(|| invalid("annulus oracle lacks a boundary measure"))?;
        let specs: Vec<DomainSpec> =
            deltas.iter().map(|&d| DomainSpec::ball_tube(3, eps, d)).collect::<Result<_>>()?;
        let results = self.solve_points(&specs, j + 1)?;
        let mut points = Vec::with_capacity(results.len());
        for (&delta, res) in deltas.iter().zip(&results) {
            let mut row = Row::from_solve(res, j)?;
            row.oracle = Some(target);
            row.reference = Some(-1.0 / delta.ln());
            row.gap = row.normalized.map(|v| relative_gap(v, target));
            points.push(StudyPoint::from_solve(delta, res, vec![row]));
        }
        let oracles = vec![Oracle {
            name: format!("annulus sigma_bar_{j}"),
            value: target,
            source: format!("closed-form spectrum of the shell with inner radius {eps}"),
        }];
        let mut report = StudyReport::assemble(
            StudyKind::Surgery,
            deltas.to_vec(),
            self.config(json!({ "kind": "surgery", "eps": eps, "deltas": deltas, "j": j })),
            tolerances_for(StudyKind::Surgery, &self.overrides),
            oracles,
            points,
            start.elapsed().as_secs_f64(),
        )?;
        report.notes.push("reference column: the cutoff envelope -1/ln(delta), not a pass criterion".into());
        Ok(report)
    }

    /// Necklaces of `l` unit balls against the disjoint union as `ε → 0`.
    pub fn necklace_study(&self, dim: usize, l: usize, eps: &[f64], j_max: usize) -> Result<StudyReport> {
        decreasing_ladder(eps, 3)?;
        if j_max < 2 {
            return Err(invalid("necklace studies track at least j = 2"));
        }
        let start = Instant::now();
        let union = disjoint_union_spectrum(&vec![ball_spectrum(dim, j_max + 1)?; l], j_max + 1)?;
        let limits: Vec<f64> = (0..=j_max).map(|j| necklace_limit_value(dim, j, l)).collect::<Result<_>>()?;
        let specs: Vec<DomainSpec> =
            eps.iter().map(|&e| DomainSpec::necklace(dim, l, e, NecklaceBase::Ball)).collect::<Result<_>>()?;
        let results = self.solve_points(&specs, j_max + 1)?;
        let mut points = Vec::with_capacity(results.len());
        for (&e, res) in eps.iter().zip(&results) {
            let rows = (0..=j_max)
                .map(|j| {
                    let mut row = Row::from_solve(res, j)?;
                    row.oracle = Some(limits[j]);
                    row.reference = Some(union.values[j]);
                    row.gap = row.normalized.map(|v| relative_gap(v, limits[j]));
                    Ok(row)
                })
                .collect::<Result<Vec<_>>>()?;
            points.push(StudyPoint::from_solve(e, res, rows));
        }
        let oracles = vec![
            Oracle {
                name: "disjoint union sigma_2".into(),
                value: union.values[2],
                source: format!("closed-form spectrum of {l} disjoint unit balls"),
            },
            Oracle {
                name: "necklace limit sigma_bar_2".into(),
                value: limits[2],
                source: format!("union spectrum normalized by {l} unit spheres"),
            },
        ];
        StudyReport::assemble(
            StudyKind::Necklace,
            eps.to_vec(),
            self.config(json!({ "kind": "necklace", "dim": dim, "l": l, "eps": eps, "j_max": j_max })),
            tolerances_for(StudyKind::Necklace, &self.overrides),
            oracles,
            points,
            start.elapsed().as_secs_f64(),
        )
    }

    /// Searches a grid of ball-tube domains for one whose normalized `σ_j`
    /// exceeds the ball's. A grid value `eps = 0` stands for the ball itself.
    pub fn witness_search(&self, j: usize, eps_grid: &[f64], deltas: &DeltaGrid) -> Result<StudyReport> {
        report::check_schedule(eps_grid, 1)?;
        if j < 1 {
            return Err(invalid("index j must be at least 1"));
        }
        let start = Instant::now();
        let ball = ball_spectrum(3, j + 1)?;
        let target = ball.normalized(j).unwrap();
        let mut pairs = Vec::new();
        for &e in eps_grid {
            if e == 0.0 {
                pairs.push((0.0, 0.0));
            } else {
                pairs.extend(deltas.for_eps(e).into_iter().map(|d| (e, d)));
            }
        }
        let specs: Vec<Option<DomainSpec>> = pairs
            .iter()
            .map(|&(e, d)| if e == 0.0 { Ok(None) } else { DomainSpec::ball_tube(3, e, d).map(Some) })
            .collect::<Result<_>>()?;
        let live: Vec<DomainSpec> = specs.iter().flatten().cloned().collect();
        let mut results = self.solve_points(&live, j + 1)?.into_iter();
        let mut points = Vec::with_capacity(pairs.len());
        for (&(e, d), spec) in pairs.iter().zip(&specs) {
            let mut point = match spec {
                None => {
                    let mut row = Row::exact(j, ball.values[j]);
                    row.normalized = Some(target);
                    row.oracle = Some(target);
                    row.gap = Some(ball_margin(target, target));
                    StudyPoint::analytic(e, vec![row])
                }
                Some(_) => {
                    let res = results.next().unwrap();
                    let mut row = Row::from_solve(&res, j)?;
                    row.oracle = Some(target);
                    row.gap = row.normalized.map(|v| ball_margin(v, target));
                    StudyPoint::from_solve(e, &res, vec![row])
                }
            };
            point.secondary = Some(d);
            points.push(point);
        }
        let oracles = vec![Oracle {
            name: format!("ball sigma_bar_{j}"),
            value: target,
            source: "closed-form spectrum of the unit ball".into(),
        }];
        StudyReport::assemble(
            StudyKind::Witness,
            eps_grid.to_vec(),
            self.config(json!({ "kind": "witness", "j": j, "eps_grid": eps_grid, "deltas": deltas })),
            tolerances_for(StudyKind::Witness, &self.overrides),
            oracles,
            points,
            start.elapsed().as_secs_f64(),
        )
    }
}

/// Signed margin of a normalized eigenvalue over the ball's.
pub fn ball_margin(sigma_bar: f64, ball_sigma_bar: f64) -> f64 {
    sigma_bar - ball_sigma_bar
}

/// Tube radii explored for each hole radius in a witness search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaGrid {
    /// `δ = r ε` for each ratio `r`.
    Ratios(Vec<f64>),
    Absolute(Vec<f64>),
}

impl DeltaGrid {
    /// Admissible radii `0 < δ < ε` for a given `ε`.
    pub fn for_eps(&self, eps: f64) -> Vec<f64> {
        let all: Vec<f64> = match self {
            DeltaGrid::Ratios(r) => r.iter().map(|r| r * eps).collect(),
            DeltaGrid::Absolute(d) => d.clone(),
        };
        all.into_iter().filter(|d| *d > 0.0 && *d < eps).collect()
    }
}

/// Closed-form gaps between shell and ball spectra as the hole shrinks.
pub fn annulus_continuity_check(
    n: usize,
    eps: &[f64],
    j_max: usize,
    overrides: &BTreeMap<String, f64>,
) -> Result<StudyReport> {
    decreasing_ladder(eps, 1)?;
    let start = Instant::now();
    let ball = ball_spectrum(n, j_max + 1)?;
    let mut points = Vec::with_capacity(eps.len());
    for &e in eps {
        let shell = annulus_spectrum(n, e, j_max + 1)?;
        let rows = (0..=j_max)
            .map(|j| {
                let mut row = Row::exact(j, shell.values[j]);
                row.normalized = shell.normalized(j);
                row.oracle = Some(ball.values[j]);
                row.gap = Some((shell.values[j] - ball.values[j]).abs());
                row
            })
            .collect();
        points.push(StudyPoint::analytic(e, rows));
    }
    let oracles = vec![Oracle {
        name: "ball sigma_j".into(),
        value: ball.values[j_max],
        source: format!("closed-form spectrum of the unit ball, j <= {j_max}"),
    }];
    let mut report = StudyReport::assemble(
        StudyKind::AnnulusContinuity,
        eps.to_vec(),
        json!({ "study": { "kind": "annulus", "n": n, "eps": eps, "j_max": j_max } }),
        tolerances_for(StudyKind::AnnulusContinuity, overrides),
        oracles,
        points,
        start.elapsed().as_secs_f64(),
    )?;
    report.notes.push("point removal is codimension n; this is a companion check, not a surgery instance".into());
    Ok(report)
}
