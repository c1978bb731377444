use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::domain::DomainSpec;
use crate::error::{invalid, Error, Result};
use crate::solver::SolveResult;
use crate::spectrum::Spectrum;

use super::verdicts::judge;

pub const REPORT_SCHEMA: &str = "steklov-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    Surgery,
    Necklace,
    AnnulusContinuity,
    Witness,
    CutoffSurgery,
    CutoffNecklace,
}

impl StudyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StudyKind::Surgery => "surgery",
            StudyKind::Necklace => "necklace",
            StudyKind::AnnulusContinuity => "annulus_continuity",
            StudyKind::Witness => "witness",
            StudyKind::CutoffSurgery => "cutoff_surgery",
            StudyKind::CutoffNecklace => "cutoff_necklace",
        }
    }

    /// Name of the swept parameter.
    pub fn parameter(self) -> &'static str {
        match self {
            StudyKind::Surgery | StudyKind::CutoffSurgery => "delta",
            _ => "eps",
        }
    }

    /// Whether points carry finite-element solves.
    pub fn is_numerical(self) -> bool {
        matches!(self, StudyKind::Surgery | StudyKind::Necklace | StudyKind::Witness)
    }
}

/// A reference value and where it comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Oracle {
    pub name: String,
    pub value: f64,
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub clause: String,
    pub passed: bool,
    pub observed: f64,
    /// Name of the oracle the clause is judged against.
    pub oracle: String,
    pub oracle_value: f64,
    pub tolerance: f64,
    pub detail: String,
}

/// One index `j` at one ladder point.
///
/// What `value`, `oracle`, `reference` and `gap` hold depends on the study;
/// see the README's column dictionary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub j: usize,
    pub value: f64,
    pub normalized: Option<f64>,
    /// Unextrapolated value on each mesh level, coarsest first.
    pub raw: Vec<f64>,
    pub rate: Option<f64>,
    pub residual: f64,
    pub flagged: Option<String>,
    pub oracle: Option<f64>,
    pub reference: Option<f64>,
    pub gap: Option<f64>,
}

impl Row {
    /// Row for an entry of a finite-element solve.
    pub fn from_solve(result: &SolveResult, j: usize) -> Result<Self> {
        let value = *result
            .spectrum
            .values
            .get(j)
            .ok_or_else(|| invalid(format!("solve holds {} values, index {j} requested", result.spectrum.len())))?;
        let fit = &result.fits[j];
        Ok(Self {
            j,
            value,
            normalized: result.normalized(j),
            raw: result.raw.iter().map(|s| s.values[j]).collect(),
            rate: fit.rate,
            residual: fit.residual,
            flagged: fit.flagged.clone(),
            oracle: None,
            reference: None,
            gap: None,
        })
    }

    /// Row for a value known in closed form.
    pub fn exact(j: usize, value: f64) -> Self {
        Self {
            j,
            value,
            normalized: None,
            raw: Vec::new(),
            rate: None,
            residual: 0.0,
            flagged: None,
            oracle: None,
            reference: None,
            gap: None,
        }
    }

    /// Fit residual converted to normalized units.
    pub fn normalized_residual(&self) -> f64 {
        match self.normalized {
            Some(nv) if self.value > 0.0 => self.residual * nv / self.value,
            _ => self.residual,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyPoint {
    pub parameter: f64,
    /// Second grid coordinate (the tube radius in a witness search).
    pub secondary: Option<f64>,
    pub domain: Option<DomainSpec>,
    pub h_ladder: Vec<f64>,
    pub node_counts: Vec<usize>,
    pub spectrum: Option<Spectrum>,
    pub rows: Vec<Row>,
    pub seconds: f64,
}

impl StudyPoint {
    pub fn analytic(parameter: f64, rows: Vec<Row>) -> Self {
        Self {
            parameter,
            secondary: None,
            domain: None,
            h_ladder: Vec::new(),
            node_counts: Vec::new(),
            spectrum: None,
            rows,
            seconds: 0.0,
        }
    }

    pub fn from_solve(parameter: f64, result: &SolveResult, rows: Vec<Row>) -> Self {
        Self {
            parameter,
            secondary: None,
            domain: Some(result.domain.clone()),
            h_ladder: result.h_ladder.clone(),
            node_counts: result.node_counts.clone(),
            spectrum: Some(result.spectrum.clone()),
            rows,
            seconds: result.seconds,
        }
    }

    pub fn row(&self, j: usize) -> Option<&Row> {
        self.rows.iter().find(|r| r.j == j)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub schema: String,
    pub version: String,
    pub kind: StudyKind,
    pub parameter: String,
    pub schedule: Vec<f64>,
    /// Resolved run configuration, stored verbatim.
    pub config: serde_json::Value,
    pub tolerances: BTreeMap<String, f64>,
    pub oracles: Vec<Oracle>,
    pub points: Vec<StudyPoint>,
    /// Derived scalars: fitted decay rates, best grid point and so on.
    pub summary: BTreeMap<String, f64>,
    pub verdicts: Vec<Verdict>,
    pub notes: Vec<String>,
    pub seconds: f64,
    pub finished_unix: u64,
}

/// Checks that a ladder is strictly monotone (either direction).
pub fn check_schedule(schedule: &[f64], min_len: usize) -> Result<()> {
    if schedule.len() < min_len {
        return Err(invalid(format!("schedule needs at least {min_len} points, got {}", schedule.len())));
    }
    if schedule.iter().any(|v| !v.is_finite()) {
        return Err(invalid("schedule values must be finite"));
    }
    let up = schedule.windows(2).all(|w| w[1] > w[0]);
    let down = schedule.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        return Err(invalid(format!("schedule must be strictly monotone: {schedule:?}")));
    }
    Ok(())
}

impl StudyReport {
    /// Assembles a report and judges it.
    pub fn assemble(
        kind: StudyKind,
        schedule: Vec<f64>,
        config: serde_json::Value,
        tolerances: BTreeMap<String, f64>,
        oracles: Vec<Oracle>,
        points: Vec<StudyPoint>,
        seconds: f64,
    ) -> Result<Self> {
        check_schedule(&schedule, 1)?;
        let mut report = Self {
            schema: REPORT_SCHEMA.to_string(),
            version: crate::VERSION.to_string(),
            kind,
            parameter: kind.parameter().to_string(),
            schedule,
            config,
            tolerances,
            oracles,
            points,
            summary: BTreeMap::new(),
            verdicts: Vec::new(),
            notes: Vec::new(),
            seconds,
            finished_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        let (verdicts, summary) = judge(&report)?;
        report.verdicts = verdicts;
        report.summary = summary;
        Ok(report)
    }

    pub fn passed(&self) -> bool {
        !self.verdicts.is_empty() && self.verdicts.iter().all(|v| v.passed)
    }

    /// Re-derives verdicts from the stored points and tolerances alone.
    pub fn recompute_verdicts(&self) -> Result<Vec<Verdict>> {
        Ok(judge(self)?.0)
    }

    pub fn tolerance(&self, key: &str) -> Result<f64> {
        self.tolerances
            .get(key)
            .copied()
            .ok_or_else(|| invalid(format!("report lacks tolerance '{key}'")))
    }

    pub fn oracle(&self, name: &str) -> Option<&Oracle> {
        self.oracles.iter().find(|o| o.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: Self = serde_json::from_str(text)?;
        if report.schema != REPORT_SCHEMA {
            return Err(Error::Parse(format!(
                "unsupported report schema '{}', expected '{REPORT_SCHEMA}'",
                report.schema
            )));
        }
        Ok(report)
    }

    /// Flat table, one row per (parameter, j).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {} {}", self.version, self.schema);
        let _ = writeln!(out, "# config {}", self.config);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            for r in &p.rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    self.kind.as_str(),
                    real(p.parameter),
                    opt(p.secondary),
                    r.j,
                    real(r.value),
                    opt(r.normalized),
                    opt(r.oracle),
                    opt(r.reference),
                    opt(r.gap),
                    opt(r.rate),
                    real(r.residual),
                    r.flagged.is_some(),
                    opt(r.raw.last().copied()),
                );
            }
        }
        out
    }

    /// Two-column `parameter gap` data for index `j`.
    pub fn plot_data(&self, j: usize) -> String {
        let mut out = format!("# {} gap of index {j} against {}\n", self.kind.as_str(), self.parameter);
        for p in &self.points {
            if let Some(g) = p.row(j).and_then(|r| r.gap) {
                let _ = writeln!(out, "{} {}", real(p.parameter), real(g));
            }
        }
        out
    }
}

pub const CSV_HEADER: &str =
    "kind,parameter,secondary,j,value,normalized,oracle,reference,gap,rate,residual,flagged,raw_finest";

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}
