use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use steklov_core::experiments::report::CSV_HEADER;
use steklov_core::experiments::*;
use steklov_core::io::Cache;
use steklov_core::solver::{solve_spectrum, SolveResult, SolverConfig};
use steklov_core::DomainSpec;

fn quick() -> StudyOptions {
    let mut o = StudyOptions::default();
    o.solver.levels = 3;
    o.h_factor = 0.5;
    o
}

fn small_surgery() -> StudyReport {
    Runner::new(quick()).surgery_study(0.3, &[0.2, 0.1, 0.05], 1).unwrap()
}

/// Parses the CSV table into (parameter, j) -> column values.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next().unwrap(), CSV_HEADER);
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn num(s: &str) -> Option<f64> {
    (!s.is_empty()).then(|| s.parse().unwrap())
}

#[test]
fn reports_are_self_contained() {
    let report = small_surgery();
    assert_eq!(report.schema, REPORT_SCHEMA);
    assert!(report.verdicts.len() >= 3);
    for v in &report.verdicts {
        assert!(!v.oracle.is_empty() && v.tolerance.is_finite());
    }
    let back = StudyReport::from_json(&report.to_json().unwrap()).unwrap();
    assert_eq!(back, report);
    assert_eq!(back.recompute_verdicts().unwrap(), report.verdicts);

    // tampering with stored data changes the recomputed verdicts
    let mut bad = back.clone();
    let g = bad.points[0].rows[0].gap.unwrap();
    bad.points[2].rows[0].gap = Some(g * 2.0);
    let re = bad.recompute_verdicts().unwrap();
    assert!(!re[0].passed);
}

#[test]
fn csv_and_json_agree_to_the_last_bit() {
    let report = small_surgery();
    let rows = csv_rows(&report.to_csv());
    let flat: Vec<(&StudyPoint, &Row)> = report.points.iter().flat_map(|p| p.rows.iter().map(move |r| (p, r))).collect();
    assert_eq!(rows.len(), flat.len());
    for (cols, (p, r)) in rows.iter().zip(flat) {
        assert_eq!(cols[0], "surgery");
        assert_eq!(num(&cols[1]), Some(p.parameter));
        assert_eq!(num(&cols[2]), p.secondary);
        assert_eq!(cols[3].parse::<usize>().unwrap(), r.j);
        assert_eq!(num(&cols[4]), Some(r.value));
        assert_eq!(num(&cols[5]), r.normalized);
        assert_eq!(num(&cols[6]), r.oracle);
        assert_eq!(num(&cols[7]), r.reference);
        assert_eq!(num(&cols[8]), r.gap);
        assert_eq!(num(&cols[9]), r.rate);
        assert_eq!(num(&cols[10]), Some(r.residual));
        assert_eq!(num(&cols[12]), r.raw.last().copied());
    }
    let plot = report.plot_data(1);
    assert_eq!(plot.lines().filter(|l| !l.starts_with('#')).count(), 3);
}

#[test]
fn cutoff_reports_pass_for_all_dimensions() {
    let ladder: Vec<f64> = [5.0, 10.0, 20.0].iter().map(|t: &f64| (-t).exp()).collect();
    for (n, m) in [(3, 1), (4, 1), (4, 2), (5, 2)] {
        let r = verify_cutoff_surgery(n, m, &ladder, 1.0, 1.0, &BTreeMap::new()).unwrap();
        assert!(r.passed(), "n={n} m={m}: {:#?}", r.verdicts);
    }
    for n in 2..6 {
        let r = verify_cutoff_necklace(n, 3, &[0.4, 0.2, 0.1, 0.05], &BTreeMap::new()).unwrap();
        assert!(r.passed(), "n={n}: {:#?}", r.verdicts);
    }
}

#[test]
fn runner_routes_solves_through_the_hook() {
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path());
    let calls = AtomicUsize::new(0);
    let solve = |s: &DomainSpec, c: &SolverConfig| -> steklov_core::Result<SolveResult> {
        calls.fetch_add(1, Ordering::SeqCst);
        cache.solve(s, c).map(|r| r.0)
    };
    let runner = Runner { options: quick(), overrides: BTreeMap::new(), solve: &solve };
    let a = runner.surgery_study(0.3, &[0.2, 0.1, 0.05], 1).unwrap();
    let b = runner.surgery_study(0.3, &[0.2, 0.1, 0.05], 1).unwrap();
    assert_eq!(calls.load(Ordering::SeqCst), 6);
    assert_eq!(a.points, b.points);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 3);
    // the cache holds exactly what a direct solve produces, seconds aside
    let spec = DomainSpec::ball_tube(3, 0.3, 0.05).unwrap();
    let direct = solve_spectrum(&spec, &runner.options.point_config(&spec, 2)).unwrap();
    assert_eq!(direct.spectrum, a.points[2].spectrum.clone().unwrap());
}

#[test]
fn tolerance_overrides_flow_into_verdicts() {
    let mut runner = Runner::new(quick());
    runner.overrides.insert("terminal_gap".into(), 1e-9);
    let r = runner.surgery_study(0.3, &[0.2, 0.1, 0.05], 1).unwrap();
    assert_eq!(r.tolerances["terminal_gap"], 1e-9);
    assert!(!r.passed());
    assert!(!r.verdicts[1].passed);
}
