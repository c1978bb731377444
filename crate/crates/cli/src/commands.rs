use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use log::info;
use serde_json::json;
use steklov_core::analytic::{annulus_spectrum, ball_spectrum, disjoint_union_spectrum};
use steklov_core::experiments::{
    annulus_continuity_check, verify_cutoff_necklace, verify_cutoff_surgery, Runner, StudyOptions,
};
use steklov_core::io::{write_atomic, Cache, CacheStatus, RunConfig, DEFAULT_CACHE_DIR};
use steklov_core::mesh::{audit, triangulate_with, write_mesh};
use steklov_core::{DomainSpec, NecklaceBase, SolveResult, SolverConfig, Spectrum, StudyReport, VERSION};

use crate::args::*;

/// Whether every checked clause held.
pub enum Outcome {
    Pass,
    Fail,
}

pub struct RunContext {
    pub cache: Option<Cache>,
}

impl RunContext {
    pub fn new(cli: &Cli) -> Self {
        let cache = if cli.no_cache {
            None
        } else {
            Some(match &cli.cache_dir {
                Some(d) => Cache::new(d),
                None => Cache::from_env_or(DEFAULT_CACHE_DIR),
            })
        };
        Self { cache }
    }

    fn cache_dir(&self) -> Option<PathBuf> {
        self.cache.as_ref().map(|c| c.dir.clone())
    }

    fn solve(&self, spec: &DomainSpec, cfg: &SolverConfig) -> steklov_core::Result<SolveResult> {
        match &self.cache {
            Some(c) => {
                let (r, status) = c.solve(spec, cfg)?;
                if status == CacheStatus::Hit {
                    info!("cache hit for {:?}", spec.family);
                }
                Ok(r)
            }
            None => steklov_core::solver::solve_spectrum(spec, cfg),
        }
    }
}

fn family_name(f: DomainFamily) -> &'static str {
    match f {
        DomainFamily::Ball => "ball",
        DomainFamily::Annulus => "annulus",
        DomainFamily::BallTube => "ball-tube",
        DomainFamily::Necklace => "necklace",
    }
}

pub fn build_domain(a: &DomainArgs) -> Result<DomainSpec> {
    let name = family_name(a.family);
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| anyhow!("--{flag} is required for the {name} family"));
    let spec = match a.family {
        DomainFamily::Ball => DomainSpec::ball(a.dim)?,
        DomainFamily::Annulus => DomainSpec::annulus(a.dim, need(a.eps, "eps")?)?,
        DomainFamily::BallTube => DomainSpec::ball_tube(a.dim, need(a.eps, "eps")?, need(a.delta, "delta")?)?,
        DomainFamily::Necklace => {
            let base = match (a.base_eps, a.base_delta) {
                (Some(eps), Some(delta)) => NecklaceBase::BallTube { eps, delta },
                _ => NecklaceBase::Ball,
            };
            DomainSpec::necklace(a.dim, a.l, need(a.eps, "eps")?, base)?
        }
    };
    Ok(match a.fillet {
        Some(r) => spec.with_fillet(r)?,
        None => spec,
    })
}

fn domain_params(a: &DomainArgs) -> BTreeMap<String, f64> {
    let mut p = BTreeMap::new();
    let mut put = |k: &str, v: Option<f64>| {
        if let Some(v) = v {
            p.insert(k.to_string(), v);
        }
    };
    put("eps", a.eps);
    put("delta", a.delta);
    put("base_eps", a.base_eps);
    put("base_delta", a.base_delta);
    put("fillet", a.fillet);
    if a.family == DomainFamily::Necklace {
        p.insert("l".into(), a.l as f64);
    }
    p
}

fn print_spectrum(s: &Spectrum) {
    println!("{:>4}  {:>22}  {:>22}", "j", "sigma_j", "sigma_bar_j");
    for (j, v) in s.values.iter().enumerate() {
        let bar = s.normalized(j).map(|b| format!("{b:.16e}")).unwrap_or_default();
        println!("{j:>4}  {v:>22.16e}  {bar:>22}");
    }
}

pub fn spectrum(a: &SpectrumArgs) -> Result<Outcome> {
    let s = match a.family {
        AnalyticFamily::Ball => ball_spectrum(a.dim, a.count)?,
        AnalyticFamily::Annulus => {
            let eps = a.eps.ok_or_else(|| anyhow!("--eps is required for the annulus family"))?;
            annulus_spectrum(a.dim, eps, a.count)?
        }
        AnalyticFamily::Disjoint => {
            if a.parts == 0 {
                bail!("--parts must be at least 1");
            }
            let ball = ball_spectrum(a.dim, a.count)?;
            disjoint_union_spectrum(&vec![ball; a.parts], a.count)?
        }
    };
    if a.json {
        println!("{}", serde_json::to_string_pretty(&s)?);
    } else {
        print_spectrum(&s);
    }
    Ok(Outcome::Pass)
}

pub fn solve(ctx: &RunContext, a: &SolveArgs) -> Result<Outcome> {
    let spec = build_domain(&a.domain)?;
    let cfg = SolverConfig {
        h: a.mesh.h,
        h_max: a.mesh.h_max,
        grading: a.mesh.grading,
        levels: a.levels,
        m_max: a.modes,
        max_modes: a.max_modes,
        element_order: a.order,
        quadrature_order: (2 * a.order).max(4),
        count: a.count,
    };
    cfg.validate()?;
    let result = ctx.solve(&spec, &cfg)?;
    let mut run = RunConfig::new("solve");
    run.family = Some(family_name(a.domain.family).into());
    run.dim = Some(a.domain.dim);
    run.params = domain_params(&a.domain);
    run.j_max = Some(a.count - 1);
    run.solver = Some(cfg);
    run.h_ladder = result.h_ladder.clone();
    run.outputs = a.out.iter().cloned().collect();
    run.cache_dir = ctx.cache_dir();

    println!("{:>4}  {:>22}  {:>22}  {:>12}  {:>6}  {:>10}", "j", "sigma_j", "sigma_bar_j", "mode", "rate", "residual");
    let modes = result.spectrum.modes.clone().unwrap_or_default();
    for (j, v) in result.spectrum.values.iter().enumerate() {
        let f = &result.fits[j];
        println!(
            "{j:>4}  {v:>22.16e}  {:>22.16e}  {:>12}  {:>6}  {:>10.3e}{}",
            result.normalized(j).unwrap_or(f64::NAN),
            modes.get(j).map(|m| m.to_string()).unwrap_or_default(),
            f.rate.map(|r| format!("{r:.2}")).unwrap_or_else(|| "-".into()),
            f.residual,
            if f.flagged.is_some() { "  flagged" } else { "" }
        );
    }
    println!(
        "mesh ladder h = {:?}, nodes = {:?}, modes 0..={}, {:.2} s",
        result.h_ladder, result.node_counts, result.m_max, result.seconds
    );
    if let Some(out) = &a.out {
        let doc = json!({ "version": VERSION, "run": run, "result": result });
        write_atomic(out, serde_json::to_string_pretty(&doc)?.as_bytes())
            .with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(Outcome::Pass)
}

fn overrides(pairs: &[(String, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().cloned().collect()
}

fn study_options(s: &StudyArgs) -> StudyOptions {
    let mut o = StudyOptions::default();
    o.h_factor = s.h_factor;
    o.solver.levels = s.levels;
    o.solver.m_max = s.modes;
    o
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn finish(mut report: StudyReport, mut run: RunConfig, out: Option<&Path>, plot_j: usize) -> Result<Outcome> {
    let outputs: Vec<PathBuf> = out
        .map(|p| [".json", ".csv", ".gap.dat"].iter().map(|s| with_suffix(p, s)).collect())
        .unwrap_or_default();
    run.outputs = outputs.clone();
    run.tolerances = report.tolerances.clone();
    run.h_ladder = report.points.iter().filter_map(|p| p.h_ladder.first().copied()).collect();
    report.config = json!({ "run": run, "study": report.config });

    for p in &report.points {
        for r in &p.rows {
            println!(
                "{} = {:<12.6e} {:>12}  j = {:<3} value {:.12e}  oracle {:>20}  gap {:>12}",
                report.parameter,
                p.parameter,
                p.secondary.map(|d| format!("delta {d:.4e}")).unwrap_or_default(),
                r.j,
                r.value,
                r.oracle.map(|v| format!("{v:.12e}")).unwrap_or_default(),
                r.gap.map(|v| format!("{v:.4e}")).unwrap_or_default(),
            );
        }
    }
    for v in &report.verdicts {
        println!(
            "{} {}: observed {:.6e}, tolerance {:.3e} ({} = {:.10})",
            if v.passed { "PASS" } else { "FAIL" },
            v.clause,
            v.observed,
            v.tolerance,
            v.oracle,
            v.oracle_value
        );
    }
    for n in &report.notes {
        println!("note: {n}");
    }
    if let [json_path, csv_path, dat_path] = outputs.as_slice() {
        write_atomic(json_path, report.to_json()?.as_bytes())?;
        write_atomic(csv_path, report.to_csv().as_bytes())?;
        write_atomic(dat_path, report.plot_data(plot_j).as_bytes())?;
        println!("wrote {}, {}, {}", json_path.display(), csv_path.display(), dat_path.display());
    }
    Ok(if report.passed() { Outcome::Pass } else { Outcome::Fail })
}

pub fn converge(ctx: &RunContext, a: &ConvergeArgs) -> Result<Outcome> {
    let solve = |s: &DomainSpec, c: &SolverConfig| ctx.solve(s, c);
    let runner = Runner { options: study_options(&a.study_args), overrides: overrides(&a.study_args.tolerances), solve: &solve };
    let mut run = RunConfig::new("converge");
    run.schedule = a.schedule.clone();
    run.solver = Some(runner.options.solver.clone());
    run.cache_dir = ctx.cache_dir();
    run.params.insert("h_factor".into(), a.study_args.h_factor);
    let (report, j) = match a.study {
        StudyChoice::Surgery => {
            let j = a.j.unwrap_or(1);
            run.family = Some("ball-tube".into());
            run.dim = Some(3);
            run.params.insert("eps".into(), a.eps);
            run.j_max = Some(j);
            (runner.surgery_study(a.eps, &a.schedule, j)?, j)
        }
        StudyChoice::Necklace => {
            let j = a.j.unwrap_or(2);
            run.family = Some("necklace".into());
            run.dim = Some(a.dim);
            run.params.insert("l".into(), a.l as f64);
            run.j_max = Some(j);
            (runner.necklace_study(a.dim, a.l, &a.schedule, j)?, 2)
        }
        StudyChoice::Annulus => {
            let j = a.j.unwrap_or(8);
            run.family = Some("annulus".into());
            run.dim = Some(a.dim);
            run.j_max = Some(j);
            run.solver = None;
            (annulus_continuity_check(a.dim, &a.schedule, j, &runner.overrides)?, 1)
        }
    };
    finish(report, run, a.study_args.out.as_deref(), j)
}

pub fn witness(ctx: &RunContext, a: &WitnessArgs) -> Result<Outcome> {
    let grid = parse_delta_grid(&a.delta_grid).map_err(|e| anyhow!(e))?;
    let solve = |s: &DomainSpec, c: &SolverConfig| ctx.solve(s, c);
    let runner = Runner { options: study_options(&a.study_args), overrides: overrides(&a.study_args.tolerances), solve: &solve };
    let mut run = RunConfig::new("witness");
    run.family = Some("ball-tube".into());
    run.dim = Some(3);
    run.schedule = a.eps_grid.clone();
    run.j_max = Some(a.j);
    run.solver = Some(runner.options.solver.clone());
    run.cache_dir = ctx.cache_dir();
    run.params.insert("h_factor".into(), a.study_args.h_factor);
    let report = runner.witness_search(a.j, &a.eps_grid, &grid)?;
    for (k, v) in ["best_eps", "best_delta", "best_sigma_bar", "margin"].iter().map(|k| (k, report.summary.get(*k))) {
        if let Some(v) = v {
            println!("{k} = {v:.12e}");
        }
    }
    finish(report, run, a.study_args.out.as_deref(), a.j)
}

pub fn verify_cutoff(a: &CutoffArgs) -> Result<Outcome> {
    let o = overrides(&a.tolerances);
    let mut run = RunConfig::new("verify-cutoff");
    run.dim = Some(a.n);
    let report = match a.kind {
        CutoffKind::Surgery => {
            run.family = Some("surgery".into());
            run.schedule = a.deltas.clone();
            run.params.insert("m".into(), a.m as f64);
            run.params.insert("r0".into(), a.r0);
            run.params.insert("sigma_measure".into(), a.sigma_measure);
            verify_cutoff_surgery(a.n, a.m, &a.deltas, a.r0, a.sigma_measure, &o)?
        }
        CutoffKind::Necklace => {
            run.family = Some("necklace".into());
            run.schedule = a.eps.clone();
            run.params.insert("l".into(), a.l as f64);
            verify_cutoff_necklace(a.n, a.l, &a.eps, &o)?
        }
    };
    finish(report, run, a.out.as_deref(), 0)
}

pub fn mesh(a: &MeshArgs) -> Result<Outcome> {
    let spec = build_domain(&a.domain)?;
    let cfg = SolverConfig { h: a.mesh.h, h_max: a.mesh.h_max, grading: a.mesh.grading, ..SolverConfig::default() };
    let mut m = triangulate_with(&spec, &cfg.mesh_options())?;
    for _ in 0..a.refine {
        m = m.refine();
    }
    let report = audit(&m);
    println!(
        "{} nodes, {} triangles, {} boundary edges, min angle {:.2} deg, h = {}",
        m.nodes.len(),
        m.triangles.len(),
        m.boundary_edges.len(),
        report.min_angle_deg,
        m.h
    );
    for issue in &report.issues {
        println!("audit: {issue}");
    }
    if let Some(out) = &a.out {
        let mut run = RunConfig::new("mesh");
        run.family = Some(family_name(a.domain.family).into());
        run.dim = Some(a.domain.dim);
        run.params = domain_params(&a.domain);
        run.params.insert("refine".into(), a.refine as f64);
        run.h_ladder = vec![a.mesh.h];
        run.solver = Some(cfg);
        run.outputs = vec![out.clone()];
        let text = write_mesh(&m);
        let (head, body) = text.split_once('\n').unwrap_or((&text, ""));
        let doc = format!("{head}\n# version {VERSION}\n# run {}\n{body}", serde_json::to_string(&run)?);
        write_atomic(out, doc.as_bytes())?;
    }
    Ok(if report.ok { Outcome::Pass } else { Outcome::Fail })
}
