//! End-to-end spectrum computation: mesh ladder, per-mode pencils, boundary
//! eigensolves, per-mode extrapolation and certified merge.

use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::DomainSpec;
use crate::eigen::{boundary_schur, merge_modes, solve_pencil, ZERO_TOL};
use crate::error::{Error, Result};
use crate::experiments::extrapolate::{extrapolate, Extrapolation};
use crate::fem::{assemble_with, Mode};
use crate::mesh::{triangulate_with, Mesh, MeshOptions};
use crate::spectrum::Spectrum;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Mesh size at feature corners of the coarsest level.
    pub h: f64,
    pub h_max: Option<f64>,
    pub grading: f64,
    /// Number of meshes in the ladder; each level halves `h`.
    pub levels: usize,
    /// Highest azimuthal mode solved initially.
    pub m_max: usize,
    /// Ceiling for certificate-driven mode extension.
    pub max_modes: usize,
    pub element_order: usize,
    pub quadrature_order: usize,
    /// Number of eigenvalues, with multiplicity.
    pub count: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            h: 0.1,
            h_max: None,
            grading: 1.0,
            levels: 3,
            m_max: 8,
            max_modes: 48,
            element_order: 1,
            quadrature_order: 4,
            count: 10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.h > 0.0) {
            return bad(format!("h must be positive, got {}", self.h));
        }
        if self.levels == 0 {
            return bad("at least one mesh level is required".into());
        }
        if self.count == 0 {
            return bad("count must be at least 1".into());
        }
        if self.m_max > self.max_modes {
            return bad(format!("m_max {} exceeds the mode ceiling {}", self.m_max, self.max_modes));
        }
        Ok(())
    }

    pub fn mesh_options(&self) -> MeshOptions {
        MeshOptions { h: self.h, grading: self.grading, h_max: self.h_max }
    }
}

/// Eigenvalues of one mode across the mesh ladder and their extrapolations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeTrace {
    pub mode: Mode,
    /// `levels[l][i]`: i-th eigenvalue on mesh level `l`.
    pub levels: Vec<Vec<f64>>,
    pub fits: Vec<Extrapolation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub domain: DomainSpec,
    pub config: SolverConfig,
    pub h_ladder: Vec<f64>,
    pub node_counts: Vec<usize>,
    pub min_angle_deg: Vec<f64>,
    /// Merged raw spectrum on each mesh level.
    pub raw: Vec<Spectrum>,
    /// Merged spectrum of per-mode extrapolated values.
    pub spectrum: Spectrum,
    /// Fit behind each entry of `spectrum`.
    pub fits: Vec<Extrapolation>,
    pub modes: Vec<ModeTrace>,
    pub m_max: usize,
    pub seconds: f64,
}

impl SolveResult {
    pub fn normalized(&self, j: usize) -> Option<f64> {
        self.spectrum.normalized(j)
    }

    /// Largest fit residual among the first `j + 1` entries.
    pub fn residual_upto(&self, j: usize) -> f64 {
        self.fits.iter().take(j + 1).map(|f| f.residual).fold(0.0, f64::max)
    }
}

/// Builds the mesh ladder for a domain.
pub fn mesh_ladder(spec: &DomainSpec, cfg: &SolverConfig) -> Result<Vec<Mesh>> {
    let mut meshes = vec![triangulate_with(spec, &cfg.mesh_options())?];
    for _ in 1..cfg.levels {
        let next = meshes.last().unwrap().refine();
        meshes.push(next);
    }
    Ok(meshes)
}

/// Smallest eigenvalues of one mode on one mesh.
pub fn mode_values(mesh: &Mesh, mode: Mode, cfg: &SolverConfig) -> Result<Vec<f64>> {
    let pencil = assemble_with(mesh, mode, cfg.element_order, cfg.quadrature_order)?;
    let bp = boundary_schur(&pencil)?;
    let k = cfg.count.min(bp.s.nrows());
    Ok(solve_pencil(&bp, k)?.values)
}

fn trace(mode: Mode, levels: Vec<Vec<f64>>, hs: &[f64]) -> Result<ModeTrace> {
    let n = levels.iter().map(Vec::len).min().unwrap_or(0);
    let mut fits = Vec::with_capacity(n);
    for i in 0..n {
        let series: Vec<f64> = levels.iter().map(|l| l[i]).collect();
        let fit = if series.iter().all(|v| v.abs() < ZERO_TOL) {
            Extrapolation::exact(0.0)
        } else if hs.len() >= 3 {
            extrapolate(hs, &series)?
        } else {
            Extrapolation::exact(*series.last().unwrap())
        };
        fits.push(fit);
    }
    fits.sort_by(|a, b| a.limit.total_cmp(&b.limit));
    Ok(ModeTrace { mode, levels, fits })
}

pub fn solve_spectrum(spec: &DomainSpec, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let start = Instant::now();
    let meshes = mesh_ladder(spec, cfg)?;
    let hs: Vec<f64> = meshes.iter().map(|m| m.h).collect();
    let components = meshes[0].components();
    let measure = spec.boundary_measure();
    info!(
        "{:?}: {} levels, finest mesh {} nodes",
        spec.family,
        meshes.len(),
        meshes.last().unwrap().nodes.len()
    );

    let solve_modes = |modes: &[Mode]| -> Result<Vec<ModeTrace>> {
        let jobs: Vec<(usize, usize)> =
            (0..modes.len()).flat_map(|m| (0..meshes.len()).map(move |l| (m, l))).collect();
        let vals: Vec<Result<Vec<f64>>> =
            jobs.par_iter().map(|&(m, l)| mode_values(&meshes[l], modes[m], cfg)).collect();
        let mut grid: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); meshes.len()]; modes.len()];
        for ((m, l), v) in jobs.into_iter().zip(vals) {
            grid[m][l] = v?;
        }
        grid.into_iter().zip(modes).map(|(levels, &mode)| trace(mode, levels, &hs)).collect()
    };

    let mut modes: Vec<Mode> = if spec.dim == 2 {
        vec![Mode::Planar]
    } else {
        (0..=cfg.m_max).map(Mode::Azimuthal).collect()
    };
    let mut traces = solve_modes(&modes)?;
    loop {
        let attempt = merge_all(&traces, spec.dim, cfg.count, components, measure, meshes.len());
        match attempt {
            Err(Error::Truncation { mode, .. }) if spec.dim == 3 && mode < cfg.max_modes => {
                let top = (mode + 4).min(cfg.max_modes);
                warn!("truncation certificate failed at mode {mode}; extending to {top}");
                let extra: Vec<Mode> = (mode + 1..=top).map(Mode::Azimuthal).collect();
                traces.extend(solve_modes(&extra)?);
                modes.extend(extra);
            }
            Err(e) => return Err(e),
            Ok((raw, spectrum, fits)) => {
                return Ok(SolveResult {
                    domain: spec.clone(),
                    config: cfg.clone(),
                    h_ladder: hs,
                    node_counts: meshes.iter().map(|m| m.nodes.len()).collect(),
                    min_angle_deg: meshes.iter().map(|m| m.quality.min_angle_deg).collect(),
                    raw,
                    spectrum,
                    fits,
                    m_max: modes.last().unwrap().index(),
                    modes: traces,
                    seconds: start.elapsed().as_secs_f64(),
                })
            }
        }
    }
}

type Merged = (Vec<Spectrum>, Spectrum, Vec<Extrapolation>);

fn merge_all(
    traces: &[ModeTrace],
    dim: usize,
    count: usize,
    components: usize,
    measure: f64,
    levels: usize,
) -> Result<Merged> {
    let raw = (0..levels)
        .map(|l| {
            let per: Vec<(Mode, Vec<f64>)> = traces.iter().map(|t| (t.mode, t.levels[l].clone())).collect();
            merge_modes(&per, dim, count, components, Some(measure))
        })
        .collect::<Result<Vec<_>>>()?;
    let per: Vec<(Mode, Vec<f64>)> =
        traces.iter().map(|t| (t.mode, t.fits.iter().map(|f| f.limit).collect())).collect();
    let spectrum = merge_modes(&per, dim, count, components, Some(measure))?;
    // attach fits to merged entries, consuming each mode's list in order
    let mut cursor = vec![0usize; traces.len()];
    let mut seen = vec![0usize; traces.len()];
    let mut fits = Vec::with_capacity(count);
    for mode in spectrum.modes.as_ref().unwrap() {
        let t = traces.iter().position(|t| t.mode == *mode).unwrap();
        fits.push(traces[t].fits[cursor[t]].clone());
        seen[t] += 1;
        if seen[t] == mode.multiplicity() {
            seen[t] = 0;
            cursor[t] += 1;
        }
    }
    Ok((raw, spectrum, fits))
}
