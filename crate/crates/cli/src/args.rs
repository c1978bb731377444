use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use steklov_core::experiments::DeltaGrid;

#[derive(Parser, Debug)]
#[command(name = "steklov", version, about = "Steklov spectra of axisymmetric domains")]
pub struct Cli {
    /// Log progress (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    /// Cache directory; the STEKLOV_CACHE_DIR variable overrides the default.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Solve everything afresh and leave the cache untouched.
    #[arg(long, global = true)]
    pub no_cache: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Closed-form spectra.
    Spectrum(SpectrumArgs),
    /// Finite-element spectrum of one domain.
    Solve(SolveArgs),
    /// Convergence study over a parameter ladder.
    Converge(ConvergeArgs),
    /// Search ball-tube domains that beat the ball.
    Witness(WitnessArgs),
    /// Check cutoff energies against quadrature.
    VerifyCutoff(CutoffArgs),
    /// Triangulate a meridian domain and write the mesh.
    Mesh(MeshArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AnalyticFamily {
    Ball,
    Annulus,
    Disjoint,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[arg(long, value_enum)]
    pub family: AnalyticFamily,
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    /// Inner radius of the annulus.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Number of unit balls in a disjoint union.
    #[arg(long, default_value_t = 2)]
    pub parts: usize,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    /// Print JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DomainFamily {
    Ball,
    Annulus,
    BallTube,
    Necklace,
}

#[derive(Args, Debug, Clone)]
pub struct DomainArgs {
    #[arg(long, value_enum)]
    pub family: DomainFamily,
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    /// Hole radius (annulus, ball-tube) or overlap parameter (necklace).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Tube radius of a ball-tube domain.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Number of balls in a necklace.
    #[arg(long, default_value_t = 2)]
    pub l: usize,
    /// Build the necklace from ball-tube domains with this hole radius.
    #[arg(long, requires = "base_delta")]
    pub base_eps: Option<f64>,
    #[arg(long, requires = "base_eps")]
    pub base_delta: Option<f64>,
    /// Round Steklov corners with arcs of this radius.
    #[arg(long)]
    pub fillet: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct MeshingArgs {
    /// Mesh size at feature corners.
    #[arg(long)]
    pub h: f64,
    /// Mesh size away from features; defaults to max(h, 0.1).
    #[arg(long)]
    pub h_max: Option<f64>,
    /// Growth exponent of the size field away from corners.
    #[arg(long, default_value_t = 1.0)]
    pub grading: f64,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    #[command(flatten)]
    pub mesh: MeshingArgs,
    /// Mesh levels for extrapolation; each halves h.
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    /// Highest azimuthal mode solved before certificate-driven extension.
    #[arg(long, default_value_t = 8)]
    pub modes: usize,
    #[arg(long, default_value_t = 48)]
    pub max_modes: usize,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    /// Polynomial degree of the elements (1 or 2).
    #[arg(long, default_value_t = 1)]
    pub order: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StudyChoice {
    Surgery,
    Necklace,
    Annulus,
}

#[derive(Args, Debug, Clone)]
pub struct StudyArgs {
    /// Coarsest mesh size as a fraction of the thinnest feature.
    #[arg(long, default_value_t = 0.25)]
    pub h_factor: f64,
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    #[arg(long, default_value_t = 3)]
    pub modes: usize,
    /// Tolerance override, e.g. `--tol terminal_gap=0.01`.
    #[arg(long = "tol", value_parser = parse_tolerance)]
    pub tolerances: Vec<(String, f64)>,
    /// Prefix for the .json, .csv and .dat outputs.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ConvergeArgs {
    #[arg(long, value_enum)]
    pub study: StudyChoice,
    /// Parameter ladder, decreasing: tube radii for surgery, eps otherwise.
    #[arg(long, value_delimiter = ',', value_parser = parse_real, required = true)]
    pub schedule: Vec<f64>,
    /// Hole radius of the surgery study.
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    #[arg(long, default_value_t = 2)]
    pub l: usize,
    /// Tracked index (surgery) or highest index (necklace, annulus).
    #[arg(long)]
    pub j: Option<usize>,
    #[command(flatten)]
    pub study_args: StudyArgs,
}

#[derive(Args, Debug)]
pub struct WitnessArgs {
    #[arg(long, default_value_t = 1)]
    pub j: usize,
    #[arg(long, value_delimiter = ',', value_parser = parse_real, required = true)]
    pub eps_grid: Vec<f64>,
    /// Tube radii: all of the form `eps/20`, or all absolute numbers.
    #[arg(long, value_delimiter = ',', required = true)]
    pub delta_grid: Vec<String>,
    #[command(flatten)]
    pub study_args: StudyArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CutoffKind {
    Surgery,
    Necklace,
}

#[derive(Args, Debug)]
pub struct CutoffArgs {
    #[arg(long, value_enum)]
    pub kind: CutoffKind,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Dimension of the removed submanifold.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Tube radii; `e^-10` style entries are accepted.
    #[arg(long, value_delimiter = ',', value_parser = parse_real, default_value = "e^-5,e^-10,e^-20")]
    pub deltas: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub r0: f64,
    /// Volume of the removed submanifold.
    #[arg(long, default_value_t = 1.0)]
    pub sigma_measure: f64,
    #[arg(long, default_value_t = 2)]
    pub l: usize,
    #[arg(long, value_delimiter = ',', value_parser = parse_real, default_value = "0.4,0.2,0.1,0.05")]
    pub eps: Vec<f64>,
    #[arg(long = "tol", value_parser = parse_tolerance)]
    pub tolerances: Vec<(String, f64)>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MeshArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    #[command(flatten)]
    pub mesh: MeshingArgs,
    /// Uniform refinements applied after triangulation.
    #[arg(long, default_value_t = 0)]
    pub refine: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A real number, or `e^x` for `exp(x)`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let v = match t.strip_prefix("e^") {
        Some(x) => x.parse::<f64>().map(f64::exp),
        None => t.parse::<f64>(),
    }
    .map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

fn parse_tolerance(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got '{s}'"))?;
    Ok((k.trim().to_string(), parse_real(v)?))
}

/// `eps/20` style entries become ratios; plain numbers are absolute radii.
pub fn parse_delta_grid(items: &[String]) -> Result<DeltaGrid, String> {
    let relative: Vec<Option<f64>> = items
        .iter()
        .map(|s| s.trim().strip_prefix("eps/").map(|d| d.parse::<f64>().map(|d| 1.0 / d)).transpose())
        .collect::<Result<_, _>>()
        .map_err(|_| format!("bad delta grid {items:?}"))?;
    if relative.iter().all(Option::is_some) {
        return Ok(DeltaGrid::Ratios(relative.into_iter().flatten().collect()));
    }
    if relative.iter().any(Option::is_some) {
        return Err("delta grid mixes eps-relative and absolute entries".into());
    }
    items.iter().map(|s| parse_real(s)).collect::<Result<_, _>>().map(DeltaGrid::Absolute)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_and_exponentials() {
        assert_eq!(parse_real("0.25").unwrap(), 0.25);
        assert_eq!(parse_real("e^-10").unwrap(), (-10.0f64).exp());
        assert!(parse_real("x").is_err());
        assert!(parse_real("inf").is_err());
    }

    #[test]
    fn delta_grids() {
        let g = parse_delta_grid(&["eps/20".into(), "eps/10".into()]).unwrap();
        assert_eq!(g, DeltaGrid::Ratios(vec![0.05, 0.1]));
        let g = parse_delta_grid(&["0.01".into()]).unwrap();
        assert_eq!(g, DeltaGrid::Absolute(vec![0.01]));
        assert!(parse_delta_grid(&["eps/20".into(), "0.01".into()]).is_err());
    }
}
