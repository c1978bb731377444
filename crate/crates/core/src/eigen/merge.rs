use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::Mode;
use crate::spectrum::Spectrum;

/// Magnitude below which a computed eigenvalue is taken to be the exact zero
/// of the constants.
pub const ZERO_TOL: f64 = 1e-8;

/// Merges per-mode eigenvalue lists into one spectrum.
///
/// Modes `0..=m_max` must all be present (or one planar list). Each value of
/// a mode `m ≥ 1` counts twice. The merge is certified only when the first
/// value of mode `m_max` exceeds the `count`-th merged value: first values are
/// nondecreasing in `m`, so no omitted mode can contribute.
pub fn merge_modes(
    per_mode: &[(Mode, Vec<f64>)],
    dim: usize,
    count: usize,
    components: usize,
    boundary_measure: Option<f64>,
) -> Result<Spectrum> {
    if count == 0 {
        return Err(Error::InvalidParameter("eigenvalue count must be at least 1".into()));
    }
    let snap = |v: f64| if v.abs() < ZERO_TOL { 0.0 } else { v };
    let mut entries: Vec<(f64, Mode)> = Vec::new();
    if let [(Mode::Planar, vals)] = per_mode {
        entries.extend(vals.iter().map(|&v| (snap(v), Mode::Planar)));
    } else {
        let mut modes: Vec<usize> = Vec::new();
        for (mode, _) in per_mode {
            match mode {
                Mode::Azimuthal(m) => modes.push(*m),
                Mode::Planar => return Err(Error::Eigen("planar and azimuthal modes cannot be merged".into())),
            }
        }
        let m_max = modes.iter().copied().max().ok_or_else(|| Error::Eigen("no modes to merge".into()))?;
        for m in 0..=m_max {
            if modes.iter().filter(|&&x| x == m).count() != 1 {
                return Err(Error::Eigen(format!("mode {m} is missing or repeated")));
            }
        }
        let first = |m: usize| {
            per_mode.iter().find(|(md, _)| *md == Mode::Azimuthal(m)).and_then(|(_, v)| v.first().copied())
        };
        for m in 1..m_max {
            if let (Some(a), Some(b)) = (first(m), first(m + 1)) {
                if b < a * (1.0 - 1e-8) - 1e-12 {
                    return Err(Error::Eigen(format!(
                        "first eigenvalue decreases from mode {m} ({a}) to mode {} ({b})",
                        m + 1
                    )));
                }
            }
        }
        for (mode, vals) in per_mode {
            for &v in vals {
                for _ in 0..mode.multiplicity() {
                    entries.push((snap(v), *mode));
                }
            }
        }
        entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if entries.len() < count {
            return Err(Error::Eigen(format!("modes supply {} eigenvalues, {count} requested", entries.len())));
        }
        let merged = entries[count - 1].0;
        if m_max > 0 || dim == 3 {
            let top = first(m_max).unwrap_or(f64::INFINITY);
            if !(top > merged) {
                return Err(Error::Truncation { mode: m_max, first: top, merged });
            }
        }
    }
    entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    if entries.len() < count {
        return Err(Error::Eigen(format!("modes supply {} eigenvalues, {count} requested", entries.len())));
    }
    entries.truncate(count);
    let values: Vec<f64> = entries.iter().map(|e| e.0.max(0.0)).collect();
    let modes: Vec<Mode> = entries.iter().map(|e| e.1).collect();
    Spectrum::new(dim, values, components, boundary_measure)?.with_modes(modes)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: usize,
    /// Spread `max − min` of the clustered values.
    pub width: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Clustered {
    /// The input spectrum with multiplicities regrouped by cluster.
    pub spectrum: Spectrum,
    pub clusters: Vec<Cluster>,
}

/// Groups neighbouring values whose relative gap is below `rel_tol`.
pub fn cluster_multiplicities(spectrum: &Spectrum, rel_tol: f64) -> Result<Clustered> {
    if !(rel_tol > 0.0 && rel_tol <= 1e-2) {
        return Err(Error::InvalidParameter(format!("clustering tolerance must lie in (0, 1e-2], got {rel_tol}")));
    }
    let v = &spectrum.values;
    let mut clusters: Vec<(usize, usize)> = Vec::new();
    for i in 0..v.len() {
        let joins = i > 0 && {
            let (a, b) = (v[i - 1], v[i]);
            a == b || (b - a) <= rel_tol * a.abs().max(b.abs())
        };
        if joins {
            clusters.last_mut().unwrap().1 += 1;
        } else {
            clusters.push((i, 1));
        }
    }
    let out: Vec<Cluster> = clusters
        .iter()
        .map(|&(s, k)| {
            let slice = &v[s..s + k];
            Cluster {
                value: slice.iter().sum::<f64>() / k as f64,
                multiplicity: k,
                width: slice[k - 1] - slice[0],
            }
        })
        .collect();
    let mut spectrum = spectrum.clone();
    spectrum.multiplicities = out.iter().map(|c| c.multiplicity).collect();
    Ok(Clustered { spectrum, clusters: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball_modes(m_max: usize) -> Vec<(Mode, Vec<f64>)> {
        (0..=m_max)
            .map(|m| (Mode::Azimuthal(m), (m.max(if m == 0 { 0 } else { 1 })..m + 6).map(|k| k as f64).collect()))
            .collect()
    }

    #[test]
    fn ball_merge() {
        let s = merge_modes(&ball_modes(3), 3, 9, 1, None).unwrap();
        assert_eq!(s.values, vec![0.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0, 2.0]);
        let modes = s.modes.unwrap();
        assert_eq!(modes.iter().filter(|m| **m == Mode::Azimuthal(1)).count(), 4);
        assert_eq!(modes.iter().filter(|m| **m == Mode::Azimuthal(0)).count(), 3);
    }

    #[test]
    fn certificate_and_missing_modes() {
        let err = merge_modes(&ball_modes(2), 3, 9, 1, None).unwrap_err();
        assert!(matches!(err, Error::Truncation { mode: 2, .. }));
        let mut gap = ball_modes(3);
        gap.remove(1);
        assert!(merge_modes(&gap, 3, 4, 1, None).is_err());
    }

    #[test]
    fn planar_pass_through() {
        let s = merge_modes(&[(Mode::Planar, vec![1e-12, 1.0, 1.0, 2.0])], 2, 3, 1, None).unwrap();
        assert_eq!(s.values, vec![0.0, 1.0, 1.0]);
    }

    #[test]
    fn clustering() {
        let s = Spectrum::new(3, vec![0.0, 0.9999, 1.0, 1.0002, 2.0, 2.0], 1, None).unwrap();
        let c = cluster_multiplicities(&s, 1e-3).unwrap();
        assert_eq!(c.spectrum.multiplicities, vec![1, 3, 2]);
        assert!((c.clusters[1].width - 3e-4).abs() < 1e-12);
        let tight = cluster_multiplicities(&s, 1e-6).unwrap();
        assert_eq!(tight.spectrum.multiplicities, vec![1, 1, 1, 1, 2]);
        let empty = Spectrum::new(3, vec![], 1, None).unwrap();
        assert!(cluster_multiplicities(&empty, 1e-3).unwrap().clusters.is_empty());
        assert!(cluster_multiplicities(&s, 0.0).is_err());
    }
}
