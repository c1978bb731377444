use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fem::Mode;

/// Sorted Steklov eigenvalues of one domain, counted with multiplicity.
///
/// `multiplicities` groups exactly equal entries of `values`; for approximate
/// grouping of numerical spectra see [`crate::eigen::cluster_multiplicities`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub dim: usize,
    pub values: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub components: usize,
    pub boundary_measure: Option<f64>,
    /// Azimuthal provenance of each entry of `values`, when numerically computed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<Mode>>,
}

impl Spectrum {
    /// Builds a spectrum and checks its invariants: values sorted and
    /// nonnegative, and exactly `min(components, len)` zero eigenvalues.
    pub fn new(
        dim: usize,
        values: Vec<f64>,
        components: usize,
        boundary_measure: Option<f64>,
    ) -> Result<Self> {
        if dim < 2 {
            return Err(invalid(format!("dimension must be at least 2, got {dim}")));
        }
        if components == 0 {
            return Err(invalid("a domain has at least one component"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid("eigenvalues must be finite and nonnegative"));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(invalid("eigenvalues must be sorted nondecreasing"));
        }
        let zeros = values.iter().take_while(|v| **v == 0.0).count();
        let expected = components.min(values.len());
        if zeros != expected {
            return Err(invalid(format!(
                "expected {expected} zero eigenvalues (one per component), found {zeros}"
            )));
        }
        if let Some(a) = boundary_measure {
            if !(a > 0.0 && a.is_finite()) {
                return Err(invalid("boundary measure must be positive"));
            }
        }
        let multiplicities = exact_multiplicities(&values);
        Ok(Self {
            dim,
            values,
            multiplicities,
            components,
            boundary_measure,
            modes: None,
        })
    }

    pub fn with_modes(mut self, modes: Vec<Mode>) -> Result<Self> {
        if modes.len() != self.values.len() {
            return Err(invalid("mode provenance must match the eigenvalue count"));
        }
        self.modes = Some(modes);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Distinct values paired with their multiplicities.
    pub fn distinct(&self) -> Vec<(f64, usize)> {
        let mut out = Vec::with_capacity(self.multiplicities.len());
        let mut i = 0;
        for &m in &self.multiplicities {
            out.push((self.values[i], m));
            i += m;
        }
        out
    }

    /// `σ_j · |∂Ω|^{1/(n-1)}`, when the boundary measure is known.
    pub fn normalized(&self, j: usize) -> Option<f64> {
        let a = self.boundary_measure?;
        let s = *self.values.get(j)?;
        crate::analytic::normalize(s, a, self.dim).ok()
    }
}

fn exact_multiplicities(values: &[f64]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 && values[i - 1] == *v {
            *out.last_mut().unwrap() += 1;
        } else {
            out.push(1);
        }
    }
    out
}
