use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest rate accepted without a flag.
pub const MIN_RATE: f64 = 0.5;
/// A fit is flagged when its RMS residual exceeds this fraction of the total
/// variation of the data around the limit.
pub const MAX_RELATIVE_RESIDUAL: f64 = 0.05;

const P_MIN: f64 = 0.05;
const P_MAX: f64 = 8.0;

/// Least-squares fit of `σ(h) = σ* + C h^p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    /// Value to use: the fitted `σ*`, or the finest-mesh value when flagged.
    pub limit: f64,
    pub fit_limit: f64,
    /// Fitted exponent `p`; absent for constant data.
    pub rate: Option<f64>,
    pub constant: f64,
    /// RMS residual of the fit (for flagged fits, the last mesh increment).
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flagged: Option<String>,
}

impl Extrapolation {
    /// Passes `value` through unchanged; used for single-mesh solves.
    pub fn exact(value: f64) -> Self {
        Self { limit: value, fit_limit: value, rate: None, constant: 0.0, residual: 0.0, flagged: None }
    }
}

fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let c = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - c * mx;
    let ssr: f64 = x.iter().zip(y).map(|(u, v)| (v - a - c * u).powi(2)).sum();
    (a, c, ssr)
}

pub fn extrapolate(hs: &[f64], values: &[f64]) -> Result<Extrapolation> {
    if hs.len() != values.len() {
        return Err(Error::Extrapolation("ladder and values differ in length".into()));
    }
    if hs.len() < 3 {
        return Err(Error::Extrapolation(format!("need at least 3 mesh levels, got {}", hs.len())));
    }
    if hs.iter().any(|h| !(*h > 0.0)) || hs.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Extrapolation("mesh sizes must be positive and strictly decreasing".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Extrapolation("non-finite value in ladder".into()));
    }
    let finest = *values.last().unwrap();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 1e-14 * lo.abs().max(hi.abs()) {
        return Ok(Extrapolation::exact(finest));
    }
    // normalise h so that h^p stays well scaled
    let h0 = hs[0];
    let xs: Vec<f64> = hs.iter().map(|h| h / h0).collect();
    let ssr = |p: f64| {
        let x: Vec<f64> = xs.iter().map(|v| v.powf(p)).collect();
        linear_fit(&x, values).2
    };
    let grid: Vec<f64> = (0..=200).map(|i| P_MIN * (P_MAX / P_MIN).powf(i as f64 / 200.0)).collect();
    let best = (0..grid.len()).min_by(|&a, &b| ssr(grid[a]).total_cmp(&ssr(grid[b]))).unwrap();
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(grid.len() - 1)]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if ssr(c) < ssr(d) {
            b = d;
        } else {
            a = c;
        }
        if b - a < 1e-13 {
            break;
        }
    }
    let p = 0.5 * (a + b);
    let x: Vec<f64> = xs.iter().map(|v| v.powf(p)).collect();
    let (limit, c, ss) = linear_fit(&x, values);
    let residual = (ss / values.len() as f64).sqrt();
    let constant = c / h0.powf(p);
    let variation = values.iter().map(|v| (v - limit).abs()).fold(0.0, f64::max);
    let flagged = if p < MIN_RATE {
        Some(format!("fitted rate {p:.3} is below {MIN_RATE}"))
    } else if residual > MAX_RELATIVE_RESIDUAL * variation {
        Some(format!("fit residual {residual:.3e} is large against the data variation {variation:.3e}"))
    } else {
        None
    };
    Ok(match flagged {
        None => Extrapolation { limit, fit_limit: limit, rate: Some(p), constant, residual, flagged: None },
        Some(reason) => {
            let n = values.len();
            Extrapolation {
                limit: finest,
                fit_limit: limit,
                rate: Some(p),
                constant,
                residual: (values[n - 1] - values[n - 2]).abs(),
                flagged: Some(reason),
            }
        }
    })
}
