//! Decay law of the transverse spin coherence.
//!
//! The envelope of `|sigma_x|` or `|sigma_y|` is read off the local maxima
//! of a [`SpinTrace`] and compared against a Gaussian `exp(-c t^2)` and a
//! power law `t^k` in log space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::{SpinAxis, SpinTrace};
use crate::profile::{local_maxima, parabolic_vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DecoherenceLaw {
    Gaussian,
    PowerLaw,
    Mixed,
}

impl std::fmt::Display for DecoherenceLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DecoherenceLaw::Gaussian => "GAUSSIAN",
            DecoherenceLaw::PowerLaw => "POWER_LAW",
            DecoherenceLaw::Mixed => "MIXED",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceFit {
    pub law: DecoherenceLaw,
    /// `c` of `exp(-c t^2)`.
    pub gaussian_rate: f64,
    /// `k` of `t^k`.
    pub power_exponent: f64,
    /// RMS log-residual of the reported law (the smaller one when mixed).
    pub fit_residual: f64,
    pub gaussian_residual: f64,
    pub power_residual: f64,
    pub extrema: usize,
}

/// Envelope samples below this fraction of the largest one are dropped.
pub const ENVELOPE_FLOOR: f64 = 1e-4;
/// At least this many envelope points (three precession periods).
pub const MIN_EXTREMA: usize = 6;
/// Residuals closer than this relative margin report [`DecoherenceLaw::Mixed`].
pub const MIXED_MARGIN: f64 = 0.1;

/// Envelope `(t_i, E_i)` from parabola-refined local maxima of `|v - offset|`.
pub fn envelope(times: &[f64], values: &[f64], offset: f64) -> Vec<(f64, f64)> {
    let mag: Vec<f64> = values.iter().map(|v| (v - offset).abs()).collect();
    let raw: Vec<(f64, f64)> = local_maxima(&mag)
        .into_iter()
        .filter(|&i| i > 0 && t_uniform(times, i))
        .map(|i| {
            let h = times[i + 1] - times[i];
            parabolic_vertex(times[i], h, mag[i - 1], mag[i], mag[i + 1])
        })
        .collect();
    let top = raw.iter().map(|e| e.1).fold(0.0, f64::max);
    raw.into_iter()
        .filter(|&(t, e)| t > 0.0 && e > 0.0 && e >= ENVELOPE_FLOOR * top)
        .collect()
}

fn t_uniform(times: &[f64], i: usize) -> bool {
    let (a, b) = (times[i] - times[i - 1], times[i + 1] - times[i]);
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

/// Least-squares line `y = a + b x`; returns `(a, b, rms residual)`.
fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let ss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum();
    (a, b, (ss / n).sqrt())
}

/// Fits the decay of the `axis` coherence. The `x` component oscillates
/// about a non-zero steady value, which is estimated as the mean over the
/// last third of the trace and removed first.
pub fn fit_decoherence(trace: &SpinTrace, axis: SpinAxis) -> Result<DecoherenceFit> {
    if axis == SpinAxis::Z {
        return Err(Error::param("component", "the decoherence fit takes x or y"));
    }
    let values = trace.component(axis);
    let offset = match axis {
        SpinAxis::X => {
            let tail = &values[2 * values.len() / 3..];
            if tail.is_empty() {
                0.0
            } else {
                tail.iter().sum::<f64>() / tail.len() as f64
            }
        }
        _ => 0.0,
    };
    let env = envelope(&trace.times, values, offset);
    if env.len() < MIN_EXTREMA {
        return Err(Error::TooFewExtrema {
            found: env.len(),
            needed: MIN_EXTREMA,
        });
    }
    let logs: Vec<f64> = env.iter().map(|e| e.1.ln()).collect();
    let t2: Vec<f64> = env.iter().map(|e| e.0 * e.0).collect();
    let lt: Vec<f64> = env.iter().map(|e| e.0.ln()).collect();
    let (_, g_slope, g_res) = line_fit(&t2, &logs);
    let (_, k, p_res) = line_fit(&lt, &logs);
    let law = if (g_res - p_res).abs() < MIXED_MARGIN * g_res.max(p_res) {
        DecoherenceLaw::Mixed
    } else if g_res < p_res {
        DecoherenceLaw::Gaussian
    } else {
        DecoherenceLaw::PowerLaw
    };
    Ok(DecoherenceFit {
        law,
        gaussian_rate: -g_slope,
        power_exponent: k,
        fit_residual: g_res.min(p_res),
        gaussian_residual: g_res,
        power_residual: p_res,
        extrema: env.len(),
    })
}
