//! Shape analysis of sampled density profiles: peaks, centroids and fringes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;

/// Interior indices `i` with `v[i-1] < v[i] >= v[i+1]`.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1])
        .collect()
}

/// Interior indices `i` with `v[i-1] > v[i] <= v[i+1]`.
pub fn local_minima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] < values[i - 1] && values[i] <= values[i + 1])
        .collect()
}

/// Vertex of the parabola through three equally spaced samples centred on
/// `x`, as `(position, height)`.
pub fn parabolic_vertex(x: f64, h: f64, left: f64, mid: f64, right: f64) -> (f64, f64) {
    let curv = left - 2.0 * mid + right;
    if curv >= 0.0 {
        return (x, mid);
    }
    let shift = 0.5 * (left - right) / curv;
    let shift = shift.clamp(-1.0, 1.0);
    (x + shift * h, mid - 0.25 * (left - right) * shift)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub index: usize,
    pub position: f64,
    pub height: f64,
}

/// Local maxima at least `rel_threshold` times the global maximum, refined
/// by parabolic interpolation, in ascending position.
pub fn find_peaks(grid: &SpatialGrid, density: &[f64], rel_threshold: f64) -> Vec<Peak> {
    let top = density.iter().cloned().fold(0.0, f64::max);
    if top <= 0.0 {
        return Vec::new();
    }
    let h = grid.spacing();
    local_maxima(density)
        .into_iter()
        .filter(|&i| density[i] >= rel_threshold * top)
        .map(|i| {
            let (position, height) =
                parabolic_vertex(grid.point(i), h, density[i - 1], density[i], density[i + 1]);
            Peak {
                index: i,
                position,
                height,
            }
        })
        .collect()
}

/// `int x P dx / int P dx` over `|x - center| <= half_width`.
pub fn peak_centroid(grid: &SpatialGrid, density: &[f64], center: f64, half_width: f64) -> Result<f64> {
    let (mut m0, mut m1) = (0.0, 0.0);
    for (x, p) in grid.points().zip(density) {
        if (x - center).abs() <= half_width {
            m0 += p;
            m1 += x * p;
        }
    }
    if m0 <= 0.0 {
        return Err(Error::InvalidState(format!(
            "no density within {half_width} of {center}"
        )));
    }
    Ok(m1 / m0)
}

/// Probability in `[a, b]`.
pub fn mass_between(grid: &SpatialGrid, density: &[f64], a: f64, b: f64) -> f64 {
    grid.spacing()
        * grid
            .points()
            .zip(density)
            .filter(|(x, _)| *x >= a && *x <= b)
            .map(|(_, p)| p)
            .sum::<f64>()
}

/// Interference fringes on an interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeReport {
    /// All local maxima strictly inside the interval.
    pub maxima: Vec<f64>,
    /// Per maximum: `(P_max - P_min) / (P_max + P_min)` with `P_min` the
    /// higher of its two neighbouring minima.
    pub depths: Vec<f64>,
    /// `(max P - min P) / (max P + min P)` over the interval.
    pub modulation_depth: f64,
}

impl FringeReport {
    /// Maxima whose own depth exceeds `threshold`.
    pub fn visible(&self, threshold: f64) -> usize {
        self.depths.iter().filter(|d| **d > threshold).count()
    }
}

pub fn fringes(grid: &SpatialGrid, density: &[f64], a: f64, b: f64) -> Result<FringeReport> {
    if !(a < b) {
        return Err(Error::param("interval", format!("need a < b, got [{a}, {b}]")));
    }
    let idx: Vec<usize> = grid
        .points()
        .enumerate()
        .filter(|(_, x)| *x >= a && *x <= b)
        .map(|(i, _)| i)
        .collect();
    if idx.len() < 3 {
        return Err(Error::GridCoverage(format!("fewer than three samples in [{a}, {b}]")));
    }
    let lo = idx[0];
    let slice = &density[lo..=idx[idx.len() - 1]];
    let maxima = local_maxima(slice);
    let minima = local_minima(slice);
    let depths = maxima
        .iter()
        .map(|&m| {
            let left = minima.iter().rev().find(|&&k| k < m).map(|&k| slice[k]);
            let right = minima.iter().find(|&&k| k > m).map(|&k| slice[k]);
            let floor = match (left, right) {
                (Some(l), Some(r)) => l.max(r),
                (Some(v), None) | (None, Some(v)) => v,
                (None, None) => slice[m],
            };
            let peak = slice[m];
            if peak + floor > 0.0 {
                (peak - floor) / (peak + floor)
            } else {
                0.0
            }
        })
        .collect();
    let max = slice.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = slice.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(FringeReport {
        maxima: maxima.iter().map(|&m| grid.point(lo + m)).collect(),
        depths,
        modulation_depth: if max + min > 0.0 { (max - min) / (max + min) } else { 0.0 },
    })
}
