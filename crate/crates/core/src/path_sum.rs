//! Discrete Feynman paths of `sigma_z`.
//!
//! Slicing `[0, t]` into `K` steps of `eps = t / K` and splitting each step as
//! `exp(-i n.sigma eps) exp(-i p sigma_z eps)` turns the spin propagator into
//! a sum over spin histories `s_1, ..., s_{K+1}`. The momentum enters only
//! through the phase `exp(-i p eps sum_{k<=K} s_k)`, so grouping histories by
//! their time average `<sigma_z>_t = (1/K) sum_{k<=K} s_k` gives
//! `p`-independent amplitude operators, one per bin. The final label
//! `s_{K+1}` only selects the output row and does not enter the average.
//!
//! Bins are indexed by `m`, the number of `+1` labels among `s_1..s_K`; the
//! bin centre is `(2m - K) / K`.

use crate::error::{Error, Result};
use crate::packet::packet_amplitude;
use crate::spin::{evolution_operator, SpinMatrix};
use crate::spinor::Spinor;
use crate::C64;

/// Largest step count accepted by the dynamic program.
pub const MAX_PATH_STEPS: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq)]
pub struct PathSumResult {
    pub step_count: usize,
    pub time: f64,
    /// `(2m - K) / K` for `m = 0..=K`.
    pub bin_centers: Vec<f64>,
    /// Amplitude operator of all histories in each bin, without the momentum
    /// phase.
    pub amplitudes: Vec<SpinMatrix>,
}

impl PathSumResult {
    /// Positions `x = t <sigma_z>_t` of the bins.
    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        self.bin_centers.iter().map(move |c| c * self.time)
    }

    /// Sum over bins with the momentum phase `exp(-i p x_m)` attached.
    pub fn total(&self, p: f64) -> SpinMatrix {
        self.positions()
            .zip(&self.amplitudes)
            .fold(SpinMatrix::ZERO, |acc, (x, b)| acc + b.scale(C64::from_polar(1.0, -p * x)))
    }
}

fn validate(t: f64, steps: usize) -> Result<()> {
    if steps == 0 {
        return Err(Error::param("K", "need at least one step"));
    }
    if steps > MAX_PATH_STEPS {
        return Err(Error::PathSumTooLarge {
            steps,
            cap: MAX_PATH_STEPS,
        });
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::param("t", format!("must be positive, got {t}")));
    }
    Ok(())
}

/// The `p`-independent bin amplitudes, by dynamic programming over
/// (current spin, number of up labels so far).
pub fn path_amplitudes(theta: f64, t: f64, steps: usize) -> Result<PathSumResult> {
    validate(t, steps)?;
    let eps = t / steps as f64;
    let v = evolution_operator(0.0, theta, eps);
    let one = C64::new(1.0, 0.0);

    // cur[m]: row = current spin, column = initial spin
    let mut cur = vec![SpinMatrix::ZERO; steps + 1];
    cur[1].m11 = one;
    cur[0].m22 = one;
    let mut next = vec![SpinMatrix::ZERO; steps + 1];
    for k in 1..=steps {
        if k < steps {
            next.iter_mut().for_each(|b| *b = SpinMatrix::ZERO);
            // counts so far are <= k, and the new label may add one
            for m in 0..=k {
                let moved = v * cur[m];
                if moved.max_abs() == 0.0 {
                    continue;
                }
                next[m + 1].m11 += moved.m11;
                next[m + 1].m12 += moved.m12;
                next[m].m21 += moved.m21;
                next[m].m22 += moved.m22;
            }
            std::mem::swap(&mut cur, &mut next);
        } else {
            for b in cur.iter_mut() {
                *b = v * *b;
            }
        }
    }

    let bin_centers = (0..=steps)
        .map(|m| (2.0 * m as f64 - steps as f64) / steps as f64)
        .collect();
    Ok(PathSumResult {
        step_count: steps,
        time: t,
        bin_centers,
        amplitudes: cur,
    })
}

/// The `K`-step split product `[exp(-i n.sigma eps) exp(-i p sigma_z eps)]^K`.
pub fn trotter_product(p: f64, theta: f64, t: f64, steps: usize) -> Result<SpinMatrix> {
    validate(t, steps)?;
    let eps = t / steps as f64;
    let v = evolution_operator(0.0, theta, eps);
    let d = SpinMatrix::new(
        C64::from_polar(1.0, -p * eps),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::from_polar(1.0, p * eps),
    );
    let step = v * d;
    Ok((0..steps).fold(SpinMatrix::IDENTITY, |acc, _| step * acc))
}

/// Path sum at momentum `p`: the total operator (equal to the split product)
/// together with the binned amplitudes.
pub fn trotter_path_sum(p: f64, theta: f64, t: f64, steps: usize) -> Result<(SpinMatrix, PathSumResult)> {
    let result = path_amplitudes(theta, t, steps)?;
    Ok((result.total(p), result))
}

/// Bin amplitudes applied to an initial spinor: the discrete form of the
/// sub-states `eta(x, t)`, a sum of point masses at `x_m = t (2m - K) / K`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathAverageDistribution {
    pub step_count: usize,
    pub time: f64,
    pub bin_centers: Vec<f64>,
    pub spinors: Vec<Spinor>,
}

impl PathAverageDistribution {
    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        self.bin_centers.iter().map(move |c| c * self.time)
    }

    /// The point masses seen through a Gaussian packet of width `width`:
    /// `sum_m G(x - x_m, 0) eta_m`.
    pub fn coarse_grain(&self, x: f64, width: f64) -> Spinor {
        self.positions()
            .zip(&self.spinors)
            .fold(Spinor::ZERO, |acc, (xm, s)| {
                let g = packet_amplitude(width, x - xm);
                if g == 0.0 {
                    acc
                } else {
                    acc + *s * g
                }
            })
    }
}

pub fn path_average_distribution(
    theta: f64,
    t: f64,
    steps: usize,
    eta_in: &Spinor,
) -> Result<PathAverageDistribution> {
    let r = path_amplitudes(theta, t, steps)?;
    Ok(PathAverageDistribution {
        step_count: r.step_count,
        time: r.time,
        spinors: r.amplitudes.iter().map(|b| b.apply(eta_in)).collect(),
        bin_centers: r.bin_centers,
    })
}
