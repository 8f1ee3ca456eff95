//! Spin and position observables.
//!
//! The reduced spin density matrix is the incoherent momentum sum
//! `rho_s(t) = 2 pi int |A(p)|^2 U(p, t) |eta_in><eta_in| U^dagger(p, t) dp`.
//! It is evaluated with the same periodic sum on the momentum grid that
//! [`crate::propagator::evolve_momentum`] uses, so its partial trace agrees
//! with the field to rounding.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SimParams;
use crate::packet::make_gaussian_spectrum;
use crate::propagator::{evolve_momentum, SpinorField};
use crate::quadrature::simpson_samples;
use crate::spin::evolution_operator;
use crate::spinor::Spinor;
use crate::C64;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-10;

/// Hermitian, unit-trace, positive 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    r11: C64,
    r12: C64,
    r21: C64,
    r22: C64,
}

impl DensityMatrix {
    pub fn new(r11: C64, r12: C64, r21: C64, r22: C64) -> Result<DensityMatrix> {
        let rho = DensityMatrix { r11, r12, r21, r22 };
        rho.validate()?;
        Ok(rho)
    }

    /// `|psi><psi| / <psi|psi>`.
    pub fn pure(psi: &Spinor) -> Result<DensityMatrix> {
        let n = psi.norm_sqr();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidState("cannot project onto a zero spinor".into()));
        }
        Ok(outer(psi, 1.0 / n))
    }

    fn validate(&self) -> Result<()> {
        let entries = [self.r11, self.r12, self.r21, self.r22];
        if entries.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidState("non-finite density matrix entry".into()));
        }
        let herm = (self.r11.im.abs())
            .max(self.r22.im.abs())
            .max((self.r12 - self.r21.conj()).norm());
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {herm:e})")));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let (lo, _) = self.eigenvalues();
        if lo < -PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {lo:e}")));
        }
        Ok(())
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        match (row, col) {
            (0, 0) => self.r11,
            (0, 1) => self.r12,
            (1, 0) => self.r21,
            (1, 1) => self.r22,
            _ => panic!("density matrix index ({row}, {col}) out of range"),
        }
    }

    pub fn trace(&self) -> f64 {
        self.r11.re + self.r22.re
    }

    /// `(sigma_x, sigma_y, sigma_z)` averages.
    pub fn bloch(&self) -> [f64; 3] {
        [2.0 * self.r21.re, 2.0 * self.r21.im, self.r11.re - self.r22.re]
    }

    /// `tr(rho^2) = (1 + |b|^2) / 2`.
    pub fn purity(&self) -> f64 {
        self.r11.norm_sqr() + self.r22.norm_sqr() + 2.0 * self.r12.norm_sqr()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let [bx, by, bz] = self.bloch();
        let half_tr = 0.5 * self.trace();
        let r = 0.5 * (bx * bx + by * by + bz * bz).sqrt();
        (half_tr - r, half_tr + r)
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        [
            self.r11 - other.r11,
            self.r12 - other.r12,
            self.r21 - other.r21,
            self.r22 - other.r22,
        ]
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
    }
}

fn outer(psi: &Spinor, w: f64) -> DensityMatrix {
    DensityMatrix {
        r11: C64::new(psi.up.norm_sqr() * w, 0.0),
        r12: psi.up * psi.down.conj() * w,
        r21: psi.down * psi.up.conj() * w,
        r22: C64::new(psi.down.norm_sqr() * w, 0.0),
    }
}

/// `rho_s(t)` by the periodic sum over the momentum grid.
pub fn reduced_density_matrix(params: &SimParams, t: f64) -> Result<DensityMatrix> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::param("t", format!("must be non-negative, got {t}")));
    }
    params.check_coverage(t)?;
    let spectrum = make_gaussian_spectrum(params.delta_x(), params.p_grid())?;
    let dp = params.p_grid().spacing();
    let eta = params.eta_in();
    let theta = params.theta();
    let mut acc = DensityMatrix {
        r11: C64::new(0.0, 0.0),
        r12: C64::new(0.0, 0.0),
        r21: C64::new(0.0, 0.0),
        r22: C64::new(0.0, 0.0),
    };
    for (p, a) in params.p_grid().points().zip(spectrum) {
        let w = 2.0 * PI * a * a * dp;
        if w == 0.0 {
            continue;
        }
        let psi = evolution_operator(p, theta, t).apply(&eta);
        let o = outer(&psi, w);
        acc.r11 += o.r11;
        acc.r12 += o.r12;
        acc.r21 += o.r21;
        acc.r22 += o.r22;
    }
    // symmetrize away rounding so validation sees an exactly Hermitian matrix
    let off = 0.5 * (acc.r12 + acc.r21.conj());
    acc.r12 = off;
    acc.r21 = off.conj();
    acc.r11.im = 0.0;
    acc.r22.im = 0.0;
    acc.validate()?;
    Ok(acc)
}

/// `(tr sigma_x rho, tr sigma_y rho, tr sigma_z rho)`.
pub fn spin_expectations(rho: &DensityMatrix) -> (f64, f64, f64) {
    let [x, y, z] = rho.bloch();
    (x, y, z)
}

/// `|Psi_1(x)|^2 + |Psi_2(x)|^2` on the field's grid.
pub fn position_density(field: &SpinorField) -> Vec<f64> {
    field.values().iter().map(Spinor::norm_sqr).collect()
}

/// `int x P(x) dx`.
pub fn mean_position(field: &SpinorField) -> f64 {
    field.grid().spacing() * field.iter().map(|(x, s)| x * s.norm_sqr()).sum::<f64>()
}

/// `int (|Psi_1|^2 - |Psi_2|^2) dx`, the field-side `sigma_z` average.
pub fn field_sigma_z(field: &SpinorField) -> f64 {
    field.grid().spacing()
        * field
            .values()
            .iter()
            .map(|s| s.up.norm_sqr() - s.down.norm_sqr())
            .sum::<f64>()
}

const EHRENFEST_TOL: f64 = 1e-6;
const EHRENFEST_MAX_NODES: usize = 1 << 16;

/// `int_0^t sigma_z(t') dt'` by composite Simpson, doubling the node count
/// from `n_time_nodes` until two estimates differ by less than 1e-6.
pub fn ehrenfest_position(params: &SimParams, t: f64, n_time_nodes: usize) -> Result<f64> {
    if n_time_nodes < 2 {
        return Err(Error::param("n_time_nodes", "need at least two nodes"));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::param("t", format!("must be non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    params.check_coverage(t)?;
    let sz = |tt: f64| -> Result<f64> { Ok(reduced_density_matrix(params, tt)?.bloch()[2]) };
    let eval = |intervals: usize| -> Result<f64> {
        let h = t / intervals as f64;
        let values = (0..=intervals)
            .into_par_iter()
            .map(|k| sz(k as f64 * h))
            .collect::<Result<Vec<f64>>>()?;
        Ok(simpson_samples(&values, h))
    };
    // never start coarser than a quarter time unit, so the spin precession
    // (period pi) is resolved before the stopping test is trusted
    let mut intervals = (n_time_nodes - 1).max((4.0 * t).ceil() as usize).max(2);
    intervals += intervals % 2;
    let mut prev = eval(intervals)?;
    loop {
        intervals *= 2;
        if intervals > EHRENFEST_MAX_NODES {
            return Err(Error::NoConvergence(format!(
                "time integral of sigma_z to t = {t} needs more than {EHRENFEST_MAX_NODES} nodes"
            )));
        }
        let next = eval(intervals)?;
        if (next - prev).abs() < EHRENFEST_TOL {
            return Ok(next);
        }
        prev = next;
    }
}

/// Spin averages and mean position over a list of times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinTrace {
    pub times: Vec<f64>,
    pub sigma_x: Vec<f64>,
    pub sigma_y: Vec<f64>,
    pub sigma_z: Vec<f64>,
    pub mean_position: Vec<f64>,
}

impl SpinTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn component(&self, axis: SpinAxis) -> &[f64] {
        match axis {
            SpinAxis::X => &self.sigma_x,
            SpinAxis::Y => &self.sigma_y,
            SpinAxis::Z => &self.sigma_z,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinAxis {
    X,
    Y,
    Z,
}

const BLOCH_BOUND: f64 = 1.0 + 1e-10;

pub fn spin_trace(params: &SimParams, t_list: &[f64]) -> Result<SpinTrace> {
    if t_list.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::param("t_list", "times must be finite and non-negative"));
    }
    if t_list.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::param("t_list", "times must be ascending"));
    }
    let rows = t_list
        .par_iter()
        .map(|&t| {
            let rho = reduced_density_matrix(params, t)?;
            let field = evolve_momentum(params, t)?;
            let (x, y, z) = spin_expectations(&rho);
            Ok((x, y, z, mean_position(&field)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut trace = SpinTrace {
        times: t_list.to_vec(),
        sigma_x: Vec::with_capacity(rows.len()),
        sigma_y: Vec::with_capacity(rows.len()),
        sigma_z: Vec::with_capacity(rows.len()),
        mean_position: Vec::with_capacity(rows.len()),
    };
    for (x, y, z, m) in rows {
        if x.abs().max(y.abs()).max(z.abs()) > BLOCH_BOUND {
            return Err(Error::InvalidState(format!("spin average outside [-1, 1]: ({x}, {y}, {z})")));
        }
        trace.sigma_x.push(x);
        trace.sigma_y.push(y);
        trace.sigma_z.push(z);
        trace.mean_position.push(m);
    }
    Ok(trace)
}

/// Outcome of steady-state detection on a sampled signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    /// Mean over the detected window, or over the second half of the record
    /// when no window qualifies.
    pub value: f64,
    /// Start of the first window whose spread is below the tolerance.
    pub onset: Option<f64>,
    pub converged: bool,
}

/// Default sliding-window width for steady-state detection.
pub const PLATEAU_WINDOW: f64 = 5.0;
/// Default spread tolerance inside the window.
pub const PLATEAU_TOL: f64 = 1e-3;

/// First window `[t_i, t_i + window]` in which the samples vary by less than
/// `tol`. Without one, falls back to the mean of the second half.
pub fn detect_plateau(times: &[f64], values: &[f64], window: f64, tol: f64) -> Result<Plateau> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::param("times", "need at least two matching samples"));
    }
    let mut hi = 0;
    for lo in 0..times.len() {
        while hi < times.len() && times[hi] <= times[lo] + window * (1.0 + 1e-9) {
            hi += 1;
        }
        if times[hi - 1] - times[lo] < window * (1.0 - 1e-9) {
            break;
        }
        let slice = &values[lo..hi];
        let max = slice.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = slice.iter().cloned().fold(f64::INFINITY, f64::min);
        if max - min < tol {
            return Ok(Plateau {
                value: slice.iter().sum::<f64>() / slice.len() as f64,
                onset: Some(times[lo]),
                converged: true,
            });
        }
    }
    let half = &values[values.len() / 2..];
    Ok(Plateau {
        value: half.iter().sum::<f64>() / half.len() as f64,
        onset: None,
        converged: false,
    })
}
