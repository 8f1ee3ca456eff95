//! The spinor wave function `Psi(x, t)`.
//!
//! Two independent routes:
//!
//! * [`evolve_momentum`]: `Psi(x, t) = int A(p) e^{ipx - ip^2 t/2M} U(p, t) eta_in dp`
//!   as a discrete Fourier sum (an FFT when the grids are conjugate).
//! * [`evolve_convolution`]: `Psi(x, t) = int G(x - x', t) eta(x', t) dx'` with the
//!   coordinate-space sub-states of [`crate::kernel`]; the light-cone deltas
//!   contribute shifted packets analytically.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{packet_width, SimParams, SpatialGrid};
use crate::kernel::{eta_deltas, eta_regular};
use crate::packet::{make_gaussian_spectrum, moving_packet, packet_amplitude};
use crate::quadrature::gl10;
use crate::spin::evolution_operator;
use crate::spinor::Spinor;
use crate::C64;

/// A spinor sampled on a spatial grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    grid: SpatialGrid,
    values: Vec<Spinor>,
    time: f64,
}

impl SpinorField {
    pub fn new(grid: SpatialGrid, values: Vec<Spinor>, time: f64) -> SpinorField {
        assert_eq!(grid.len(), values.len(), "one spinor per grid point");
        SpinorField { grid, values, time }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Spinor] {
        &self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// `int (|Psi_1|^2 + |Psi_2|^2) dx` by the grid sum.
    pub fn norm(&self) -> f64 {
        self.grid.spacing() * self.values.iter().map(Spinor::norm_sqr).sum::<f64>()
    }

    /// `(int |a - b|^2 dx)^{1/2}`; the grids must match.
    pub fn l2_distance(&self, other: &SpinorField) -> f64 {
        assert_eq!(self.grid, other.grid, "fields on different grids");
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (*a - *b).norm_sqr())
            .sum();
        (s * self.grid.spacing()).sqrt()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &Spinor)> {
        self.grid.points().zip(self.values.iter())
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::param("t", format!("must be non-negative, got {t}")));
    }
    Ok(())
}

/// The momentum-space integrand `A(p) e^{-ip^2 t/2M} U(p, t) eta_in` on the grid.
fn momentum_integrand(params: &SimParams, t: f64) -> Result<Vec<Spinor>> {
    let spectrum = make_gaussian_spectrum(params.delta_x(), params.p_grid())?;
    let eta = params.eta_in();
    let theta = params.theta();
    let mass = params.mass();
    Ok(params
        .p_grid()
        .points()
        .zip(spectrum)
        .map(|(p, a)| {
            let w = C64::from_polar(a, -mass.kinetic_phase(p, t));
            evolution_operator(p, theta, t).apply(&eta).scale(w)
        })
        .collect())
}

/// `Psi(x, t)` from the momentum integral. Uses an FFT when the grids are
/// conjugate and the direct sum otherwise.
pub fn evolve_momentum(params: &SimParams, t: f64) -> Result<SpinorField> {
    if params.grids_conjugate() {
        evolve_momentum_fft(params, t)
    } else {
        evolve_momentum_direct(params, t)
    }
}

fn evolve_momentum_fft(params: &SimParams, t: f64) -> Result<SpinorField> {
    check_time(t)?;
    params.check_coverage(t)?;
    let f = momentum_integrand(params, t)?;
    let xg = *params.x_grid();
    let pg = params.p_grid();
    let n = xg.len();
    let dp = pg.spacing();
    let x_min = xg.x_min();

    // p_k x_j = -p_max x_min + k dp x_min - pi j + 2 pi jk / n
    let pre: Vec<C64> = (0..n).map(|k| C64::from_polar(1.0, k as f64 * dp * x_min)).collect();
    let mut up: Vec<C64> = f.iter().zip(&pre).map(|(s, e)| s.up * e).collect();
    let mut down: Vec<C64> = f.iter().zip(&pre).map(|(s, e)| s.down * e).collect();
    let fft = FftPlanner::new().plan_fft_inverse(n);
    fft.process(&mut up);
    fft.process(&mut down);

    let global = C64::from_polar(dp, -pg.p_max() * x_min);
    let values = (0..n)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let c = global * sign;
            Spinor {
                up: up[j] * c,
                down: down[j] * c,
            }
        })
        .collect();
    Ok(SpinorField::new(xg, values, t))
}

/// Reference `O(N_x N_p)` evaluation of the momentum integral.
pub fn evolve_momentum_direct(params: &SimParams, t: f64) -> Result<SpinorField> {
    check_time(t)?;
    params.check_coverage(t)?;
    let f = momentum_integrand(params, t)?;
    let ps: Vec<f64> = params.p_grid().points().collect();
    let dp = params.p_grid().spacing();
    let xg = *params.x_grid();
    let xs: Vec<f64> = xg.points().collect();
    let values = xs
        .par_iter()
        .map(|&x| {
            ps.iter()
                .zip(&f)
                .fold(Spinor::ZERO, |acc, (&p, s)| acc + s.scale(C64::from_polar(dp, p * x)))
        })
        .collect();
    Ok(SpinorField::new(xg, values, t))
}

/// Convolution accuracy target in L2 between successive refinements.
const CONVOLUTION_TOL: f64 = 1e-9;
const MAX_CONVOLUTION_NODES: usize = 1 << 21;

/// `Psi(x, t)` from the coordinate-space convolution of the free packet with
/// the sub-states `eta(x', t)`.
pub fn evolve_convolution(params: &SimParams, t: f64) -> Result<SpinorField> {
    check_time(t)?;
    let xg = *params.x_grid();
    let eta_in = params.eta_in();
    let dx = params.delta_x();
    if t == 0.0 {
        let values = xg.points().map(|x| eta_in * packet_amplitude(dx, x)).collect();
        return Ok(SpinorField::new(xg, values, 0.0));
    }
    params.check_coverage(t)?;
    let mass = params.mass();
    let theta = params.theta();
    let width = packet_width(dx, mass, t);

    let (plus, minus) = eta_deltas(t, theta, &eta_in);
    let singular: Vec<Spinor> = xg
        .points()
        .map(|x| {
            plus.spinor.scale(moving_packet(dx, mass, x - plus.position, t))
                + minus.spinor.scale(moving_packet(dx, mass, x - minus.position, t))
        })
        .collect();

    // panels resolve both the packet and the Bessel oscillations of eta
    let h0 = (0.5 * dx.min(1.0)).min(0.25);
    let mut panels = ((2.0 * t) / h0).ceil() as usize;
    let mut prev = convolve_regular(params, t, width, panels)?;
    loop {
        panels *= 2;
        if panels * gl10().order() > MAX_CONVOLUTION_NODES {
            return Err(Error::NoConvergence(format!(
                "convolution at t = {t} needs more than {MAX_CONVOLUTION_NODES} nodes"
            )));
        }
        let next = convolve_regular(params, t, width, panels)?;
        let change: f64 = next
            .iter()
            .zip(&prev)
            .map(|(a, b)| (*a - *b).norm_sqr())
            .sum::<f64>()
            * xg.spacing();
        prev = next;
        if change.sqrt() < CONVOLUTION_TOL {
            break;
        }
    }
    let values = singular.into_iter().zip(prev).map(|(s, r)| s + r).collect();
    Ok(SpinorField::new(xg, values, t))
}

fn convolve_regular(params: &SimParams, t: f64, width: f64, panels: usize) -> Result<Vec<Spinor>> {
    let rule = gl10();
    let h = 2.0 * t / panels as f64;
    let nodes: Vec<(f64, f64)> = (0..panels)
        .flat_map(|k| {
            let lo = -t + k as f64 * h;
            rule.mapped(lo, lo + h).collect::<Vec<_>>()
        })
        .collect();
    let theta = params.theta();
    let eta_in = params.eta_in();
    let weighted: Vec<Spinor> = nodes
        .par_iter()
        .map(|&(x, w)| eta_regular(x, t, theta, &eta_in).map(|e| e * w))
        .collect::<Result<_>>()?;

    let dx = params.delta_x();
    let mass = params.mass();
    let reach = 9.0 * width;
    let xs: Vec<f64> = params.x_grid().points().collect();
    Ok(xs
        .par_iter()
        .map(|&x| {
            let lo = nodes.partition_point(|n| n.0 < x - reach);
            let hi = nodes.partition_point(|n| n.0 <= x + reach);
            (lo..hi).fold(Spinor::ZERO, |acc, k| {
                acc + weighted[k].scale(moving_packet(dx, mass, x - nodes[k].0, t))
            })
        })
        .collect())
}

/// Reference value `2 pi sum |A(p)|^2 dp` of the total norm on the momentum grid.
pub fn spectral_norm(params: &SimParams) -> Result<f64> {
    let a = make_gaussian_spectrum(params.delta_x(), params.p_grid())?;
    Ok(2.0 * PI * params.p_grid().spacing() * a.iter().map(|v| v * v).sum::<f64>())
}
