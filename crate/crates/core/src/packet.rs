//! The Gaussian initial state and its free evolution.
//!
//! Conventions: `A(p) = sqrt(dx) (2 pi)^{-3/4} exp(-p^2 dx^2 / 4)` so that
//! `int |A|^2 dp = 1 / (2 pi)`, and `G(x, 0) = int A(p) e^{ipx} dp` is the unit
//! normalized packet `(2 / (pi dx^2))^{1/4} exp(-x^2 / dx^2)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{Mass, MomentumGrid, SpatialGrid};
use crate::C64;

/// `A(p)` for a packet of width `delta_x`.
pub fn spectrum_amplitude(delta_x: f64, p: f64) -> f64 {
    delta_x.sqrt() * (2.0 * PI).powf(-0.75) * (-0.25 * p * p * delta_x * delta_x).exp()
}

/// `G(x, 0)`.
pub fn packet_amplitude(delta_x: f64, x: f64) -> f64 {
    (2.0 / (PI * delta_x * delta_x)).powf(0.25) * (-(x * x) / (delta_x * delta_x)).exp()
}

/// Freely evolved packet `G(x, t) = int A(p) exp(ipx - i p^2 t / 2M) dp`.
pub fn moving_packet(delta_x: f64, mass: Mass, x: f64, t: f64) -> C64 {
    match mass {
        Mass::Infinite => C64::new(packet_amplitude(delta_x, x), 0.0),
        Mass::Finite(m) => {
            // int exp(-a p^2 + i p x) dp = sqrt(pi / a) exp(-x^2 / 4a)
            let a = C64::new(0.25 * delta_x * delta_x, 0.5 * t / m);
            let pref = delta_x.sqrt() * (2.0 * PI).powf(-0.75);
            (C64::new(PI, 0.0) / a).sqrt() * (-(x * x) / (a * 4.0)).exp() * pref
        }
    }
}

fn check_width(delta_x: f64) -> Result<()> {
    if !(delta_x.is_finite() && delta_x > 0.0) {
        return Err(Error::param("delta_x", format!("must be positive, got {delta_x}")));
    }
    Ok(())
}

/// `A(p)` sampled on `p_grid` (real and even in `p`).
///
/// Fails when the discrete spectral mass `2 pi sum |A|^2 dp` differs from one
/// by more than 1e-6, i.e. the grid is too narrow or too coarse.
pub fn make_gaussian_spectrum(delta_x: f64, p_grid: &MomentumGrid) -> Result<Vec<f64>> {
    check_width(delta_x)?;
    let a: Vec<f64> = p_grid.points().map(|p| spectrum_amplitude(delta_x, p)).collect();
    let mass = 2.0 * PI * p_grid.spacing() * a.iter().map(|v| v * v).sum::<f64>();
    if (mass - 1.0).abs() > 1e-6 {
        return Err(Error::GridCoverage(format!(
            "momentum grid holds spectral mass {mass} for delta_x = {delta_x} (need 1 within 1e-6)"
        )));
    }
    Ok(a)
}

/// `G(x, 0)` sampled on `x_grid`; the grid must contain `[-6 dx, 6 dx]`.
pub fn make_gaussian_packet(delta_x: f64, x_grid: &SpatialGrid) -> Result<Vec<f64>> {
    check_width(delta_x)?;
    let reach = 6.0 * delta_x;
    if x_grid.x_min() > -reach || x_grid.x_max() < reach {
        return Err(Error::GridCoverage(format!(
            "x grid [{}, {}] does not contain [-{reach}, {reach}]",
            x_grid.x_min(),
            x_grid.x_max()
        )));
    }
    Ok(x_grid.points().map(|x| packet_amplitude(delta_x, x)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn peak_values() {
        assert_abs_diff_eq!(spectrum_amplitude(1.0, 0.0), 0.252_0, epsilon = 1e-4);
        assert_abs_diff_eq!(spectrum_amplitude(1.0, 0.0), (2.0 * PI).powf(-0.75), epsilon = 1e-15);
        assert_abs_diff_eq!(packet_amplitude(1.0, 0.0), 0.893_2, epsilon = 1e-4);
    }

    #[test]
    fn spectrum_is_even_and_normalized() {
        let g = MomentumGrid::new(20.0, 1024).unwrap();
        let a = make_gaussian_spectrum(1.0, &g).unwrap();
        let int: f64 = a.iter().map(|v| v * v).sum::<f64>() * g.spacing();
        assert_abs_diff_eq!(int, 1.0 / (2.0 * PI), epsilon = 1e-12);
        for p in g.points() {
            assert_eq!(spectrum_amplitude(1.0, p), spectrum_amplitude(1.0, -p));
        }
    }

    #[test]
    fn narrow_spectrum_grid_is_rejected() {
        let g = MomentumGrid::new(2.0, 512).unwrap();
        assert!(matches!(make_gaussian_spectrum(1.0, &g), Err(Error::GridCoverage(_))));
    }

    #[test]
    fn packet_is_normalized() {
        let x = SpatialGrid::new(-10.0, 10.0, 4001).unwrap();
        let g = make_gaussian_packet(1.0, &x).unwrap();
        let norm: f64 = g.iter().map(|v| v * v).sum::<f64>() * x.spacing();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-8);
        assert!(make_gaussian_packet(2.0, &x).is_err());
    }

    #[test]
    fn moving_packet_keeps_norm_and_spreads() {
        let x = SpatialGrid::new(-60.0, 60.0, 12001).unwrap();
        let mass = Mass::Finite(2.0);
        let norm: f64 = x.points().map(|xi| moving_packet(1.0, mass, xi, 10.0).norm_sqr()).sum::<f64>()
            * x.spacing();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-10);
        assert!(moving_packet(1.0, mass, 0.0, 10.0).norm() < packet_amplitude(1.0, 0.0));
        assert_abs_diff_eq!(moving_packet(1.0, mass, 0.3, 0.0).re, packet_amplitude(1.0, 0.3), epsilon = 1e-14);
    }
}
