//! Coordinate-space spin kernels.
//!
//! The amplitude for the pointer to read `x` (i.e. `<sigma_z>_t = x / t`)
//! with the spin going from `|j>` to `|i>` is
//!
//! ```text
//! u_ij(x, t) = (2 pi)^-1 int e^{ipx} U_ij(p, t) dp = (2 pi)^-1 e^{-ix cos theta} xi_ij(x, t).
//! ```
//!
//! With `beta = sin theta` and `r = sqrt(t^2 - x^2)`, on `|x| <= t`:
//!
//! ```text
//! xi_11 = 2 pi delta(x - t) - (1 + x/t) int_{-beta}^{beta} sin(t sqrt(beta^2 - p^2)) e^{-px} dp
//! xi_12 = -i beta int_{-beta}^{beta} cos(t sqrt(beta^2 - p^2)) e^{-px} / sqrt(beta^2 - p^2) dp
//! xi_22(x) = xi_11(-x),  xi_21 = xi_12,
//! ```
//!
//! and the regular parts vanish outside the light cone. The interval
//! integrals equal `pi beta t J1(beta r) / r` and `pi J0(beta r)`. The
//! `p = beta sin u` substitution removes the inverse square-root endpoints.
//! Once `e^{beta |x|}` exceeds 1e8 the interval form cancels catastrophically
//! and the integrals are taken in the equivalent bounded Bessel form instead.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::propagator::SpinorField;
use crate::quadrature::{composite_refined, gl16};
use crate::spin::SpinMatrix;
use crate::spinor::Spinor;
use crate::C64;

/// Coefficient of `delta(x - t)` in `xi_11` and of `delta(x + t)` in `xi_22`.
pub const DELTA_WEIGHT: f64 = 2.0 * PI;

/// Above this `e^{beta |x|}` the interval integrals switch to the Bessel form.
const GROWTH_LIMIT: f64 = 1e8;
const KERNEL_TOL: f64 = 1e-12;
const MAX_PANELS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    /// Smooth part of `xi_ij(x, t)`.
    pub regular: SpinMatrix,
    /// Coefficient of `delta(x - t)` in entry 11.
    pub delta_plus_weight: C64,
    /// Coefficient of `delta(x + t)` in entry 22.
    pub delta_minus_weight: C64,
    /// `|x| <= t`.
    pub support_flag: bool,
}

/// The two interval integrals `(S, C)`:
/// `S = int sin(t w) e^{-px} dp`, `C = int cos(t w) e^{-px} / w dp`,
/// `w = sqrt(beta^2 - p^2)`, over `p` in `[-beta, beta]`.
pub fn interval_integrals(x: f64, t: f64, beta: f64) -> Result<(f64, f64)> {
    if beta == 0.0 {
        return Ok((0.0, 0.0));
    }
    let growth = (beta * x.abs()).exp();
    if growth > GROWTH_LIMIT {
        return bessel_form(x, t, beta);
    }
    // roundoff scales with the largest integrand value, not with the result
    let tol = KERNEL_TOL * growth;
    let panels = (beta * (t + x.abs()) / 4.0).ceil() as usize + 1;
    // p = beta sin u, dp = beta cos u du, w = beta cos u
    let (s, _) = composite_refined(gl16(), -FRAC_PI_2, FRAC_PI_2, panels, MAX_PANELS, tol, |u: f64| {
        let (su, cu) = u.sin_cos();
        (t * beta * cu).sin() * (-x * beta * su).exp() * beta * cu
    })?;
    let (c, _) = composite_refined(gl16(), -FRAC_PI_2, FRAC_PI_2, panels, MAX_PANELS, tol, |u: f64| {
        let (su, cu) = u.sin_cos();
        (t * beta * cu).cos() * (-x * beta * su).exp()
    })?;
    Ok((s, c))
}

/// `J0(z)` and `J1(z) / z` from their bounded integral representations over
/// `[0, pi]`.
pub fn bessel_j0_j1_over_z(z: f64) -> Result<(f64, f64)> {
    let panels = (z.abs() / 4.0).ceil() as usize + 1;
    let (j0, _) = composite_refined(gl16(), 0.0, PI, panels, MAX_PANELS, KERNEL_TOL, |phi: f64| {
        (z * phi.sin()).cos()
    })?;
    let j1_over_z = if z.abs() < 1e-6 {
        0.5 - z * z / 16.0
    } else {
        let (j1, _) = composite_refined(gl16(), 0.0, PI, panels, MAX_PANELS, KERNEL_TOL, |phi: f64| {
            (phi - z * phi.sin()).cos()
        })?;
        j1 / (PI * z)
    };
    Ok((j0 / PI, j1_over_z))
}

fn bessel_form(x: f64, t: f64, beta: f64) -> Result<(f64, f64)> {
    let r = ((t - x) * (t + x)).max(0.0).sqrt();
    let (j0, j1z) = bessel_j0_j1_over_z(beta * r)?;
    Ok((PI * beta * beta * t * j1z, PI * j0))
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::param("t", format!("kernel needs t > 0, got {t}")));
    }
    Ok(())
}

/// `xi_ij(x, t)` with its delta-singular parts carried symbolically.
pub fn kernel_xi(x: f64, t: f64, theta: f64) -> Result<KernelValue> {
    check_time(t)?;
    let support = x.abs() <= t;
    let delta = C64::new(DELTA_WEIGHT, 0.0);
    if !support {
        return Ok(KernelValue {
            regular: SpinMatrix::ZERO,
            delta_plus_weight: delta,
            delta_minus_weight: delta,
            support_flag: false,
        });
    }
    let beta = theta.sin();
    let (s_plus, c) = interval_integrals(x, t, beta)?;
    let (s_minus, _) = interval_integrals(-x, t, beta)?;
    let r11 = -(1.0 + x / t) * s_plus;
    let r22 = -(1.0 - x / t) * s_minus;
    let r12 = C64::new(0.0, -beta * c);
    Ok(KernelValue {
        regular: SpinMatrix::new(C64::new(r11, 0.0), r12, r12, C64::new(r22, 0.0)),
        delta_plus_weight: delta,
        delta_minus_weight: delta,
        support_flag: true,
    })
}

/// Regular part of `eta(x, t) = (2 pi)^-1 e^{-ix cos theta} xi(x, t) eta_in`.
pub fn eta_regular(x: f64, t: f64, theta: f64, eta_in: &Spinor) -> Result<Spinor> {
    let k = kernel_xi(x, t, theta)?;
    if !k.support_flag {
        return Ok(Spinor::ZERO);
    }
    let phase = C64::from_polar(1.0 / (2.0 * PI), -x * theta.cos());
    Ok(k.regular.apply(eta_in).scale(phase))
}

/// A weighted delta function `spinor * delta(x - position)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointMass {
    pub position: f64,
    pub spinor: Spinor,
}

/// `eta(x, t)` split into its regular field and the two light-cone deltas.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaSubstates {
    pub regular: SpinorField,
    pub delta_plus: PointMass,
    pub delta_minus: PointMass,
}

/// The two delta components of `eta(x, t)`.
pub fn eta_deltas(t: f64, theta: f64, eta_in: &Spinor) -> (PointMass, PointMass) {
    let c = theta.cos();
    let w = DELTA_WEIGHT / (2.0 * PI);
    let plus = PointMass {
        position: t,
        spinor: Spinor {
            up: eta_in.up * C64::from_polar(w, -t * c),
            down: C64::new(0.0, 0.0),
        },
    };
    let minus = PointMass {
        position: -t,
        spinor: Spinor {
            up: C64::new(0.0, 0.0),
            down: eta_in.down * C64::from_polar(w, t * c),
        },
    };
    (plus, minus)
}

pub fn eta_substates(x_grid: &SpatialGrid, t: f64, theta: f64, eta_in: &Spinor) -> Result<EtaSubstates> {
    check_time(t)?;
    let values = x_grid
        .points()
        .map(|x| eta_regular(x, t, theta, eta_in))
        .collect::<Result<Vec<_>>>()?;
    let (delta_plus, delta_minus) = eta_deltas(t, theta, eta_in);
    Ok(EtaSubstates {
        regular: SpinorField::new(*x_grid, values, t),
        delta_plus,
        delta_minus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn outside_light_cone_is_zero() {
        let k = kernel_xi(3.5, 3.0, 1.0).unwrap();
        assert!(!k.support_flag);
        assert_eq!(k.regular, SpinMatrix::ZERO);
    }

    #[test]
    fn aligned_field_has_only_deltas() {
        let k = kernel_xi(0.3, 2.0, 0.0).unwrap();
        assert_eq!(k.regular, SpinMatrix::ZERO);
        assert_abs_diff_eq!(k.delta_plus_weight.re, 2.0 * PI);
        let (plus, minus) = eta_deltas(2.0, 0.0, &Spinor::spin_up());
        assert_abs_diff_eq!(plus.spinor.up.re, (2.0f64).cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(plus.spinor.up.im, -(2.0f64).sin(), epsilon = 1e-15);
        assert_eq!(minus.spinor.norm_sqr(), 0.0);
    }

    #[test]
    fn exchange_symmetry() {
        for &(x, t, th) in &[(0.7, 3.0, 1.0), (-2.2, 5.0, 2.1), (4.9, 5.0, 0.4)] {
            let a = kernel_xi(x, t, th).unwrap().regular;
            let b = kernel_xi(-x, t, th).unwrap().regular;
            assert_abs_diff_eq!(a.m11.re, b.m22.re, epsilon = 1e-10);
            assert_eq!(a.m12, a.m21);
        }
    }

    #[test]
    fn interval_form_matches_bessel_form() {
        for &(x, t, beta) in &[(0.0, 4.0, 0.8), (3.0, 10.0, 0.5), (-12.0, 15.0, 1.0), (9.9, 10.0, 0.9)] {
            let (s, c) = interval_integrals(x, t, beta).unwrap();
            let (sb, cb) = bessel_form(x, t, beta).unwrap();
            assert_abs_diff_eq!(s, sb, epsilon = 1e-8);
            assert_abs_diff_eq!(c, cb, epsilon = 1e-8);
        }
    }

    #[test]
    fn bessel_values() {
        // J0(1), J1(1), J0(10)
        let (j0, j1z) = bessel_j0_j1_over_z(1.0).unwrap();
        assert_abs_diff_eq!(j0, 0.765_197_686_557_966_6, epsilon = 1e-13);
        assert_abs_diff_eq!(j1z, 0.440_050_585_744_933_5, epsilon = 1e-13);
        let (j0, _) = bessel_j0_j1_over_z(10.0).unwrap();
        assert_abs_diff_eq!(j0, -0.245_935_764_451_348_3, epsilon = 1e-12);
    }

    #[test]
    fn rejects_non_positive_time() {
        assert!(kernel_xi(0.0, 0.0, 1.0).is_err());
    }
}
