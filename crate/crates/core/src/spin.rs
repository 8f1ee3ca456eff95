//! Per-momentum spin evolution in the composite field
//! `(sin theta, 0, cos theta + p)`.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::quadrature::Integrand;
use crate::spinor::Spinor;
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// 2x2 complex matrix acting on spin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinMatrix {
    pub m11: C64,
    pub m12: C64,
    pub m21: C64,
    pub m22: C64,
}

impl SpinMatrix {
    pub const ZERO: SpinMatrix = SpinMatrix {
        m11: ZERO,
        m12: ZERO,
        m21: ZERO,
        m22: ZERO,
    };

    pub const IDENTITY: SpinMatrix = SpinMatrix {
        m11: ONE,
        m12: ZERO,
        m21: ZERO,
        m22: ONE,
    };

    pub fn new(m11: C64, m12: C64, m21: C64, m22: C64) -> SpinMatrix {
        SpinMatrix { m11, m12, m21, m22 }
    }

    /// Entry by zero-based `(row, col)`; row/col 0 is spin up.
    pub fn get(&self, row: usize, col: usize) -> C64 {
        match (row, col) {
            (0, 0) => self.m11,
            (0, 1) => self.m12,
            (1, 0) => self.m21,
            (1, 1) => self.m22,
            _ => panic!("spin matrix index ({row}, {col}) out of range"),
        }
    }

    pub fn adjoint(&self) -> SpinMatrix {
        SpinMatrix {
            m11: self.m11.conj(),
            m12: self.m21.conj(),
            m21: self.m12.conj(),
            m22: self.m22.conj(),
        }
    }

    pub fn apply(&self, v: &Spinor) -> Spinor {
        Spinor {
            up: self.m11 * v.up + self.m12 * v.down,
            down: self.m21 * v.up + self.m22 * v.down,
        }
    }

    pub fn scale(&self, a: C64) -> SpinMatrix {
        SpinMatrix {
            m11: self.m11 * a,
            m12: self.m12 * a,
            m21: self.m21 * a,
            m22: self.m22 * a,
        }
    }

    pub fn max_abs_diff(&self, other: &SpinMatrix) -> f64 {
        let d = *self - *other;
        d.max_abs()
    }

    pub fn max_abs(&self) -> f64 {
        [self.m11, self.m12, self.m21, self.m22]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `max |(U^dagger U - I)_ij|`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&SpinMatrix::IDENTITY)
    }

    pub fn is_finite(&self) -> bool {
        [self.m11, self.m12, self.m21, self.m22].iter().all(|z| z.is_finite())
    }
}

impl Mul for SpinMatrix {
    type Output = SpinMatrix;
    fn mul(self, b: SpinMatrix) -> SpinMatrix {
        SpinMatrix {
            m11: self.m11 * b.m11 + self.m12 * b.m21,
            m12: self.m11 * b.m12 + self.m12 * b.m22,
            m21: self.m21 * b.m11 + self.m22 * b.m21,
            m22: self.m21 * b.m12 + self.m22 * b.m22,
        }
    }
}

impl Add for SpinMatrix {
    type Output = SpinMatrix;
    fn add(self, b: SpinMatrix) -> SpinMatrix {
        SpinMatrix {
            m11: self.m11 + b.m11,
            m12: self.m12 + b.m12,
            m21: self.m21 + b.m21,
            m22: self.m22 + b.m22,
        }
    }
}

impl Sub for SpinMatrix {
    type Output = SpinMatrix;
    fn sub(self, b: SpinMatrix) -> SpinMatrix {
        SpinMatrix {
            m11: self.m11 - b.m11,
            m12: self.m12 - b.m12,
            m21: self.m21 - b.m21,
            m22: self.m22 - b.m22,
        }
    }
}

impl Mul<f64> for SpinMatrix {
    type Output = SpinMatrix;
    fn mul(self, a: f64) -> SpinMatrix {
        self.scale(C64::new(a, 0.0))
    }
}

impl Integrand for SpinMatrix {
    fn zero() -> Self {
        SpinMatrix::ZERO
    }
    fn magnitude(&self) -> f64 {
        self.max_abs()
    }
}

/// Magnitude of the composite field, `sqrt((p + cos theta)^2 + sin^2 theta)`.
pub fn omega(p: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    (p + c).hypot(s)
}

/// `sin(w t) / w`, with a series branch below `w t = 1e-4`.
fn sin_over(w: f64, t: f64) -> f64 {
    let wt = w * t;
    if wt.abs() < 1e-4 {
        let z = wt * wt;
        t * (1.0 - z / 6.0 + z * z / 120.0)
    } else {
        wt.sin() / w
    }
}

/// `U(p, t) = exp(-i [n.sigma + p sigma_z] t)` in closed form.
pub fn evolution_operator(p: f64, theta: f64, t: f64) -> SpinMatrix {
    let (s, c) = theta.sin_cos();
    let w = omega(p, theta);
    let sw = sin_over(w, t);
    let cw = (w * t).cos();
    let u11 = C64::new(cw, -(p + c) * sw);
    let u12 = C64::new(0.0, -s * sw);
    SpinMatrix {
        m11: u11,
        m12: u12,
        m21: u12,
        m22: u11.conj(),
    }
}

/// `U(p, t) eta`.
pub fn spin_evolve(eta: &Spinor, p: f64, theta: f64, t: f64) -> Spinor {
    evolution_operator(p, theta, t).apply(eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn omega_values() {
        for theta in [0.0, 0.4, 1.3, PI] {
            assert_abs_diff_eq!(omega(0.0, theta), 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(omega(-theta.cos(), theta), theta.sin().abs(), epsilon = 1e-15);
        }
        assert_abs_diff_eq!(omega(1.0, 0.0), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn identity_at_zero_time() {
        let u = evolution_operator(0.7, 1.1, 0.0);
        assert!(u.max_abs_diff(&SpinMatrix::IDENTITY) < 1e-15);
    }

    #[test]
    fn pure_sigma_z_field() {
        let t = 2.3;
        let u = evolution_operator(0.0, 0.0, t);
        let expect = SpinMatrix::new(C64::from_polar(1.0, -t), ZERO, ZERO, C64::from_polar(1.0, t));
        assert!(u.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn quarter_rotation_about_x() {
        let u = evolution_operator(0.0, PI / 2.0, PI / 2.0);
        let minus_i = C64::new(0.0, -1.0);
        let expect = SpinMatrix::new(ZERO, minus_i, minus_i, ZERO);
        assert!(u.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn removable_singularity() {
        // theta = 0, p = -1: the field vanishes and U = I for all t
        let u = evolution_operator(-1.0, 0.0, 5.0);
        assert!(u.max_abs_diff(&SpinMatrix::IDENTITY) < 1e-15);
        // the series branch agrees with the direct quotient where it takes over
        let w = 0.999e-4;
        assert_abs_diff_eq!(sin_over(w, 1.0), w.sin() / w, epsilon = 1e-15);
        assert_abs_diff_eq!(sin_over(w, 1.0), sin_over(1.001e-4, 1.0), epsilon = 1e-11);
    }

    #[test]
    fn sigma_z_conserved_without_transverse_field() {
        let eta = spin_evolve(&Spinor::spin_up(), 0.0, 0.0, 3.0);
        assert_abs_diff_eq!(eta.up.re, (3.0f64).cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(eta.up.im, -(3.0f64).sin(), epsilon = 1e-15);
        assert_eq!(eta.down, ZERO);
    }
}
