use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::Integrand;
use crate::C64;

/// Two-component spin-1/2 amplitude, `(up, down)` in the `sigma_z` basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spinor {
    pub up: C64,
    pub down: C64,
}

impl Spinor {
    pub const ZERO: Spinor = Spinor {
        up: C64::new(0.0, 0.0),
        down: C64::new(0.0, 0.0),
    };

    /// Any finite pair of amplitudes.
    pub fn new(up: C64, down: C64) -> Result<Spinor> {
        if !(up.is_finite() && down.is_finite()) {
            return Err(Error::InvalidState("spinor components must be finite".into()));
        }
        Ok(Spinor { up, down })
    }

    /// A normalized pure state; rejects `|up|^2 + |down|^2` off unity by more
    /// than 1e-12.
    pub fn pure(up: C64, down: C64) -> Result<Spinor> {
        let s = Spinor::new(up, down)?;
        let n = s.norm_sqr();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!(
                "pure state must be normalized, |up|^2 + |down|^2 = {n}"
            )));
        }
        Ok(s)
    }

    /// `(1, 0)`: polarized along +z.
    pub fn spin_up() -> Spinor {
        Spinor {
            up: C64::new(1.0, 0.0),
            down: C64::new(0.0, 0.0),
        }
    }

    pub fn spin_down() -> Spinor {
        Spinor {
            up: C64::new(0.0, 0.0),
            down: C64::new(1.0, 0.0),
        }
    }

    /// `|n>`: polarized along the field direction `(sin theta, 0, cos theta)`.
    pub fn along_field(theta: f64) -> Spinor {
        let (s, c) = (0.5 * theta).sin_cos();
        Spinor {
            up: C64::new(c, 0.0),
            down: C64::new(s, 0.0),
        }
    }

    /// `|-n>`: polarized against the field direction.
    pub fn against_field(theta: f64) -> Spinor {
        let (s, c) = (0.5 * theta).sin_cos();
        Spinor {
            up: C64::new(-s, 0.0),
            down: C64::new(c, 0.0),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.up.norm_sqr() + self.down.norm_sqr()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Spinor) -> C64 {
        self.up.conj() * other.up + self.down.conj() * other.down
    }

    pub fn scale(&self, a: C64) -> Spinor {
        Spinor {
            up: self.up * a,
            down: self.down * a,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.up.is_finite() && self.down.is_finite()
    }
}

impl Add for Spinor {
    type Output = Spinor;
    fn add(self, rhs: Spinor) -> Spinor {
        Spinor {
            up: self.up + rhs.up,
            down: self.down + rhs.down,
        }
    }
}

impl Sub for Spinor {
    type Output = Spinor;
    fn sub(self, rhs: Spinor) -> Spinor {
        Spinor {
            up: self.up - rhs.up,
            down: self.down - rhs.down,
        }
    }
}

impl Mul<f64> for Spinor {
    type Output = Spinor;
    fn mul(self, rhs: f64) -> Spinor {
        Spinor {
            up: self.up * rhs,
            down: self.down * rhs,
        }
    }
}

impl Mul<C64> for Spinor {
    type Output = Spinor;
    fn mul(self, rhs: C64) -> Spinor {
        self.scale(rhs)
    }
}

impl Integrand for Spinor {
    fn zero() -> Self {
        Spinor::ZERO
    }
    fn magnitude(&self) -> f64 {
        self.norm_sqr().sqrt()
    }
}
