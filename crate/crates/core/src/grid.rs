//! Grids, the packet mass, and the problem definition [`SimParams`].

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spinor::Spinor;

/// Uniform grid `x_k = x_min + k dx`, `k = 0..n`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl SpatialGrid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<SpatialGrid> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_min >= x_max {
            return Err(Error::param("x_grid", format!("need x_min < x_max, got [{x_min}, {x_max}]")));
        }
        if n < 2 {
            return Err(Error::param("x_grid", "need at least 2 points"));
        }
        Ok(SpatialGrid { x_min, x_max, n })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        self.x_min + k as f64 * self.spacing()
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        let dx = self.spacing();
        (0..self.n).map(move |k| self.x_min + k as f64 * dx)
    }

    /// Index of the grid point nearest to `x`, clamped to the grid.
    pub fn nearest_index(&self, x: f64) -> usize {
        let k = ((x - self.x_min) / self.spacing()).round();
        k.clamp(0.0, (self.n - 1) as f64) as usize
    }
}

/// Periodic momentum grid `p_k = -p_max + k dp`, `dp = 2 p_max / n`,
/// `k = 0..n`: symmetric about zero as the half-open interval `[-p_max, p_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumGrid {
    p_max: f64,
    n: usize,
}

impl MomentumGrid {
    pub fn new(p_max: f64, n: usize) -> Result<MomentumGrid> {
        if !(p_max.is_finite() && p_max > 0.0) {
            return Err(Error::param("p_grid", format!("p_max must be positive, got {p_max}")));
        }
        if n < 2 {
            return Err(Error::param("p_grid", "need at least 2 points"));
        }
        Ok(MomentumGrid { p_max, n })
    }

    /// The grid reciprocal to `x` under the discrete Fourier transform:
    /// same point count, `dp dx = 2 pi / n`.
    pub fn conjugate_to(x: &SpatialGrid) -> MomentumGrid {
        MomentumGrid {
            p_max: PI / x.spacing(),
            n: x.len(),
        }
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn p_min(&self) -> f64 {
        -self.p_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.p_max / self.n as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        -self.p_max + k as f64 * self.spacing()
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        let dp = self.spacing();
        (0..self.n).map(move |k| -self.p_max + k as f64 * dp)
    }

    /// Period in `x` of the discrete Fourier sum over this grid.
    pub fn spatial_period(&self) -> f64 {
        2.0 * PI / self.spacing()
    }

    /// True when `x` and this grid form an FFT pair.
    pub fn is_conjugate_to(&self, x: &SpatialGrid) -> bool {
        self.n == x.len()
            && self.n.is_power_of_two()
            && ((self.p_max * x.spacing()) / PI - 1.0).abs() < 1e-12
    }
}

/// Packet mass in units of `1 / (v_so x_so)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Mass {
    Finite(f64),
    /// Frozen packet: the kinetic phase `p^2 t / 2M` is dropped exactly.
    Infinite,
}

impl Mass {
    pub fn kinetic_phase(&self, p: f64, t: f64) -> f64 {
        match *self {
            Mass::Finite(m) => 0.5 * p * p * t / m,
            Mass::Infinite => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Mass::Finite(m) if !(m.is_finite() && m > 0.0) => {
                Err(Error::param("mass", format!("must be positive, got {m}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Mass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mass::Finite(m) => write!(f, "{m}"),
            Mass::Infinite => f.write_str("infinite"),
        }
    }
}

/// Measurement regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    Zeno,
    Ergodic,
    Intermediate,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Zeno => "ZENO",
            Regime::Ergodic => "ERGODIC",
            Regime::Intermediate => "INTERMEDIATE",
        })
    }
}

/// Smallest momentum cut-off that holds the Gaussian spectrum of width
/// `delta_x` plus the composite-field shift `|cos theta| <= 1`.
pub fn required_p_max(delta_x: f64) -> f64 {
    (8.0 / delta_x + 2.0).max(4.0)
}

/// Width of `|G(x, t)|^2` in the `exp(-2 x^2 / w^2)` convention.
pub fn packet_width(delta_x: f64, mass: Mass, t: f64) -> f64 {
    match mass {
        Mass::Infinite => delta_x,
        Mass::Finite(m) => {
            let spread = 2.0 * t / m;
            (delta_x.powi(4) + spread * spread).sqrt() / delta_x
        }
    }
}

/// Dimensionless problem definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    theta: f64,
    delta_x: f64,
    mass: Mass,
    eta_in: Spinor,
    p_grid: MomentumGrid,
    x_grid: SpatialGrid,
}

impl SimParams {
    pub fn new(
        theta: f64,
        delta_x: f64,
        mass: Mass,
        eta_in: Spinor,
        x_grid: SpatialGrid,
        p_grid: MomentumGrid,
    ) -> Result<SimParams> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::param("theta", format!("must lie in [0, pi], got {theta}")));
        }
        if !(delta_x.is_finite() && delta_x > 0.0) {
            return Err(Error::param("delta_x", format!("must be positive, got {delta_x}")));
        }
        mass.validate()?;
        if (eta_in.norm_sqr() - 1.0).abs() > 1e-12 || !eta_in.is_finite() {
            return Err(Error::param("eta_in", "must be a normalized spinor"));
        }
        let need = required_p_max(delta_x);
        if p_grid.p_max() < need {
            return Err(Error::GridCoverage(format!(
                "p_max = {} is below the required {need} for delta_x = {delta_x}",
                p_grid.p_max()
            )));
        }
        Ok(SimParams {
            theta,
            delta_x,
            mass,
            eta_in,
            p_grid,
            x_grid,
        })
    }

    /// Builds FFT-paired grids large enough for every time up to `t_max`:
    /// `p_max >= max(8 / delta_x + 2, 4)` and an `x` range that holds the
    /// light cone `|x| <= t_max` plus ten packet widths and a margin.
    pub fn sized_for(theta: f64, delta_x: f64, mass: Mass, eta_in: Spinor, t_max: f64) -> Result<SimParams> {
        if !(delta_x.is_finite() && delta_x > 0.0) {
            return Err(Error::param("delta_x", format!("must be positive, got {delta_x}")));
        }
        if !(t_max.is_finite() && t_max >= 0.0) {
            return Err(Error::param("t_max", format!("must be non-negative, got {t_max}")));
        }
        mass.validate()?;
        let half = t_max + 10.0 * packet_width(delta_x, mass, t_max) + 5.0;
        let dx_max = PI / required_p_max(delta_x);
        let needed = (2.0 * half / dx_max).ceil() as usize + 1;
        let n = needed.next_power_of_two().max(256);
        let x_grid = SpatialGrid::new(-half, half, n)?;
        let p_grid = MomentumGrid::conjugate_to(&x_grid);
        SimParams::new(theta, delta_x, mass, eta_in, x_grid, p_grid)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn delta_x(&self) -> f64 {
        self.delta_x
    }

    pub fn mass(&self) -> Mass {
        self.mass
    }

    pub fn eta_in(&self) -> Spinor {
        self.eta_in
    }

    pub fn p_grid(&self) -> &MomentumGrid {
        &self.p_grid
    }

    pub fn x_grid(&self) -> &SpatialGrid {
        &self.x_grid
    }

    pub fn grids_conjugate(&self) -> bool {
        self.p_grid.is_conjugate_to(&self.x_grid)
    }

    /// Verifies the `x` grid holds the light cone at `t` plus six packet
    /// widths and the momentum grid's spatial period is long enough not to
    /// alias the spin-resolved spectrum.
    pub fn check_coverage(&self, t: f64) -> Result<()> {
        let w = packet_width(self.delta_x, self.mass, t);
        let reach = t + 6.0 * w;
        if self.x_grid.x_min() > -reach || self.x_grid.x_max() < reach {
            return Err(Error::GridCoverage(format!(
                "x grid [{}, {}] does not contain [-{reach}, {reach}] at t = {t}",
                self.x_grid.x_min(),
                self.x_grid.x_max()
            )));
        }
        let period = self.p_grid.spatial_period();
        if period < 2.0 * reach {
            return Err(Error::GridCoverage(format!(
                "momentum spacing {} aliases at t = {t}: spatial period {period} < {}",
                self.p_grid.spacing(),
                2.0 * reach
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(SpatialGrid::new(1.0, 0.0, 10).is_err());
        assert!(SpatialGrid::new(0.0, 1.0, 1).is_err());
        assert!(MomentumGrid::new(-1.0, 8).is_err());
        let g = SpatialGrid::new(-1.0, 1.0, 5).unwrap();
        assert_eq!(g.points().collect::<Vec<_>>(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(g.nearest_index(0.26), 3);
    }

    #[test]
    fn conjugate_grid() {
        let x = SpatialGrid::new(-10.0, 10.0, 256).unwrap();
        let p = MomentumGrid::conjugate_to(&x);
        assert!(p.is_conjugate_to(&x));
        assert!((p.spacing() * x.spacing() * 256.0 - 2.0 * PI).abs() < 1e-12);
        assert_eq!(p.p_min(), -p.p_max());
    }

    #[test]
    fn sizing_follows_grid_rule() {
        for &dx in &[0.05, 1.0, 10.0] {
            let sp = SimParams::sized_for(1.0, dx, Mass::Infinite, Spinor::spin_up(), 30.0).unwrap();
            assert!(sp.p_grid().p_max() >= required_p_max(dx));
            assert!(sp.grids_conjugate());
            sp.check_coverage(30.0).unwrap();
            assert!(sp.check_coverage(300.0).is_err());
        }
    }

    #[test]
    fn rejects_bad_params() {
        let x = SpatialGrid::new(-10.0, 10.0, 256).unwrap();
        let p = MomentumGrid::conjugate_to(&x);
        assert!(SimParams::new(-0.1, 1.0, Mass::Infinite, Spinor::spin_up(), x, p).is_err());
        assert!(SimParams::new(0.1, 0.0, Mass::Infinite, Spinor::spin_up(), x, p).is_err());
        assert!(SimParams::new(0.1, 1.0, Mass::Finite(-2.0), Spinor::spin_up(), x, p).is_err());
        // p_max = pi / dx ~ 40 is too small for delta_x = 0.1
        assert!(matches!(
            SimParams::new(0.1, 0.1, Mass::Infinite, Spinor::spin_up(), x, p),
            Err(Error::GridCoverage(_))
        ));
    }
}
