//! Bridge between laboratory units and the dimensionless problem.
//!
//! `hbar` appears only here. The feasibility numbers reproduce
//! order-of-magnitude estimates and are labelled as such; they are not exact
//! predictions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Mass, Regime, SimParams};
use crate::spinor::Spinor;

/// Reduced Planck constant, J s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Unified atomic mass unit, kg (CODATA 2018).
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Mass of 87Rb in atomic mass units.
pub const RB87_MASS_U: f64 = 86.909_180_531;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Wavelength of the coupling laser, m.
    pub laser_wavelength: f64,
    /// kg.
    pub atom_mass: f64,
    /// Trap frequency before release, rad/s.
    pub trap_frequency: f64,
    /// Half the Larmor frequency, rad/s.
    pub larmor_half: f64,
    /// Spin-orbit velocity, m/s.
    pub v_so: f64,
}

impl PhysicalParams {
    /// 87Rb at 804 nm with `v_so = hbar k_r / M`, a trap at `0.01 E_r / hbar`
    /// and `omega = 0.1 E_r / hbar`.
    pub fn rb87() -> PhysicalParams {
        let laser_wavelength = 804.0e-9;
        let atom_mass = RB87_MASS_U * ATOMIC_MASS_UNIT;
        let k_r = 2.0 * PI / laser_wavelength;
        let e_r = recoil_energy(laser_wavelength, atom_mass);
        PhysicalParams {
            laser_wavelength,
            atom_mass,
            trap_frequency: 0.01 * e_r / HBAR,
            larmor_half: 0.1 * e_r / HBAR,
            v_so: HBAR * k_r / atom_mass,
        }
    }

    fn validate(&self) -> Result<()> {
        let fields = [
            ("laser_wavelength", self.laser_wavelength),
            ("atom_mass", self.atom_mass),
            ("trap_frequency", self.trap_frequency),
            ("larmor_half", self.larmor_half),
            ("v_so", self.v_so),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be strictly positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// `E_r = 2 pi^2 hbar^2 / (M lambda^2)`, J.
pub fn recoil_energy(laser_wavelength: f64, atom_mass: f64) -> f64 {
    2.0 * PI * PI * HBAR * HBAR / (atom_mass * laser_wavelength * laser_wavelength)
}

/// Order-of-magnitude viability estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// J.
    pub recoil_energy: f64,
    /// `k_r = 2 pi / lambda`, 1/m.
    pub recoil_wavenumber: f64,
    /// Trap ground-state width `sqrt(hbar / (M Omega_tr))`, m.
    pub delta_x_physical: f64,
    /// `delta_x_physical * k_r`.
    pub delta_x_recoil_units: f64,
    /// `delta_x_physical / x_so`.
    pub delta_x_dimensionless: f64,
    /// `v_wp / v_so = hbar / (delta_x_physical M v_so)`.
    pub spreading_ratio: f64,
    /// m.
    pub x_so: f64,
    /// `M v_so x_so / hbar`.
    pub dimensionless_mass: f64,
    /// From the width alone (field angle unknown at this stage).
    pub regime_hint: Regime,
}

/// The dimensionless quantities plus the scales needed to go back.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitsBridge {
    pub delta_x: f64,
    pub mass: f64,
    /// Length unit, m.
    pub x_so: f64,
    /// Time unit `1 / omega`, s.
    pub time_unit: f64,
    /// J.
    pub recoil_energy: f64,
}

impl UnitsBridge {
    /// Completes the skeleton into a simulation sized for `t_max`.
    pub fn sim_params(&self, theta: f64, eta_in: Spinor, t_max: f64) -> Result<SimParams> {
        SimParams::sized_for(theta, self.delta_x, Mass::Finite(self.mass), eta_in, t_max)
    }

    /// Inverse of [`to_dimensionless`].
    pub fn to_physical(&self) -> PhysicalParams {
        let larmor_half = 1.0 / self.time_unit;
        let v_so = self.x_so * larmor_half;
        let atom_mass = self.mass * HBAR / (v_so * self.x_so);
        let width = self.delta_x * self.x_so;
        PhysicalParams {
            laser_wavelength: PI * HBAR * (2.0 / (atom_mass * self.recoil_energy)).sqrt(),
            atom_mass,
            trap_frequency: HBAR / (atom_mass * width * width),
            larmor_half,
            v_so,
        }
    }
}

/// Hint thresholds on the dimensionless width alone.
fn regime_hint(delta_x: f64) -> Regime {
    if delta_x <= 0.2 {
        Regime::Zeno
    } else if delta_x >= 5.0 {
        Regime::Ergodic
    } else {
        Regime::Intermediate
    }
}

pub fn to_dimensionless(phys: &PhysicalParams) -> Result<(UnitsBridge, FeasibilityReport)> {
    phys.validate()?;
    let e_r = recoil_energy(phys.laser_wavelength, phys.atom_mass);
    let k_r = 2.0 * PI / phys.laser_wavelength;
    let width = (HBAR / (phys.atom_mass * phys.trap_frequency)).sqrt();
    let x_so = phys.v_so / phys.larmor_half;
    let delta_x = width / x_so;
    let mass = phys.atom_mass * phys.v_so * x_so / HBAR;
    let bridge = UnitsBridge {
        delta_x,
        mass,
        x_so,
        time_unit: 1.0 / phys.larmor_half,
        recoil_energy: e_r,
    };
    let report = FeasibilityReport {
        recoil_energy: e_r,
        recoil_wavenumber: k_r,
        delta_x_physical: width,
        delta_x_recoil_units: width * k_r,
        delta_x_dimensionless: delta_x,
        spreading_ratio: HBAR / (width * phys.atom_mass * phys.v_so),
        x_so,
        dimensionless_mass: mass,
        regime_hint: regime_hint(delta_x),
    };
    Ok((bridge, report))
}
