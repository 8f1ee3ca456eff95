//! Long-time and limiting forms, and the regime classifier.
//!
//! With `s = sin theta`, `c = cos theta` and `Omega(p) = sqrt((p + c)^2 + s^2)`:
//!
//! * the dephased `sigma_z` limit for `eta_in = (1, 0)`,
//!   `(dx / sqrt(2 pi)) int e^{-p^2 dx^2 / 2} (p + c)^2 / Omega^2 dp`;
//! * the coherence integrals `I_pm(t) = int Omega^-1 e^{pm 2i Omega t - dx^2 p^2 / 2} dp`
//!   and their Gaussian-integral estimate
//!   `|I| ~ s^{1/2} (dx^4 s^2 + 4t^2)^{-1/4} exp(-2 t^2 dx^2 c^2 / (dx^4 s^2 + 4 t^2))`;
//! * the large-`beta r` form of the kernels, from the Bessel asymptotics
//!   (`beta = s`, `r = sqrt(t^2 - x^2)`):
//!   `xi_11 ~ sqrt(2 pi beta) (t + x)^{1/4} (t - x)^{-3/4} cos(beta r + pi/4)`,
//!   `xi_12 ~ -i sqrt(2 pi beta) r^{-1/2} sin(beta r + pi/4)`;
//! * the wide-packet wave function, two Gaussians moving at `+-c` and
//!   polarized along and against the field, and its dephased spin state.

use std::f64::consts::{FRAC_PI_4, PI};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Regime, SimParams, SpatialGrid};
use crate::kernel::{KernelValue, DELTA_WEIGHT};
use crate::observables::DensityMatrix;
use crate::packet::moving_packet;
use crate::propagator::SpinorField;
use crate::quadrature::{adaptive, composite_refined, gl16};
use crate::spin::{omega, SpinMatrix};
use crate::spinor::Spinor;
use crate::C64;

/// Gaussian tails beyond this many momentum widths are dropped.
const SPECTRAL_REACH: f64 = 9.0;

fn check_width(delta_x: f64) -> Result<()> {
    if !(delta_x.is_finite() && delta_x > 0.0) {
        return Err(Error::param("delta_x", format!("must be positive, got {delta_x}")));
    }
    Ok(())
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::param("theta", format!("must lie in [0, pi], got {theta}")));
    }
    Ok(())
}

/// Long-time `sigma_z` average for a spin starting up.
pub fn sigma_z_limit(delta_x: f64, theta: f64) -> Result<f64> {
    check_width(delta_x)?;
    check_theta(theta)?;
    let (s, c) = theta.sin_cos();
    if s.abs() < 1e-15 {
        return Ok(1.0);
    }
    let norm = delta_x / (2.0 * PI).sqrt();
    let f = |p: f64| {
        let q = p + c;
        norm * (-0.5 * p * p * delta_x * delta_x).exp() * q * q / (q * q + s * s)
    };
    let reach = SPECTRAL_REACH / delta_x;
    // split at the dip so bisection sees it from the first level
    let dip = (-c).clamp(-reach, reach);
    Ok(adaptive(-reach, dip, 1e-10, f)? + adaptive(dip, reach, 1e-10, f)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

/// `I_pm(t)` by composite Gauss-Legendre quadrature.
pub fn oscillatory_i(delta_x: f64, theta: f64, t: f64, branch: Branch) -> Result<C64> {
    check_width(delta_x)?;
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::param(
            "theta",
            format!("the 1/Omega singularity is not integrable at theta = {theta}"),
        ));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::param("t", format!("must be non-negative, got {t}")));
    }
    let s = theta.sin();
    let reach = SPECTRAL_REACH / delta_x;
    let h = (1.0 / delta_x).min(0.5 * s).min(PI / (t + 1.0));
    let panels = (2.0 * reach / h).ceil() as usize;
    let (plus, _) = composite_refined(gl16(), -reach, reach, panels, panels << 8, 1e-11, |p: f64| {
        let w = omega(p, theta);
        C64::from_polar((-0.5 * delta_x * delta_x * p * p).exp() / w, 2.0 * w * t)
    })?;
    Ok(match branch {
        Branch::Plus => plus,
        Branch::Minus => plus.conj(),
    })
}

/// Shape of `|I_pm(t)|` from the Gaussian expansion about `p = 0`, without
/// its overall constant.
pub fn i_asymptotic(delta_x: f64, theta: f64, t: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let d4s2 = delta_x.powi(4) * s * s;
    let denom = d4s2 + 4.0 * t * t;
    s.abs().sqrt() * denom.powf(-0.25) * (-2.0 * t * t * delta_x * delta_x * c * c / denom).exp()
}

/// [`i_asymptotic`] scaled to match the exact integral at one reference time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibratedAsymptotic {
    pub delta_x: f64,
    pub theta: f64,
    pub reference_time: f64,
    pub constant: f64,
}

impl CalibratedAsymptotic {
    /// Calibrates at `t = 10 delta_x`.
    pub fn new(delta_x: f64, theta: f64) -> Result<CalibratedAsymptotic> {
        Self::at(delta_x, theta, 10.0 * delta_x)
    }

    pub fn at(delta_x: f64, theta: f64, reference_time: f64) -> Result<CalibratedAsymptotic> {
        let exact = oscillatory_i(delta_x, theta, reference_time, Branch::Plus)?.norm();
        let shape = i_asymptotic(delta_x, theta, reference_time);
        if !(shape > 0.0 && shape.is_finite()) {
            return Err(Error::OutOfDomain(format!(
                "asymptotic shape underflows at t = {reference_time}"
            )));
        }
        Ok(CalibratedAsymptotic {
            delta_x,
            theta,
            reference_time,
            constant: exact / shape,
        })
    }

    pub fn magnitude(&self, t: f64) -> f64 {
        self.constant * i_asymptotic(self.delta_x, self.theta, t)
    }
}

/// `x_s^pm = +-t cos theta`, where the kernel phase is stationary.
pub fn stationary_points(t: f64, theta: f64) -> Result<(f64, f64)> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::param("t", format!("must be positive, got {t}")));
    }
    let c = theta.cos();
    Ok((t * c, -t * c))
}

/// Smallest time at which the kernel asymptotics are offered.
pub const SADDLE_MIN_TIME: f64 = 5.0;
/// Fraction of the light cone beyond which the kernel asymptotics are refused.
pub const SADDLE_EDGE: f64 = 0.95;

/// Large-time form of the regular kernel parts; the deltas are unchanged.
pub fn xi_saddle(x: f64, t: f64, theta: f64) -> Result<KernelValue> {
    if !(t.is_finite() && t >= SADDLE_MIN_TIME) {
        return Err(Error::OutOfDomain(format!("needs t >= {SADDLE_MIN_TIME}, got {t}")));
    }
    if x.abs() >= t {
        return Err(Error::OutOfDomain(format!("|x| = {} is outside the light cone t = {t}", x.abs())));
    }
    if x.abs() > SADDLE_EDGE * t {
        return Err(Error::OutOfDomain(format!(
            "|x| = {} is within the caustic layer |x| > {SADDLE_EDGE} t",
            x.abs()
        )));
    }
    let beta = theta.sin();
    let r = ((t - x) * (t + x)).sqrt();
    let amp = (2.0 * PI * beta).sqrt();
    let ph = beta * r + FRAC_PI_4;
    let r11 = amp * (t + x).powf(0.25) * (t - x).powf(-0.75) * ph.cos();
    let r22 = amp * (t - x).powf(0.25) * (t + x).powf(-0.75) * ph.cos();
    let r12 = C64::new(0.0, -amp * ph.sin() / r.sqrt());
    let delta = C64::new(DELTA_WEIGHT, 0.0);
    Ok(KernelValue {
        regular: SpinMatrix::new(C64::new(r11, 0.0), r12, r12, C64::new(r22, 0.0)),
        delta_plus_weight: delta,
        delta_minus_weight: delta,
        support_flag: true,
    })
}

/// Slowly varying amplitude of the regular kernel parts, used to judge the
/// size of the asymptotic error: `max(|xi_11| envelope, |xi_12| envelope)`.
pub fn xi_saddle_envelope(x: f64, t: f64, theta: f64) -> f64 {
    let beta = theta.sin();
    let amp = (2.0 * PI * beta).sqrt();
    let r = ((t - x) * (t + x)).max(0.0).sqrt();
    let e11 = amp * (t + x).abs().powf(0.25) * (t - x).abs().powf(-0.75);
    let e22 = amp * (t - x).abs().powf(0.25) * (t + x).abs().powf(-0.75);
    e11.max(e22).max(amp / r.sqrt())
}

/// Two-Gaussian approximation of the wave function for wide packets.
pub fn ergodic_wavefunction(
    x_grid: &SpatialGrid,
    t: f64,
    theta: f64,
    delta_x: f64,
    eta_in: &Spinor,
) -> Result<SpinorField> {
    check_width(delta_x)?;
    check_theta(theta)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::param("t", format!("must be non-negative, got {t}")));
    }
    if delta_x < 5.0 || t < SADDLE_MIN_TIME {
        warn!("two-Gaussian form used outside its regime (delta_x = {delta_x}, t = {t})");
    }
    let (s, c) = theta.sin_cos();
    let plus = Spinor::along_field(theta);
    let minus = Spinor::against_field(theta);
    let pref = delta_x.sqrt() * (2.0 * PI).powf(-0.75);
    let branches = [
        (plus, plus.inner(eta_in), 1.0),
        (minus, minus.inner(eta_in), -1.0),
    ];
    let values = x_grid
        .points()
        .map(|x| {
            branches.iter().fold(Spinor::ZERO, |acc, &(dir, w, sign)| {
                let q = C64::new(delta_x * delta_x, sign * 2.0 * s * s * t);
                let y = x - sign * c * t;
                let amp = pref * (4.0 * PI / q).sqrt() * C64::from_polar(1.0, -sign * t) * (-y * y / q).exp();
                acc + dir.scale(w * amp)
            })
        })
        .collect();
    Ok(SpinorField::new(*x_grid, values, t))
}

/// Closed form paired with the exact field in [`approximate_field`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApproxModel {
    /// Each spin component rigidly translated at `+-1`.
    TranslatedPacket,
    /// [`ergodic_wavefunction`].
    TwoGaussian,
}

/// The approximate field for `regime`: the translated packet where the spin
/// does not precess (Zeno regime or a field along z), the two-Gaussian form
/// otherwise.
pub fn approximate_field(params: &SimParams, t: f64, regime: Regime) -> Result<(SpinorField, ApproxModel)> {
    let theta = params.theta();
    if regime == Regime::Zeno || theta.sin() < 1e-12 {
        let eta = params.eta_in();
        let (dx, mass) = (params.delta_x(), params.mass());
        let values = params
            .x_grid()
            .points()
            .map(|x| Spinor {
                up: eta.up * moving_packet(dx, mass, x - t, t),
                down: eta.down * moving_packet(dx, mass, x + t, t),
            })
            .collect();
        Ok((SpinorField::new(*params.x_grid(), values, t), ApproxModel::TranslatedPacket))
    } else {
        let f = ergodic_wavefunction(params.x_grid(), t, theta, params.delta_x(), &params.eta_in())?;
        Ok((f, ApproxModel::TwoGaussian))
    }
}

/// The dephased state `cos^2(theta/2) |n><n| + sin^2(theta/2) |-n><-n|`.
pub fn steady_state_rho(theta: f64) -> Result<DensityMatrix> {
    check_theta(theta)?;
    let (sh, ch) = (0.5 * theta).sin_cos();
    let (wp, wm) = (ch * ch, sh * sh);
    let n = Spinor::along_field(theta);
    let m = Spinor::against_field(theta);
    let r11 = wp * n.up.norm_sqr() + wm * m.up.norm_sqr();
    let r22 = wp * n.down.norm_sqr() + wm * m.down.norm_sqr();
    let r12 = n.up * n.down.conj() * wp + m.up * m.down.conj() * wm;
    DensityMatrix::new(C64::new(r11, 0.0), r12, r12.conj(), C64::new(r22, 0.0))
}

/// Classifier thresholds; all overridable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegimeThresholds {
    /// Widths up to this are Zeno candidates.
    pub zeno_max_width: f64,
    /// Widths from this are ergodic candidates.
    pub ergodic_min_width: f64,
    /// Ergodic needs `delta_x >= factor * |tan theta|` so the peaks separate.
    pub separation_factor: f64,
    /// A Zeno verdict needs the predicted `sigma_z` limit at least this high.
    pub zeno_min_sigma_z: f64,
    /// An ergodic verdict needs the predicted limit within this of `cos^2 theta`.
    pub ergodic_sigma_z_tol: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds {
            zeno_max_width: 0.2,
            ergodic_min_width: 5.0,
            separation_factor: 3.0,
            zeno_min_sigma_z: 0.9,
            ergodic_sigma_z_tol: 0.02,
        }
    }
}

/// A predicted density peak, moving at `velocity` and carrying `weight`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedPeak {
    pub velocity: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub delta_x: f64,
    pub theta: f64,
    pub predicted_peaks: Vec<PredictedPeak>,
    pub predicted_sigma_z_limit: f64,
    pub fringe_expected: bool,
}

pub fn classify_regime(delta_x: f64, theta: f64) -> Result<RegimeReport> {
    classify_regime_with(delta_x, theta, &RegimeThresholds::default())
}

/// Classification for a spin starting up.
pub fn classify_regime_with(delta_x: f64, theta: f64, th: &RegimeThresholds) -> Result<RegimeReport> {
    let limit = sigma_z_limit(delta_x, theta)?;
    let c = theta.cos();
    let (sh, ch) = (0.5 * theta).sin_cos();
    let tan = theta.tan().abs();
    let regime = if delta_x <= th.zeno_max_width && limit >= th.zeno_min_sigma_z {
        Regime::Zeno
    } else if delta_x >= th.ergodic_min_width
        && delta_x >= th.separation_factor * tan
        && (limit - c * c).abs() <= th.ergodic_sigma_z_tol
    {
        Regime::Ergodic
    } else {
        Regime::Intermediate
    };
    let predicted_peaks = match regime {
        Regime::Zeno => vec![PredictedPeak {
            velocity: 1.0,
            weight: 1.0,
        }],
        _ => vec![
            PredictedPeak {
                velocity: c,
                weight: ch * ch,
            },
            PredictedPeak {
                velocity: -c,
                weight: sh * sh,
            },
        ],
    };
    Ok(RegimeReport {
        regime,
        delta_x,
        theta,
        predicted_peaks,
        predicted_sigma_z_limit: limit,
        fringe_expected: regime == Regime::Intermediate,
    })
}
