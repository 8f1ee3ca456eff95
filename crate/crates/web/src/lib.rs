//! Browser bindings for an interactive look at the measurement regimes:
//! the position density against its closed-form approximation, the spin
//! averages against time, and the regime classification.
//!
//! The `compute_*` functions are plain Rust so they can be tested natively;
//! the `#[wasm_bindgen]` wrappers hand their results to JavaScript.

use spinmeter::asymptotics::{approximate_field, classify_regime, ApproxModel, RegimeReport};
use spinmeter::observables::{position_density, spin_trace as trace_of, SpinTrace};
use spinmeter::propagator::evolve_momentum;
use spinmeter::{Mass, Regime, Result, SimParams, Spinor};
use wasm_bindgen::prelude::*;

/// Density samples on the part of the grid that holds the packet.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileData {
    pub x: Vec<f64>,
    pub exact: Vec<f64>,
    pub approx: Vec<f64>,
    pub regime: Regime,
    pub model: ApproxModel,
}

fn params(theta: f64, delta_x: f64, t_max: f64) -> Result<SimParams> {
    SimParams::sized_for(theta, delta_x, Mass::Infinite, Spinor::spin_up(), t_max)
}

pub fn compute_profile(theta: f64, delta_x: f64, t: f64) -> Result<ProfileData> {
    let sp = params(theta, delta_x, t)?;
    let regime = classify_regime(delta_x, theta)?.regime;
    let exact = position_density(&evolve_momentum(&sp, t)?);
    let (approx, model) = approximate_field(&sp, t, regime)?;
    let approx = position_density(&approx);
    let reach = t + 4.0 * delta_x + 1.0;
    let keep: Vec<usize> = (0..sp.x_grid().len())
        .filter(|&i| sp.x_grid().point(i).abs() <= reach)
        .collect();
    Ok(ProfileData {
        x: keep.iter().map(|&i| sp.x_grid().point(i)).collect(),
        exact: keep.iter().map(|&i| exact[i]).collect(),
        approx: keep.iter().map(|&i| approx[i]).collect(),
        regime,
        model,
    })
}

pub fn compute_trace(theta: f64, delta_x: f64, t_max: f64, samples: usize) -> Result<SpinTrace> {
    let n = samples.max(2);
    let times: Vec<f64> = (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect();
    trace_of(&params(theta, delta_x, t_max)?, &times)
}

pub fn compute_regime(theta: f64, delta_x: f64) -> Result<RegimeReport> {
    classify_regime(delta_x, theta)
}

/// One-line description of a regime report.
pub fn describe(r: &RegimeReport) -> String {
    let peaks: Vec<String> = r
        .predicted_peaks
        .iter()
        .map(|p| format!("v = {:+.3} (weight {:.3})", p.velocity, p.weight))
        .collect();
    format!(
        "{}: sigma_z -> {:.4}; peaks {}{}",
        r.regime,
        r.predicted_sigma_z_limit,
        peaks.join(", "),
        if r.fringe_expected { "; fringes expected" } else { "" }
    )
}

#[wasm_bindgen]
pub struct Profile(ProfileData);

#[wasm_bindgen]
impl Profile {
    #[wasm_bindgen(getter)]
    pub fn x(&self) -> Vec<f64> {
        self.0.x.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn exact(&self) -> Vec<f64> {
        self.0.exact.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn approx(&self) -> Vec<f64> {
        self.0.approx.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn regime(&self) -> String {
        self.0.regime.to_string()
    }

    #[wasm_bindgen(getter)]
    pub fn model(&self) -> String {
        match self.0.model {
            ApproxModel::TranslatedPacket => "translated packet".into(),
            ApproxModel::TwoGaussian => "two Gaussians".into(),
        }
    }
}

#[wasm_bindgen]
pub struct Trace(SpinTrace);

#[wasm_bindgen]
impl Trace {
    #[wasm_bindgen(getter)]
    pub fn times(&self) -> Vec<f64> {
        self.0.times.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn sigma_x(&self) -> Vec<f64> {
        self.0.sigma_x.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn sigma_y(&self) -> Vec<f64> {
        self.0.sigma_y.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn sigma_z(&self) -> Vec<f64> {
        self.0.sigma_z.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn mean_x(&self) -> Vec<f64> {
        self.0.mean_position.clone()
    }
}

#[wasm_bindgen]
pub fn density_profile(theta: f64, delta_x: f64, t: f64) -> std::result::Result<Profile, JsError> {
    Ok(Profile(compute_profile(theta, delta_x, t)?))
}

#[wasm_bindgen]
pub fn spin_trace(theta: f64, delta_x: f64, t_max: f64, samples: usize) -> std::result::Result<Trace, JsError> {
    Ok(Trace(compute_trace(theta, delta_x, t_max, samples)?))
}

#[wasm_bindgen]
pub fn regime_summary(theta: f64, delta_x: f64) -> std::result::Result<String, JsError> {
    Ok(describe(&compute_regime(theta, delta_x)?))
}
