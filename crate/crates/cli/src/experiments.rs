//! One function per experiment; each returns its table plus the grid and
//! summary recorded in the manifest.

use rayon::prelude::*;
use serde_json::{json, Value};
use spinmeter::asymptotics::{approximate_field, classify_regime_with, sigma_z_limit, xi_saddle};
use spinmeter::decoherence::{fit_decoherence, DecoherenceFit};
use spinmeter::kernel::kernel_xi;
use spinmeter::observables::{
    detect_plateau, mean_position, position_density, spin_trace, SpinAxis, PLATEAU_TOL, PLATEAU_WINDOW,
};
use spinmeter::path_sum::{path_average_distribution, trotter_product};
use spinmeter::profile::{find_peaks, parabolic_vertex};
use spinmeter::propagator::evolve_momentum;
use spinmeter::spin::evolution_operator;
use spinmeter::units::{to_dimensionless, PhysicalParams};
use spinmeter::{Mass, Regime, SimParams, SpatialGrid, Spinor};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::CliError;
use crate::output::{Cell, Outcome, Table};

pub const SPIN_TRACE_COLUMNS: &[&str] = &["t", "sigma_x", "sigma_y", "sigma_z", "mean_x"];
pub const DENSITY_COLUMNS: &[&str] = &["x", "P_exact", "P_approx", "psi1_re", "psi1_im", "psi2_re", "psi2_im"];
pub const SWEEP_COLUMNS: &[&str] = &[
    "delta_x",
    "theta",
    "regime",
    "sigma_z_plateau",
    "sigma_z_predicted",
    "peak_plus",
    "peak_minus",
    "decoherence_law",
];
pub const FEASIBILITY_COLUMNS: &[&str] = &["quantity", "value", "unit"];
pub const KERNEL_COLUMNS: &[&str] = &[
    "x",
    "xi11_re",
    "xi11_im",
    "xi12_re",
    "xi12_im",
    "xi21_re",
    "xi21_im",
    "xi22_re",
    "xi22_im",
    "saddle11_re",
    "saddle11_im",
    "saddle12_re",
    "saddle12_im",
];
pub const PATH_COLUMNS: &[&str] = &["m", "x", "weight", "eta1_re", "eta1_im", "eta2_re", "eta2_im"];

/// Sweep entry when the envelope has too few extrema to fit.
pub const LAW_UNDETERMINED: &str = "UNDETERMINED";
/// Sweep entry when the point failed outright.
pub const ROW_ERROR: &str = "ERROR";

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    match cfg.experiment {
        Experiment::SpinTrace => spin_trace_experiment(cfg),
        Experiment::DensityProfile => density_experiment(cfg),
        Experiment::RegimeSweep => sweep_experiment(cfg),
        Experiment::Feasibility => feasibility_experiment(cfg),
        Experiment::KernelTable => kernel_experiment(cfg),
        Experiment::PathOracle => path_experiment(cfg),
    }
}

pub fn grid_json(sp: &SimParams) -> Value {
    let x = sp.x_grid();
    let p = sp.p_grid();
    json!({
        "n_x": x.len(),
        "x_min": x.x_min(),
        "x_max": x.x_max(),
        "dx": x.spacing(),
        "n_p": p.len(),
        "p_max": p.p_max(),
        "dp": p.spacing(),
    })
}

fn params_of(cfg: &ExperimentConfig) -> Result<(f64, f64, Mass, Spinor), CliError> {
    let p = cfg
        .params
        .as_ref()
        .ok_or_else(|| CliError::config("missing [params] section"))?;
    Ok((p.theta, p.delta_x, p.mass.resolve()?, p.eta_in()?))
}

fn fit_json(fit: &Result<DecoherenceFit, spinmeter::Error>) -> Value {
    match fit {
        Ok(f) => serde_json::to_value(f).expect("fit serializes"),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn spin_trace_experiment(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let (theta, delta_x, mass, eta) = params_of(cfg)?;
    let times = cfg.time.as_ref().ok_or_else(|| CliError::config("missing [time] section"))?.resolve()?;
    let t_last = *times.last().unwrap();
    let sp = SimParams::sized_for(theta, delta_x, mass, eta, t_last)?;
    let trace = spin_trace(&sp, &times)?;
    let mut table = Table::new(SPIN_TRACE_COLUMNS);
    for i in 0..trace.len() {
        table.push(vec![
            trace.times[i].into(),
            trace.sigma_x[i].into(),
            trace.sigma_y[i].into(),
            trace.sigma_z[i].into(),
            trace.mean_position[i].into(),
        ]);
    }
    let plateau = if times.len() >= 2 {
        Some(detect_plateau(&trace.times, &trace.sigma_z, PLATEAU_WINDOW, PLATEAU_TOL)?)
    } else {
        None
    };
    // the closed-form limit assumes the spin starts along +z
    let predicted = if eta == Spinor::spin_up() {
        Some(sigma_z_limit(delta_x, theta)?)
    } else {
        None
    };
    let summary = json!({
        "samples": trace.len(),
        "sigma_z_plateau": plateau,
        "sigma_z_predicted": predicted,
        "decoherence_y": fit_json(&fit_decoherence(&trace, SpinAxis::Y)),
    });
    Ok(Outcome {
        table,
        grid: grid_json(&sp),
        summary,
    })
}

fn density_experiment(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let (theta, delta_x, mass, eta) = params_of(cfg)?;
    let spec = cfg.density.as_ref().ok_or_else(|| CliError::config("missing [density] section"))?;
    let t = spec.t;
    if !(t.is_finite() && t >= 0.0) {
        return Err(CliError::config(format!("density.t must be non-negative, got {t}")));
    }
    let sp = SimParams::sized_for(theta, delta_x, mass, eta, t)?;
    let report = classify_regime_with(delta_x, theta, &cfg.thresholds())?;
    let field = evolve_momentum(&sp, t)?;
    let (approx, model) = approximate_field(&sp, t, report.regime)?;
    let exact = position_density(&field);
    let approx_p = position_density(&approx);
    let lo = spec.x_min.unwrap_or(f64::NEG_INFINITY);
    let hi = spec.x_max.unwrap_or(f64::INFINITY);
    let mut table = Table::new(DENSITY_COLUMNS);
    for (i, (x, s)) in field.iter().enumerate() {
        if x < lo || x > hi {
            continue;
        }
        table.push(vec![
            x.into(),
            exact[i].into(),
            approx_p[i].into(),
            s.up.re.into(),
            s.up.im.into(),
            s.down.re.into(),
            s.down.im.into(),
        ]);
    }
    let plus = Spinor::along_field(theta);
    let minus = Spinor::against_field(theta);
    let h = sp.x_grid().spacing();
    let weight = |dir: &Spinor| h * field.values().iter().map(|s| dir.inner(s).norm_sqr()).sum::<f64>();
    let peaks = find_peaks(sp.x_grid(), &exact, 0.05);
    let summary = json!({
        "t": t,
        "regime": report,
        "approx_model": model,
        "norm": field.norm(),
        "mean_position": mean_position(&field),
        "weight_along_field": weight(&plus),
        "weight_against_field": weight(&minus),
        "peaks": peaks.iter().map(|p| json!({"position": p.position, "height": p.height})).collect::<Vec<_>>(),
    });
    Ok(Outcome {
        table,
        grid: grid_json(&sp),
        summary,
    })
}

/// Result of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub delta_x: f64,
    pub theta: f64,
    pub regime: Regime,
    pub sigma_z_plateau: Option<f64>,
    pub plateau_converged: bool,
    pub sigma_z_predicted: f64,
    pub peak_plus: Option<f64>,
    pub peak_minus: Option<f64>,
    /// `velocity * t` of each predicted peak.
    pub predicted_positions: Vec<f64>,
    pub decoherence_law: String,
    pub grid: Option<Value>,
    pub error: Option<String>,
}

/// Position of the density maximum within `half_width` of `center`, refined
/// by a parabola, or `None` when the window is empty or holds no interior
/// maximum.
pub fn windowed_peak(grid: &SpatialGrid, density: &[f64], center: f64, half_width: f64) -> Option<f64> {
    let idx: Vec<usize> = (0..grid.len())
        .filter(|&i| (grid.point(i) - center).abs() <= half_width)
        .collect();
    let &best = idx.iter().max_by(|&&a, &&b| density[a].total_cmp(&density[b]))?;
    if best == 0 || best + 1 >= grid.len() || density[best] <= 0.0 {
        return None;
    }
    let (x, _) = parabolic_vertex(
        grid.point(best),
        grid.spacing(),
        density[best - 1],
        density[best],
        density[best + 1],
    );
    Some(x)
}

pub fn sweep_point(delta_x: f64, theta: f64, t_max: f64, dt: f64, cfg: &ExperimentConfig) -> SweepRow {
    let mut row = SweepRow {
        delta_x,
        theta,
        regime: Regime::Intermediate,
        sigma_z_plateau: None,
        plateau_converged: false,
        sigma_z_predicted: f64::NAN,
        peak_plus: None,
        peak_minus: None,
        predicted_positions: Vec::new(),
        decoherence_law: ROW_ERROR.into(),
        grid: None,
        error: None,
    };
    if let Err(e) = fill_sweep_point(&mut row, t_max, dt, cfg) {
        row.error = Some(e.to_string());
        row.decoherence_law = ROW_ERROR.into();
    }
    row
}

fn fill_sweep_point(row: &mut SweepRow, t_max: f64, dt: f64, cfg: &ExperimentConfig) -> Result<(), CliError> {
    let report = classify_regime_with(row.delta_x, row.theta, &cfg.thresholds())?;
    row.regime = report.regime;
    row.sigma_z_predicted = report.predicted_sigma_z_limit;
    let n = (t_max / dt).round() as usize;
    let times: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
    let t_end = *times.last().unwrap();
    let sp = SimParams::sized_for(row.theta, row.delta_x, Mass::Infinite, Spinor::spin_up(), t_end)?;
    row.grid = Some(grid_json(&sp));
    let trace = spin_trace(&sp, &times)?;
    let plateau = detect_plateau(&trace.times, &trace.sigma_z, PLATEAU_WINDOW, PLATEAU_TOL)?;
    row.sigma_z_plateau = Some(plateau.value);
    row.plateau_converged = plateau.converged;
    row.decoherence_law = match fit_decoherence(&trace, SpinAxis::Y) {
        Ok(f) => f.law.to_string(),
        Err(spinmeter::Error::TooFewExtrema { .. }) => LAW_UNDETERMINED.into(),
        Err(e) => return Err(e.into()),
    };
    let field = evolve_momentum(&sp, t_end)?;
    let density = position_density(&field);
    let half = (2.0 * row.delta_x).max(0.1 * t_end);
    row.predicted_positions = report.predicted_peaks.iter().map(|p| p.velocity * t_end).collect();
    let mut peaks = report
        .predicted_peaks
        .iter()
        .map(|p| windowed_peak(sp.x_grid(), &density, p.velocity * t_end, half));
    row.peak_plus = peaks.next().flatten();
    row.peak_minus = peaks.next().flatten();
    Ok(())
}

fn sweep_experiment(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let spec = cfg.sweep.as_ref().ok_or_else(|| CliError::config("missing [sweep] section"))?;
    let points: Vec<(f64, f64)> = spec
        .delta_x
        .iter()
        .flat_map(|&d| spec.theta.iter().map(move |&th| (d, th)))
        .collect();
    let rows: Vec<SweepRow> = points
        .par_iter()
        .map(|&(d, th)| sweep_point(d, th, spec.t_max, spec.dt, cfg))
        .collect();
    let mut table = Table::new(SWEEP_COLUMNS);
    for r in &rows {
        table.push(vec![
            r.delta_x.into(),
            r.theta.into(),
            Cell::Text(r.regime.to_string()),
            Cell::opt(r.sigma_z_plateau),
            Cell::opt(Some(r.sigma_z_predicted).filter(|v| v.is_finite())),
            Cell::opt(r.peak_plus),
            Cell::opt(r.peak_minus),
            Cell::Text(r.decoherence_law.clone()),
        ]);
    }
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    let summary = json!({
        "rows": rows.len(),
        "failed_rows": failed,
        "points": rows.iter().map(|r| json!({
            "delta_x": r.delta_x,
            "theta": r.theta,
            "plateau_converged": r.plateau_converged,
            "predicted_peak_positions": r.predicted_positions,
            "error": r.error,
        })).collect::<Vec<_>>(),
    });
    let grid = json!({
        "t_max": spec.t_max,
        "dt": spec.dt,
        "points": rows.iter().map(|r| r.grid.clone().unwrap_or(Value::Null)).collect::<Vec<_>>(),
    });
    Ok(Outcome { table, grid, summary })
}

fn feasibility_experiment(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let phys = cfg.physical.unwrap_or_else(PhysicalParams::rb87);
    let (bridge, r) = to_dimensionless(&phys)?;
    let mut table = Table::new(FEASIBILITY_COLUMNS);
    let rows: [(&str, f64, &str); 10] = [
        ("recoil_energy", r.recoil_energy, "J"),
        ("recoil_wavenumber", r.recoil_wavenumber, "1/m"),
        ("delta_x_physical", r.delta_x_physical, "m"),
        ("delta_x_recoil_units", r.delta_x_recoil_units, "1/k_r"),
        ("delta_x_dimensionless", r.delta_x_dimensionless, "x_so"),
        ("spreading_ratio", r.spreading_ratio, "1"),
        ("x_so", r.x_so, "m"),
        ("dimensionless_mass", r.dimensionless_mass, "1"),
        ("time_unit", bridge.time_unit, "s"),
        ("v_so", phys.v_so, "m/s"),
    ];
    for (q, v, u) in rows {
        table.push(vec![Cell::Text(q.into()), v.into(), Cell::Text(u.into())]);
    }
    table.push(vec![
        Cell::Text("regime_hint".into()),
        Cell::Empty,
        Cell::Text(r.regime_hint.to_string()),
    ]);
    let summary = json!({ "physical": phys, "report": r, "bridge": bridge });
    Ok(Outcome {
        table,
        grid: Value::Null,
        summary,
    })
}

fn kernel_experiment(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let (theta, _, _, _) = params_of(cfg)?;
    let spec = cfg.kernel.as_ref().ok_or_else(|| CliError::config("missing [kernel] section"))?;
    let grid = SpatialGrid::new(spec.x_min, spec.x_max, spec.n_points)?;
    let rows = grid
        .points()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&x| Ok((x, kernel_xi(x, spec.t, theta)?, xi_saddle(x, spec.t, theta).ok())))
        .collect::<Result<Vec<_>, spinmeter::Error>>()?;
    let mut table = Table::new(KERNEL_COLUMNS);
    for (x, k, s) in &rows {
        let m = &k.regular;
        let (s11, s12) = match s {
            Some(s) => (
                [Cell::Num(s.regular.m11.re), Cell::Num(s.regular.m11.im)],
                [Cell::Num(s.regular.m12.re), Cell::Num(s.regular.m12.im)],
            ),
            None => ([Cell::Empty, Cell::Empty], [Cell::Empty, Cell::Empty]),
        };
        let [a, b] = s11;
        let [c, d] = s12;
        table.push(vec![
            (*x).into(),
            m.m11.re.into(),
            m.m11.im.into(),
            m.m12.re.into(),
            m.m12.im.into(),
            m.m21.re.into(),
            m.m21.im.into(),
            m.m22.re.into(),
            m.m22.im.into(),
            a,
            b,
            c,
            d,
        ]);
    }
    let k0 = kernel_xi(0.0, spec.t, theta)?;
    let summary = json!({
        "t": spec.t,
        "theta": theta,
        "delta_plus_weight": [k0.delta_plus_weight.re, k0.delta_plus_weight.im],
        "delta_minus_weight": [k0.delta_minus_weight.re, k0.delta_minus_weight.im],
        "saddle_rows": rows.iter().filter(|r| r.2.is_some()).count(),
    });
    Ok(Outcome {
        table,
        grid: json!({ "n_x": grid.len(), "x_min": grid.x_min(), "x_max": grid.x_max(), "dx": grid.spacing() }),
        summary,
    })
}

fn path_experiment(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let (theta, _, _, eta) = params_of(cfg)?;
    let spec = cfg.path.as_ref().ok_or_else(|| CliError::config("missing [path] section"))?;
    let dist = path_average_distribution(theta, spec.t, spec.steps, &eta)?;
    let mut table = Table::new(PATH_COLUMNS);
    for (m, (x, s)) in dist.positions().zip(&dist.spinors).enumerate() {
        table.push(vec![
            Cell::Int(m as i64),
            x.into(),
            s.norm_sqr().into(),
            s.up.re.into(),
            s.up.im.into(),
            s.down.re.into(),
            s.down.im.into(),
        ]);
    }
    let product = trotter_product(0.0, theta, spec.t, spec.steps)?;
    let exact = evolution_operator(0.0, theta, spec.t);
    let summary = json!({
        "steps": spec.steps,
        "t": spec.t,
        "trotter_error_p0": product.max_abs_diff(&exact),
        "total_weight": dist.spinors.iter().map(Spinor::norm_sqr).sum::<f64>(),
        "time_step": spec.t / spec.steps.max(1) as f64,
    });
    Ok(Outcome {
        table,
        grid: json!({ "bins": spec.steps + 1 }),
        summary,
    })
}
