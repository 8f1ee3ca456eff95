//! Acceptance criteria 1 to 12. Prints one PASS/FAIL line per criterion and
//! exits non-zero when any fails.

use std::f64::consts::PI;
use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinmeter::asymptotics::{
    approximate_field, oscillatory_i, sigma_z_limit, xi_saddle, xi_saddle_envelope, Branch, CalibratedAsymptotic,
};
use spinmeter::decoherence::{fit_decoherence, DecoherenceLaw};
use spinmeter::kernel::kernel_xi;
use spinmeter::observables::{
    detect_plateau, ehrenfest_position, mean_position, position_density, spin_trace, SpinAxis, PLATEAU_TOL,
    PLATEAU_WINDOW,
};
use spinmeter::path_sum::{path_amplitudes, trotter_product};
use spinmeter::profile::{find_peaks, fringes, peak_centroid};
use spinmeter::propagator::{evolve_convolution, evolve_momentum};
use spinmeter::quadrature::{composite, gl16};
use spinmeter::spin::{evolution_operator, SpinMatrix};
use spinmeter::units::{to_dimensionless, PhysicalParams};
use spinmeter::{Mass, SimParams, Spinor, C64};

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn sim(theta: f64, dx: f64, t: f64) -> Result<SimParams, String> {
    SimParams::sized_for(theta, dx, Mass::Infinite, Spinor::spin_up(), t).map_err(err)
}

fn grid_times(t_max: f64, dt: f64) -> Vec<f64> {
    let n = (t_max / dt).round() as usize;
    (0..=n).map(|k| k as f64 * dt).collect()
}

fn steady_state_limit() -> Check {
    let limit = sigma_z_limit(10.0, PI / 3.0).map_err(err)?;
    let sp = sim(PI / 3.0, 10.0, 80.0)?;
    let times = grid_times(80.0, 0.05);
    let trace = spin_trace(&sp, &times).map_err(err)?;
    let plateau = detect_plateau(&times, &trace.sigma_z, PLATEAU_WINDOW, PLATEAU_TOL).map_err(err)?;
    ensure(
        (limit - 0.25).abs() <= 0.01 && plateau.converged && (plateau.value - limit).abs() <= 0.02,
        format!(
            "limit {limit:.5}, plateau {:.5} (onset {:?})",
            plateau.value, plateau.onset
        ),
    )
}

fn unitarity_and_norm() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst_u: f64 = 0.0;
    for _ in 0..1000 {
        let p = rng.gen_range(-20.0..20.0);
        let theta = rng.gen_range(0.0..PI);
        let t = rng.gen_range(0.0..100.0);
        worst_u = worst_u.max(evolution_operator(p, theta, t).unitarity_defect());
    }
    let mut worst_n: f64 = 0.0;
    for &dx in &[0.3, 1.0, 5.0] {
        for &theta in &[PI / 6.0, PI / 3.0, PI / 2.0] {
            let sp = sim(theta, dx, 20.0)?;
            let n0 = evolve_momentum(&sp, 0.0).map_err(err)?.norm();
            for &t in &[1.0, 5.0, 20.0] {
                let n = evolve_momentum(&sp, t).map_err(err)?.norm();
                worst_n = worst_n.max((n - n0).abs());
            }
        }
    }
    ensure(
        worst_u < 1e-12 && worst_n < 1e-8,
        format!("max unitarity defect {worst_u:.2e}, max norm drift {worst_n:.2e}"),
    )
}

fn route_equivalence() -> Check {
    let mut worst: f64 = 0.0;
    for &theta in &[PI / 6.0, PI / 3.0, PI / 2.0] {
        for &dx in &[0.3, 1.0, 3.0] {
            let sp = sim(theta, dx, 30.0)?;
            for &t in &[2.0, 10.0, 30.0] {
                let a = evolve_momentum(&sp, t).map_err(err)?;
                let b = evolve_convolution(&sp, t).map_err(err)?;
                worst = worst.max(a.l2_distance(&b));
            }
        }
    }
    ensure(worst < 1e-6, format!("max L2 distance {worst:.2e} over 27 cases"))
}

fn brute_force_bins(theta: f64, t: f64, k: usize) -> Vec<SpinMatrix> {
    let v = evolution_operator(0.0, theta, t / k as f64);
    let mut bins = vec![SpinMatrix::ZERO; k + 1];
    for bits in 0u32..(1 << (k + 1)) {
        let label = |i: usize| if bits >> i & 1 == 1 { 0 } else { 1 };
        let mut amp = C64::new(1.0, 0.0);
        for step in 0..k {
            amp *= v.get(label(step + 1), label(step));
        }
        let ups = (0..k).filter(|&i| label(i) == 0).count();
        let b = &mut bins[ups];
        match (label(k), label(0)) {
            (0, 0) => b.m11 += amp,
            (0, 1) => b.m12 += amp,
            (1, 0) => b.m21 += amp,
            _ => b.m22 += amp,
        }
    }
    bins
}

fn trotter_oracle() -> Check {
    let mut worst: f64 = 0.0;
    for k in 1..=12 {
        let theta = 0.2 + 0.2 * k as f64;
        let t = 0.5 * k as f64;
        let dp = path_amplitudes(theta, t, k).map_err(err)?;
        for (a, b) in dp.amplitudes.iter().zip(brute_force_bins(theta, t, k)) {
            worst = worst.max(a.max_abs_diff(&b));
        }
    }
    let (p, theta, t) = (0.7, PI / 3.0, 3.0);
    let exact = evolution_operator(p, theta, t);
    let errs = [64, 128, 256]
        .iter()
        .map(|&k| Ok(trotter_product(p, theta, t, k).map_err(err)?.max_abs_diff(&exact)))
        .collect::<Result<Vec<f64>, String>>()?;
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    ensure(
        worst < 1e-12 && orders.iter().all(|o| *o >= 0.9),
        format!("bin mismatch {worst:.2e}, orders {orders:.3?}"),
    )
}

fn zeno_regime() -> Check {
    let (dx, theta) = (0.05, PI / 3.0);
    let sp = sim(theta, dx, 20.0)?;
    let mut centroids = Vec::new();
    let mut clusters = 0;
    let mut raw = 0;
    for &t in &[10.0, 15.0, 20.0] {
        let f = evolve_momentum(&sp, t).map_err(err)?;
        let d = position_density(&f);
        let peaks = find_peaks(sp.x_grid(), &d, 0.05);
        raw = peaks.len();
        // maxima closer than four widths belong to one packet
        clusters = 1 + peaks.windows(2).filter(|w| w[1].position - w[0].position > 4.0 * dx).count();
        let main = peaks
            .iter()
            .max_by(|a, b| a.height.total_cmp(&b.height))
            .ok_or("no peak")?;
        centroids.push(peak_centroid(sp.x_grid(), &d, main.position, 0.3).map_err(err)?);
    }
    let velocity = (centroids[2] - centroids[0]) / 10.0;
    let times = grid_times(20.0, 0.05);
    let trace = spin_trace(&sp, &times).map_err(err)?;
    let plateau = detect_plateau(&times, &trace.sigma_z, PLATEAU_WINDOW, PLATEAU_TOL).map_err(err)?;
    let mean_velocity = trace.mean_position.last().unwrap() / 20.0;
    ensure(
        clusters == 1 && (velocity - 1.0).abs() <= 0.05 && plateau.value >= 0.9,
        format!(
            "{clusters} peak cluster ({raw} raw maxima at t = 20), centroid velocity {velocity:.4}, \
             mean-position velocity {mean_velocity:.4}, plateau {:.4}",
            plateau.value
        ),
    )
}

fn ergodic_regime() -> Check {
    let (dx, theta, t) = (10.0, PI / 3.0, 60.0);
    let sp = sim(theta, dx, t)?;
    let f = evolve_momentum(&sp, t).map_err(err)?;
    let d = position_density(&f);
    let peaks = find_peaks(sp.x_grid(), &d, 0.05);
    if peaks.len() != 2 {
        return Err(format!("expected two peaks, found {}", peaks.len()));
    }
    let (left, right) = (peaks[0].position, peaks[1].position);
    let h = sp.x_grid().spacing();
    let weight = |dir: Spinor| h * f.values().iter().map(|s| dir.inner(s).norm_sqr()).sum::<f64>();
    let (wp, wm) = (weight(Spinor::along_field(theta)), weight(Spinor::against_field(theta)));
    let report = spinmeter::asymptotics::classify_regime(dx, theta).map_err(err)?;
    let (approx, _) = approximate_field(&sp, t, report.regime).map_err(err)?;
    let pa = position_density(&approx);
    let rel: Vec<f64> = peaks.iter().map(|p| (pa[p.index] - d[p.index]).abs() / d[p.index]).collect();
    let pos_ok = (right - t / 2.0).abs() <= dx / 2.0 && (left + t / 2.0).abs() <= dx / 2.0;
    ensure(
        2.0 * t * theta.cos() > 4.0 * dx
            && pos_ok
            && (wp - 0.75).abs() <= 0.02
            && (wm - 0.25).abs() <= 0.02
            && rel.iter().all(|r| *r <= 0.1),
        format!("peaks {left:.2}, {right:.2}; weights {wp:.4}/{wm:.4}; approx error at peaks {rel:.4?}"),
    )
}

fn interference_regime() -> Check {
    let (theta, t) = (PI / 3.0, 50.0);
    let sp = sim(theta, 1.0, t)?;
    let f = evolve_momentum(&sp, t).map_err(err)?;
    let d = position_density(&f);
    let xs = t * theta.cos();
    let r = fringes(sp.x_grid(), &d, -xs, xs).map_err(err)?;
    let visible = r.visible(0.1);
    ensure(
        visible >= 3,
        format!(
            "{} maxima in [-{xs:.2}, {xs:.2}], {visible} deeper than 10%, depths {:.3?}",
            r.maxima.len(),
            r.depths
        ),
    )
}

fn decoherence_laws() -> Check {
    let sp = sim(PI / 3.0, 10.0, 60.0)?;
    let times = grid_times(60.0, 0.05);
    let g = fit_decoherence(&spin_trace(&sp, &times).map_err(err)?, SpinAxis::Y).map_err(err)?;
    let sp = sim(PI / 2.0, 2.0, 100.0)?;
    let times = grid_times(100.0, 0.05);
    let p = fit_decoherence(&spin_trace(&sp, &times).map_err(err)?, SpinAxis::Y).map_err(err)?;
    let (dx, theta) = (3.0, PI / 3.0);
    let cal = CalibratedAsymptotic::new(dx, theta).map_err(err)?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..=45 {
        let t = 5.0 * dx + k as f64 * dx;
        let exact = oscillatory_i(dx, theta, t, Branch::Plus).map_err(err)?.norm();
        let ratio = exact / cal.magnitude(t);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    ensure(
        g.law == DecoherenceLaw::Gaussian
            && p.law == DecoherenceLaw::PowerLaw
            && (p.power_exponent + 0.5).abs() <= 0.1
            && lo >= 0.5
            && hi <= 2.0,
        format!(
            "(10, pi/3) {} rate {:.4}; (2, pi/2) {} exponent {:.3}; calibrated ratio in [{lo:.4}, {hi:.4}]",
            g.law, g.gaussian_rate, p.law, p.power_exponent
        ),
    )
}

fn ehrenfest_identity() -> Check {
    let mut worst: f64 = 0.0;
    for &dx in &[0.05, 1.0, 10.0] {
        let sp = sim(PI / 3.0, dx, 30.0)?;
        for &t in &[2.0, 10.0, 30.0] {
            let m = mean_position(&evolve_momentum(&sp, t).map_err(err)?);
            let e = ehrenfest_position(&sp, t, 64).map_err(err)?;
            worst = worst.max((m - e).abs());
        }
    }
    ensure(worst < 1e-4, format!("max |<x> - int sigma_z| = {worst:.2e}"))
}

fn smeared(x0: f64, w: f64, t: f64, theta: f64) -> Result<(SpinMatrix, SpinMatrix), String> {
    let phi = |x: f64| (-(x - x0) * (x - x0) / (w * w)).exp();
    let c = theta.cos();
    let panels = (2.0 * t / 0.1).ceil() as usize;
    let mut coord: SpinMatrix = composite(gl16(), -t, t, panels, |x: f64| {
        let k = kernel_xi(x, t, theta).expect("kernel inside the light cone");
        k.regular.scale(C64::from_polar(phi(x) / (2.0 * PI), -x * c))
    });
    coord.m11 += C64::from_polar(phi(t), -t * c);
    coord.m22 += C64::from_polar(phi(-t), t * c);
    let reach = 14.0 / w;
    let pan = (2.0 * reach * (t + 1.0)).ceil() as usize;
    let momentum: SpinMatrix = composite(gl16(), -reach, reach, pan, |p: f64| {
        let hat = C64::from_polar(w * PI.sqrt() * (-p * p * w * w / 4.0).exp(), p * x0);
        evolution_operator(p, theta, t).scale(hat / (2.0 * PI))
    });
    Ok((coord, momentum))
}

fn kernel_oracle() -> Check {
    let mut dist: f64 = 0.0;
    for &w in &[0.5, 1.0, 2.0] {
        for &(t, theta) in &[(3.0, PI / 3.0), (8.0, 2.0)] {
            for &x0 in &[-0.5 * t, 0.0, 0.8 * t, t] {
                let (a, b) = smeared(x0, w, t, theta)?;
                dist = dist.max(a.max_abs_diff(&b));
            }
        }
    }
    let mut sym: f64 = 0.0;
    let mut saddle: f64 = 0.0;
    let (t, theta) = (20.0, PI / 3.0);
    for k in 0..=160 {
        let x = -0.8 * t + k as f64 * 0.01 * t;
        let a = kernel_xi(x, t, theta).map_err(err)?.regular;
        let b = kernel_xi(-x, t, theta).map_err(err)?.regular;
        sym = sym.max((a.m11 - b.m22).norm());
        let s = xi_saddle(x, t, theta).map_err(err)?.regular;
        let env = xi_saddle_envelope(x, t, theta);
        saddle = saddle.max((s.m11 - a.m11).norm() / env).max((s.m12 - a.m12).norm() / env);
    }
    ensure(
        dist < 1e-6 && sym < 1e-10 && saddle <= 0.05,
        format!("distributional {dist:.2e}, symmetry {sym:.2e}, saddle error {saddle:.4} of envelope"),
    )
}

fn feasibility() -> Check {
    let (_, r) = to_dimensionless(&PhysicalParams::rb87()).map_err(err)?;
    let within = |v: f64, target: f64| v / target <= 1.5 && target / v <= 1.5;
    ensure(
        within(r.delta_x_recoil_units, 10.0) && within(r.spreading_ratio, 0.1),
        format!(
            "delta_x = {:.3} / k_r, spreading ratio {:.4}",
            r.delta_x_recoil_units, r.spreading_ratio
        ),
    )
}

fn cli_determinism() -> Check {
    let bin = env!("CARGO_BIN_EXE_spinmeter");
    let dir = std::env::temp_dir().join(format!("spinmeter-acceptance-{}", std::process::id()));
    let mut files = Vec::new();
    for run in ["a", "b"] {
        let out = dir.join(run);
        let o = Command::new(bin)
            .args(["preset", "fig1", "--out"])
            .arg(&out)
            .output()
            .map_err(err)?;
        if !o.status.success() {
            return Err(String::from_utf8_lossy(&o.stderr).into_owned());
        }
        files.push(fs::read(out.join("spin_trace.csv")).map_err(err)?);
    }
    let _ = fs::remove_dir_all(&dir);
    ensure(
        files[0] == files[1],
        format!("two runs of fig1, {} bytes each, identical: {}", files[0].len(), files[0] == files[1]),
    )
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Check,
}

fn main() {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion { id: 1, name: "steady-state limit", budget: secs(60), run: steady_state_limit },
        Criterion { id: 2, name: "unitarity and normalization", budget: secs(30), run: unitarity_and_norm },
        Criterion { id: 3, name: "route equivalence", budget: secs(300), run: route_equivalence },
        Criterion { id: 4, name: "trotter oracle", budget: secs(60), run: trotter_oracle },
        Criterion { id: 5, name: "zeno regime", budget: secs(120), run: zeno_regime },
        Criterion { id: 6, name: "ergodic regime", budget: secs(180), run: ergodic_regime },
        Criterion { id: 7, name: "interference regime", budget: secs(120), run: interference_regime },
        Criterion { id: 8, name: "decoherence laws", budget: secs(180), run: decoherence_laws },
        Criterion { id: 9, name: "ehrenfest identity", budget: secs(120), run: ehrenfest_identity },
        Criterion { id: 10, name: "kernel oracle", budget: secs(120), run: kernel_oracle },
        Criterion { id: 11, name: "feasibility arithmetic", budget: secs(1), run: feasibility },
        Criterion { id: 12, name: "cli determinism", budget: secs(120), run: cli_determinism },
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in criteria.iter().filter(|c| filter.is_empty() || filter.contains(&c.id)) {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= c.budget => (true, d),
            Ok(d) => (false, format!("{d}; over budget {:?}", c.budget)),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {:<28} {:>7.2}s  {detail}",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
