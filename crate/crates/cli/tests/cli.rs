use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_spinmeter");

fn spinmeter(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("SPINMETER_THREADS")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    fs::create_dir_all(dir).unwrap();
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn schema(name: &str) -> Value {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn assert_valid(schema_name: &str, doc: &Value) {
    let s = schema(schema_name);
    let compiled = jsonschema::JSONSchema::compile(&s).expect("schema compiles");
    let msgs: Vec<String> = match compiled.validate(doc) {
        Ok(()) => Vec::new(),
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    assert!(msgs.is_empty(), "{schema_name}: {msgs:?}");
}

const SMALL_TRACE: &str = r#"
experiment = "spin-trace"
[params]
theta = 1.0
delta_x = 2.0
[time]
t_max = 4.0
n_times = 41
"#;

#[test]
fn unknown_key_exits_2_with_line_and_name() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.toml",
        "experiment = \"spin-trace\"\n[params]\ntheta = 1.0\ndelta_x = 2.0\ndelta_z = 1.0\n",
    );
    let o = spinmeter(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("delta_z"), "{e}");
    assert!(e.contains("line 5"), "{e}");
}

#[test]
fn bad_override_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SMALL_TRACE);
    let o = spinmeter(&["run", "--config", &cfg, "--set", "params.thetta=1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("thetta"));
}

#[test]
fn empty_sweep_range_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.toml",
        "experiment = \"regime-sweep\"\n[sweep]\ndelta_x = []\ntheta = [1.0]\nt_max = 5.0\n",
    );
    let o = spinmeter(&["sweep", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("non-empty"));
}

#[test]
fn sweep_command_rejects_other_experiments() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SMALL_TRACE);
    assert_eq!(spinmeter(&["sweep", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn invalid_thread_cap_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SMALL_TRACE);
    let o = Command::new(BIN)
        .args(["run", "--config", &cfg])
        .env("SPINMETER_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("SPINMETER_THREADS"));
}

#[test]
fn numerical_failure_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cfg = write_config(
        dir.path(),
        "p.toml",
        "experiment = \"path-oracle\"\n[params]\ntheta = 1.0\ndelta_x = 1.0\n[path]\nt = 1.0\nsteps = 100000\n",
    );
    let o = spinmeter(&["run", "--config", &cfg, "--set", &format!("output.dir=\"{}\"", out.display())]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn unknown_preset_exits_2_and_lists_names() {
    let o = spinmeter(&["--dump-preset", "fig9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("fig1"));
}

#[test]
fn dump_preset_round_trips() {
    let o = spinmeter(&["--dump-preset", "fig1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("experiment = \"spin-trace\""));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "fig1.toml", &text);
    let out = dir.path().join("o");
    let o = spinmeter(&[
        "run",
        "--config",
        &cfg,
        "--set",
        "time.t_max=2.0",
        "--set",
        "time.n_times=5",
        "--set",
        &format!("output.dir=\"{}\"", out.display()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(out.join("spin_trace.csv")).unwrap().lines().count(), 6);
}

fn run_small(dir: &Path, text: &str, format: &str) -> std::path::PathBuf {
    let cfg = write_config(dir, "c.toml", text);
    let out = dir.join("out");
    let o = spinmeter(&[
        "run",
        "--config",
        &cfg,
        "--set",
        &format!("output.dir=\"{}\"", out.display()),
        "--set",
        &format!("output.format=\"{format}\""),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    out
}

const SMALL_CONFIGS: &[(&str, &str, &str)] = &[
    ("spin-trace", "spin_trace", SMALL_TRACE),
    (
        "density-profile",
        "density_profile",
        "experiment = \"density-profile\"\n[params]\ntheta = 1.0\ndelta_x = 2.0\n[density]\nt = 3.0\n",
    ),
    (
        "regime-sweep",
        "regime_sweep",
        "experiment = \"regime-sweep\"\n[sweep]\ndelta_x = [0.5, 6.0]\ntheta = [0.0, 1.0]\nt_max = 10.0\ndt = 0.1\n",
    ),
    ("feasibility", "feasibility", "experiment = \"feasibility\"\n"),
    (
        "kernel-table",
        "kernel_table",
        "experiment = \"kernel-table\"\n[params]\ntheta = 1.0\ndelta_x = 1.0\n[kernel]\nt = 6.0\nx_min = -7.0\nx_max = 7.0\nn_points = 57\n",
    ),
    (
        "path-oracle",
        "path_oracle",
        "experiment = \"path-oracle\"\n[params]\ntheta = 1.0\ndelta_x = 1.0\n[path]\nt = 2.0\nsteps = 20\n",
    ),
];

#[test]
fn csv_headers_are_exact() {
    let expected = [
        ("spin_trace", "t,sigma_x,sigma_y,sigma_z,mean_x"),
        ("density_profile", "x,P_exact,P_approx,psi1_re,psi1_im,psi2_re,psi2_im"),
        (
            "regime_sweep",
            "delta_x,theta,regime,sigma_z_plateau,sigma_z_predicted,peak_plus,peak_minus,decoherence_law",
        ),
    ];
    for (exp, stem, text) in &SMALL_CONFIGS[..3] {
        let dir = tempfile::tempdir().unwrap();
        let out = run_small(dir.path(), text, "csv");
        let body = fs::read_to_string(out.join(format!("{stem}.csv"))).unwrap();
        let header = body.lines().next().unwrap();
        let want = expected.iter().find(|(s, _)| s == stem).unwrap().1;
        assert_eq!(header, want, "{exp}");
        let width = want.split(',').count();
        for line in body.lines().skip(1) {
            assert_eq!(line.split(',').count(), width, "{exp}: {line}");
            assert_ne!(line, header, "{exp}: repeated header");
        }
    }
}

#[test]
fn json_outputs_and_manifests_match_schemas() {
    for (exp, stem, text) in SMALL_CONFIGS {
        let dir = tempfile::tempdir().unwrap();
        let out = run_small(dir.path(), text, "json");
        let doc: Value = serde_json::from_str(&fs::read_to_string(out.join(format!("{stem}.json"))).unwrap()).unwrap();
        assert_valid(exp, &doc);
        assert!(!doc["rows"].as_array().unwrap().is_empty(), "{exp}");
        let man: Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
        assert_valid("manifest", &man);
        assert_eq!(man["experiment"], Value::String(exp.to_string()));
    }
}

#[test]
fn sweep_rows_follow_parameter_order_and_classifier() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_small(dir.path(), SMALL_CONFIGS[2].2, "csv");
    let body = fs::read_to_string(out.join("regime_sweep.csv")).unwrap();
    let rows: Vec<Vec<&str>> = body.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let order: Vec<(&str, &str)> = rows.iter().map(|r| (r[0], r[1])).collect();
    assert_eq!(order, [("0.5", "0.0"), ("0.5", "1.0"), ("6.0", "0.0"), ("6.0", "1.0")]);
    for r in &rows {
        let dx: f64 = r[0].parse().unwrap();
        let th: f64 = r[1].parse().unwrap();
        let want = spinmeter::asymptotics::classify_regime(dx, th).unwrap().regime.to_string();
        assert_eq!(r[2], want);
    }
    // no precession along z: the envelope cannot be fitted
    assert_eq!(rows[0][7], "UNDETERMINED");
}

#[test]
fn identical_configs_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_small(&dir.path().join("a"), SMALL_TRACE, "csv");
    let b = run_small(&dir.path().join("b"), SMALL_TRACE, "csv");
    assert_eq!(fs::read(a.join("spin_trace.csv")).unwrap(), fs::read(b.join("spin_trace.csv")).unwrap());
    let strip = |p: &Path| {
        let mut v: Value = serde_json::from_str(&fs::read_to_string(p.join("manifest.json")).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("timestamp_unix");
        v["config"]["output"]["dir"] = Value::Null;
        v
    };
    assert_eq!(strip(&a), strip(&b));
}
