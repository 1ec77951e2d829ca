use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn frontlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frontlab"))
        .args(args)
        .output()
        .expect("spawn frontlab")
}

fn json_stdout(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(format!("{name}.json"))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn classify_examples() {
    let v = json_stdout(&frontlab(&["classify", "--m", "2", "--alpha", "2", "--beta", "2.5"]));
    assert_eq!(v["regime"], "NoAcceleration");
    assert!(v["x_minus"].is_null() && v["x_plus"].is_null());

    let v = json_stdout(&frontlab(&["classify", "--m", "0.5", "--alpha", "3", "--beta", "1.4"]));
    assert_eq!(v["regime"], "InfiniteSpeedUnlocalized");

    let v = json_stdout(&frontlab(&["classify", "--m", "0.5", "--alpha", "8", "--beta", "1"]));
    assert_eq!(v["regime"], "ExponentialAcceleration");
    assert!((v["gamma"].as_f64().unwrap() - 0.25).abs() < 1e-15);
    assert_eq!(v["x_minus"]["kind"], "exponential");

    let v = json_stdout(&frontlab(&["classify", "--m", "2", "--alpha", "2", "--beta", "1.25"]));
    assert_eq!(v["regime"], "PolynomialAcceleration");
    assert!((v["exponent"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    for key in ["regime", "gamma", "exponent", "x_minus", "x_plus"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn usage_and_domain_errors_exit_2() {
    let out = frontlab(&["classify", "--m", "2", "--alpha", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--beta"));

    let out = frontlab(&["classify", "--m", "-1", "--alpha", "2", "--beta", "1.5"]);
    assert_eq!(out.status.code(), Some(2));

    let out = frontlab(&["simulate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn infeasible_selection_exits_4() {
    // the growth rate of the plateau subsolution must stay below r
    let out = frontlab(&[
        "construct", "--kind", "fde-sub", "--m", "0.5", "--alpha", "8", "--beta", "1", "--rho", "1.5",
    ]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn construct_reports_signed_residual() {
    let dir = tempfile::tempdir().unwrap();
    let v = json_stdout(&frontlab(&[
        "construct", "--kind", "growth-super", "--m", "0.5", "--alpha", "8", "--beta", "1", "--json", "--out",
        s(dir.path()),
    ]));
    assert_eq!(v["pass"], true);
    assert_eq!(v["residual"]["side"], "super");
    assert!(dir.path().join("construct.json").exists());
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn shoot_and_wave() {
    let v = json_stdout(&frontlab(&["shoot", "--m", "0.5", "--beta", "1", "--c", "5", "--json"]));
    assert_eq!(v["case"], "iii");

    let v = json_stdout(&frontlab(&["shoot", "--m", "2", "--beta", "1", "--c", "10", "--json"]));
    assert_eq!(v["case"], "i");

    let dir = tempfile::tempdir().unwrap();
    let v = json_stdout(&frontlab(&[
        "wave", "--m", "0.5", "--beta", "1", "--c", "1", "--json", "--out", s(dir.path()),
    ]));
    assert!(v["residual"]["max_abs"].as_f64().unwrap() <= 1e-4);
    let csv = std::fs::read_to_string(dir.path().join("wave.csv")).unwrap();
    assert!(csv.starts_with("x,U,y\n"));
    assert_eq!(csv.lines().count(), 2002);

    // speed search without --c
    let v = json_stdout(&frontlab(&["wave", "--m", "2", "--beta", "2.5", "--json"]));
    assert!(v["search_halvings"].as_u64().is_some());
    assert!(v["speed"].as_f64().unwrap() > 0.0);

    // case i has no compact support to transform
    let out = frontlab(&["wave", "--m", "2", "--beta", "1", "--c", "10"]);
    assert_eq!(out.status.code(), Some(3));
}

fn small_config(dir: &Path) -> PathBuf {
    let cfg = serde_json::json!({
        "name": "small",
        "model": {
            "m": 2.0, "alpha": 2.0, "beta": 1.25, "r": 1.0, "r_bar": 1.0, "C": 1.0, "C_bar": 1.0,
            "s0": 0.05, "x0": 2.0,
            "grid": { "kind": "geometric", "x_left": -10.0, "x_right": 500.0, "n": 300, "finest": 0.2 }
        },
        "solver": { "t_end": 5.0 },
        "n_snapshots": 10
    });
    let path = dir.join("small.json");
    std::fs::write(&path, cfg.to_string()).unwrap();
    path
}

#[test]
fn simulate_is_deterministic_and_analyze_reads_it_back() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = frontlab(&["simulate", "--config", s(&cfg), "--out", s(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ta = std::fs::read(a.join("trajectory.csv")).unwrap();
    assert_eq!(ta, std::fs::read(b.join("trajectory.csv")).unwrap());
    assert_eq!(String::from_utf8_lossy(&ta).lines().count(), 1 + 11 * 301);

    let ma: Value = serde_json::from_slice(&std::fs::read(a.join("manifest.json")).unwrap()).unwrap();
    let mb: Value = serde_json::from_slice(&std::fs::read(b.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(ma["input_hash"], mb["input_hash"]);
    assert_eq!(ma["outputs"], mb["outputs"]);
    assert_eq!(ma["subcommand"], "simulate");

    let v = json_stdout(&frontlab(&["analyze", "--run", s(&a), "--json"]));
    assert_eq!(v["regime"]["regime"], "PolynomialAcceleration");
    assert!(v["trace_points"].as_u64().unwrap() >= 10);
    assert!(a.join("analysis").join("front.csv").exists());

    // a corrupted trajectory is rejected
    let text = String::from_utf8(ta).unwrap();
    let first = text.lines().nth(1).unwrap();
    let mut fields: Vec<&str> = first.split(',').collect();
    fields[1] = "-11";
    let text = text.replacen(first, &fields.join(","), 1);
    std::fs::write(a.join("trajectory.csv"), text).unwrap();
    let o = frontlab(&["analyze", "--run", s(&a)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_porous_medium_boundary_is_one_curve() {
    let dir = tempfile::tempdir().unwrap();
    let o = frontlab(&["sweep", "--m", "2", "--alpha", "0.2:5:25", "--beta", "1:3:25", "--jobs", "4", "--out", s(dir.path())]);
    assert!(o.status.success());
    let mut rdr = csv::Reader::from_path(dir.path().join("phase.csv")).unwrap();
    let mut n = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let (alpha, beta): (f64, f64) = (rec[0].parse().unwrap(), rec[1].parse().unwrap());
        let expected = frontlab::regimes::classify(2.0, alpha, beta).unwrap();
        assert_eq!(&rec[2], expected.name());
        // beta = 1 is exponential; otherwise the only switch is at beta = 1 + 1/alpha
        let want = if beta == 1.0 {
            "ExponentialAcceleration"
        } else if (beta - 1.0 - 1.0 / alpha).abs() < 1e-12 {
            "Boundary"
        } else if beta > 1.0 + 1.0 / alpha {
            "NoAcceleration"
        } else {
            "PolynomialAcceleration"
        };
        assert_eq!(&rec[2], want, "alpha {alpha} beta {beta}");
        n += 1;
    }
    assert_eq!(n, 625);
}

#[test]
fn sweep_fast_diffusion_has_all_regions() {
    let dir = tempfile::tempdir().unwrap();
    let v = json_stdout(&frontlab(&[
        "sweep", "--m", "0.5", "--alpha", "0.2:8:40", "--beta", "1:3:40", "--json", "--out", s(dir.path()),
    ]));
    let counts = v["counts"].as_object().unwrap();
    for name in [
        "ExponentialAcceleration",
        "PolynomialAcceleration",
        "PolynomialLowerOnly",
        "InfiniteSpeedUnlocalized",
        "NoAcceleration",
    ] {
        assert!(counts.get(name).and_then(Value::as_u64).unwrap_or(0) > 0, "{name} missing: {counts:?}");
    }
}

#[test]
fn empty_sweep_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let o = frontlab(&["sweep", "--m", "2", "--alpha", "1:2:0", "--beta", "1:3:5", "--out", s(dir.path())]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("phase.csv")).unwrap();
    assert_eq!(text, "alpha,beta,regime,gamma,exponent,boundary,error\n");
}

fn experiment(name: &str) -> Value {
    let dir = tempfile::tempdir().unwrap();
    let v = json_stdout(&frontlab(&["experiment", "--config", s(&bundled(name)), "--out", s(dir.path()), "--json"]));
    for f in ["trajectory.csv", "front.csv", "analysis.json", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    v
}

#[test]
fn bundled_pme_poly_sandwich_passes() {
    let v = experiment("pme_poly");
    assert_eq!(v["sandwich"]["pass"], true);
    assert_eq!(v["pass"], true);
}

#[test]
fn bundled_noacc_linear_bounds_hold() {
    let v = experiment("noacc");
    assert_eq!(v["linear"]["ceiling"]["pass"], true);
    assert_eq!(v["linear"]["floor"]["pass"], true);
}

#[test]
fn bundled_fde_kpp_rate_in_band() {
    let v = experiment("fde_kpp");
    let ratio = v["fit"]["ratio"].as_f64().unwrap();
    assert!((0.75..=1.25).contains(&ratio), "ratio {ratio}");
    assert_eq!(v["fit"]["kind"], "exponential_rate");
}
