use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_poisson-mobility");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("POISSON_MOBILITY_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write_config(dir: &Path, extra: &str) -> String {
    write_config_with_duration(dir, 300.0, extra)
}

fn write_config_with_duration(dir: &Path, duration: f64, extra: &str) -> String {
    let body = format!(
        r#"
scenario = "cli-test"
seed = 7
replications = 4
output = "{}"
model.node_disc_radius = 200.0
model.user_intensity = 7.957747154594767e-6
model.tx_power = 2.0
model.snr_edge = 1.7717272e-3
model.pathloss_exponent = 4.0
model.velocity = 16.0
trajectory.duration = {duration:?}
{extra}
"#,
        dir.join("out").display()
    );
    let path = dir.join("config.toml");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn empty_duration_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "").replace("config.toml", "bad.toml");
    let text = fs::read_to_string(dir.path().join("config.toml"))
        .unwrap()
        .replace("duration = 300.0", "duration = 0.0");
    fs::write(&cfg, text).unwrap();
    let out = run(&["trace", "--config", &cfg]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("duration"));
}

#[test]
fn unknown_keys_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "model.colour = 3");
    assert_eq!(code(&run(&["trace", "--config", &cfg])), 2);
    assert_eq!(code(&run(&["trace", "--preset", "no-such-preset"])), 2);
}

#[test]
fn trace_is_deterministic_given_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sinr.enabled = true");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = run(&["trace", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in [
        "snr.csv",
        "crossings.csv",
        "handoffs.csv",
        "sharing.csv",
        "sharing_upper.csv",
        "shared_rate.csv",
        "sinr.csv",
        "sinr_crossings.csv",
        "field.csv",
    ] {
        let x = fs::read(a.join(name)).unwrap();
        assert!(!x.is_empty(), "{name}");
        assert_eq!(x, fs::read(b.join(name)).unwrap(), "{name}");
    }
    let meta: serde_json::Value =
        serde_json::from_slice(&fs::read(a.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["command"], "trace");
    assert_eq!(meta["seed"], 7);
    assert_eq!(meta["details"]["trace"]["dt"], 0.01);

    let c = dir.path().join("c");
    run(&[
        "trace",
        "--config",
        &cfg,
        "--seed",
        "8",
        "--out",
        c.to_str().unwrap(),
    ]);
    assert_ne!(
        fs::read(a.join("snr.csv")).unwrap(),
        fs::read(c.join("snr.csv")).unwrap()
    );
}

#[test]
fn default_scenario_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("default");
    let o = run(&["trace", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let snr = fs::read_to_string(out.join("snr.csv")).unwrap();
    // 2000 s at 0.01 s plus the header.
    assert_eq!(snr.lines().count(), 200_002);
}

#[test]
fn validate_passes_and_detects_a_wrong_formula() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config_with_duration(dir.path(), 2000.0, "hetnet.duration = 2000.0");
    let good = run(&["validate", "--config", &cfg, "--reps", "40"]);
    assert_eq!(code(&good), 0, "{}", String::from_utf8_lossy(&good.stdout));
    let csv = fs::read_to_string(dir.path().join("out/validate.csv")).unwrap();
    let closed_form = |name: &str| -> f64 {
        let line = csv
            .lines()
            .find(|l| l.starts_with(&format!("{name},")))
            .unwrap();
        line.split(',').nth(1).unwrap().parse().unwrap()
    };
    // With no micro nodes the two-tier closed forms equal the homogeneous ones.
    for (two_tier, homogeneous) in [
        ("hetnet_p_on[0]", "p_on"),
        ("hetnet_mean_on[0]", "busy_mean"),
        ("hetnet_mean_off[0]", "idle_mean"),
    ] {
        let (a, b) = (closed_form(two_tier), closed_form(homogeneous));
        assert!((a / b - 1.0).abs() < 1e-12, "{two_tier}: {a} vs {b}");
    }

    let bad = run(&[
        "validate",
        "--config",
        &cfg,
        "--reps",
        "40",
        "--perturb",
        "busy_mean",
    ]);
    assert_eq!(code(&bad), 1);
    assert_eq!(
        code(&run(&["validate", "--config", &cfg, "--perturb", "nope"])),
        2
    );
}

#[test]
fn download_transform_is_one_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "download.horizon = 20000.0\nfluid.s = [0.1]");
    let o = run(&["download", "--config", &cfg, "--reps", "10"]);
    assert!(
        matches!(code(&o), 0 | 1),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("out/transforms.csv")).unwrap();
    let zeros: Vec<&str> = csv
        .lines()
        .filter(|l| l.split(',').nth(1) == Some("0"))
        .collect();
    assert_eq!(zeros.len(), 2);
    for l in zeros {
        assert_eq!(l.split(',').nth(2), Some("1"));
    }
}

#[test]
fn cox_mean_exceeds_poisson_mean() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "thresholds.gamma = [0.009393517093963185]");
    let o = run(&["cox", "--config", &cfg, "--reps", "2000"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let csv = fs::read_to_string(dir.path().join("out/cox.csv")).unwrap();
    for l in csv.lines().skip(1) {
        let f: Vec<f64> = l.split(',').take(7).map(|x| x.parse().unwrap()).collect();
        assert!(f[3] > f[4], "{l}");
    }
}

#[test]
fn streaming_single_user_curve_dominates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curves");
    let o = run(&[
        "streaming",
        "--preset",
        "paper-fig9",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(out.join("streaming_curves.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    let single: Vec<f64> = rows.iter().filter(|r| r[0] == 0.0).map(|r| r[3]).collect();
    for k in [1.0, 4.0, 10.0] {
        let curve: Vec<f64> = rows.iter().filter(|r| r[0] == k).map(|r| r[3]).collect();
        assert_eq!(curve.len(), single.len());
        assert!(single.iter().zip(&curve).all(|(s, c)| s >= c));
    }
}

#[test]
fn presets_are_listed_and_printable() {
    let list = run(&["presets"]);
    assert_eq!(code(&list), 0);
    let text = String::from_utf8_lossy(&list.stdout);
    for name in ["paper-sec6-default", "paper-fig9"] {
        assert!(text.contains(name));
    }
    let shown = run(&["presets", "paper-fig9"]);
    assert!(String::from_utf8_lossy(&shown.stdout).contains("streaming.xi_over_lambda"));
}
