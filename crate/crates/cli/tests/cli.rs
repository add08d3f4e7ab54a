use std::path::Path;
use std::process::{Command, Output};

fn nhtop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nhtop")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = nhtop(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Header and data rows of a CSV, comments dropped.
fn csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let head = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap_or(f64::NAN)).collect())
        .collect();
    (head, rows)
}

fn column(text: &str, name: &str) -> Vec<f64> {
    let (head, rows) = csv(text);
    let k = head.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[k]).collect()
}

#[test]
fn ssh_odd_has_one_dark_row() {
    let s = ok(&[
        "spectrum", "--model", "ssh", "--N", "3", "--J1", "1", "--J2", "1.8", "--gamma", "0.5",
    ]);
    let rates = column(&s, "decay_rate");
    assert_eq!(rates.len(), 3);
    assert_eq!(rates.iter().filter(|&&r| r < 1e-12).count(), 1);
    assert!((column(&s, "overlap_site1")[0] - 0.7641).abs() < 1e-4);
}

#[test]
fn three_site_two_dark_rows() {
    let s = ok(&["spectrum", "--model", "three-site", "--N", "5"]);
    assert_eq!(column(&s, "decay_rate").iter().filter(|&&r| r < 1e-10).count(), 2);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"model\": {\"type\": \"ssh\"").unwrap();
    let out = nhtop(&["spectrum", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty() && out.stdout.is_empty());

    std::fs::write(&bad, r#"{"model": {"type": "ssh", "N": 5}, "colour": 1}"#).unwrap();
    assert_eq!(
        nhtop(&["spectrum", "--config", bad.to_str().unwrap()]).status.code(),
        Some(2)
    );
    assert_eq!(
        nhtop(&["spectrum", "--config", "/nonexistent.json"]).status.code(),
        Some(2)
    );
    assert_eq!(
        nhtop(&["spectrum", "--model", "ssh", "--kappa", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        nhtop(&["spectrum", "--model", "ssh", "--N", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(nhtop(&["spectrum", "--gamma", "-1"]).status.code(), Some(2));
    assert_eq!(nhtop(&["table1", "--Ns", "7"]).status.code(), Some(2));
    assert_eq!(nhtop(&["scaling", "--Ns", "6,9"]).status.code(), Some(2));
    assert_eq!(nhtop(&["spectrum", "--model", "custom"]).status.code(), Some(2));
    assert_eq!(nhtop(&["bogus"]).status.code(), Some(2));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"model": {"type": "ssh", "N": 5, "J2": 0.5}}"#).unwrap();
    let c = cfg.to_str().unwrap();
    assert_eq!(ok(&["winding", "--config", c]).trim(), "W=0 method=numeric");
    assert_eq!(
        ok(&["winding", "--config", c, "--J2", "1.8"]).trim(),
        "W=1 method=numeric"
    );
    assert_eq!(column(&ok(&["spectrum", "--config", c]), "index").len(), 5);
    // a different --model discards the file's model
    assert_eq!(
        column(&ok(&["spectrum", "--config", c, "--model", "impurity"]), "index").len(),
        4
    );
}

#[test]
fn custom_network_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("net.json");
    std::fs::write(
        &cfg,
        r#"{"model": {"type": "custom",
            "sites": [{"kind": "qubit"}, {"kind": "cavity", "loss_rate": 4.0}],
            "edges": [{"i": 1, "j": 2, "amplitude": 1.0}]},
            "t_max": 3.0, "t_points": 4}"#,
    )
    .unwrap();
    let s = ok(&["coherence", "--config", cfg.to_str().unwrap()]);
    assert_eq!(column(&s, "t"), vec![0.0, 1.0, 2.0, 3.0]);
    // critically damped pair: C = (1 + t) e^{-t}
    for (t, c) in column(&s, "t").iter().zip(column(&s, "coherence")) {
        assert!((c - (1.0 + t) * (-t).exp()).abs() < 1e-9);
    }
}

#[test]
fn winding_command() {
    let s = ok(&["winding", "--model", "three-site", "--J3", "2"]);
    assert_eq!(s.trim(), "W=2 method=numeric");
    for (j3, w) in [("0.2", 0), ("0.7", 1), ("2", 2)] {
        for m in ["numeric", "closed-form"] {
            let s = ok(&["winding", "--model", "three-site", "--J3", j3, "--method", m]);
            assert!(s.starts_with(&format!("W={w} ")), "{s}");
        }
    }
    assert_eq!(ok(&["winding", "--J2", "0.5"]).trim(), "W=0 method=numeric");
    assert_eq!(nhtop(&["winding", "--J2", "1"]).status.code(), Some(3));
    assert_eq!(nhtop(&["winding", "--model", "impurity"]).status.code(), Some(2));
}

#[test]
fn table1_command() {
    let s = ok(&["table1"]);
    let tau = column(&s, "tau_exact");
    let ov = column(&s, "overlap_exact");
    let tau_th = column(&s, "tau_theory");
    let ov_th = column(&s, "overlap_theory");
    let want = [
        (6.9367, 0.5355, 10.9813, 0.6638),
        (31.8117, 0.6715, 35.5794, 0.6915),
        (111.1859, 0.6888, 115.2774, 0.6941),
        (4.1153e4, 0.6914, 4.1159e4, 0.6914),
    ];
    assert_eq!(tau.len(), 4);
    for (k, (a, b, c, d)) in want.iter().enumerate() {
        assert!((tau[k] / a - 1.0).abs() < 1e-3);
        assert!((ov[k] - b).abs() < 1e-3);
        assert!((tau_th[k] / c - 1.0).abs() < 1e-3);
        assert!((ov_th[k] - d).abs() < 1e-3);
    }
}

#[test]
fn scaling_command() {
    let s = ok(&[
        "scaling",
        "--model",
        "three-site",
        "--Ns",
        "6,9,12,15,18",
        "--J1",
        "1.4",
        "--J3",
        "3",
        "--gamma",
        "1.5",
    ]);
    assert_eq!(column(&s, "N"), vec![6.0, 9.0, 12.0, 15.0, 18.0]);
    assert!(s.contains("# eps_dark=1.5e-3 exponential_modes=2"));
    let slow = column(&s, "slowest_decay_rate");
    assert!(slow.windows(2).all(|w| w[1] < w[0]));
    assert_eq!(ok(&["scaling"]), s);
}

#[test]
fn impurity_traces_size_independent() {
    // N = 4 is off by ~2e-3 near t = τ; N = 8 has converged
    for kappa in ["0.2", "0.5", "1"] {
        let small = column(
            &ok(&["coherence", "--model", "impurity", "--kappa", kappa, "--N", "8"]),
            "coherence",
        );
        let large = column(
            &ok(&["coherence", "--model", "impurity", "--kappa", kappa, "--N", "400"]),
            "coherence",
        );
        let sup = small.iter().zip(&large).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(sup < 1e-5, "kappa={kappa}: {sup}");
    }
}

#[test]
fn w2_trace_oscillates() {
    let s = ok(&[
        "coherence",
        "--model",
        "three-site",
        "--t-max",
        "100",
        "--t-points",
        "1001",
    ]);
    let c = column(&s, "coherence");
    let late = &c[200..];
    let turns = late.windows(3).filter(|w| (w[1] - w[0]) * (w[2] - w[1]) < 0.0).count();
    assert!(turns >= 10, "{turns}");
}

#[test]
fn coherence_methods_and_log_grid() {
    let a = column(&ok(&["coherence", "--method", "expm", "--t-points", "11"]), "coherence");
    let b = column(
        &ok(&["coherence", "--method", "spectral", "--t-points", "11"]),
        "coherence",
    );
    let c = column(&ok(&["coherence", "--method", "full", "--t-points", "11"]), "coherence");
    for k in 0..11 {
        assert!((a[k] - b[k]).abs() < 1e-10 && (a[k] - c[k]).abs() < 1e-10);
    }
    let s = ok(&[
        "coherence",
        "--log-time",
        "--t-max",
        "100",
        "--t-points",
        "5",
        "--gnuplot-header",
    ]);
    assert!(s.contains("# set logscale x"));
    let t = column(&s, "t");
    assert!((t[0] - 0.01).abs() < 1e-15 && (t[4] - 100.0).abs() < 1e-9);
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn disorder_reproducible_and_clean_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let args = [
        "disorder",
        "--N",
        "5",
        "--mu",
        "0.4",
        "--realizations",
        "200",
        "--t-points",
        "11",
        "--t-max",
        "50",
    ];
    let mut first = args.to_vec();
    first.extend(["--output", a.to_str().unwrap()]);
    let mut second = args.to_vec();
    second.extend(["--output", b.to_str().unwrap()]);
    ok(&first);
    let out = Command::new(env!("CARGO_BIN_EXE_nhtop"))
        .args(&second)
        .env("NHTOP_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(read(&a), read(&b));
    let text = String::from_utf8(read(&a)).unwrap();
    assert!(text.lines().next().unwrap().starts_with("# config={"));
    assert_eq!(csv(&text).0, vec!["t", "mean_coherence", "stderr", "n_ok"]);
    assert!(column(&text, "n_ok").iter().all(|&n| n == 200.0));

    let zero = ok(&[
        "disorder",
        "--N",
        "5",
        "--mu",
        "0",
        "--realizations",
        "20",
        "--t-points",
        "11",
        "--t-max",
        "50",
    ]);
    let clean = ok(&[
        "coherence",
        "--model",
        "ssh",
        "--N",
        "5",
        "--t-points",
        "11",
        "--t-max",
        "50",
    ]);
    assert_eq!(column(&zero, "mean_coherence"), column(&clean, "coherence"));
    assert!(column(&zero, "stderr").iter().all(|&s| s == 0.0));
}

#[test]
fn bad_thread_count() {
    let out = Command::new(env!("CARGO_BIN_EXE_nhtop"))
        .args(["table1"])
        .env("NHTOP_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn model_dump() {
    let s = ok(&["model", "--model", "three-site", "--N", "3"]);
    let (_, rows) = csv(&s);
    assert_eq!(rows.len(), 9);
    // [[ε₁, J1, J],[J1, ε₂, J2],[J, J2, −iΓ]]
    assert_eq!(rows[2], vec![1.0, 3.0, 0.7, 0.0]);
    assert_eq!(rows[8], vec![3.0, 3.0, 0.0, -0.5]);
}

#[test]
fn every_subcommand_has_help() {
    let flags: &[(&str, &[&str])] = &[
        (
            "spectrum",
            &[
                "--config",
                "--output",
                "--gnuplot-header",
                "--model",
                "--N",
                "--J1",
                "--gamma",
            ],
        ),
        ("coherence", &["--t-max", "--t-points", "--log-time", "--method"]),
        ("winding", &["--method", "--k-points", "--J3"]),
        ("table1", &["--Ns"]),
        ("scaling", &["--Ns", "--eps-dark"]),
        (
            "disorder",
            &["--mu", "--realizations", "--seed", "--qubit-only", "--t-max"],
        ),
        ("model", &["--model", "--kappa", "--eps1", "--eps2", "--J"]),
    ];
    for (cmd, want) in flags {
        let s = ok(&[cmd, "--help"]);
        for f in *want {
            assert!(s.contains(f), "{cmd} --help lacks {f}");
        }
    }
    ok(&["--help"]);
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["spectrum", "--model", "three-site", "--N", "11"][..],
        &["scaling"][..],
        &["table1", "--gnuplot-header"][..],
    ] {
        assert_eq!(ok(args), ok(args));
    }
}
