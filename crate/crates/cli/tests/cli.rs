use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn htrace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_htrace"))
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .expect("failed to start htrace")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stderr).expect("stderr is not JSON")
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Compares stdout with `tests/golden/<name>`; `HTRACE_BLESS=1` rewrites it.
fn check_golden(name: &str, args: &[&str]) {
    let o = htrace(args);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let path = golden_dir().join(name);
    if std::env::var_os("HTRACE_BLESS").is_some() {
        std::fs::create_dir_all(golden_dir()).unwrap();
        std::fs::write(&path, &o.stdout).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e}; run with HTRACE_BLESS=1", path.display()));
    assert_eq!(stdout(&o), expected, "golden mismatch for {name}");
}

#[test]
fn golden_spectrum_merged() {
    check_golden(
        "spectrum_merged.csv",
        &[
            "spectrum",
            "--lambda-max",
            "6",
            "--sector",
            "heisenberg",
            "--merged",
        ],
    );
}

#[test]
fn golden_spectrum_all() {
    check_golden(
        "spectrum_all.csv",
        &["spectrum", "--lambda-max", "13", "--sector", "all"],
    );
}

#[test]
fn golden_heat_trace() {
    check_golden(
        "heat_trace.csv",
        &[
            "heat-trace",
            "--z",
            "0.5",
            "--z",
            "0.3,0.1",
            "--method",
            "both",
        ],
    );
}

#[test]
fn golden_mehler() {
    check_golden("mehler.csv", &["mehler", "--t", "1", "--l-max", "40"]);
}

#[test]
fn golden_landau() {
    check_golden(
        "landau.json",
        &["landau", "--l", "3", "--zeta", "-2", "--format", "json"],
    );
}

#[test]
fn golden_local_trace() {
    check_golden(
        "local_trace.csv",
        &[
            "local-trace",
            "--t",
            "0.25",
            "--f-integral",
            "2",
            "--l-max",
            "1000",
        ],
    );
}

#[test]
fn golden_closed_geodesics() {
    check_golden(
        "closed_geodesics.csv",
        &["closed-geodesics", "--max-length", "16"],
    );
}

#[test]
fn golden_confinement() {
    check_golden(
        "confinement.csv",
        &[
            "confinement",
            "--c",
            "1e-3",
            "--T",
            "5",
            "--samples",
            "16",
            "--seed",
            "42",
        ],
    );
}

#[test]
fn golden_lengths_heat() {
    check_golden(
        "lengths_heat.csv",
        &["lengths", "--from", "heat", "--n-detect", "2"],
    );
}

#[test]
fn golden_cohomology() {
    check_golden(
        "cohomology.csv",
        &[
            "cohomology",
            "--input",
            "tests/data/manufactured_b.json",
            "--residual",
        ],
    );
}

#[test]
fn golden_geodesic() {
    check_golden(
        "geodesic.csv",
        &[
            "geodesic",
            "--px",
            "1",
            "--zeta",
            "1",
            "--t",
            "-3",
            "--step",
            "1e-2",
            "--record-every",
            "50",
        ],
    );
}

#[test]
fn spectrum_example_rows() {
    let o = htrace(&[
        "spectrum",
        "--lambda-max",
        "6",
        "--sector",
        "heisenberg",
        "--merged",
    ]);
    let rows: Vec<(f64, u64)> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap())
        })
        .collect();
    assert_eq!(rows, vec![(2.0, 2), (4.0, 4), (6.0, 8)]);
}

#[test]
fn heat_methods_agree() {
    let o = htrace(&[
        "heat-trace",
        "--z",
        "0.5",
        "--method",
        "both",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2]["method"], "difference");
    let d = rows[0]["value_re"].as_f64().unwrap() - rows[1]["value_re"].as_f64().unwrap();
    assert!(d.abs() <= 1e-12);
    assert!(rows[2]["value_re"].as_f64().unwrap().abs() <= 1e-12);
}

#[test]
fn mehler_sides_agree() {
    let o = htrace(&["mehler", "--t", "1", "--l-max", "40", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let r = &v[0];
    let d = r["lhs"].as_f64().unwrap() - r["rhs"].as_f64().unwrap();
    assert!(d.abs() < 1e-15);
}

#[test]
fn csv_and_json_carry_the_same_bits() {
    let csv = htrace(&["heat-trace", "--z", "0.3,0.1"]);
    let json = htrace(&["heat-trace", "--z", "0.3,0.1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    for (line, row) in stdout(&csv).lines().skip(1).zip(v.as_array().unwrap()) {
        let f: Vec<&str> = line.split(',').collect();
        let re: f64 = f[3].parse().unwrap();
        assert_eq!(re.to_bits(), row["value_re"].as_f64().unwrap().to_bits());
    }
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        vec!["frobnicate"],
        vec!["spectrum"],
        vec!["spectrum", "--lambda-max", "6", "--colour", "red"],
        vec!["heat-trace", "--z", "0.5,1,2"],
    ] {
        let o = htrace(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert_eq!(stderr_json(&o)["error"], "usage");
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn domain_errors_exit_two() {
    for args in [
        vec!["heat-trace", "--z", "-1"],
        vec!["spectrum", "--lambda-max", "-3"],
        vec!["local-trace", "--t", "0"],
        vec!["landau", "--l", "0", "--zeta", "0"],
        vec!["cohomology", "--input", "tests/data/missing.json"],
    ] {
        let o = htrace(&args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(stderr_json(&o)["message"].is_string());
    }
}

#[test]
fn detection_errors_exit_three() {
    let o = htrace(&["lengths", "--from", "heat", "--n-detect", "4"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["error"], "detection");
    let o = htrace(&[
        "lengths", "--from", "heat", "--z-max", "0.2", "--z-min", "0.05",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_names_a_corrupted_constant() {
    let dir = std::env::temp_dir().join(format!("htrace-refs-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("refs.json");
    let pi = std::f64::consts::PI;
    let refs = serde_json::json!({
        "fundamental_length": 2.0 * pi,
        "weyl_constant": pi * pi / 32.0,
        "landau_diagonal": 1.0 / (2.0 * pi),
        "odd_square_sum": pi * pi / 8.0 + 1e-6,
        "u3_transform_numerator": 6.0,
    });
    std::fs::write(&path, refs.to_string()).unwrap();
    let o = htrace(&[
        "verify",
        "--only",
        "7,8",
        "--references",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["failed"], serde_json::json!([8]));
    let out = stdout(&o);
    assert!(out.contains("7,Mehler and Landau constants,true"));
    assert!(out.contains("8,local H3 trace,false"));
    let o = htrace(&["verify", "--only", "7,8"]);
    assert_eq!(o.status.code(), Some(0));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn fixed_seed_is_byte_identical() {
    let args = [
        "confinement",
        "--c",
        "1e-2",
        "--T",
        "3",
        "--samples",
        "12",
        "--seed",
        "9",
    ];
    let a = htrace(&args);
    let b = htrace(&args);
    assert_eq!(a.stdout, b.stdout);
    let c = htrace(&[
        "confinement",
        "--c",
        "1e-2",
        "--T",
        "3",
        "--samples",
        "12",
        "--seed",
        "10",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn thread_count_variable() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_htrace"))
            .args(["confinement", "--c", "1e-2", "--T", "3", "--samples", "12"])
            .env("HTRACE_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    let three = run("3");
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, three.stdout);
    let bad = run("zero");
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn output_file() {
    let path = std::env::temp_dir().join(format!("htrace-out-{}.csv", std::process::id()));
    let o = htrace(&[
        "landau",
        "--l",
        "1",
        "--zeta",
        "2",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next(), Some("l,zeta,energy,kernel_diag"));
    assert!(text.contains("6.0000000000000000e0"));
    std::fs::remove_file(path).ok();
}
