use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn crunch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crunch"))
        .args(args)
        .env_remove("CRUNCH_SEED")
        .output()
        .expect("spawn crunch")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn run_from_far_start_passes() {
    let out = crunch(&[
        "run",
        "--objective",
        "exp_well",
        "--lambda",
        "15",
        "--mu",
        "0.05",
        "--start",
        "600,600",
        "--method",
        "gcs",
        "--seed",
        "7",
        "--iters",
        "10000",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    assert!(report["result"]["best_value"].as_f64().unwrap() < 0.5);
    assert_eq!(report["result"]["evaluations"], 10001);
    assert_eq!(report["gcs"]["seed"], 7);
}

#[test]
fn run_at_optimum_stays_at_zero() {
    let out = crunch(&["run", "--start", "0,0", "--method", "gcs", "--iters", "500"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["result"]["best_value"].as_f64(), Some(0.0));
}

#[test]
fn exit_code_matrix() {
    let cases: &[(&[&str], i32)] = &[
        (&["run", "--method", "bogus"], 2),
        (&["run", "--start", "1,x"], 2),
        (&["run", "--objective", "himmelblau"], 2),
        (&["run", "--lambda", "-1"], 2),
        (&["run", "--growth", "0.5"], 2),
        (&["run", "--method", "powell", "--trace", "t.csv"], 2),
        (&["run", "--out", "/definitely/not/here/out.json"], 2),
        (&["run", "--objective", "rosenbrock", "--start", "1"], 2),
        (&["bench", "--starts", ""], 2),
        (&["bench", "--methods", ""], 2),
        (&["bench", "--starts", "1,1;2,2,2"], 2),
        (&["failprob", "--trials", "0"], 2),
        (&["failprob", "--jobs", "0"], 2),
        (&["plateau", "--bits", "11", "--check", "1,1"], 2),
        (&["plateau", "--bits", "0"], 2),
        (&["frobnicate"], 2),
        (&["plateau", "--check", "0,0"], 0),
        (
            &[
                "run",
                "--method",
                "nelder_mead",
                "--start",
                "3,4",
                "--objective",
                "sphere",
            ],
            0,
        ),
    ];
    for (args, expected) in cases {
        let out = crunch(args);
        assert_eq!(
            code(&out),
            *expected,
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn unknown_method_lists_valid_names() {
    let out = crunch(&["run", "--method", "bogus"]);
    let err = String::from_utf8_lossy(&out.stderr);
    for name in ["gcs", "nelder_mead", "powell", "fd_gradient_descent"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn plateau_verdicts() {
    let out = crunch(&[
        "plateau", "--lambda", "15", "--mu", "0.05", "--check", "600,600", "--check", "0,0",
        "--check", "400,400",
    ]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    let radius = report["radius"].as_f64().unwrap();
    assert!((radius - 747.3).abs() < 0.1, "{radius}");
    let verdicts: Vec<bool> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["on_plateau"].as_bool().unwrap())
        .collect();
    assert_eq!(verdicts, vec![true, false, false]);
}

#[test]
fn bench_reproduction_has_single_pass_at_far_start() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bench.csv");
    let out = crunch(&[
        "bench",
        "--starts",
        "200,200;400,400;600,600",
        "--methods",
        "gcs,nelder_mead,powell,fd_gradient_descent",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let mut reader = csv::Reader::from_path(&path).unwrap();
    assert_eq!(
        reader.headers().unwrap(),
        vec![
            "start_x",
            "start_y",
            "method",
            "final_value",
            "passed",
            "evaluations",
            "seed"
        ]
    );
    let rows: Vec<csv::StringRecord> = reader.records().collect::<Result<_, _>>().unwrap();
    assert_eq!(rows.len(), 12);
    let far: Vec<_> = rows.iter().filter(|r| &r[0] == "600").collect();
    let passing: Vec<&str> = far
        .iter()
        .filter(|r| &r[4] == "true")
        .map(|r| &r[2])
        .collect();
    assert_eq!(passing, vec!["gcs"]);
    for row in far.iter().filter(|r| &r[2] != "gcs") {
        assert_eq!(row[3].parse::<f64>().unwrap(), 15.0);
    }
    for row in &rows {
        let value: f64 = row[3].parse().unwrap();
        assert_eq!(&row[4] == "true", value < 0.5);
    }
}

fn failprob_bytes(dir: &Path, name: &str, extra: &[&str]) -> Vec<u8> {
    let path = dir.join(name);
    let mut args = vec![
        "failprob",
        "--starts",
        "1800:2800:500",
        "--trials",
        "15",
        "--seed",
        "1",
        "--out",
        path.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let out = crunch(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::read(path).unwrap()
}

#[test]
fn failprob_is_replayable_and_jobs_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let serial = failprob_bytes(dir.path(), "a.json", &["--jobs", "1"]);
    let parallel = failprob_bytes(dir.path(), "b.json", &["--jobs", "8"]);
    let again = failprob_bytes(dir.path(), "c.json", &["--jobs", "1"]);
    assert_eq!(serial, parallel);
    assert_eq!(serial, again);

    let report: Value = serde_json::from_slice(&serial).unwrap();
    assert_eq!(report["base_seed"], 1);
    assert_eq!(report["trials_per_start"], 15);
    assert_eq!(report["rows"].as_array().unwrap().len(), 3);
    assert_eq!(report["gcs"]["max_iters"], 10000);

    let csv_serial = failprob_bytes(dir.path(), "a.csv", &["--jobs", "1", "--format", "csv"]);
    let csv_parallel = failprob_bytes(dir.path(), "b.csv", &["--jobs", "8", "--format", "csv"]);
    assert_eq!(csv_serial, csv_parallel);
    let text = String::from_utf8(csv_serial).unwrap();
    assert!(
        text.starts_with("start_x,start_y,trials,failures,fail_fraction,base_seed\n1800,1800,15,")
    );
}

#[test]
fn failprob_range_expands_to_paper_starts() {
    let out = crunch(&[
        "failprob",
        "--starts",
        "600:2800:200",
        "--trials",
        "1",
        "--seed",
        "1",
        "--iters",
        "10",
    ]);
    assert_eq!(code(&out), 0);
    let starts: Vec<f64> = json(&out)["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["start"][0].as_f64().unwrap())
        .collect();
    let expected: Vec<f64> = (600..=2800).step_by(200).map(f64::from).collect();
    assert_eq!(starts, expected);
}

#[test]
fn seed_falls_back_to_environment() {
    let run = |env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_crunch"));
        cmd.args(["run", "--start", "30,40", "--iters", "50"]);
        match env {
            Some(v) => cmd.env("CRUNCH_SEED", v),
            None => cmd.env_remove("CRUNCH_SEED"),
        };
        json(&cmd.output().unwrap())
    };
    assert_eq!(run(Some("9"))["gcs"]["seed"], 9);
    assert_eq!(run(None)["gcs"]["seed"], 42);
}

#[test]
fn run_writes_trace_csv() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = crunch(&[
        "run",
        "--start",
        "5,5",
        "--iters",
        "200",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let mut reader = csv::Reader::from_path(&trace).unwrap();
    assert_eq!(
        reader.headers().unwrap(),
        vec!["iter", "x0", "x1", "value", "sd_before", "accepted"]
    );
    assert_eq!(reader.records().count(), 200);
    // The trace goes to its own file, not into the JSON result.
    assert!(json(&out)["result"].get("trace").is_none());
}

#[test]
fn run_json_round_trips_through_library_types() {
    let out = crunch(&["run", "--start", "100,-50", "--iters", "300", "--seed", "3"]);
    let report = json(&out);
    let objective: crunch::ObjectiveSpec<f64> =
        serde_json::from_value(report["objective"].clone()).unwrap();
    let config: crunch::GcsConfig<f64> = serde_json::from_value(report["gcs"].clone()).unwrap();
    let result: crunch::RunResult<f64> = serde_json::from_value(report["result"].clone()).unwrap();
    let replay = crunch::gcs_run(&objective, &[100.0, -50.0], &config).unwrap();
    assert_eq!(replay, result);
}
