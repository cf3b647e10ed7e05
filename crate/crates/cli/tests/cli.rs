use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn reactor(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reactor"))
        .args(args)
        .current_dir(dir)
        .env_remove("REACTOR_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn report_value(o: &Output, key: &str) -> String {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")).map(str::to_string))
        .unwrap_or_else(|| panic!("no `{key}` in output:\n{}", stdout(o)))
}

fn report_f64(o: &Output, key: &str) -> f64 {
    report_value(o, key).parse().unwrap()
}

#[test]
fn missing_theta_h_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = reactor(&["simulate", "--passes", "10"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--theta-h"));
}

#[test]
fn bad_flag_is_a_usage_error_and_help_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(reactor(&["simulate", "--bogus"], dir.path()).status.code(), Some(1));
    assert_eq!(reactor(&["--help"], dir.path()).status.code(), Some(0));
    let o = reactor(&["lyapunov", "--f", "1.5"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn domain_error_exits_2_and_still_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = reactor(
        &[
            "simulate",
            "--theta-h",
            "-0.6",
            "--theta0",
            "-0.6",
            "--passes",
            "5",
            "--out",
            "x.csv",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    let manifest = fs::read_to_string(dir.path().join("x.manifest")).unwrap();
    assert!(manifest.contains("status = failed"));
    assert!(manifest.contains("error = domain error"));
}

#[test]
fn simulate_periodic_tail() {
    let dir = tempfile::tempdir().unwrap();
    let o = reactor(
        &[
            "simulate",
            "--theta-h",
            "-0.0335",
            "--passes",
            "2000",
            "--transient",
            "2000",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report_value(&o, "period"), "8");
    let csv = fs::read_to_string(dir.path().join("orbit.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("k,alpha_out,theta_out"));
    assert_eq!(csv.lines().count(), 2001);
    assert!(csv.lines().nth(1).unwrap().starts_with("2001,"));
    let meta = fs::read_to_string(dir.path().join("orbit.meta")).unwrap();
    assert!(meta.contains("theta_h = -3.3500000000000002e-2"));
    assert!(meta.contains("method = euler") && meta.contains("version = "));
    let manifest = fs::read_to_string(dir.path().join("orbit.manifest")).unwrap();
    assert!(manifest.contains("output = orbit.csv") && manifest.contains("output = orbit.meta"));
}

#[test]
fn rerun_from_manifest_config_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate",
        "--theta-h",
        "-0.03299",
        "--alpha0",
        "0.1",
        "--passes",
        "300",
        "--transient",
        "50",
        "--out",
        "a.csv",
    ];
    assert!(reactor(&args, dir.path()).status.success());
    let o = reactor(
        &[
            "simulate",
            "--config",
            "a.manifest",
            "--passes",
            "300",
            "--transient",
            "50",
            "--out",
            "b.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        fs::read(dir.path().join("a.csv")).unwrap(),
        fs::read(dir.path().join("b.csv")).unwrap()
    );
}

#[test]
fn lyapunov_of_affine_map() {
    let dir = tempfile::tempdir().unwrap();
    let o = reactor(&["lyapunov", "--da", "0", "--f", "0.5", "--out", "l.csv"], dir.path());
    assert!(o.status.success());
    assert!((report_f64(&o, "lambda") - 0.5f64.ln()).abs() < 1e-5);
    let csv = fs::read_to_string(dir.path().join("l.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("n,running_lambda"));
    assert_eq!(csv.lines().count(), 20_001);
}

#[test]
fn lyapunov_estimators_agree() {
    let dir = tempfile::tempdir().unwrap();
    let common = ["--theta-h", "-0.0335", "--passes", "5000", "--transient", "1000"];
    let v = reactor(&[&["lyapunov"][..], &common].concat(), dir.path());
    let b = reactor(
        &[&["lyapunov", "--method", "benettin", "--d0", "1e-9"][..], &common].concat(),
        dir.path(),
    );
    assert!(v.status.success() && b.status.success());
    let (lv, lb) = (report_f64(&v, "lambda"), report_f64(&b, "lambda"));
    assert!(lv < 0.0);
    assert!((lv - lb).abs() < 0.005, "{lv} vs {lb}");
}

#[test]
fn bursts_from_csv_spike_train() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("k,theta\n");
    for k in 0..1000 {
        let th = if [100, 300, 500].contains(&k) { 1.0 } else { 0.0 };
        csv.push_str(&format!("{k},{th}\n"));
    }
    fs::write(dir.path().join("spikes.csv"), csv).unwrap();
    let o = reactor(&["bursts", "--from-csv", "spikes.csv"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report_value(&o, "n_events"), "3");
    assert_eq!(report_f64(&o, "mean_interval"), 200.0);
    assert_eq!(report_f64(&o, "cv"), 0.0);
    let out = fs::read_to_string(dir.path().join("bursts.csv")).unwrap();
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows[0], "k_peak,peak_theta,width,interval_to_next");
    assert!(rows[1].starts_with("100,") && rows[3].ends_with(",NaN"));
}

#[test]
fn simulated_csv_reads_back_for_bursts() {
    let dir = tempfile::tempdir().unwrap();
    let sim = reactor(
        &[
            "simulate",
            "--theta-h",
            "-0.03299",
            "--passes",
            "1200",
            "--transient",
            "500",
            "--integrator",
            "rk4",
        ],
        dir.path(),
    );
    assert!(sim.status.success());
    let a = reactor(&["bursts", "--from-csv", "orbit.csv", "--out", "a.csv"], dir.path());
    let b = reactor(
        &[
            "bursts",
            "--theta-h",
            "-0.03299",
            "--passes",
            "1200",
            "--transient",
            "500",
            "--integrator",
            "rk4",
            "--out",
            "b.csv",
        ],
        dir.path(),
    );
    assert!(a.status.success() && b.status.success());
    assert_eq!(
        fs::read(dir.path().join("a.csv")).unwrap(),
        fs::read(dir.path().join("b.csv")).unwrap()
    );
}

#[test]
fn poincare_delay_map() {
    let dir = tempfile::tempdir().unwrap();
    let o = reactor(
        &[
            "poincare",
            "--theta-h",
            "-0.0335",
            "--passes",
            "400",
            "--transient",
            "2000",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    assert_eq!(report_value(&o, "pairs"), "399");
    assert_eq!(report_value(&o, "distinct_at_1e-6"), "8");
}

#[test]
fn single_point_sweep_matches_simulate() {
    let dir = tempfile::tempdir().unwrap();
    assert!(reactor(
        &[
            "simulate",
            "--theta-h",
            "-0.033",
            "--passes",
            "200",
            "--transient",
            "300"
        ],
        dir.path()
    )
    .status
    .success());
    let o = reactor(
        &["sweep", "--values", "-0.033", "--transient", "300", "--record", "200"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let orbit = fs::read_to_string(dir.path().join("orbit.csv")).unwrap();
    let sweep = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let a: Vec<&str> = orbit.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    let b: Vec<&str> = sweep.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(a, b);
}

#[test]
fn sweep_output_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, out: &str| {
        let o = reactor(
            &[
                "sweep",
                "--grid",
                "-0.034:-0.032:12",
                "--transient",
                "100",
                "--record",
                "30",
                "--chunk-size",
                "3",
                "--lyapunov",
                "--lyapunov-passes",
                "200",
                "--integrator",
                "rk4",
                "--steps",
                "400",
                "--threads",
                threads,
                "--out",
                out,
                "--lambda-out",
                &format!("l{out}"),
            ],
            dir.path(),
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    run("1", "s1.csv");
    run("3", "s3.csv");
    for (a, b) in [("s1.csv", "s3.csv"), ("ls1.csv", "ls3.csv")] {
        assert_eq!(
            fs::read(dir.path().join(a)).unwrap(),
            fs::read(dir.path().join(b)).unwrap()
        );
    }
}

#[test]
fn sweep_from_plan_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("plan.txt"),
        "param = theta_h\ngrid = -0.04:-0.02:3\ntransient = 50\nrecord = 10\nda = 0\n",
    )
    .unwrap();
    let o = reactor(&["sweep", "--plan", "plan.txt"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sweep = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().next(), Some("param_value,sample_index,theta_out"));
    assert_eq!(sweep.lines().count(), 31);
    let summary = fs::read_to_string(dir.path().join("sweep_summary.csv")).unwrap();
    assert!(summary.lines().skip(1).all(|l| l.split(',').nth(1) == Some("1")));
}

#[test]
fn classify_steady_and_periodic() {
    let dir = tempfile::tempdir().unwrap();
    let o = reactor(&["classify", "--da", "0"], dir.path());
    assert_eq!(report_value(&o, "label"), "steady");
    let o = reactor(&["classify", "--theta-h", "-0.0335"], dir.path());
    assert_eq!(report_value(&o, "label"), "periodic(8)");
    let o = reactor(&["classify", "--da", "0", "--csv"], dir.path());
    assert!(stdout(&o).starts_with("label,theta_h,"));
}

#[test]
fn bracket_without_boundary_fails_numerically() {
    let dir = tempfile::tempdir().unwrap();
    let o = reactor(
        &[
            "bracket",
            "--da",
            "0",
            "--lo",
            "-0.034",
            "--hi",
            "-0.032",
            "--transient",
            "100",
            "--passes",
            "200",
            "--steps",
            "50",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn threads_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_reactor"))
        .args(["sweep", "--values", "-0.033", "--transient", "10", "--record", "10"])
        .current_dir(dir.path())
        .env("REACTOR_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
    let o = Command::new(env!("CARGO_BIN_EXE_reactor"))
        .args(["sweep", "--values", "-0.033", "--transient", "10", "--record", "10"])
        .current_dir(dir.path())
        .env("REACTOR_THREADS", "lots")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}
