use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use recycle_reactor::analysis::bursts::{detect_bursts, BurstConfig, BurstEventSet};
use recycle_reactor::analysis::delay_map::{burst_delay_map, delay_map, distinct_points};
use recycle_reactor::analysis::lyapunov::{lyapunov_benettin, lyapunov_variational, LyapunovMethod};
use recycle_reactor::analysis::regime::classify_regime;
use recycle_reactor::dynamics::{detect_period, simulate_orbit, OrbitSeries, DEFAULT_MAX_PERIOD, DEFAULT_PERIOD_TOL};
use recycle_reactor::integrator::integrate_pass;
use recycle_reactor::io::{
    fmt_f64, key_values_csv_row, orbit_meta, parse_grid, parse_key_values, parse_plan, parse_value_list,
    read_orbit_csv, write_bursts_csv, write_delay_map_csv, write_key_values, write_lambda_sweep_csv,
    write_lyapunov_csv, write_orbit_csv, write_profile_csv, write_sweep_csv, write_sweep_summary_csv, RunConfig,
    RunManifest,
};
use recycle_reactor::sweep::{bracket_regime_boundary, chaos_predicate, run_sweep, SweepPlan};
use recycle_reactor::{Error, Method};

use crate::{
    BracketArgs, BurstArgs, BurstsArgs, ClassifyArgs, LyapunovArgs, ModelArgs, PoincareArgs, SimulateArgs, SweepArgs,
};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Run(e) if e.is_numeric() => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Run(e) => e.fmt(f),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(Error::Io(e))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

/// Layers `--config` and explicit flags over `base`.
fn resolve_onto(
    mut cfg: RunConfig,
    m: &ModelArgs,
    method: Option<Method>,
    require_theta_h: bool,
) -> CliResult<RunConfig> {
    let mut theta_h_seen = false;
    if let Some(path) = &m.config {
        let text = read_text(path)?;
        theta_h_seen = parse_key_values(&text)?.iter().any(|(k, _)| k == "theta_h");
        cfg = RunConfig::from_text(&text)?;
    }
    if require_theta_h && !theta_h_seen && m.theta_h.is_none() {
        return Err(CliError::Usage(
            "--theta-h is required (or `theta_h` in --config)".into(),
        ));
    }
    let p = &mut cfg.params;
    let overrides = [
        ("theta_h", m.theta_h),
        ("da", m.da),
        ("n", m.order),
        ("beta", m.beta),
        ("gamma", m.gamma),
        ("delta", m.delta),
        ("f", m.recycle),
    ];
    for (name, v) in overrides {
        if let Some(v) = v {
            p.set(name, v)?;
        }
    }
    if let Some(k) = m.kinetics_form {
        p.kinetics_form = k;
    }
    if let Some(x) = method.or(m.integrator) {
        cfg.integrator.method = x;
    }
    if let Some(s) = m.steps {
        cfg.integrator.steps_per_pass = s;
    }
    if let Some(a) = m.alpha0 {
        cfg.inlet0.alpha = a;
    }
    if let Some(t) = m.theta0 {
        cfg.inlet0.theta = t;
    }
    cfg.params.validate()?;
    cfg.integrator.validate()?;
    Ok(cfg)
}

fn resolve(m: &ModelArgs, method: Option<Method>, require_theta_h: bool) -> CliResult<RunConfig> {
    resolve_onto(RunConfig::default(), m, method, require_theta_h)
}

fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest")
}

/// Runs `body` and writes the manifest afterwards, also on failure.
fn with_manifest<F>(command: &str, argv: Vec<String>, cfg: RunConfig, path: Option<PathBuf>, body: F) -> CliResult<()>
where
    F: FnOnce(&mut RunManifest) -> CliResult<()>,
{
    let start = Instant::now();
    let mut manifest = RunManifest::new(command, argv, cfg);
    let result = body(&mut manifest);
    manifest.duration_s = start.elapsed().as_secs_f64();
    if let Err(e) = &result {
        manifest.error = Some(e.to_string());
    }
    if let Some(path) = path {
        let mut w = BufWriter::new(File::create(&path)?);
        manifest.write(&mut w)?;
        w.flush()?;
    }
    result
}

fn create(path: &Path, manifest: &mut RunManifest) -> CliResult<BufWriter<File>> {
    manifest.outputs.push(path.to_path_buf());
    Ok(BufWriter::new(File::create(path)?))
}

fn print_report(pairs: &[(String, String)], csv: bool) -> CliResult<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if csv {
        let (h, r) = key_values_csv_row(pairs);
        writeln!(out, "{h}\n{r}")?;
    } else {
        write_key_values(&mut out, pairs)?;
    }
    Ok(())
}

fn kv(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

fn opt_usize(x: Option<usize>) -> String {
    x.map_or_else(|| "none".to_string(), |v| v.to_string())
}

fn series_period(series: &OrbitSeries) -> CliResult<Option<usize>> {
    let max_period = DEFAULT_MAX_PERIOD.min(series.len() / 3);
    if max_period == 0 {
        return Ok(None);
    }
    Ok(detect_period(series, max_period, DEFAULT_PERIOD_TOL)?)
}

pub fn simulate(a: SimulateArgs, argv: Vec<String>) -> CliResult<()> {
    let cfg = resolve(&a.model, a.method, true)?;
    with_manifest("simulate", argv, cfg, Some(manifest_path(&a.out)), |m| {
        m.extra.push(kv("passes", a.passes));
        m.extra.push(kv("transient", a.transient));
        let series = simulate_orbit(cfg.inlet0, &cfg.params, &cfg.integrator, a.passes, a.transient)?;
        let mut w = create(&a.out, m)?;
        write_orbit_csv(&mut w, &series)?;
        w.flush()?;
        let mut w = create(&a.out.with_extension("meta"), m)?;
        write_key_values(&mut w, &orbit_meta(&series))?;
        w.flush()?;
        if let Some(path) = &a.profile {
            let mut pc = cfg.integrator;
            pc.record_profile = true;
            let pass = integrate_pass(series.final_inlet, &cfg.params, &pc)?;
            let mut w = create(path, m)?;
            write_profile_csv(&mut w, pass.profile.as_deref().unwrap_or(&[]))?;
            w.flush()?;
        }
        let last = series.samples.last().expect("passes >= 1");
        print_report(
            &[
                kv("passes", a.passes),
                kv("transient", a.transient),
                kv("last_alpha_out", fmt_f64(last.alpha)),
                kv("last_theta_out", fmt_f64(last.theta)),
                kv("period", opt_usize(series_period(&series)?)),
            ],
            false,
        )
    })
}

pub fn lyapunov(a: LyapunovArgs, argv: Vec<String>) -> CliResult<()> {
    let cfg = resolve(&a.model, None, false)?;
    with_manifest("lyapunov", argv, cfg, a.out.as_deref().map(manifest_path), |m| {
        m.extra.push(kv("estimator", a.method));
        m.extra.push(kv("passes", a.passes));
        m.extra.push(kv("transient", a.transient));
        let (p, ic) = (&cfg.params, &cfg.integrator);
        let est = match a.method {
            LyapunovMethod::Variational => lyapunov_variational(p, ic, cfg.inlet0, a.transient, a.passes)?,
            LyapunovMethod::BenettinRenorm => {
                m.extra.push(kv("d0", fmt_f64(a.d0)));
                lyapunov_benettin(p, ic, cfg.inlet0, a.transient, a.passes, a.d0)?
            }
        };
        if let Some(path) = &a.out {
            let mut w = create(path, m)?;
            write_lyapunov_csv(&mut w, &est)?;
            w.flush()?;
        }
        print_report(
            &[
                kv("method", est.method),
                kv("lambda", fmt_f64(est.lambda)),
                kv("std_error", fmt_f64(est.std_error)),
                kv("n_passes", est.n_passes_used),
                kv("transient", a.transient),
            ],
            false,
        )
    })
}

fn burst_config(d: &BurstArgs) -> BurstConfig {
    BurstConfig {
        threshold: d.threshold,
        mad_multiplier: d.mad_multiplier,
        merge_gap: d.merge_gap,
    }
}

/// Outlet series from `--from-csv` or from a fresh simulation.
fn load_or_simulate(
    from_csv: Option<&Path>,
    cfg: &RunConfig,
    passes: usize,
    transient: usize,
    m: &mut RunManifest,
) -> CliResult<OrbitSeries> {
    match from_csv {
        Some(path) => {
            m.extra.push(kv("from_csv", path.display()));
            let f = File::open(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            Ok(read_orbit_csv(BufReader::new(f))?)
        }
        None => {
            m.extra.push(kv("passes", passes));
            m.extra.push(kv("transient", transient));
            Ok(simulate_orbit(
                cfg.inlet0,
                &cfg.params,
                &cfg.integrator,
                passes,
                transient,
            )?)
        }
    }
}

fn burst_report(b: &BurstEventSet, n_samples: usize) -> Vec<(String, String)> {
    vec![
        kv("samples", n_samples),
        kv("threshold", fmt_f64(b.threshold_used)),
        kv("n_events", b.events.len()),
        kv("mean_interval", fmt_f64(b.mean_interval())),
        kv("median_interval", fmt_f64(b.median_interval())),
        kv("modal_interval", opt_usize(b.modal_interval())),
        kv("cv", fmt_f64(b.cv)),
    ]
}

pub fn bursts(a: BurstsArgs, argv: Vec<String>) -> CliResult<()> {
    let cfg = resolve(&a.model, a.method, a.from_csv.is_none())?;
    with_manifest("bursts", argv, cfg, Some(manifest_path(&a.out)), |m| {
        let series = load_or_simulate(a.from_csv.as_deref(), &cfg, a.passes, a.transient, m)?;
        let b = detect_bursts(&series, &burst_config(&a.detector))?;
        let mut w = create(&a.out, m)?;
        write_bursts_csv(&mut w, &b)?;
        w.flush()?;
        print_report(&burst_report(&b, series.len()), false)
    })
}

pub fn poincare(a: PoincareArgs, argv: Vec<String>) -> CliResult<()> {
    let cfg = resolve(&a.model, a.method, a.from_csv.is_none())?;
    with_manifest("poincare", argv, cfg, Some(manifest_path(&a.out)), |m| {
        let series = load_or_simulate(a.from_csv.as_deref(), &cfg, a.passes, a.transient, m)?;
        let pairs = if a.peaks {
            burst_delay_map(&detect_bursts(&series, &burst_config(&a.detector))?)?
        } else {
            delay_map(&series.thetas())
        };
        let mut w = create(&a.out, m)?;
        write_delay_map_csv(&mut w, &pairs)?;
        w.flush()?;
        print_report(
            &[
                kv("pairs", pairs.len()),
                kv("distinct_at_1e-6", distinct_points(&pairs, 1e-6)),
            ],
            false,
        )
    })
}

pub fn sweep(a: SweepArgs, argv: Vec<String>) -> CliResult<()> {
    let (plan_from_file, base) = match &a.plan {
        Some(path) => {
            let (plan, cfg) = parse_plan(&read_text(path)?)?;
            (Some(plan), cfg)
        }
        None => (None, RunConfig::default()),
    };
    let cfg = resolve_onto(base, &a.model, a.method, false)?;
    let values = match (&a.grid, &a.values) {
        (Some(_), Some(_)) => return Err(CliError::Usage("give either --grid or --values".into())),
        (Some(g), None) => Some(parse_grid(g)?),
        (None, Some(v)) => Some(parse_value_list(v)?),
        (None, None) => None,
    };
    let mut plan = match (plan_from_file, values) {
        (Some(mut p), v) => {
            if let Some(v) = v {
                p.values = v;
            }
            p
        }
        (None, Some(v)) => SweepPlan::new("theta_h", v),
        (None, None) => return Err(CliError::Usage("--grid, --values or --plan is required".into())),
    };
    if let Some(p) = &a.param {
        plan.target_param = p.clone();
    }
    if let Some(t) = a.transient {
        plan.n_transient = t;
    }
    if let Some(r) = a.record {
        plan.n_record = r;
    }
    if a.cold {
        plan.continuation = false;
    }
    if let Some(c) = a.chunk_size {
        plan.chunk_size = c;
    }
    plan.lyapunov |= a.lyapunov;
    if let Some(n) = a.lyapunov_passes {
        plan.lyapunov_passes = n;
    }
    plan.regime |= a.regime;
    plan.inlet0 = cfg.inlet0;
    plan.validate()?;

    with_manifest("sweep", argv, cfg, Some(manifest_path(&a.out)), |m| {
        m.extra.push(kv("param", &plan.target_param));
        m.extra.push(kv("transient", plan.n_transient));
        m.extra.push(kv("record", plan.n_record));
        m.extra.push(kv("continuation", plan.continuation));
        m.extra.push(kv("chunk_size", plan.chunk_size));
        let table = run_sweep(&plan, &cfg.params, &cfg.integrator)?;
        let mut w = create(&a.out, m)?;
        write_sweep_csv(&mut w, &table)?;
        w.flush()?;
        let mut w = create(&a.summary_out, m)?;
        write_sweep_summary_csv(&mut w, &table)?;
        w.flush()?;
        if plan.lyapunov {
            let mut w = create(&a.lambda_out, m)?;
            write_lambda_sweep_csv(&mut w, &table)?;
            w.flush()?;
        }
        let errors = table.points.iter().filter(|p| p.error.is_some()).count();
        if errors > 0 {
            eprintln!(
                "warning: {errors} sweep point(s) failed; see {}",
                a.summary_out.display()
            );
        }
        print_report(&[kv("points", table.points.len()), kv("failed_points", errors)], false)
    })
}

pub fn classify(a: ClassifyArgs) -> CliResult<()> {
    let cfg = resolve(&a.model, a.method, false)?;
    let r = classify_regime(&cfg.params, &cfg.integrator, cfg.inlet0, a.passes)?;
    if let Some(path) = &a.windows_out {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "window_start,lambda")?;
        for (s, l) in &r.lambda_windows {
            writeln!(w, "{s},{}", fmt_f64(*l))?;
        }
        w.flush()?;
    }
    let mut pairs = vec![
        kv("label", r.label),
        kv("theta_h", fmt_f64(cfg.params.theta_h)),
        kv("passes", a.passes),
        kv("lambda", fmt_f64(r.lambda_full.lambda)),
        kv("std_error", fmt_f64(r.lambda_full.std_error)),
        kv("lambda_pos_tol", fmt_f64(r.lambda_pos_tol)),
        kv("period", opt_usize(r.period)),
        kv("transition_pass", opt_usize(r.transition_pass)),
        kv("windows", r.lambda_windows.len()),
    ];
    if let Some(b) = &r.bursts {
        pairs.extend([
            kv("n_bursts", b.events.len()),
            kv("mean_interval", fmt_f64(b.mean_interval())),
            kv("cv", fmt_f64(b.cv)),
        ]);
    }
    print_report(&pairs, a.csv)
}

pub fn bracket(a: BracketArgs) -> CliResult<()> {
    let cfg = resolve(&a.model, a.method, false)?;
    let b = bracket_regime_boundary(
        &cfg.params,
        &cfg.integrator,
        &a.param,
        a.lo,
        a.hi,
        chaos_predicate(cfg.inlet0, a.transient, a.passes),
    )?;
    if let Some(path) = &a.log_out {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "lo,hi,mid,chaotic")?;
        for s in &b.log {
            writeln!(w, "{},{},{},{}", fmt_f64(s.lo), fmt_f64(s.hi), fmt_f64(s.mid), s.value)?;
        }
        w.flush()?;
    }
    print_report(
        &[
            kv("param", &a.param),
            kv("lo", fmt_f64(b.lo)),
            kv("hi", fmt_f64(b.hi)),
            kv("boundary", fmt_f64(b.midpoint())),
            kv("chaotic_at_lo", b.value_lo),
            kv("chaotic_at_hi", b.value_hi),
            kv("iterations", b.log.len()),
        ],
        false,
    )
}
