//! Flat `key = value` configuration, CSV writers/readers and run manifests.
//!
//! Floating-point output uses 17 significant digits so every value reads back
//! bit for bit. Missing values are written as `NaN`.

use std::io::{BufRead, Write};
use std::path::PathBuf;

use crate::analysis::bursts::BurstEventSet;
use crate::analysis::lyapunov::LyapunovEstimate;
use crate::dynamics::{OrbitSeries, Sample};
use crate::error::{Error, Result};
use crate::integrator::{IntegratorConfig, ProfilePoint};
use crate::model::{ReactorParams, State};
use crate::sweep::{SweepPlan, SweepTable, SweepValues};

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("not a number: `{s}`")))
}

fn parse_usize(s: &str) -> Result<usize> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| Error::Parse(format!("not a non-negative integer: `{s}`")))
}

fn parse_bool(s: &str) -> Result<bool> {
    match s.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::Parse(format!("not a boolean: `{other}`"))),
    }
}

/// Splits `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn write_key_values<W: Write>(mut w: W, pairs: &[(String, String)]) -> Result<()> {
    for (k, v) in pairs {
        writeln!(w, "{k} = {v}")?;
    }
    Ok(())
}

/// Header and value row of a single-row CSV rendering of `pairs`.
pub fn key_values_csv_row(pairs: &[(String, String)]) -> (String, String) {
    let header = pairs.iter().map(|(k, _)| k.as_str()).collect::<Vec<_>>().join(",");
    let row = pairs.iter().map(|(_, v)| v.as_str()).collect::<Vec<_>>().join(",");
    (header, row)
}

/// Model parameters, integrator settings and initial inlet state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunConfig {
    pub params: ReactorParams,
    pub integrator: IntegratorConfig,
    pub inlet0: State,
}

/// Keys written by [`RunManifest`] that carry no configuration.
const MANIFEST_ONLY_KEYS: &[&str] = &[
    "command",
    "argv",
    "version",
    "duration_s",
    "output",
    "error",
    "status",
    "transient_discarded",
    "n_samples",
    "final_alpha",
    "final_theta",
];

impl RunConfig {
    /// Applies one configuration key. Returns `false` for an unknown key.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "da" | "n" | "beta" | "gamma" | "delta" | "f" | "theta_h" => self.params.set(key, parse_f64(value)?)?,
            "kinetics_form" => self.params.kinetics_form = value.parse()?,
            "method" => self.integrator.method = value.parse()?,
            "steps_per_pass" | "steps" => self.integrator.steps_per_pass = parse_usize(value)?,
            "alpha0" => self.inlet0.alpha = parse_f64(value)?,
            "theta0" => self.inlet0.theta = parse_f64(value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// Reads a config file. Unknown keys are errors except manifest metadata.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (k, v) in parse_key_values(text)? {
            if !cfg.apply(&k, &v)? && !MANIFEST_ONLY_KEYS.contains(&k.as_str()) && !k.starts_with("extra.") {
                return Err(Error::Parse(format!("unknown configuration key `{k}`")));
            }
        }
        cfg.params.validate()?;
        cfg.integrator.validate()?;
        Ok(cfg)
    }

    pub fn to_key_values(&self) -> Vec<(String, String)> {
        let p = &self.params;
        vec![
            ("da".into(), fmt_f64(p.da)),
            ("n".into(), fmt_f64(p.n)),
            ("beta".into(), fmt_f64(p.beta)),
            ("gamma".into(), fmt_f64(p.gamma)),
            ("delta".into(), fmt_f64(p.delta)),
            ("f".into(), fmt_f64(p.f)),
            ("theta_h".into(), fmt_f64(p.theta_h)),
            ("kinetics_form".into(), p.kinetics_form.to_string()),
            ("method".into(), self.integrator.method.to_string()),
            ("steps_per_pass".into(), self.integrator.steps_per_pass.to_string()),
            ("alpha0".into(), fmt_f64(self.inlet0.alpha)),
            ("theta0".into(), fmt_f64(self.inlet0.theta)),
        ]
    }
}

/// Parses `lo:hi:count`.
pub fn parse_grid(s: &str) -> Result<SweepValues> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!("grid must be `lo:hi:count`, got `{s}`")));
    }
    Ok(SweepValues::Grid {
        lo: parse_f64(parts[0])?,
        hi: parse_f64(parts[1])?,
        count: parse_usize(parts[2])?,
    })
}

/// Parses a comma-separated value list.
pub fn parse_value_list(s: &str) -> Result<SweepValues> {
    Ok(SweepValues::List(s.split(',').map(parse_f64).collect::<Result<_>>()?))
}

/// Reads a sweep plan file: model/integrator keys plus `param`, `grid` or
/// `values`, `transient`, `record`, `continuation`, `chunk_size`,
/// `lyapunov`, `lyapunov_passes`, `regime`, `regime_budget`.
pub fn parse_plan(text: &str) -> Result<(SweepPlan, RunConfig)> {
    let mut cfg = RunConfig::default();
    let mut param: Option<String> = None;
    let mut values: Option<SweepValues> = None;
    let mut rest = Vec::new();
    for (k, v) in parse_key_values(text)? {
        match k.as_str() {
            "param" => param = Some(v),
            "grid" => values = Some(parse_grid(&v)?),
            "values" => values = Some(parse_value_list(&v)?),
            _ => {
                if !cfg.apply(&k, &v)? {
                    rest.push((k, v));
                }
            }
        }
    }
    let param = param.ok_or_else(|| Error::Parse("plan needs `param`".into()))?;
    let values = values.ok_or_else(|| Error::Parse("plan needs `grid` or `values`".into()))?;
    let mut plan = SweepPlan::new(&param, values);
    plan.inlet0 = cfg.inlet0;
    for (k, v) in rest {
        match k.as_str() {
            "transient" => plan.n_transient = parse_usize(&v)?,
            "record" => plan.n_record = parse_usize(&v)?,
            "continuation" => plan.continuation = parse_bool(&v)?,
            "chunk_size" => plan.chunk_size = parse_usize(&v)?,
            "lyapunov" => plan.lyapunov = parse_bool(&v)?,
            "lyapunov_passes" => plan.lyapunov_passes = parse_usize(&v)?,
            "regime" => plan.regime = parse_bool(&v)?,
            "regime_budget" => plan.regime_budget = parse_usize(&v)?,
            other => return Err(Error::Parse(format!("unknown plan key `{other}`"))),
        }
    }
    plan.validate()?;
    cfg.params.validate()?;
    cfg.integrator.validate()?;
    Ok((plan, cfg))
}

pub fn write_orbit_csv<W: Write>(mut w: W, series: &OrbitSeries) -> Result<()> {
    writeln!(w, "k,alpha_out,theta_out")?;
    for s in &series.samples {
        writeln!(w, "{},{},{}", s.k, fmt_f64(s.alpha), fmt_f64(s.theta))?;
    }
    Ok(())
}

/// Sidecar metadata for an orbit CSV.
pub fn orbit_meta(series: &OrbitSeries) -> Vec<(String, String)> {
    let mut kv = RunConfig {
        params: series.params,
        integrator: series.cfg,
        inlet0: series.inlet0,
    }
    .to_key_values();
    kv.push(("version".into(), env!("CARGO_PKG_VERSION").to_string()));
    kv.push(("transient_discarded".into(), series.transient_discarded.to_string()));
    kv.push(("n_samples".into(), series.len().to_string()));
    kv.push(("final_alpha".into(), fmt_f64(series.final_inlet.alpha)));
    kv.push(("final_theta".into(), fmt_f64(series.final_inlet.theta)));
    kv
}

fn split_header(line: &str) -> Vec<String> {
    line.split(',').map(|c| c.trim().to_string()).collect()
}

/// Reads an outlet series. The header must name a pass column `k` and a
/// temperature column `theta_out` (or `theta`); `alpha_out` (or `alpha`) is
/// optional and defaults to 0.
pub fn read_orbit_csv<R: BufRead>(r: R) -> Result<OrbitSeries> {
    let mut lines = r.lines();
    let header = split_header(&lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))??);
    let find = |names: &[&str]| header.iter().position(|h| names.contains(&h.as_str()));
    let ik = find(&["k"]).ok_or_else(|| Error::Parse("CSV needs a `k` column".into()))?;
    let it = find(&["theta_out", "theta"]).ok_or_else(|| Error::Parse("CSV needs a `theta_out` column".into()))?;
    let ia = find(&["alpha_out", "alpha"]);
    let mut samples = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        let get = |i: usize| {
            cols.get(i)
                .copied()
                .ok_or_else(|| Error::Parse(format!("row {}: missing column {}", n + 2, i + 1)))
        };
        samples.push(Sample {
            k: parse_usize(get(ik)?)?,
            alpha: match ia {
                Some(i) => parse_f64(get(i)?)?,
                None => 0.0,
            },
            theta: parse_f64(get(it)?)?,
        });
    }
    Ok(OrbitSeries::from_samples(samples))
}

pub fn write_profile_csv<W: Write>(mut w: W, profile: &[ProfilePoint]) -> Result<()> {
    writeln!(w, "zeta,alpha,theta")?;
    for p in profile {
        writeln!(w, "{},{},{}", fmt_f64(p.zeta), fmt_f64(p.alpha), fmt_f64(p.theta))?;
    }
    Ok(())
}

pub fn write_bursts_csv<W: Write>(mut w: W, bursts: &BurstEventSet) -> Result<()> {
    writeln!(w, "k_peak,peak_theta,width,interval_to_next")?;
    for (i, e) in bursts.events.iter().enumerate() {
        let next = bursts
            .intervals
            .get(i)
            .map_or_else(|| "NaN".to_string(), |d| d.to_string());
        writeln!(w, "{},{},{},{}", e.k_peak, fmt_f64(e.peak_theta), e.width, next)?;
    }
    Ok(())
}

pub fn write_lyapunov_csv<W: Write>(mut w: W, est: &LyapunovEstimate) -> Result<()> {
    writeln!(w, "n,running_lambda")?;
    for (i, l) in est.convergence_trace.iter().enumerate() {
        writeln!(w, "{},{}", i + 1, fmt_f64(*l))?;
    }
    Ok(())
}

pub fn write_delay_map_csv<W: Write>(mut w: W, pairs: &[(f64, f64)]) -> Result<()> {
    writeln!(w, "x_k,x_k1")?;
    for (a, b) in pairs {
        writeln!(w, "{},{}", fmt_f64(*a), fmt_f64(*b))?;
    }
    Ok(())
}

/// Long-format attractor samples; a failed point is one `NaN` row.
pub fn write_sweep_csv<W: Write>(mut w: W, table: &SweepTable) -> Result<()> {
    writeln!(w, "param_value,sample_index,theta_out")?;
    for pt in &table.points {
        let v = fmt_f64(pt.param_value);
        if pt.error.is_some() {
            writeln!(w, "{v},0,NaN")?;
        }
        for (i, t) in pt.thetas.iter().enumerate() {
            writeln!(w, "{v},{i},{}", fmt_f64(*t))?;
        }
    }
    Ok(())
}

pub fn write_lambda_sweep_csv<W: Write>(mut w: W, table: &SweepTable) -> Result<()> {
    writeln!(w, "param_value,lambda,n_passes")?;
    for pt in &table.points {
        let (l, n) = pt
            .lyapunov
            .as_ref()
            .map_or((f64::NAN, 0), |e| (e.lambda, e.n_passes_used));
        writeln!(w, "{},{},{}", fmt_f64(pt.param_value), fmt_f64(l), n)?;
    }
    Ok(())
}

/// Per-point summary: period, attractor range, regime label and errors.
pub fn write_sweep_summary_csv<W: Write>(mut w: W, table: &SweepTable) -> Result<()> {
    writeln!(w, "param_value,period,theta_range,regime,error")?;
    for pt in &table.points {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_f64(pt.param_value),
            pt.period.map_or_else(|| "NaN".to_string(), |q| q.to_string()),
            fmt_f64(pt.theta_range()),
            pt.regime.map_or_else(String::new, |r| r.to_string()),
            pt.error.as_deref().unwrap_or("").replace(',', ";"),
        )?;
    }
    Ok(())
}

/// What a CLI run did, written next to its outputs even when it fails.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub config: RunConfig,
    pub outputs: Vec<PathBuf>,
    pub version: String,
    pub duration_s: f64,
    pub error: Option<String>,
    /// Command-specific settings (passes, transient, ...).
    pub extra: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(command: &str, argv: Vec<String>, config: RunConfig) -> Self {
        RunManifest {
            command: command.to_string(),
            argv,
            config,
            outputs: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            duration_s: 0.0,
            error: None,
            extra: Vec::new(),
        }
    }

    pub fn to_key_values(&self) -> Vec<(String, String)> {
        let mut kv = vec![
            ("command".to_string(), self.command.clone()),
            ("argv".to_string(), self.argv.join(" ")),
            ("version".to_string(), self.version.clone()),
            (
                "status".to_string(),
                if self.error.is_some() { "failed" } else { "ok" }.to_string(),
            ),
        ];
        kv.extend(self.config.to_key_values());
        kv.extend(self.extra.iter().map(|(k, v)| (format!("extra.{k}"), v.clone())));
        kv.extend(
            self.outputs
                .iter()
                .map(|p| ("output".to_string(), p.display().to_string())),
        );
        kv.push(("duration_s".to_string(), format!("{:.3}", self.duration_s)));
        if let Some(e) = &self.error {
            kv.push(("error".to_string(), e.replace('\n', " ")));
        }
        kv
    }

    pub fn write<W: Write>(&self, w: W) -> Result<()> {
        write_key_values(w, &self.to_key_values())
    }
}
