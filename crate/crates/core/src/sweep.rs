//! One-parameter sweeps: attractor samples for bifurcation diagrams, λ curves
//! and regime maps, plus bisection of regime boundaries.
//!
//! The grid is cut into contiguous chunks of `chunk_size` points. Within a
//! chunk each point starts from the previous point's final inlet state
//! (continuation); every chunk starts from the plan's initial condition.
//! Chunks run in parallel on the current rayon pool and are reassembled in
//! grid order, so the output does not depend on the number of threads.

use rayon::prelude::*;

use crate::analysis::lyapunov::{lyapunov_variational, LyapunovEstimate, TANGENT_WARMUP};
use crate::analysis::regime::{classify_regime, RegimeLabel};
use crate::dynamics::{detect_period_in, simulate_orbit, DEFAULT_PERIOD_TOL};
use crate::error::{Error, Result};
use crate::integrator::IntegratorConfig;
use crate::model::{ReactorParams, State};

pub const DEFAULT_N_RECORD: usize = 200;
pub const DEFAULT_N_TRANSIENT: usize = 3000;
pub const DEFAULT_CHUNK_SIZE: usize = 64;
pub const DEFAULT_LYAPUNOV_PASSES: usize = 5000;
pub const DEFAULT_REGIME_BUDGET: usize = 10_000;
/// Bisection stops once the bracket is at most this wide.
pub const BRACKET_WIDTH: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum SweepValues {
    List(Vec<f64>),
    /// `count` evenly spaced values from `lo` to `hi` inclusive.
    Grid {
        lo: f64,
        hi: f64,
        count: usize,
    },
}

impl SweepValues {
    pub fn expand(&self) -> Result<Vec<f64>> {
        let values = match *self {
            SweepValues::List(ref v) => v.clone(),
            SweepValues::Grid { lo, hi, count } => {
                if count < 2 {
                    return Err(Error::InvalidParameter(format!("grid count must be >= 2, got {count}")));
                }
                let step = (hi - lo) / (count - 1) as f64;
                (0..count)
                    .map(|i| if i + 1 == count { hi } else { lo + step * i as f64 })
                    .collect()
            }
        };
        if values.is_empty() {
            return Err(Error::InvalidParameter("sweep has no values".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("sweep values must be finite".into()));
        }
        let up = values.windows(2).all(|w| w[1] > w[0]);
        let down = values.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::InvalidParameter("sweep values must be strictly monotone".into()));
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub target_param: String,
    pub values: SweepValues,
    pub n_transient: usize,
    pub n_record: usize,
    pub lyapunov: bool,
    pub lyapunov_passes: usize,
    pub regime: bool,
    pub regime_budget: usize,
    pub continuation: bool,
    pub chunk_size: usize,
    pub inlet0: State,
}

impl SweepPlan {
    pub fn new(target_param: &str, values: SweepValues) -> Self {
        SweepPlan {
            target_param: target_param.to_string(),
            values,
            n_transient: DEFAULT_N_TRANSIENT,
            n_record: DEFAULT_N_RECORD,
            lyapunov: false,
            lyapunov_passes: DEFAULT_LYAPUNOV_PASSES,
            regime: false,
            regime_budget: DEFAULT_REGIME_BUDGET,
            continuation: true,
            chunk_size: DEFAULT_CHUNK_SIZE,
            inlet0: State::default(),
        }
    }

    pub fn validate(&self) -> Result<Vec<f64>> {
        ReactorParams::default().get(&self.target_param)?;
        if self.n_record == 0 {
            return Err(Error::InvalidParameter("n_record must be >= 1".into()));
        }
        if self.chunk_size == 0 {
            return Err(Error::InvalidParameter("chunk_size must be >= 1".into()));
        }
        self.values.expand()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub param_value: f64,
    /// Last `n_record` outlet temperatures.
    pub thetas: Vec<f64>,
    /// Period of the recorded samples, searched up to `n_record / 3`.
    pub period: Option<usize>,
    pub lyapunov: Option<LyapunovEstimate>,
    pub regime: Option<RegimeLabel>,
    pub final_inlet: State,
    pub error: Option<String>,
}

impl SweepPoint {
    /// Spread of the attractor samples (max - min); NaN for error rows.
    pub fn theta_range(&self) -> f64 {
        if self.thetas.is_empty() {
            return f64::NAN;
        }
        let (lo, hi) = self
            .thetas
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| {
                (lo.min(t), hi.max(t))
            });
        hi - lo
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub target_param: String,
    pub points: Vec<SweepPoint>,
}

fn run_point(
    plan: &SweepPlan,
    p_base: &ReactorParams,
    cfg: &IntegratorConfig,
    index: usize,
    value: f64,
    start: State,
) -> Result<SweepPoint> {
    let mut p = *p_base;
    p.set(&plan.target_param, value)?;
    let orbit = simulate_orbit(start, &p, cfg, plan.n_record, plan.n_transient)?;
    let states: Vec<State> = orbit.samples.iter().map(|s| s.state()).collect();
    let max_period = plan.n_record / 3;
    let period = if max_period >= 1 {
        detect_period_in(&states, max_period, DEFAULT_PERIOD_TOL)?
    } else {
        None
    };
    let lyapunov = if plan.lyapunov {
        Some(lyapunov_variational(
            &p,
            cfg,
            orbit.final_inlet,
            TANGENT_WARMUP,
            plan.lyapunov_passes,
        )?)
    } else {
        None
    };
    let regime = if plan.regime {
        Some(classify_regime(&p, cfg, orbit.final_inlet, plan.regime_budget)?.label)
    } else {
        None
    };
    Ok(SweepPoint {
        index,
        param_value: value,
        thetas: orbit.thetas(),
        period,
        lyapunov,
        regime,
        final_inlet: orbit.final_inlet,
        error: None,
    })
}

fn run_chunk(
    plan: &SweepPlan,
    p_base: &ReactorParams,
    cfg: &IntegratorConfig,
    first: usize,
    values: &[f64],
) -> Vec<SweepPoint> {
    let mut start = plan.inlet0;
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let index = first + i;
            match run_point(plan, p_base, cfg, index, v, start) {
                Ok(pt) => {
                    start = if plan.continuation { pt.final_inlet } else { plan.inlet0 };
                    pt
                }
                Err(e) => {
                    start = plan.inlet0;
                    SweepPoint {
                        index,
                        param_value: v,
                        thetas: Vec::new(),
                        period: None,
                        lyapunov: None,
                        regime: None,
                        final_inlet: plan.inlet0,
                        error: Some(e.to_string()),
                    }
                }
            }
        })
        .collect()
}

/// Runs the plan on the current rayon pool. Failed points become rows with
/// `error` set and the sweep carries on.
pub fn run_sweep(plan: &SweepPlan, p_base: &ReactorParams, cfg: &IntegratorConfig) -> Result<SweepTable> {
    let values = plan.validate()?;
    p_base.validate()?;
    cfg.validate()?;
    let chunks: Vec<(usize, &[f64])> = values
        .chunks(plan.chunk_size)
        .enumerate()
        .map(|(c, vs)| (c * plan.chunk_size, vs))
        .collect();
    let points: Vec<SweepPoint> = chunks
        .par_iter()
        .map(|&(first, vs)| run_chunk(plan, p_base, cfg, first, vs))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    Ok(SweepTable {
        target_param: plan.target_param.clone(),
        points,
    })
}

/// Symmetric Hausdorff distance between two finite sets of reals.
pub fn hausdorff(a: &[f64], b: &[f64]) -> f64 {
    fn directed(a: &[f64], sorted_b: &[f64]) -> f64 {
        a.iter()
            .map(|&x| {
                let i = sorted_b.partition_point(|&y| y < x);
                let right = sorted_b.get(i).map_or(f64::INFINITY, |&y| y - x);
                let left = if i > 0 { x - sorted_b[i - 1] } else { f64::INFINITY };
                left.min(right)
            })
            .fold(0.0, f64::max)
    }
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() {
            0.0
        } else {
            f64::INFINITY
        };
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    directed(a, &sb).max(directed(b, &sa))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketStep {
    pub lo: f64,
    pub hi: f64,
    pub mid: f64,
    pub value: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub value_lo: bool,
    pub value_hi: bool,
    pub log: Vec<BracketStep>,
}

impl Bracket {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Bisects `param_name` on `[lo, hi]` until the bracket is at most
/// [`BRACKET_WIDTH`] wide, keeping a point of each predicate value.
pub fn bracket_regime_boundary<F>(
    p_base: &ReactorParams,
    cfg: &IntegratorConfig,
    param_name: &str,
    lo: f64,
    hi: f64,
    predicate: F,
) -> Result<Bracket>
where
    F: Fn(&ReactorParams, &IntegratorConfig) -> Result<bool>,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidParameter(format!(
            "need finite lo < hi, got [{lo}, {hi}]"
        )));
    }
    let eval = |x: f64| -> Result<bool> {
        let mut p = *p_base;
        p.set(param_name, x)?;
        predicate(&p, cfg)
    };
    let (mut a, mut b) = (lo, hi);
    let va = eval(a)?;
    let vb = eval(b)?;
    if va == vb {
        return Err(Error::SamePredicate { lo, hi, value: va });
    }
    let mut log = Vec::new();
    while b - a > BRACKET_WIDTH {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let v = eval(mid)?;
        log.push(BracketStep {
            lo: a,
            hi: b,
            mid,
            value: v,
        });
        if v == va {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(Bracket {
        lo: a,
        hi: b,
        value_lo: va,
        value_hi: vb,
        log,
    })
}

/// Predicate "λ exceeds three standard errors" for [`bracket_regime_boundary`].
pub fn chaos_predicate(
    inlet0: State,
    n_transient: usize,
    n_passes: usize,
) -> impl Fn(&ReactorParams, &IntegratorConfig) -> Result<bool> {
    move |p, cfg| {
        let est = lyapunov_variational(p, cfg, inlet0, n_transient, n_passes)?;
        Ok(est.lambda > 3.0 * est.std_error)
    }
}
