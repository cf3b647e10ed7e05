//! Regime classification and transient-chaos changepoint detection.

use std::fmt;

use nalgebra::Matrix2;

use super::bursts::{detect_bursts, BurstConfig, BurstEventSet};
use super::lyapunov::{tangent_log_rates, windowed_from_jacobians, LyapunovEstimate, LyapunovMethod};
use crate::dynamics::{
    detect_period, recycle_step_with_tangent, OrbitSeries, Sample, DEFAULT_MAX_PERIOD, DEFAULT_PERIOD_TOL,
};
use crate::error::{Error, Result};
use crate::integrator::IntegratorConfig;
use crate::model::{ReactorParams, State};

/// Burst-interval coefficient of variation below which intermittency is regular.
pub const REGULARITY_CV: f64 = 0.1;
/// λ is significant when it exceeds this many standard errors.
pub const LAMBDA_TOL_SE: f64 = 3.0;
/// Fraction of pre-transition windows that must be positive.
pub const TRANSITION_POSITIVE_FRACTION: f64 = 0.75;
pub const DEFAULT_WINDOW: usize = 500;
pub const DEFAULT_STRIDE: usize = 500;
pub const MIN_BUDGET: usize = 10_000;
/// Non-positive windows needed after a changepoint before it counts as transient chaos.
const MIN_WINDOWS_AFTER: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeLabel {
    Steady,
    Periodic(usize),
    Chaotic,
    IntermittentRegular,
    IntermittentIrregular,
    TransientChaotic,
    Inconclusive,
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegimeLabel::Steady => f.write_str("steady"),
            RegimeLabel::Periodic(q) => write!(f, "periodic({q})"),
            RegimeLabel::Chaotic => f.write_str("chaotic"),
            RegimeLabel::IntermittentRegular => f.write_str("intermittent_regular"),
            RegimeLabel::IntermittentIrregular => f.write_str("intermittent_irregular"),
            RegimeLabel::TransientChaotic => f.write_str("transient_chaotic"),
            RegimeLabel::Inconclusive => f.write_str("inconclusive"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub label: RegimeLabel,
    /// Variational estimate over the second half of the budget.
    pub lambda_full: LyapunovEstimate,
    pub lambda_pos_tol: f64,
    pub lambda_windows: Vec<(usize, f64)>,
    pub transition_pass: Option<usize>,
    /// Period of the second half of the orbit, if any.
    pub period: Option<usize>,
    /// Bursts in the second half of the orbit.
    pub bursts: Option<BurstEventSet>,
}

/// Earliest window start after which every window λ is ≤ 0 and before which at
/// least 75% of windows have λ > 0. `None` for fewer than four windows.
pub fn detect_transition(lambda_windows: &[(usize, f64)]) -> Option<usize> {
    let n = lambda_windows.len();
    if n < 4 {
        return None;
    }
    // suffix_ok[i]: all windows from i on are non-positive
    let mut suffix_ok = vec![true; n + 1];
    for i in (0..n).rev() {
        suffix_ok[i] = suffix_ok[i + 1] && lambda_windows[i].1 <= 0.0;
    }
    let mut positive = 0usize;
    for i in 1..n {
        if lambda_windows[i - 1].1 > 0.0 {
            positive += 1;
        }
        if suffix_ok[i] && positive as f64 >= TRANSITION_POSITIVE_FRACTION * i as f64 {
            return Some(lambda_windows[i].0);
        }
    }
    None
}

/// Classifies the long-time behaviour of the orbit from `inlet0` over `budget`
/// passes. The first half of the budget is treated as transient for the
/// period, burst and λ tests; the windowed scan covers the whole orbit.
pub fn classify_regime(
    p: &ReactorParams,
    cfg: &IntegratorConfig,
    inlet0: State,
    budget: usize,
) -> Result<RegimeReport> {
    p.validate()?;
    cfg.validate()?;
    if budget < MIN_BUDGET {
        return Err(Error::InvalidParameter(format!(
            "budget must be >= {MIN_BUDGET}, got {budget}"
        )));
    }
    let mut s = inlet0;
    let mut samples = Vec::with_capacity(budget);
    let mut jacs: Vec<Matrix2<f64>> = Vec::with_capacity(budget);
    for k in 1..=budget {
        let (next, out, j) = recycle_step_with_tangent(s, p, cfg).map_err(|e| e.at_pass(k))?;
        samples.push(Sample {
            k,
            alpha: out.alpha,
            theta: out.theta,
        });
        jacs.push(j);
        s = next;
    }

    let half = budget / 2;
    let lambda_windows = windowed_from_jacobians(&jacs, DEFAULT_WINDOW, DEFAULT_STRIDE)?;
    let rates = tangent_log_rates(&jacs, 0)?;
    let lambda_full = LyapunovEstimate::from_local_rates(&rates[half..], LyapunovMethod::Variational);
    let lambda_pos_tol = LAMBDA_TOL_SE * lambda_full.std_error;

    let tail = OrbitSeries {
        params: *p,
        cfg: *cfg,
        inlet0,
        samples: samples.split_off(half),
        transient_discarded: half,
        final_inlet: s,
    };
    let max_period = DEFAULT_MAX_PERIOD.min(tail.len() / 3);
    let period = detect_period(&tail, max_period, DEFAULT_PERIOD_TOL)?;
    let transition_pass = detect_transition(&lambda_windows);
    let bursts = detect_bursts(&tail, &BurstConfig::default()).ok();

    let windows_after = transition_pass.map_or(0, |t| lambda_windows.iter().filter(|w| w.0 >= t).count());
    let label = match period {
        Some(1) => RegimeLabel::Steady,
        Some(q) => RegimeLabel::Periodic(q),
        None if windows_after >= MIN_WINDOWS_AFTER => RegimeLabel::TransientChaotic,
        None if lambda_full.lambda > lambda_pos_tol => match &bursts {
            Some(b) if b.intervals.len() >= 2 && b.cv < REGULARITY_CV => RegimeLabel::IntermittentRegular,
            Some(b) if b.intervals.len() >= 2 => RegimeLabel::IntermittentIrregular,
            _ => RegimeLabel::Chaotic,
        },
        None => RegimeLabel::Inconclusive,
    };
    Ok(RegimeReport {
        label,
        lambda_full,
        lambda_pos_tol,
        lambda_windows,
        transition_pass,
        period,
        bursts,
    })
}
