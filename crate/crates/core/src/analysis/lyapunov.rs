//! Largest Lyapunov exponent of the inlet map.
//!
//! Two estimators are provided:
//!
//! - variational: propagate a tangent vector through the per-pass Jacobian
//!   `f * J_pass` and renormalise it every pass;
//! - two-trajectory (Benettin): follow a shadow orbit at distance `d0`,
//!   pulling it back to `d0` along the current separation every pass.
//!
//! One pass is one unit of dimensionless time, so exponents are per pass and
//! per unit time at once.

use std::fmt;

use nalgebra::{Matrix2, Vector2};

use crate::dynamics::{recycle_step, recycle_step_with_tangent};
use crate::error::{Error, Result};
use crate::integrator::IntegratorConfig;
use crate::model::{ReactorParams, State};

/// Default initial separation of the shadow orbit.
pub const DEFAULT_D0: f64 = 1e-9;

/// Transient passes (at most) over which the tangent vector or shadow orbit
/// is carried along before averaging starts, so that it is already aligned
/// with the most expanding direction.
pub const TANGENT_WARMUP: usize = 1000;

/// Number of batches used for the batch-means standard error.
const SE_BATCHES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LyapunovMethod {
    #[default]
    Variational,
    BenettinRenorm,
}

impl fmt::Display for LyapunovMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LyapunovMethod::Variational => "variational",
            LyapunovMethod::BenettinRenorm => "benettin_renorm",
        })
    }
}

impl std::str::FromStr for LyapunovMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "variational" => Ok(LyapunovMethod::Variational),
            "benettin" | "benettin_renorm" => Ok(LyapunovMethod::BenettinRenorm),
            other => Err(Error::Parse(format!("unknown Lyapunov method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovEstimate {
    pub lambda: f64,
    pub n_passes_used: usize,
    pub method: LyapunovMethod,
    /// Running estimate after each pass; the last entry equals `lambda`.
    pub convergence_trace: Vec<f64>,
    /// Batch-means standard error of the per-pass log stretching rates.
    pub std_error: f64,
}

impl LyapunovEstimate {
    pub(crate) fn from_local_rates(local: &[f64], method: LyapunovMethod) -> Self {
        let mut sum = 0.0;
        let convergence_trace: Vec<f64> = local
            .iter()
            .enumerate()
            .map(|(i, r)| {
                sum += r;
                sum / (i + 1) as f64
            })
            .collect();
        LyapunovEstimate {
            lambda: *convergence_trace.last().unwrap_or(&f64::NAN),
            n_passes_used: local.len(),
            method,
            convergence_trace,
            std_error: batch_standard_error(local),
        }
    }
}

/// Standard error of the mean of a correlated sequence by non-overlapping
/// batch means.
pub fn batch_standard_error(xs: &[f64]) -> f64 {
    let batches = SE_BATCHES.min(xs.len() / 2);
    if batches < 2 {
        return f64::NAN;
    }
    let size = xs.len() / batches;
    let means: Vec<f64> = xs
        .chunks_exact(size)
        .take(batches)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (var / batches as f64).sqrt()
}

fn initial_direction() -> Vector2<f64> {
    Vector2::new(1.0, 1.0) / 2f64.sqrt()
}

/// Per-pass log stretching rates of a tangent vector renormalised every pass.
///
/// `pass_offset` only labels errors.
pub fn tangent_log_rates(jacobians: &[Matrix2<f64>], pass_offset: usize) -> Result<Vec<f64>> {
    let mut v = initial_direction();
    let mut rates = Vec::with_capacity(jacobians.len());
    for (i, j) in jacobians.iter().enumerate() {
        let w = j * v;
        let g = w.norm();
        if g == 0.0 || !g.is_finite() {
            return Err(Error::DegenerateTangent {
                pass: pass_offset + i + 1,
            });
        }
        rates.push(g.ln());
        v = w / g;
    }
    Ok(rates)
}

/// Advances `inlet0` by `n` passes.
pub(crate) fn advance(inlet0: State, p: &ReactorParams, cfg: &IntegratorConfig, n: usize) -> Result<State> {
    let mut s = inlet0;
    for k in 1..=n {
        s = recycle_step(s, p, cfg).map_err(|e| e.at_pass(k))?.0;
    }
    Ok(s)
}

/// Map Jacobians `f * J_pass` along `n_passes` passes starting from `inlet`.
/// Returns the Jacobians and the inlet state after the last pass.
pub fn orbit_jacobians(
    inlet: State,
    p: &ReactorParams,
    cfg: &IntegratorConfig,
    n_passes: usize,
    pass_offset: usize,
) -> Result<(Vec<Matrix2<f64>>, State)> {
    let mut s = inlet;
    let mut jacs = Vec::with_capacity(n_passes);
    for k in 1..=n_passes {
        let (next, _, j) = recycle_step_with_tangent(s, p, cfg).map_err(|e| e.at_pass(pass_offset + k))?;
        jacs.push(j);
        s = next;
    }
    Ok((jacs, s))
}

/// Largest exponent from the tangent (variational) system.
pub fn lyapunov_variational(
    p: &ReactorParams,
    cfg: &IntegratorConfig,
    inlet0: State,
    n_transient: usize,
    n_passes: usize,
) -> Result<LyapunovEstimate> {
    p.validate()?;
    if n_passes < 100 {
        return Err(Error::InvalidParameter(format!(
            "n_passes must be >= 100, got {n_passes}"
        )));
    }
    let warm = n_transient.min(TANGENT_WARMUP);
    let mut s = advance(inlet0, p, cfg, n_transient - warm)?;
    let mut v = initial_direction();
    for k in n_transient - warm + 1..=n_transient {
        let (next, _, j) = recycle_step_with_tangent(s, p, cfg).map_err(|e| e.at_pass(k))?;
        let w = j * v;
        let g = w.norm();
        if g == 0.0 || !g.is_finite() {
            return Err(Error::DegenerateTangent { pass: k });
        }
        v = w / g;
        s = next;
    }
    let mut rates = Vec::with_capacity(n_passes);
    for k in 1..=n_passes {
        let pass = n_transient + k;
        let (next, _, j) = recycle_step_with_tangent(s, p, cfg).map_err(|e| e.at_pass(pass))?;
        let w = j * v;
        let g = w.norm();
        if g == 0.0 || !g.is_finite() {
            return Err(Error::DegenerateTangent { pass });
        }
        rates.push(g.ln());
        v = w / g;
        s = next;
    }
    Ok(LyapunovEstimate::from_local_rates(&rates, LyapunovMethod::Variational))
}

/// Largest exponent from two nearby trajectories with renormalisation.
pub fn lyapunov_benettin(
    p: &ReactorParams,
    cfg: &IntegratorConfig,
    inlet0: State,
    n_transient: usize,
    n_passes: usize,
    d0: f64,
) -> Result<LyapunovEstimate> {
    p.validate()?;
    if !(1e-12..=1e-6).contains(&d0) {
        return Err(Error::InvalidParameter(format!(
            "d0 must lie in [1e-12, 1e-6], got {d0}"
        )));
    }
    if n_passes < 100 {
        return Err(Error::InvalidParameter(format!(
            "n_passes must be >= 100, got {n_passes}"
        )));
    }
    let warm = n_transient.min(TANGENT_WARMUP);
    let mut s = advance(inlet0, p, cfg, n_transient - warm)?;
    let dir = initial_direction();
    let mut shadow = State::new(s.alpha + d0 * dir[0], s.theta + d0 * dir[1]);
    let mut rates = Vec::with_capacity(n_passes);
    for pass in n_transient - warm + 1..=n_transient + n_passes {
        s = recycle_step(s, p, cfg).map_err(|e| e.at_pass(pass))?.0;
        shadow = recycle_step(shadow, p, cfg).map_err(|e| e.at_pass(pass))?.0;
        let da = shadow.alpha - s.alpha;
        let dt = shadow.theta - s.theta;
        let d = da.hypot(dt);
        if d == 0.0 || !d.is_finite() {
            return Err(Error::DegenerateTangent { pass });
        }
        if pass > n_transient {
            rates.push((d / d0).ln());
        }
        shadow = State::new(s.alpha + d0 * da / d, s.theta + d0 * dt / d);
    }
    Ok(LyapunovEstimate::from_local_rates(
        &rates,
        LyapunovMethod::BenettinRenorm,
    ))
}

/// Finite-time exponent over successive windows of one orbit from `inlet0`.
///
/// The tangent product is restarted at each window start; the window exponent
/// is `ln(sigma_max) / window` for the largest singular value of the product
/// of the map Jacobians inside the window.
///
/// Returns `(window_start, lambda)` with `window_start` counted in passes from
/// `inlet0`.
pub fn windowed_lyapunov(
    p: &ReactorParams,
    cfg: &IntegratorConfig,
    inlet0: State,
    window: usize,
    stride: usize,
    n_passes: usize,
) -> Result<Vec<(usize, f64)>> {
    p.validate()?;
    if window < 500 {
        return Err(Error::InvalidParameter(format!("window must be >= 500, got {window}")));
    }
    if stride == 0 {
        return Err(Error::InvalidParameter("stride must be >= 1".into()));
    }
    let (jacs, _) = orbit_jacobians(inlet0, p, cfg, n_passes, 0)?;
    windowed_from_jacobians(&jacs, window, stride)
}

/// Windowed exponents from precomputed map Jacobians.
pub fn windowed_from_jacobians(jacs: &[Matrix2<f64>], window: usize, stride: usize) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::new();
    let mut start = 0;
    while start + window <= jacs.len() {
        out.push((start, finite_time_exponent(&jacs[start..start + window], start)?));
        start += stride;
    }
    Ok(out)
}

/// `ln(sigma_max(J_n ... J_1)) / n`, accumulated with renormalisation.
pub fn finite_time_exponent(jacs: &[Matrix2<f64>], pass_offset: usize) -> Result<f64> {
    let mut m = Matrix2::identity();
    let mut log_scale = 0.0;
    for (i, j) in jacs.iter().enumerate() {
        m = j * m;
        let s = m.abs().max();
        if s == 0.0 || !s.is_finite() {
            return Err(Error::DegenerateTangent {
                pass: pass_offset + i + 1,
            });
        }
        m /= s;
        log_scale += s.ln();
    }
    Ok((log_scale + largest_singular_value(&m).ln()) / jacs.len() as f64)
}

/// Largest singular value of a 2x2 matrix.
pub fn largest_singular_value(m: &Matrix2<f64>) -> f64 {
    // eigenvalues of M^T M: t/2 +- sqrt(t^2/4 - d^2)
    let t = m.norm_squared();
    let d = m.determinant();
    let disc = (t * t / 4.0 - d * d).max(0.0);
    (t / 2.0 + disc.sqrt()).sqrt()
}

/// Log sup-norm distance between the orbit from `inlet0` and the one from
/// `inlet0 + (0, epsilon)`, per pass, until the distance exceeds
/// [`SATURATION_DISTANCE`] or `n_passes` is reached.
pub fn divergence_curve(
    p: &ReactorParams,
    cfg: &IntegratorConfig,
    inlet0: State,
    epsilon: f64,
    n_passes: usize,
) -> Result<Vec<(usize, f64)>> {
    p.validate()?;
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidParameter(format!("epsilon must be > 0, got {epsilon}")));
    }
    let mut a = inlet0;
    let mut b = State::new(inlet0.alpha, inlet0.theta + epsilon);
    let mut curve = Vec::new();
    for k in 1..=n_passes {
        let (na, oa) = recycle_step(a, p, cfg).map_err(|e| e.at_pass(k))?;
        let (nb, ob) = recycle_step(b, p, cfg).map_err(|e| e.at_pass(k))?;
        let d = oa.sup_dist(&ob);
        if d == 0.0 {
            break;
        }
        curve.push((k, d.ln()));
        if d > SATURATION_DISTANCE {
            break;
        }
        a = na;
        b = nb;
    }
    Ok(curve)
}

/// Separation at which [`divergence_curve`] stops.
pub const SATURATION_DISTANCE: f64 = 0.1;

/// Least-squares slope of `y` against `x`.
pub fn least_squares_slope(points: &[(usize, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|(x, _)| *x as f64).sum::<f64>() / n;
    let my = points.iter().map(|(_, y)| *y).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (*x as f64 - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (*x as f64 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
