//! The recycle boundary map and the discrete-time system it induces.
//!
//! The map acts on inlet states: integrate one pass, then mix the outlet with
//! fresh feed (`alpha = theta = 0`) in the ratio `f : 1 - f`. Outlet samples
//! are what gets reported.

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::integrator::{integrate_pass, integrate_pass_with_tangent, IntegratorConfig};
use crate::model::{ReactorParams, State};

/// Default sup-norm tolerance for period detection.
pub const DEFAULT_PERIOD_TOL: f64 = 1e-9;
/// Default longest period searched for.
pub const DEFAULT_MAX_PERIOD: usize = 2048;

/// Inlet boundary condition: `alpha(0) = f alpha(1)`, `theta(0) = f theta(1)`.
#[inline]
pub fn apply_recycle(outlet: State, p: &ReactorParams) -> State {
    State::new(p.f * outlet.alpha, p.f * outlet.theta)
}

/// One residence time. Returns `(next_inlet, outlet)`.
pub fn recycle_step(inlet: State, p: &ReactorParams, cfg: &IntegratorConfig) -> Result<(State, State)> {
    let outlet = integrate_pass(inlet, p, cfg)?.outlet;
    Ok((apply_recycle(outlet, p), outlet))
}

/// One residence time with the Jacobian of the inlet-to-inlet map (`f * J_pass`).
pub fn recycle_step_with_tangent(
    inlet: State,
    p: &ReactorParams,
    cfg: &IntegratorConfig,
) -> Result<(State, State, Matrix2<f64>)> {
    let r = integrate_pass_with_tangent(inlet, p, cfg)?;
    let jac = r.tangent.expect("tangent requested") * p.f;
    Ok((apply_recycle(r.outlet, p), r.outlet, jac))
}

/// Outlet values at the end of pass `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    /// Pass index; pass `k` ends at dimensionless time `tau = k`.
    pub k: usize,
    pub alpha: f64,
    pub theta: f64,
}

impl Sample {
    pub fn state(&self) -> State {
        State::new(self.alpha, self.theta)
    }
}

/// Outlet time series sampled once per residence time.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSeries {
    pub params: ReactorParams,
    pub cfg: IntegratorConfig,
    pub inlet0: State,
    /// Consecutive passes, no gaps.
    pub samples: Vec<Sample>,
    pub transient_discarded: usize,
    /// Inlet state after the last recorded pass; continuing from here extends
    /// the orbit seamlessly.
    pub final_inlet: State,
}

impl OrbitSeries {
    /// Wraps externally produced outlet samples (e.g. read back from CSV).
    pub fn from_samples(samples: Vec<Sample>) -> Self {
        OrbitSeries {
            params: ReactorParams::default(),
            cfg: IntegratorConfig::default(),
            inlet0: State::default(),
            transient_discarded: samples.first().map_or(0, |s| s.k.saturating_sub(1)),
            samples,
            final_inlet: State::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.theta).collect()
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.alpha).collect()
    }
}

/// Runs `n_transient + n_passes` passes from `inlet0` and keeps the last
/// `n_passes` outlet samples.
pub fn simulate_orbit(
    inlet0: State,
    p: &ReactorParams,
    cfg: &IntegratorConfig,
    n_passes: usize,
    n_transient: usize,
) -> Result<OrbitSeries> {
    p.validate()?;
    cfg.validate()?;
    if n_passes == 0 {
        return Err(Error::InvalidParameter("n_passes must be >= 1".into()));
    }
    let mut s = inlet0;
    for k in 1..=n_transient {
        s = recycle_step(s, p, cfg).map_err(|e| e.at_pass(k))?.0;
    }
    let mut samples = Vec::with_capacity(n_passes);
    for k in n_transient + 1..=n_transient + n_passes {
        let (next, out) = recycle_step(s, p, cfg).map_err(|e| e.at_pass(k))?;
        samples.push(Sample {
            k,
            alpha: out.alpha,
            theta: out.theta,
        });
        s = next;
    }
    Ok(OrbitSeries {
        params: *p,
        cfg: *cfg,
        inlet0,
        samples,
        transient_discarded: n_transient,
        final_inlet: s,
    })
}

/// A fixed point of the inlet map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    pub state: State,
    /// Spectral radius of the map Jacobian `f * J_pass` at the fixed point.
    pub spectral_radius: f64,
    pub stable: bool,
    pub iterations: usize,
}

/// Largest eigenvalue modulus of a real 2x2 matrix.
pub fn spectral_radius(m: &Matrix2<f64>) -> f64 {
    let tr = m.trace();
    let det = m.determinant();
    let disc = tr * tr / 4.0 - det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        (tr / 2.0 + r).abs().max((tr / 2.0 - r).abs())
    } else {
        // complex pair: |lambda|^2 = det
        det.sqrt()
    }
}

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_TOL: f64 = 1e-12;

/// Damped Newton iteration on `G(s) = step(s) - s`.
pub fn find_fixed_point(p: &ReactorParams, cfg: &IntegratorConfig, guess: State) -> Result<FixedPoint> {
    p.validate()?;
    let residual = |s: State| -> Result<(State, f64)> {
        let (next, _) = recycle_step(s, p, cfg)?;
        let g = State::new(next.alpha - s.alpha, next.theta - s.theta);
        Ok((g, g.alpha.abs().max(g.theta.abs())))
    };

    let mut s = guess;
    let mut last_norm = f64::INFINITY;
    for it in 0..NEWTON_MAX_ITER {
        let (next, _, jac) = recycle_step_with_tangent(s, p, cfg)?;
        let g = State::new(next.alpha - s.alpha, next.theta - s.theta);
        let norm = g.alpha.abs().max(g.theta.abs());
        last_norm = norm;
        if norm < NEWTON_TOL {
            let rho = spectral_radius(&jac);
            return Ok(FixedPoint {
                state: s,
                spectral_radius: rho,
                stable: rho < 1.0,
                iterations: it,
            });
        }
        let dg = jac - Matrix2::identity();
        let Some(inv) = dg.try_inverse() else {
            return Err(Error::NoConvergence {
                iterations: it,
                residual: norm,
            });
        };
        let dx = inv * nalgebra::Vector2::new(-g.alpha, -g.theta);

        // backtrack until the residual decreases (or the step becomes tiny)
        let mut lambda = 1.0;
        loop {
            let trial = State::new(s.alpha + lambda * dx[0], s.theta + lambda * dx[1]);
            match residual(trial) {
                Ok((_, n)) if n < norm || lambda < 1e-4 => {
                    s = trial;
                    break;
                }
                _ if lambda < 1e-4 => {
                    return Err(Error::NoConvergence {
                        iterations: it,
                        residual: norm,
                    })
                }
                _ => lambda *= 0.5,
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: NEWTON_MAX_ITER,
        residual: last_norm,
    })
}

/// Smallest period `q <= max_period` of the tail of an orbit, if any.
///
/// Lag `q` is accepted when `|x_k - x_{k-q}|_inf < tol` for every `k` among
/// the last `2 * max_period` samples. Using the same test window for every
/// `q` keeps long laminar phases from being mistaken for short periods and
/// makes the answer monotone: if `q` qualifies then so does every multiple of
/// `q` up to `max_period` (up to `tol` accumulation).
pub fn detect_period(series: &OrbitSeries, max_period: usize, tol: f64) -> Result<Option<usize>> {
    let pts: Vec<State> = series.samples.iter().map(Sample::state).collect();
    detect_period_in(&pts, max_period, tol)
}

/// [`detect_period`] over a raw slice of states.
pub fn detect_period_in(points: &[State], max_period: usize, tol: f64) -> Result<Option<usize>> {
    if max_period == 0 {
        return Err(Error::InvalidParameter("max_period must be >= 1".into()));
    }
    let needed = 3 * max_period;
    if points.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            got: points.len(),
        });
    }
    let n = points.len();
    let start = n - 2 * max_period;
    let found = (1..=max_period).find(|&q| (start..n).all(|k| points[k].sup_dist(&points[k - q]) < tol));
    Ok(found)
}
