//! Dimensionless reactor model: parameters, kinetics and the right-hand side
//! of the balance equations along a characteristic.
//!
//! Along `d zeta / d tau = 1` the mass and heat balances reduce to
//!
//! ```text
//! d alpha / d tau = phi(alpha, theta)
//! d theta / d tau = phi(alpha, theta) + (1 - f) * delta * (theta_h - theta)
//! phi = (1 - f) * Da * (1 - alpha)^n * exp(gamma * beta * theta / (1 + beta * theta))
//! ```

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Roundoff band outside `[0, 1]` inside which `alpha` is clamped before the
/// rate is evaluated.
pub const ALPHA_CLAMP_BAND: f64 = 1e-12;

/// Which reading of the rate law to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KineticsForm {
    /// `(1 - alpha)^n`: a single n-th order reaction.
    #[default]
    Standard,
    /// `(1 - alpha) * (1 - alpha)^n`, the rate law with the extra factor kept.
    AsPrinted,
}

impl KineticsForm {
    /// Effective exponent of `(1 - alpha)` in the rate law.
    fn order(self, n: f64) -> f64 {
        match self {
            KineticsForm::Standard => n,
            KineticsForm::AsPrinted => n + 1.0,
        }
    }
}

impl fmt::Display for KineticsForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KineticsForm::Standard => "standard",
            KineticsForm::AsPrinted => "as_printed",
        })
    }
}

impl FromStr for KineticsForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "standard" => Ok(KineticsForm::Standard),
            "as_printed" | "as-printed" => Ok(KineticsForm::AsPrinted),
            other => Err(Error::Parse(format!("unknown kinetics form `{other}`"))),
        }
    }
}

/// Dimensionless model constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactorParams {
    /// Damköhler number.
    pub da: f64,
    /// Reaction order.
    pub n: f64,
    /// Dimensionless enthalpy (adiabatic temperature rise).
    pub beta: f64,
    /// Dimensionless activation energy.
    pub gamma: f64,
    /// Dimensionless heat-exchange coefficient.
    pub delta: f64,
    /// Recycle coefficient, `0 <= f < 1`.
    pub f: f64,
    /// Dimensionless coolant temperature.
    pub theta_h: f64,
    pub kinetics_form: KineticsForm,
}

impl ReactorParams {
    /// Reference operating point: `Da = 0.15, n = 1.5, beta = 2, gamma = 15,
    /// delta = 3, f = 0.5` at the given coolant temperature.
    pub fn reference(theta_h: f64) -> Self {
        ReactorParams {
            da: 0.15,
            n: 1.5,
            beta: 2.0,
            gamma: 15.0,
            delta: 3.0,
            f: 0.5,
            theta_h,
            kinetics_form: KineticsForm::Standard,
        }
    }

    /// Checks the construction-time invariants.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("da", self.da),
            ("n", self.n),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("delta", self.delta),
            ("f", self.f),
            ("theta_h", self.theta_h),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.f) {
            return Err(Error::InvalidParameter(format!(
                "recycle coefficient f must satisfy 0 <= f < 1, got {}",
                self.f
            )));
        }
        if self.n < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "reaction order n must be >= 0, got {}",
                self.n
            )));
        }
        if self.da < 0.0 {
            return Err(Error::InvalidParameter(format!("Da must be >= 0, got {}", self.da)));
        }
        if self.delta < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "delta must be >= 0, got {}",
                self.delta
            )));
        }
        Ok(())
    }

    /// `(1 - f) * delta`, the heat-exchange rate constant along the tube.
    #[inline]
    pub fn cooling_rate(&self) -> f64 {
        (1.0 - self.f) * self.delta
    }

    /// Sets a parameter by its config-file name.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "da" => self.da = value,
            "n" => self.n = value,
            "beta" => self.beta = value,
            "gamma" => self.gamma = value,
            "delta" => self.delta = value,
            "f" => self.f = value,
            "theta_h" => self.theta_h = value,
            other => return Err(Error::InvalidParameter(format!("unknown parameter `{other}`"))),
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        Ok(match name {
            "da" => self.da,
            "n" => self.n,
            "beta" => self.beta,
            "gamma" => self.gamma,
            "delta" => self.delta,
            "f" => self.f,
            "theta_h" => self.theta_h,
            other => return Err(Error::InvalidParameter(format!("unknown parameter `{other}`"))),
        })
    }
}

impl Default for ReactorParams {
    fn default() -> Self {
        ReactorParams::reference(-0.0335)
    }
}

/// Conversion degree and dimensionless temperature at one end of the tube.
///
/// As an inlet value this is the state of the discrete map.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State {
    pub alpha: f64,
    pub theta: f64,
}

impl State {
    pub const fn new(alpha: f64, theta: f64) -> Self {
        State { alpha, theta }
    }

    /// Sup-norm distance.
    #[inline]
    pub fn sup_dist(&self, other: &State) -> f64 {
        (self.alpha - other.alpha).abs().max((self.theta - other.theta).abs())
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.alpha.is_finite() && self.theta.is_finite()
    }
}

/// Partial derivatives of the rate with respect to `alpha` and `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateJacobian {
    pub d_alpha: f64,
    pub d_theta: f64,
}

#[inline]
fn clamp_alpha(alpha: f64) -> f64 {
    if alpha > 1.0 && alpha <= 1.0 + ALPHA_CLAMP_BAND {
        1.0
    } else if (-ALPHA_CLAMP_BAND..0.0).contains(&alpha) {
        0.0
    } else {
        alpha
    }
}

#[inline]
fn is_integer(x: f64) -> bool {
    x.fract() == 0.0
}

/// `(1 - alpha)^order` with the domain checks for non-integer orders.
#[inline]
fn depletion(one_minus: f64, order: f64) -> Result<f64> {
    if one_minus < 0.0 && !is_integer(order) {
        return Err(Error::domain(format!(
            "1 - alpha = {one_minus} < 0 with non-integer order {order}"
        )));
    }
    if is_integer(order) && order.abs() <= i32::MAX as f64 {
        Ok(one_minus.powi(order as i32))
    } else {
        Ok(one_minus.powf(order))
    }
}

/// Temperature factor `exp(gamma * beta * theta / (1 + beta * theta))`.
#[inline]
fn arrhenius(theta: f64, p: &ReactorParams) -> Result<(f64, f64)> {
    let denom = 1.0 + p.beta * theta;
    if denom <= 0.0 || !denom.is_finite() {
        return Err(Error::domain(format!(
            "1 + beta * theta = {denom} is not positive (theta = {theta})"
        )));
    }
    Ok(((p.gamma * p.beta * theta / denom).exp(), denom))
}

/// Reaction rate `phi(alpha, theta)`.
pub fn kinetic_rate(s: State, p: &ReactorParams) -> Result<f64> {
    let one_minus = 1.0 - clamp_alpha(s.alpha);
    let order = p.kinetics_form.order(p.n);
    let dep = depletion(one_minus, order)?;
    let (e, _) = arrhenius(s.theta, p)?;
    Ok((1.0 - p.f) * p.da * dep * e)
}

/// Rate together with its partial derivatives.
pub fn kinetic_rate_and_jacobian(s: State, p: &ReactorParams) -> Result<(f64, RateJacobian)> {
    let one_minus = 1.0 - clamp_alpha(s.alpha);
    let order = p.kinetics_form.order(p.n);
    let dep = depletion(one_minus, order)?;
    let (e, denom) = arrhenius(s.theta, p)?;
    let scale = (1.0 - p.f) * p.da;
    let phi = scale * dep * e;

    // d/d alpha (1 - alpha)^m = -m (1 - alpha)^(m - 1)
    let d_dep = if order == 0.0 {
        0.0
    } else if one_minus == 0.0 {
        if order < 1.0 {
            return Err(Error::singularity(format!(
                "d phi / d alpha is unbounded at alpha = 1 for order {order} < 1"
            )));
        } else if order == 1.0 {
            -1.0
        } else {
            0.0
        }
    } else {
        -order * depletion(one_minus, order - 1.0)?
    };

    let jac = RateJacobian {
        d_alpha: scale * d_dep * e,
        d_theta: phi * p.gamma * p.beta / (denom * denom),
    };
    Ok((phi, jac))
}

/// Partial derivatives `(d phi / d alpha, d phi / d theta)`.
pub fn kinetic_jacobian(s: State, p: &ReactorParams) -> Result<RateJacobian> {
    kinetic_rate_and_jacobian(s, p).map(|(_, j)| j)
}

/// Right-hand side along the characteristic. `_zeta` is unused; the system is
/// autonomous.
#[inline]
pub fn rhs(_zeta: f64, s: State, p: &ReactorParams) -> Result<(f64, f64)> {
    let phi = kinetic_rate(s, p)?;
    Ok((phi, phi + p.cooling_rate() * (p.theta_h - s.theta)))
}
