//! Fixed-step integration of one pass through the tube (`zeta` from 0 to 1).
//!
//! The tangent matrix is obtained by applying the same explicit Runge-Kutta
//! scheme to the augmented system `(state, M)` with `dM/dtau = A(state) M`.
//! For explicit schemes this yields exactly the Jacobian of the discrete
//! pass map, so state and tangent stay consistent at any step size.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::model::{kinetic_rate_and_jacobian, rhs, ReactorParams, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Euler,
    Rk4,
    /// Kutta's 3/8-rule fourth-order scheme (Simpson 3/8 quadrature weights).
    Rk38,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Euler => "euler",
            Method::Rk4 => "rk4",
            Method::Rk38 => "rk38",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "euler" => Ok(Method::Euler),
            "rk4" => Ok(Method::Rk4),
            "rk38" | "simpson" => Ok(Method::Rk38),
            other => Err(Error::Parse(format!("unknown integration method `{other}`"))),
        }
    }
}

/// Explicit Butcher tableau with at most four stages.
struct Tableau {
    stages: usize,
    a: [[f64; 4]; 4],
    b: [f64; 4],
}

const EULER: Tableau = Tableau {
    stages: 1,
    a: [[0.0; 4]; 4],
    b: [1.0, 0.0, 0.0, 0.0],
};

const RK4: Tableau = Tableau {
    stages: 4,
    a: [
        [0.0, 0.0, 0.0, 0.0],
        [0.5, 0.0, 0.0, 0.0],
        [0.0, 0.5, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
    ],
    b: [1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
};

const RK38: Tableau = Tableau {
    stages: 4,
    a: [
        [0.0, 0.0, 0.0, 0.0],
        [1.0 / 3.0, 0.0, 0.0, 0.0],
        [-1.0 / 3.0, 1.0, 0.0, 0.0],
        [1.0, -1.0, 1.0, 0.0],
    ],
    b: [1.0 / 8.0, 3.0 / 8.0, 3.0 / 8.0, 1.0 / 8.0],
};

impl Method {
    fn tableau(self) -> &'static Tableau {
        match self {
            Method::Euler => &EULER,
            Method::Rk4 => &RK4,
            Method::Rk38 => &RK38,
        }
    }

    /// Nominal order of accuracy.
    pub fn order(self) -> u32 {
        match self {
            Method::Euler => 1,
            Method::Rk4 | Method::Rk38 => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Number of fixed steps per pass; the step is `1 / steps_per_pass`.
    pub steps_per_pass: usize,
    /// Keep the spatial profile at every step point.
    pub record_profile: bool,
}

impl IntegratorConfig {
    pub fn new(method: Method, steps_per_pass: usize) -> Self {
        IntegratorConfig {
            method,
            steps_per_pass,
            record_profile: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps_per_pass == 0 {
            return Err(Error::InvalidParameter("steps_per_pass must be >= 1".into()));
        }
        Ok(())
    }
}

/// Forward Euler with 1000 steps per pass. Regime boundaries of the recycle map
/// shift by several 1e-6 in Θ_H between this and the converged flow; the
/// documented regime points refer to this discretization.
impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig::new(Method::Euler, 1000)
    }
}

/// One point of the spatial profile inside the tube.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub zeta: f64,
    pub alpha: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PassResult {
    /// State at `zeta = 1`.
    pub outlet: State,
    /// `steps_per_pass + 1` points from inlet to outlet, when requested.
    pub profile: Option<Vec<ProfilePoint>>,
    /// `d outlet / d inlet`, when requested.
    pub tangent: Option<Matrix2<f64>>,
}

/// Linearised right-hand side `A(s)` of the variational system.
#[inline]
fn variational_matrix(s: State, p: &ReactorParams) -> Result<((f64, f64), Matrix2<f64>)> {
    let (phi, j) = kinetic_rate_and_jacobian(s, p)?;
    let f = (phi, phi + p.cooling_rate() * (p.theta_h - s.theta));
    let a = Matrix2::new(j.d_alpha, j.d_theta, j.d_alpha, j.d_theta - p.cooling_rate());
    Ok((f, a))
}

#[inline]
fn rk_step(t: &Tableau, s: State, h: f64, zeta: f64, p: &ReactorParams) -> Result<State> {
    let mut k = [(0.0, 0.0); 4];
    for i in 0..t.stages {
        let mut da = 0.0;
        let mut dt = 0.0;
        for (j, kj) in k.iter().enumerate().take(i) {
            da += t.a[i][j] * kj.0;
            dt += t.a[i][j] * kj.1;
        }
        k[i] = rhs(zeta, State::new(s.alpha + h * da, s.theta + h * dt), p)?;
    }
    let mut da = 0.0;
    let mut dt = 0.0;
    for (bi, ki) in t.b.iter().zip(&k).take(t.stages) {
        da += bi * ki.0;
        dt += bi * ki.1;
    }
    Ok(State::new(s.alpha + h * da, s.theta + h * dt))
}

#[inline]
fn rk_step_tangent(
    t: &Tableau,
    s: State,
    m: &Matrix2<f64>,
    h: f64,
    p: &ReactorParams,
) -> Result<(State, Matrix2<f64>)> {
    let mut k = [(0.0, 0.0); 4];
    let mut km = [Matrix2::zeros(); 4];
    for i in 0..t.stages {
        let mut da = 0.0;
        let mut dt = 0.0;
        let mut dm = Matrix2::zeros();
        for j in 0..i {
            da += t.a[i][j] * k[j].0;
            dt += t.a[i][j] * k[j].1;
            dm += t.a[i][j] * km[j];
        }
        let (f, a) = variational_matrix(State::new(s.alpha + h * da, s.theta + h * dt), p)?;
        k[i] = f;
        km[i] = a * (m + h * dm);
    }
    let mut da = 0.0;
    let mut dt = 0.0;
    let mut dm = Matrix2::zeros();
    for i in 0..t.stages {
        da += t.b[i] * k[i].0;
        dt += t.b[i] * k[i].1;
        dm += t.b[i] * km[i];
    }
    Ok((State::new(s.alpha + h * da, s.theta + h * dt), m + h * dm))
}

fn integrate(inlet: State, p: &ReactorParams, cfg: &IntegratorConfig, with_tangent: bool) -> Result<PassResult> {
    cfg.validate()?;
    let tab = cfg.method.tableau();
    let n = cfg.steps_per_pass;
    let h = 1.0 / n as f64;
    let mut s = inlet;
    let mut m = Matrix2::identity();
    let mut profile = cfg.record_profile.then(|| {
        let mut v = Vec::with_capacity(n + 1);
        v.push(ProfilePoint {
            zeta: 0.0,
            alpha: inlet.alpha,
            theta: inlet.theta,
        });
        v
    });

    for step in 0..n {
        if with_tangent {
            let (s1, m1) = rk_step_tangent(tab, s, &m, h, p).map_err(|e| e.at_step(step))?;
            s = s1;
            m = m1;
        } else {
            let zeta = step as f64 * h;
            s = rk_step(tab, s, h, zeta, p).map_err(|e| e.at_step(step))?;
        }
        if let Some(v) = profile.as_mut() {
            v.push(ProfilePoint {
                zeta: (step + 1) as f64 / n as f64,
                alpha: s.alpha,
                theta: s.theta,
            });
        }
    }

    if !s.is_finite() {
        return Err(Error::domain(format!("non-finite outlet state {s:?}")).at_step(n - 1));
    }

    Ok(PassResult {
        outlet: s,
        profile,
        tangent: with_tangent.then_some(m),
    })
}

/// Integrates the characteristic system over one residence time.
pub fn integrate_pass(inlet: State, p: &ReactorParams, cfg: &IntegratorConfig) -> Result<PassResult> {
    integrate(inlet, p, cfg, false)
}

/// As [`integrate_pass`], also propagating the 2x2 tangent matrix from the identity.
pub fn integrate_pass_with_tangent(inlet: State, p: &ReactorParams, cfg: &IntegratorConfig) -> Result<PassResult> {
    integrate(inlet, p, cfg, true)
}
