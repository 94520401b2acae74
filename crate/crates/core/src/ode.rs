//! Tangent-angle ODE `theta'(s) = -a sin(theta + delta)` and the explicit
//! integrators used as an independent check on its closed-form solution.
//!
//! The integrators are generic over [`OdeState`] so the same RK4 stepper
//! drives both the scalar angle equation and the hemisphere flow in
//! [`crate::ramp3d`].

use std::ops::{Add, Mul};

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::FrictionSpec;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error("invalid integration span [{start}, {end}]")]
    BadSpan { start: f64, end: f64 },
    #[error("invalid integrator configuration: {0}")]
    BadConfig(&'static str),
    #[error("step size underflow at s = {s} (h = {h})")]
    StepUnderflow { s: f64, h: f64 },
    #[error("exceeded {0} integration steps")]
    TooManySteps(usize),
}

/// State vector an explicit Runge-Kutta scheme can advance.
pub trait OdeState: Copy + Add<Output = Self> + Mul<f64, Output = Self> {
    /// Max-norm, used for adaptive error control.
    fn max_abs(&self) -> f64;
}

impl OdeState for f64 {
    fn max_abs(&self) -> f64 {
        self.abs()
    }
}

impl OdeState for Vector2<f64> {
    fn max_abs(&self) -> f64 {
        self.amax()
    }
}

impl OdeState for Vector3<f64> {
    fn max_abs(&self) -> f64 {
        self.amax()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Classical fixed-step fourth-order Runge-Kutta.
    Rk4,
    /// Dormand-Prince 5(4) with step-size control.
    Rk45,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// Fixed step for RK4, initial step for RK45.
    pub step: f64,
    pub method: Method,
    /// Local error tolerance (RK45 only).
    pub tolerance: f64,
    pub max_steps: usize,
}

impl IntegratorConfig {
    pub fn rk4(step: f64) -> Self {
        IntegratorConfig {
            step,
            method: Method::Rk4,
            tolerance: 1e-10,
            max_steps: 10_000_000,
        }
    }

    pub fn rk45(initial_step: f64, tolerance: f64) -> Self {
        IntegratorConfig {
            step: initial_step,
            method: Method::Rk45,
            tolerance,
            max_steps: 10_000_000,
        }
    }

    /// RK4 with `h = 1e-3 / a`.
    pub fn default_for(spec: &FrictionSpec) -> Self {
        Self::rk4(1e-3 / spec.a())
    }

    pub fn validate(&self) -> Result<(), IntegrationError> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(IntegrationError::BadConfig("step must be positive"));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(IntegrationError::BadConfig("tolerance must be positive"));
        }
        if self.max_steps == 0 {
            return Err(IntegrationError::BadConfig("max_steps must be positive"));
        }
        Ok(())
    }
}

/// One classical RK4 step.
pub fn rk4_step<S, F>(f: &F, s: f64, y: S, h: f64) -> S
where
    S: OdeState,
    F: Fn(f64, S) -> S,
{
    let half = 0.5 * h;
    let k1 = f(s, y);
    let k2 = f(s + half, y + k1 * half);
    let k3 = f(s + half, y + k2 * half);
    let k4 = f(s + h, y + k3 * h);
    y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Sampled solution with cubic Hermite dense output.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSolution<S> {
    pub s: Vec<f64>,
    pub y: Vec<S>,
    pub dy: Vec<S>,
}

impl<S: OdeState> DenseSolution<S> {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn span(&self) -> (f64, f64) {
        (self.s[0], self.s[self.s.len() - 1])
    }

    pub fn last(&self) -> S {
        self.y[self.y.len() - 1]
    }

    /// Interpolated value; clamps to the end points outside the span.
    pub fn eval(&self, s: f64) -> S {
        let n = self.s.len();
        if s <= self.s[0] {
            return self.y[0];
        }
        if s >= self.s[n - 1] {
            return self.y[n - 1];
        }
        let i = self.s.partition_point(|&x| x <= s) - 1;
        hermite(
            self.s[i],
            self.s[i + 1],
            self.y[i],
            self.y[i + 1],
            self.dy[i],
            self.dy[i + 1],
            s,
        )
    }
}

pub(crate) fn hermite<S: OdeState>(s0: f64, s1: f64, y0: S, y1: S, d0: S, d1: S, s: f64) -> S {
    let h = s1 - s0;
    let t = (s - s0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    y0 * h00 + d0 * (h10 * h) + y1 * h01 + d1 * (h11 * h)
}

fn check_span(span: (f64, f64)) -> Result<(), IntegrationError> {
    let (start, end) = span;
    if start.is_finite() && end.is_finite() && end > start {
        Ok(())
    } else {
        Err(IntegrationError::BadSpan { start, end })
    }
}

/// Number of equal RK4 steps covering `length` with steps no larger than
/// `h` (up to rounding in the ratio).
pub(crate) fn step_count(length: f64, h: f64) -> usize {
    ((length / h) - 1e-9).ceil().max(1.0) as usize
}

/// Fixed-step RK4 over `span`. The step is shrunk slightly if needed so the
/// last step lands exactly on the end of the span.
pub fn integrate_rk4<S, F>(
    f: F,
    y0: S,
    span: (f64, f64),
    h: f64,
) -> Result<DenseSolution<S>, IntegrationError>
where
    S: OdeState,
    F: Fn(f64, S) -> S,
{
    check_span(span)?;
    let n = step_count(span.1 - span.0, h);
    let h = (span.1 - span.0) / n as f64;
    let mut out = DenseSolution {
        s: Vec::with_capacity(n + 1),
        y: Vec::with_capacity(n + 1),
        dy: Vec::with_capacity(n + 1),
    };
    let mut y = y0;
    for i in 0..=n {
        let s = if i == n {
            span.1
        } else {
            span.0 + i as f64 * h
        };
        out.s.push(s);
        out.y.push(y);
        out.dy.push(f(s, y));
        if i < n {
            y = rk4_step(&f, s, y, h);
        }
    }
    Ok(out)
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Adaptive Dormand-Prince integration with per-step error
/// `|err| <= tol * (1 + |y|)`.
pub fn integrate_rk45<S, F>(
    f: F,
    y0: S,
    span: (f64, f64),
    config: &IntegratorConfig,
) -> Result<DenseSolution<S>, IntegrationError>
where
    S: OdeState,
    F: Fn(f64, S) -> S,
{
    check_span(span)?;
    config.validate()?;
    let (start, end) = span;
    let min_step = 1e-14 * (end - start).max(start.abs()).max(end.abs()).max(1.0);
    let mut s = start;
    let mut y = y0;
    let mut k1 = f(s, y);
    let mut h = config.step.min(end - start);
    let mut out = DenseSolution {
        s: vec![s],
        y: vec![y],
        dy: vec![k1],
    };
    let mut steps = 0usize;
    while s < end {
        if steps >= config.max_steps {
            return Err(IntegrationError::TooManySteps(config.max_steps));
        }
        steps += 1;
        let last = s + h >= end;
        if last {
            h = end - s;
        }
        let k2 = f(s + C2 * h, y + k1 * (A21 * h));
        let k3 = f(s + C3 * h, y + (k1 * A31 + k2 * A32) * h);
        let k4 = f(s + C4 * h, y + (k1 * A41 + k2 * A42 + k3 * A43) * h);
        let k5 = f(
            s + C5 * h,
            y + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * h,
        );
        let k6 = f(
            s + h,
            y + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * h,
        );
        let y_new = y + (k1 * B1 + k3 * B3 + k4 * B4 + k5 * B5 + k6 * B6) * h;
        let k7 = f(s + h, y_new);
        let err_vec = (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * h;
        let scale = config.tolerance * (1.0 + y.max_abs().max(y_new.max_abs()));
        let err = err_vec.max_abs() / scale;
        if err <= 1.0 {
            s = if last { end } else { s + h };
            y = y_new;
            k1 = k7;
            out.s.push(s);
            out.y.push(y);
            out.dy.push(k1);
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if s < end && h < min_step {
            return Err(IntegrationError::StepUnderflow { s, h });
        }
    }
    Ok(out)
}

/// Integrates `f` with the configured method.
pub fn integrate<S, F>(
    f: F,
    y0: S,
    span: (f64, f64),
    config: &IntegratorConfig,
) -> Result<DenseSolution<S>, IntegrationError>
where
    S: OdeState,
    F: Fn(f64, S) -> S,
{
    config.validate()?;
    match config.method {
        Method::Rk4 => integrate_rk4(f, y0, span, config.step),
        Method::Rk45 => integrate_rk45(f, y0, span, config),
    }
}

/// The representative closed-form solution
/// `theta(s) = -delta + 2 atan(e^(-as))`; every other solution on the same
/// orbit is a parameter shift of this one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaSolution {
    spec: FrictionSpec,
    shift: f64,
}

impl ThetaSolution {
    pub fn new(spec: FrictionSpec) -> Self {
        ThetaSolution { spec, shift: 0.0 }
    }

    /// The solution `s -> theta(s + c)`.
    pub fn shifted(&self, c: f64) -> Self {
        ThetaSolution {
            shift: self.shift + c,
            ..*self
        }
    }

    pub fn spec(&self) -> &FrictionSpec {
        &self.spec
    }

    pub fn theta(&self, s: f64) -> f64 {
        theta_closed_form(&self.spec, s + self.shift)
    }

    /// Analytic derivative `-a sech(a s)`.
    pub fn derivative(&self, s: f64) -> f64 {
        let a = self.spec.a();
        -a / (a * (s + self.shift)).cosh()
    }
}

pub fn theta_closed_form(spec: &FrictionSpec, s: f64) -> f64 {
    -spec.delta() + 2.0 * (-spec.a() * s).exp().atan()
}

/// Right-hand side `-a sin(theta + delta)`.
pub fn theta_ode_rhs(spec: &FrictionSpec, theta: f64) -> f64 {
    -spec.a() * (theta + spec.delta()).sin()
}

pub fn integrate_theta(
    spec: &FrictionSpec,
    theta0: f64,
    s_span: (f64, f64),
    config: &IntegratorConfig,
) -> Result<DenseSolution<f64>, IntegrationError> {
    integrate(|_, th| theta_ode_rhs(spec, th), theta0, s_span, config)
}

/// Normal force `-m g cot(delta) sin(theta)` implied by the tangential
/// balance. Negative values mean the block would have to sit on the other
/// side of the track.
pub fn lambda_from_theta(spec: &FrictionSpec, theta: f64) -> f64 {
    -spec.m() * spec.g() * theta.sin() / spec.delta().tan()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaSample {
    pub s: f64,
    pub theta: f64,
    pub theta_closed: f64,
    pub abs_err: f64,
}

/// Pairs an integrated angle profile with the closed form shifted to agree
/// at the start of the span.
pub fn compare_with_closed_form(
    solution: &DenseSolution<f64>,
    reference: &ThetaSolution,
) -> Vec<ThetaSample> {
    solution
        .s
        .iter()
        .zip(&solution.y)
        .map(|(&s, &theta)| {
            let closed = reference.theta(s);
            ThetaSample {
                s,
                theta,
                theta_closed: closed,
                abs_err: (theta - closed).abs(),
            }
        })
        .collect()
}

/// Shift `c` such that `theta_closed(c) = theta`, for `theta` strictly
/// inside `(-delta, pi - delta)`.
pub fn shift_for_angle(spec: &FrictionSpec, theta: f64) -> f64 {
    -(((theta + spec.delta()) / 2.0).tan()).ln() / spec.a()
}
