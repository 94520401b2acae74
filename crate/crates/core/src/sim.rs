//! Time-domain sampling of the constant-speed motion with the three forces
//! acting on the block in every frame.

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::FrictionSpec;
use crate::planar::{Ramp2D, Vec2};
use crate::ramp3d::{e3, FieldError, SpaceCurve3D, Vec3};

pub const DEFAULT_FPS: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("frame rate must be finite and positive, got {0}")]
    BadFps(f64),
    #[error("time span [{0}, {1}] must be finite with 0 <= start <= end")]
    BadSpan(f64, f64),
    #[error("motion starts outside the ramp at s = {0}")]
    StartOutsideDomain(f64),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame<const D: usize> {
    pub t: f64,
    #[serde(with = "array")]
    pub position: [f64; D],
    #[serde(with = "array")]
    pub velocity: [f64; D],
    #[serde(with = "array")]
    pub gravity_force: [f64; D],
    #[serde(with = "array")]
    pub normal_force: [f64; D],
    #[serde(with = "array")]
    pub friction_force: [f64; D],
    /// Norm of gravity + normal + friction - m beta''.
    pub residual: f64,
}

/// `[f64; D]` as a JSON list; serde has no impl for arrays of generic length.
mod array {
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer, const D: usize>(v: &[f64; D], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter())
    }

    pub fn deserialize<'de, De: Deserializer<'de>, const D: usize>(
        d: De,
    ) -> Result<[f64; D], De::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        let n = v.len();
        v.try_into()
            .map_err(|_| De::Error::custom(format!("expected {D} components, got {n}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionTrace<const D: usize> {
    pub spec: FrictionSpec,
    pub fps: f64,
    pub t_span: (f64, f64),
    /// Set when the requested span ran past the end of the ramp; frames stop
    /// at the last time still on the ramp.
    pub truncated: bool,
    pub frames: Vec<Frame<D>>,
}

pub type Trace2D = MotionTrace<2>;
pub type Trace3D = MotionTrace<3>;

fn frame_times(t_span: (f64, f64), fps: f64) -> Result<Vec<f64>, SimError> {
    if !(fps.is_finite() && fps > 0.0) {
        return Err(SimError::BadFps(fps));
    }
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite() && t0 >= 0.0 && t1 >= t0) {
        return Err(SimError::BadSpan(t0, t1));
    }
    // guard against products such as 0.1 * 30 landing just below an integer
    let count = ((t1 - t0) * fps + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| t0 + k as f64 / fps).collect())
}

fn on_ramp(s: f64, (lo, hi): (f64, f64)) -> bool {
    let slack = 1e-12 * s.abs().max(1.0);
    s >= lo - slack && s <= hi + slack
}

/// Frames of `beta(t) = gamma(v t)` on a planar ramp at `fps` frames per
/// second, starting at `t_span.0`.
pub fn simulate_2d(
    spec: &FrictionSpec,
    ramp: &Ramp2D,
    t_span: (f64, f64),
    fps: f64,
) -> Result<Trace2D, SimError> {
    let times = frame_times(t_span, fps)?;
    let (m, g, v, mu) = (spec.m(), spec.g(), spec.v(), spec.mu());
    let domain = ramp.domain();
    if !on_ramp(v * times[0], domain) {
        return Err(SimError::StartOutsideDomain(v * times[0]));
    }
    let gravity = Vec2::new(0.0, -m * g);
    let mut frames = Vec::with_capacity(times.len());
    let mut truncated = false;
    for t in times {
        let s = v * t;
        if !on_ramp(s, domain) {
            truncated = true;
            break;
        }
        let tangent = ramp.tangent(s);
        let unit = tangent / tangent.norm();
        let n = ramp.normal(s);
        let accel = ramp.second_derivative(s) * (v * v);
        let lambda = ramp
            .claimed_normal_force(m, g, s)
            .unwrap_or_else(|| (accel * m - gravity).dot(&n));
        let normal_force = n * lambda;
        let friction_force = unit * (-mu * lambda);
        let residual = (gravity + normal_force + friction_force - accel * m).norm();
        frames.push(Frame {
            t,
            position: ramp.position(s).into(),
            velocity: (tangent * v).into(),
            gravity_force: gravity.into(),
            normal_force: normal_force.into(),
            friction_force: friction_force.into(),
            residual,
        });
    }
    if truncated {
        warn!(
            "motion leaves the ramp before t = {}; trace truncated",
            t_span.1
        );
    }
    Ok(MotionTrace {
        spec: *spec,
        fps,
        t_span,
        truncated,
        frames,
    })
}

/// Frames of `beta(t) = alpha(v t)` on a spatial ramp.
pub fn simulate_3d(
    spec: &FrictionSpec,
    curve: &SpaceCurve3D,
    t_span: (f64, f64),
    fps: f64,
) -> Result<Trace3D, SimError> {
    let times = frame_times(t_span, fps)?;
    let (m, g, v, mu) = (spec.m(), spec.g(), spec.v(), spec.mu());
    let domain = (0.0, curve.s_max());
    if !on_ramp(v * times[0], domain) {
        return Err(SimError::StartOutsideDomain(v * times[0]));
    }
    let gravity = e3() * (-m * g);
    let field = curve.field();
    let mut frames = Vec::with_capacity(times.len());
    let mut truncated = false;
    for t in times {
        let s = v * t;
        if !on_ramp(s, domain) {
            truncated = true;
            break;
        }
        let gamma = curve.tangent(s);
        let lambda = -m * g * gamma.z / mu;
        let normal_force: Vec3 = field.eval(&gamma)? * lambda;
        let friction_force = gamma * (-mu * lambda);
        let accel = curve.tangent_rate(s)? * (v * v);
        let residual = (gravity + normal_force + friction_force - accel * m).norm();
        frames.push(Frame {
            t,
            position: curve.position(s).into(),
            velocity: (gamma * v).into(),
            gravity_force: gravity.into(),
            normal_force: normal_force.into(),
            friction_force: friction_force.into(),
            residual,
        });
    }
    if truncated {
        warn!(
            "motion leaves the ramp before t = {}; trace truncated",
            t_span.1
        );
    }
    Ok(MotionTrace {
        spec: *spec,
        fps,
        t_span,
        truncated,
        frames,
    })
}
