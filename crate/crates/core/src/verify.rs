//! Newton's-law residual checks for ramp motions.
//!
//! For a block of mass `m` moving along a ramp as `beta(t)`, the forces are
//! gravity, a normal force `lambda n` and kinetic friction `-mu lambda T`
//! opposing the motion. A motion is a solution when
//!
//! ```text
//! F + lambda n - mu lambda T = m beta''
//! ```
//!
//! holds with `lambda >= 0`. The verifiers sample that residual along a
//! constant-speed motion and classify the result.

use std::sync::Arc;

use log::debug;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::{FrictionSpec, ParamError};
use crate::planar::{Ramp2D, Vec2};
use crate::ramp3d::{
    e3, lambda_3d, Dilate, FieldError, HemispherePoint, ScaleReinterpretation, SpaceCurve3D, Vec3,
};

/// Residual tolerance for closed-form planar ramps, in newtons.
pub const TOL_RESIDUAL_2D: f64 = 1e-8;
/// Residual tolerance for integrated spatial ramps, in newtons.
pub const TOL_RESIDUAL_3D: f64 = 1e-6;
/// Slack allowed below zero for the normal force, in newtons.
pub const TOL_LAMBDA: f64 = 1e-10;

const UNIT_TANGENT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("tangent at s = {s} has length {norm}; the curve is not arc-length parametrized")]
    NonUnitTangent { s: f64, norm: f64 },
    #[error("s = {s} lies outside the curve domain [{lo}, {hi}]")]
    DomainExceeded { s: f64, lo: f64, hi: f64 },
    #[error("time span [{0}, {1}] must be finite with start <= end and start >= 0")]
    BadSpan(f64, f64),
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("scaling factor must be finite and positive, got {0}")]
    BadKappa(f64),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Param(#[from] ParamError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Valid,
    LambdaNegative,
    ResidualExceeded,
}

impl Verdict {
    pub fn is_valid(self) -> bool {
        self == Verdict::Valid
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceBalanceReport {
    pub verdict: Verdict,
    pub max_residual: f64,
    /// Largest residual component along the ramp normal.
    pub max_normal_component: f64,
    /// Largest residual component along the direction of travel.
    pub max_tangential_component: f64,
    pub lambda_min: f64,
    pub residual_tolerance: f64,
    pub lambda_tolerance: f64,
    pub spec: FrictionSpec,
    pub residual_profile: Vec<ProfilePoint>,
    pub lambda_profile: Vec<ProfilePoint>,
}

fn classify(max_residual: f64, lambda_min: f64, tol_r: f64) -> Verdict {
    if max_residual.is_nan() || max_residual > tol_r {
        Verdict::ResidualExceeded
    } else if lambda_min < -TOL_LAMBDA {
        Verdict::LambdaNegative
    } else {
        Verdict::Valid
    }
}

struct Sample {
    t: f64,
    residual: f64,
    normal: f64,
    tangential: f64,
    lambda: f64,
}

fn build_report(samples: Vec<Sample>, tol_r: f64, spec: &FrictionSpec) -> ForceBalanceReport {
    let max = |f: fn(&Sample) -> f64| samples.iter().map(f).fold(0.0, f64::max);
    let max_residual = max(|x| x.residual);
    let lambda_min = samples
        .iter()
        .map(|x| x.lambda)
        .fold(f64::INFINITY, f64::min);
    let report = ForceBalanceReport {
        verdict: classify(max_residual, lambda_min, tol_r),
        max_residual,
        max_normal_component: max(|x| x.normal.abs()),
        max_tangential_component: max(|x| x.tangential.abs()),
        lambda_min,
        residual_tolerance: tol_r,
        lambda_tolerance: TOL_LAMBDA,
        spec: *spec,
        residual_profile: samples
            .iter()
            .map(|x| ProfilePoint {
                t: x.t,
                value: x.residual,
            })
            .collect(),
        lambda_profile: samples
            .iter()
            .map(|x| ProfilePoint {
                t: x.t,
                value: x.lambda,
            })
            .collect(),
    };
    debug!(
        "verdict {:?}: max residual {:e}, lambda min {:e}",
        report.verdict, report.max_residual, report.lambda_min
    );
    report
}

fn sample_times(t_span: (f64, f64), n: usize) -> Result<Vec<f64>, VerifyError> {
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite() && t0 >= 0.0 && t1 >= t0) {
        return Err(VerifyError::BadSpan(t0, t1));
    }
    if n < 2 {
        return Err(VerifyError::TooFewSamples(n));
    }
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                t1
            } else {
                t0 + (t1 - t0) * i as f64 / (n - 1) as f64
            }
        })
        .collect())
}

fn check_domain(s: f64, (lo, hi): (f64, f64)) -> Result<(), VerifyError> {
    let slack = 1e-12 * s.abs().max(1.0);
    if s < lo - slack || s > hi + slack {
        Err(VerifyError::DomainExceeded { s, lo, hi })
    } else {
        Ok(())
    }
}

/// Verifies the constant-speed motion `beta(t) = gamma(v t)` on a planar
/// ramp under gravity `(0, -m g)`.
///
/// The normal force is the ramp's attached law when it has one; otherwise
/// it is recovered from the normal balance and only the tangential balance
/// is tested.
pub fn verify_2d(
    spec: &FrictionSpec,
    ramp: &Ramp2D,
    t_span: (f64, f64),
    n_samples: usize,
) -> Result<ForceBalanceReport, VerifyError> {
    let times = sample_times(t_span, n_samples)?;
    let (m, g, v, mu) = (spec.m(), spec.g(), spec.v(), spec.mu());
    let gravity = Vec2::new(0.0, -m * g);
    let mut samples = Vec::with_capacity(times.len());
    for t in times {
        let s = v * t;
        check_domain(s, ramp.domain())?;
        let tangent = ramp.tangent(s);
        let norm = tangent.norm();
        if (norm - 1.0).abs() > UNIT_TANGENT_TOLERANCE {
            return Err(VerifyError::NonUnitTangent { s, norm });
        }
        let normal = ramp.normal(s);
        let accel = ramp.second_derivative(s) * (v * v);
        let lambda = ramp
            .claimed_normal_force(m, g, s)
            .unwrap_or_else(|| (accel * m - gravity).dot(&normal));
        let residual = gravity + normal * lambda - tangent * (mu * lambda) - accel * m;
        samples.push(Sample {
            t,
            residual: residual.norm(),
            normal: residual.dot(&normal),
            tangential: residual.dot(&tangent),
            lambda,
        });
    }
    Ok(build_report(samples, TOL_RESIDUAL_2D, spec))
}

/// Verifies `beta(t) = alpha(v t)` on a spatial ramp with the normal force
/// `m g (-gamma_3) / mu` and surface normal `N(gamma)` from the curve's
/// generating field. `gamma'` comes from the generating vector field.
pub fn verify_3d(
    spec: &FrictionSpec,
    curve: &SpaceCurve3D,
    t_span: (f64, f64),
    n_samples: usize,
) -> Result<ForceBalanceReport, VerifyError> {
    let times = sample_times(t_span, n_samples)?;
    let (m, g, v, mu) = (spec.m(), spec.g(), spec.v(), spec.mu());
    let gravity = e3() * (-m * g);
    let field = curve.field();
    let mut samples = Vec::with_capacity(times.len());
    for t in times {
        let s = v * t;
        check_domain(s, (0.0, curve.s_max()))?;
        let gamma = curve.tangent(s);
        let norm = gamma.norm();
        if (norm - 1.0).abs() > UNIT_TANGENT_TOLERANCE {
            return Err(VerifyError::NonUnitTangent { s, norm });
        }
        let normal = field.eval(&gamma)?;
        let rate = curve.tangent_rate(s)?;
        let lambda = match HemispherePoint::new(gamma) {
            Ok(p) => lambda_3d(spec, &p),
            // above the equator the ramp would need to pull
            Err(_) => -m * g * gamma.z / mu,
        };
        let residual: Vec3 = gravity + normal * lambda - gamma * (mu * lambda) - rate * (m * v * v);
        samples.push(Sample {
            t,
            residual: residual.norm(),
            normal: residual.dot(&normal),
            tangential: residual.dot(&gamma),
            lambda,
        });
    }
    Ok(build_report(samples, TOL_RESIDUAL_3D, spec))
}

/// Geometry accepted by [`verify_scaling`].
#[derive(Debug, Clone, Copy)]
pub enum ScalingTarget<'a> {
    Planar(&'a Ramp2D),
    Space(&'a SpaceCurve3D),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub kappa: f64,
    pub reinterpretation: ScaleReinterpretation,
    /// Dilated geometry at speed `sqrt(kappa) v`.
    pub faster: ForceBalanceReport,
    /// Dilated geometry at gravity `g / kappa`.
    pub weaker_gravity: ForceBalanceReport,
}

impl ScalingReport {
    pub fn both_valid(&self) -> bool {
        self.faster.verdict.is_valid() && self.weaker_gravity.verdict.is_valid()
    }
}

/// Dilates the geometry by `kappa` and verifies it under both equivalent
/// parameter sets. `t_span` refers to the original motion; each check
/// covers the same stretch of the dilated ramp.
pub fn verify_scaling(
    spec: &FrictionSpec,
    target: ScalingTarget<'_>,
    kappa: f64,
    t_span: (f64, f64),
    n_samples: usize,
) -> Result<ScalingReport, VerifyError> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(VerifyError::BadKappa(kappa));
    }
    let info = ScaleReinterpretation::new(spec, kappa)?;
    let root = kappa.sqrt();
    let fast_span = (t_span.0 * root, t_span.1 * root);
    let slow_span = (t_span.0 * kappa, t_span.1 * kappa);
    let (faster, weaker_gravity) = match target {
        ScalingTarget::Planar(ramp) => {
            let big = ramp
                .dilate(kappa)
                .map_err(|_| VerifyError::BadKappa(kappa))?;
            (
                verify_2d(&info.faster, &big, fast_span, n_samples)?,
                verify_2d(&info.weaker_gravity, &big, slow_span, n_samples)?,
            )
        }
        ScalingTarget::Space(curve) => {
            let big = Dilate::dilate(curve, kappa).map_err(|_| VerifyError::BadKappa(kappa))?;
            (
                verify_3d(&info.faster, &big, fast_span, n_samples)?,
                verify_3d(&info.weaker_gravity, &big, slow_span, n_samples)?,
            )
        }
    };
    Ok(ScalingReport {
        kappa,
        reinterpretation: info,
        faster,
        weaker_gravity,
    })
}

/// How the curve parameter advances with time.
#[derive(Clone)]
pub enum Motion {
    /// `s(t) = offset + rate t`. Rate zero is a block at rest.
    Affine { offset: f64, rate: f64 },
    /// Arbitrary `t -> (s, s', s'')`.
    Custom(Arc<dyn Fn(f64) -> (f64, f64, f64) + Send + Sync>),
}

impl std::fmt::Debug for Motion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Motion::Affine { offset, rate } => f
                .debug_struct("Affine")
                .field("offset", offset)
                .field("rate", rate)
                .finish(),
            Motion::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl Motion {
    /// Speed `v` along an arc-length parametrized curve, from `s = 0`.
    pub fn constant_speed(v: f64) -> Self {
        Motion::Affine {
            offset: 0.0,
            rate: v,
        }
    }

    pub fn at_rest(s: f64) -> Self {
        Motion::Affine {
            offset: s,
            rate: 0.0,
        }
    }

    fn eval(&self, t: f64) -> (f64, f64, f64) {
        match self {
            Motion::Affine { offset, rate } => (offset + rate * t, *rate, 0.0),
            Motion::Custom(f) => f(t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Feasibility {
    Feasible,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignDiagnostic {
    pub verdict: Feasibility,
    pub lambda_min: f64,
    pub negative_samples: usize,
    /// Largest mismatch in the balance along the direction of travel once
    /// the normal force is fixed by the normal balance.
    pub friction_consistency_error: f64,
    pub lambda_profile: Vec<ProfilePoint>,
}

/// Solves the normal balance for the normal force a given motion needs,
/// `lambda = (m beta'' - F) . n`, and reports where it would have to pull.
///
/// `mu` is the friction coefficient used in the tangential consistency
/// check; pass 0 for a frictionless ramp.
pub fn normal_sign_diagnostic(
    ramp: &Ramp2D,
    force: &dyn Fn(Vec2) -> Vec2,
    m: f64,
    mu: f64,
    motion: &Motion,
    t_span: (f64, f64),
    n_samples: usize,
) -> Result<SignDiagnostic, VerifyError> {
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite() && t1 >= t0) {
        return Err(VerifyError::BadSpan(t0, t1));
    }
    if n_samples < 2 {
        return Err(VerifyError::TooFewSamples(n_samples));
    }
    let mut profile = Vec::with_capacity(n_samples);
    let mut consistency: f64 = 0.0;
    for i in 0..n_samples {
        let t = t0 + (t1 - t0) * i as f64 / (n_samples - 1) as f64;
        let (s, ds, dds) = motion.eval(t);
        check_domain(s, ramp.domain())?;
        let tangent = ramp.tangent(s);
        let normal = ramp.normal(s);
        let velocity = tangent * ds;
        let accel = ramp.second_derivative(s) * (ds * ds) + tangent * dds;
        let f = force(ramp.position(s));
        let lambda = (accel * m - f).dot(&normal);
        let unit = tangent / tangent.norm();
        let friction = if velocity.norm() > 0.0 {
            velocity / velocity.norm() * (-mu * lambda)
        } else {
            Vec2::zeros()
        };
        let residual = f + normal * lambda + friction - accel * m;
        consistency = consistency.max(residual.dot(&unit).abs());
        profile.push(ProfilePoint { t, value: lambda });
    }
    let negative_samples = profile.iter().filter(|p| p.value < -TOL_LAMBDA).count();
    let lambda_min = profile
        .iter()
        .map(|p| p.value)
        .fold(f64::INFINITY, f64::min);
    Ok(SignDiagnostic {
        verdict: if negative_samples > 0 {
            Feasibility::Infeasible
        } else {
            Feasibility::Feasible
        },
        lambda_min,
        negative_samples,
        friction_consistency_error: consistency,
        lambda_profile: profile,
    })
}
