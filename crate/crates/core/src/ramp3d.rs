//! Constant-speed ramps in space.
//!
//! A unit tangent field `N` on the south hemisphere prescribes the ramp's
//! surface normal as a function of the direction of travel. The direction of
//! travel `gamma(s)` is then an integral curve of
//!
//! ```text
//! X(y) = -(g / v^2) (e3^T(y) + (y3 / mu) N(y)),   e3^T(y) = e3 - y3 y
//! ```
//!
//! the ramp's centre line is `alpha(s) = int_0^s gamma`, and the surface is
//! the ruled surface `R(s, r) = alpha(s) + r alpha'(s) x N(alpha'(s))`.
//! The normal force per unit mass is `-(g / mu) y3`.

use std::fmt;
use std::sync::Arc;

use log::debug;
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ode::{hermite, step_count, IntegrationError, IntegratorConfig, Method};
use crate::params::{FrictionSpec, ParamError};
use crate::planar::{PlanarCurve, PlanarError, Ramp2D, RotatedAlpha};
use crate::quadrature::cumulative_simpson;

pub type Vec3 = Vector3<f64>;

/// Distance below which a field counts as singular.
pub const SINGULAR_DISTANCE: f64 = 1e-8;

const UNIT_TOLERANCE: f64 = 1e-10;
const HEMISPHERE_SLACK: f64 = 1e-12;

pub fn e3() -> Vec3 {
    Vec3::new(0.0, 0.0, 1.0)
}

/// Component of `e3` tangent to the sphere at `y`.
pub fn e3_tangential(y: &Vec3) -> Vec3 {
    e3() - *y * y.z
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("field `{field}` is singular at ({}, {}, {})", point[0], point[1], point[2])]
    Singular { field: String, point: [f64; 3] },
    #[error("({}, {}, {}) is not a unit vector with non-positive third component", point[0], point[1], point[2])]
    NotOnHemisphere { point: [f64; 3] },
    #[error("blend weight {0} is outside [0, 1]")]
    BadBlendWeight(f64),
    #[error("unknown field `{0}` (expected upslope, horizontal or blend:<w>)")]
    UnknownField(String),
}

/// A direction of travel: a unit vector with non-positive vertical component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct HemispherePoint(Vec3);

impl HemispherePoint {
    pub fn new(y: Vec3) -> Result<Self, FieldError> {
        let ok = y.iter().all(|c| c.is_finite())
            && (y.norm() - 1.0).abs() <= UNIT_TOLERANCE
            && y.z <= HEMISPHERE_SLACK;
        if ok {
            Ok(HemispherePoint(y))
        } else {
            Err(FieldError::NotOnHemisphere { point: y.into() })
        }
    }

    /// Normalizes `direction` first.
    pub fn from_direction(direction: Vec3) -> Result<Self, FieldError> {
        let n = direction.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(FieldError::NotOnHemisphere {
                point: direction.into(),
            });
        }
        Self::new(direction / n)
    }

    pub fn as_vec(&self) -> Vec3 {
        self.0
    }
}

impl TryFrom<[f64; 3]> for HemispherePoint {
    type Error = FieldError;

    fn try_from(v: [f64; 3]) -> Result<Self, Self::Error> {
        Self::new(Vec3::from(v))
    }
}

impl From<HemispherePoint> for [f64; 3] {
    fn from(p: HemispherePoint) -> Self {
        p.0.into()
    }
}

/// Built-in tangent fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BuiltinField {
    /// Normalized tangential part of `e3`: the surface normal leans uphill.
    /// Reproduces the planar upper-branch ramp.
    UpSlope,
    /// Normalized `y x e3`: horizontal normals, giving banked spirals.
    Horizontal,
    /// Normalized `w UpSlope + (1 - w) Horizontal`.
    Blend(f64),
}

impl BuiltinField {
    pub fn name(&self) -> String {
        match self {
            BuiltinField::UpSlope => "upslope".into(),
            BuiltinField::Horizontal => "horizontal".into(),
            BuiltinField::Blend(w) => format!("blend:{w}"),
        }
    }
}

impl std::str::FromStr for BuiltinField {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "upslope" => Ok(BuiltinField::UpSlope),
            "horizontal" => Ok(BuiltinField::Horizontal),
            _ => {
                let w = s
                    .strip_prefix("blend:")
                    .and_then(|w| w.parse::<f64>().ok())
                    .ok_or_else(|| FieldError::UnknownField(s.to_string()))?;
                if (0.0..=1.0).contains(&w) {
                    Ok(BuiltinField::Blend(w))
                } else {
                    Err(FieldError::BadBlendWeight(w))
                }
            }
        }
    }
}

type FieldFn = dyn Fn(&Vec3) -> Option<Vec3> + Send + Sync;

#[derive(Clone)]
enum FieldImpl {
    Builtin(BuiltinField),
    Custom(Arc<FieldFn>),
}

/// A unit tangent vector field on the south hemisphere.
#[derive(Clone)]
pub struct TangentField {
    imp: FieldImpl,
    name: String,
    singular_set: String,
}

impl fmt::Debug for TangentField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TangentField")
            .field("name", &self.name)
            .field("singular_set", &self.singular_set)
            .finish()
    }
}

fn up_slope(y: &Vec3) -> Option<Vec3> {
    let t = e3_tangential(y);
    let n = t.norm();
    (n >= SINGULAR_DISTANCE).then(|| t / n)
}

fn horizontal(y: &Vec3) -> Option<Vec3> {
    let t = y.cross(&e3());
    let n = t.norm();
    (n >= SINGULAR_DISTANCE).then(|| t / n)
}

impl TangentField {
    pub fn builtin(kind: BuiltinField) -> Result<Self, FieldError> {
        if let BuiltinField::Blend(w) = kind {
            if !(0.0..=1.0).contains(&w) {
                return Err(FieldError::BadBlendWeight(w));
            }
        }
        Ok(TangentField {
            imp: FieldImpl::Builtin(kind),
            name: kind.name(),
            singular_set: "south pole (0, 0, -1)".into(),
        })
    }

    /// A user-supplied field. `eval` returns `None` where the field is
    /// undefined; returned vectors are normalized and projected onto the
    /// tangent plane.
    pub fn custom(
        name: impl Into<String>,
        singular_set: impl Into<String>,
        eval: impl Fn(&Vec3) -> Option<Vec3> + Send + Sync + 'static,
    ) -> Self {
        TangentField {
            imp: FieldImpl::Custom(Arc::new(eval)),
            name: name.into(),
            singular_set: singular_set.into(),
        }
    }

    /// Field `y x e2`, the in-plane left normal for curves in the x-z plane.
    /// Reproduces both planar branches; singular at `(0, +-1, 0)`.
    pub fn planar_left() -> Self {
        Self::custom("planar-left", "(0, 1, 0) and (0, -1, 0)", |y| {
            let t = y.cross(&Vec3::y());
            let n = t.norm();
            (n >= SINGULAR_DISTANCE).then(|| t / n)
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn singular_set(&self) -> &str {
        &self.singular_set
    }

    pub fn builtin_kind(&self) -> Option<BuiltinField> {
        match self.imp {
            FieldImpl::Builtin(k) => Some(k),
            FieldImpl::Custom(_) => None,
        }
    }

    fn singular(&self, y: &Vec3) -> FieldError {
        FieldError::Singular {
            field: self.name.clone(),
            point: (*y).into(),
        }
    }

    pub fn eval(&self, y: &Vec3) -> Result<Vec3, FieldError> {
        let value = match &self.imp {
            FieldImpl::Builtin(BuiltinField::UpSlope) => up_slope(y),
            FieldImpl::Builtin(BuiltinField::Horizontal) => horizontal(y),
            FieldImpl::Builtin(BuiltinField::Blend(w)) => match (up_slope(y), horizontal(y)) {
                (Some(u), Some(h)) => {
                    let b = u * *w + h * (1.0 - w);
                    let n = b.norm();
                    (n >= SINGULAR_DISTANCE).then(|| b / n)
                }
                _ => None,
            },
            FieldImpl::Custom(f) => f(y).and_then(|n| {
                let yn = y.norm_squared();
                let t = if yn > 0.0 {
                    n - *y * (n.dot(y) / yn)
                } else {
                    n
                };
                let len = t.norm();
                (len >= SINGULAR_DISTANCE).then(|| t / len)
            }),
        };
        value.ok_or_else(|| self.singular(y))
    }
}

/// The hemisphere vector field whose integral curves are ramp directions.
pub fn field_x(spec: &FrictionSpec, field: &TangentField, y: &Vec3) -> Result<Vec3, FieldError> {
    let n = field.eval(y)?;
    Ok((e3_tangential(y) + n * (y.z / spec.mu())) * (-spec.g() / (spec.v() * spec.v())))
}

/// Normal force magnitude `m g (-y3) / mu` for direction of travel `y`.
pub fn lambda_3d(spec: &FrictionSpec, y: &HemispherePoint) -> f64 {
    -spec.m() * spec.g() * y.as_vec().z / spec.mu()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Ramp3dError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Planar(#[from] PlanarError),
    #[error("s_max must be finite and positive, got {0}")]
    BadLength(f64),
    #[error("ramp integration needs the fixed-step RK4 method")]
    UnsupportedMethod,
    #[error("dilation factor must be finite and positive, got {0}")]
    BadDilation(f64),
    #[error("r extent [{0}, {1}] must satisfy lo <= 0 <= hi and lo < hi")]
    BadExtent(f64, f64),
    #[error("mesh resolution must be at least 2x2, got {0}x{1}")]
    BadResolution(usize, usize),
    #[error("degenerate ruling at s = {s}: |alpha' x N| = {magnitude}")]
    DegenerateRuling { s: f64, magnitude: f64 },
}

/// Why an integration run stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopReason {
    Completed,
    /// The direction reached the field's singular set; samples end there.
    SingularSet {
        s: f64,
        point: [f64; 3],
    },
}

/// Norm drift removed by renormalizing after each step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DriftLog {
    pub steps: usize,
    pub max_step: f64,
    pub total: f64,
}

/// Arc-length parametrized space curve sampled on a uniform grid, together
/// with the field and spec that generated it.
#[derive(Debug, Clone)]
pub struct SpaceCurve3D {
    spec: FrictionSpec,
    field: TangentField,
    step: f64,
    s: Vec<f64>,
    position: Vec<Vec3>,
    tangent: Vec<Vec3>,
    rate: Vec<Vec3>,
    dilation: f64,
    drift: DriftLog,
    stop: StopReason,
}

impl SpaceCurve3D {
    pub fn spec(&self) -> &FrictionSpec {
        &self.spec
    }

    pub fn field(&self) -> &TangentField {
        &self.field
    }

    /// Grid spacing in arc length.
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn s_max(&self) -> f64 {
        self.s[self.s.len() - 1]
    }

    pub fn params(&self) -> &[f64] {
        &self.s
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.position
    }

    pub fn tangents(&self) -> &[Vec3] {
        &self.tangent
    }

    pub fn dilation(&self) -> f64 {
        self.dilation
    }

    pub fn drift(&self) -> DriftLog {
        self.drift
    }

    pub fn stop_reason(&self) -> &StopReason {
        &self.stop
    }

    fn bracket(&self, s: f64) -> usize {
        let n = self.s.len();
        if n < 2 || s <= self.s[0] {
            return 0;
        }
        (self.s.partition_point(|&x| x <= s) - 1).min(n - 2)
    }

    /// Hermite interpolation of the centre line.
    pub fn position(&self, s: f64) -> Vec3 {
        if self.s.len() == 1 {
            return self.position[0];
        }
        let i = self.bracket(s);
        hermite(
            self.s[i],
            self.s[i + 1],
            self.position[i],
            self.position[i + 1],
            self.tangent[i],
            self.tangent[i + 1],
            s,
        )
    }

    /// Hermite interpolation of the direction of travel, renormalized.
    pub fn tangent(&self, s: f64) -> Vec3 {
        if self.s.len() == 1 {
            return self.tangent[0];
        }
        let i = self.bracket(s);
        let t = hermite(
            self.s[i],
            self.s[i + 1],
            self.tangent[i],
            self.tangent[i + 1],
            self.rate[i],
            self.rate[i + 1],
            s,
        );
        t / t.norm()
    }

    /// `gamma'(s)` from the generating vector field, accounting for any
    /// dilation applied since generation.
    pub fn tangent_rate(&self, s: f64) -> Result<Vec3, FieldError> {
        Ok(field_x(&self.spec, &self.field, &self.tangent(s))? / self.dilation)
    }

    /// The two parameter sets under which this (possibly dilated) geometry
    /// is a constant-speed ramp.
    pub fn reinterpretations(&self) -> Result<ScaleReinterpretation, ParamError> {
        ScaleReinterpretation::new(&self.spec, self.dilation)
    }
}

/// Equivalent physical readings of a ramp dilated by `kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleReinterpretation {
    pub kappa: f64,
    /// Speed `sqrt(kappa) v` at the original gravity.
    pub faster: FrictionSpec,
    /// Original speed at gravity `g / kappa`.
    pub weaker_gravity: FrictionSpec,
}

impl ScaleReinterpretation {
    pub fn new(spec: &FrictionSpec, kappa: f64) -> Result<Self, ParamError> {
        Ok(ScaleReinterpretation {
            kappa,
            faster: spec.with_speed(kappa.sqrt() * spec.v())?,
            weaker_gravity: spec.with_gravity(spec.g() / kappa)?,
        })
    }
}

fn try_rk4_step<F>(f: &F, y: Vec3, h: f64) -> Result<Vec3, FieldError>
where
    F: Fn(&Vec3) -> Result<Vec3, FieldError>,
{
    let half = 0.5 * h;
    let k1 = f(&y)?;
    let k2 = f(&(y + k1 * half))?;
    let k3 = f(&(y + k2 * half))?;
    let k4 = f(&(y + k3 * h))?;
    Ok(y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

/// Integrates the direction of travel from `y0` over `[0, s_max]` with RK4,
/// renormalizing to the unit sphere after every step, and recovers the
/// centre line by cumulative Simpson quadrature.
///
/// A start inside the field's singular set is an error. Reaching the
/// singular set later ends the run early with [`StopReason::SingularSet`].
pub fn integrate_ramp3d(
    spec: &FrictionSpec,
    field: &TangentField,
    y0: &HemispherePoint,
    s_max: f64,
    config: &IntegratorConfig,
) -> Result<SpaceCurve3D, Ramp3dError> {
    config.validate()?;
    if config.method != Method::Rk4 {
        return Err(Ramp3dError::UnsupportedMethod);
    }
    if !(s_max.is_finite() && s_max > 0.0) {
        return Err(Ramp3dError::BadLength(s_max));
    }
    let rhs = |y: &Vec3| field_x(spec, field, y);
    let n = step_count(s_max, config.step);
    let h = s_max / n as f64;

    let mut y = y0.as_vec();
    let mut s_values = Vec::with_capacity(n + 1);
    let mut tangent = Vec::with_capacity(n + 1);
    let mut rate = Vec::with_capacity(n + 1);
    let mut drift = DriftLog::default();
    let mut stop = StopReason::Completed;

    rate.push(rhs(&y)?);
    s_values.push(0.0);
    tangent.push(y);
    for i in 1..=n {
        let s = if i == n { s_max } else { i as f64 * h };
        let next = match try_rk4_step(&rhs, y, h) {
            Ok(next) => next,
            Err(FieldError::Singular { point, .. }) => {
                stop = StopReason::SingularSet { s: s - h, point };
                break;
            }
            Err(e) => return Err(e.into()),
        };
        let norm = next.norm();
        let d = (norm - 1.0).abs();
        drift.steps += 1;
        drift.max_step = drift.max_step.max(d);
        drift.total += d;
        let next = next / norm;
        let r = match rhs(&next) {
            Ok(r) => r,
            Err(FieldError::Singular { point, .. }) => {
                stop = StopReason::SingularSet { s, point };
                break;
            }
            Err(e) => return Err(e.into()),
        };
        y = next;
        s_values.push(s);
        tangent.push(y);
        rate.push(r);
    }
    if let StopReason::SingularSet { s, .. } = &stop {
        debug!("field {} became singular at s = {s}", field.name());
    }
    debug!(
        "integrated {} steps, norm drift total {:e} max {:e}",
        drift.steps, drift.total, drift.max_step
    );
    let position = cumulative_simpson(&tangent, h, Vec3::zeros());
    Ok(SpaceCurve3D {
        spec: *spec,
        field: field.clone(),
        step: h,
        s: s_values,
        position,
        tangent,
        rate,
        dilation: 1.0,
        drift,
        stop,
    })
}

/// Largest distance between an UpSlope curve and its planar counterpart.
///
/// A start direction in a vertical plane, at depression angle `phi` in
/// `[0, delta)`, keeps the curve in that plane on the upper branch of the
/// rotated planar curve. `None` when the curve has no such counterpart.
pub fn planar_reduction_error(curve: &SpaceCurve3D) -> Option<f64> {
    if curve.field.builtin_kind() != Some(BuiltinField::UpSlope) || curve.dilation != 1.0 {
        return None;
    }
    let spec = curve.spec;
    let y0 = curve.tangent[0];
    let horizontal = y0.x.hypot(y0.y);
    if horizontal < SINGULAR_DISTANCE {
        return None;
    }
    let phi = (-y0.z).atan2(horizontal);
    if !(phi >= 0.0 && phi < spec.delta()) {
        return None;
    }
    let (cos_az, sin_az) = (y0.x / horizontal, y0.y / horizontal);
    let planar = RotatedAlpha::for_spec(&spec);
    // parameter where the planar tangent is depressed by phi
    let s1 = -((spec.delta() - phi) / 2.0).tan().ln() / spec.a();
    let origin = planar.position(s1);
    let worst = curve
        .s
        .iter()
        .zip(&curve.position)
        .map(|(s, p)| {
            let q = planar.position(s1 + s) - origin;
            (p - Vec3::new(q.x * cos_az, q.x * sin_az, q.y)).norm()
        })
        .fold(0.0, f64::max);
    Some(worst)
}

/// Meshed ruled surface around a space curve.
#[derive(Debug, Clone)]
pub struct RampSurface3D {
    base: SpaceCurve3D,
    n_s: usize,
    n_r: usize,
    s_values: Vec<f64>,
    r_values: Vec<f64>,
    /// Row-major in `(s, r)`: vertex `(i, j)` is at `i * n_r + j`.
    vertices: Vec<Vec3>,
    normals: Vec<Vec3>,
    rulings: Vec<Vec3>,
    zero_column: usize,
}

impl RampSurface3D {
    pub fn base(&self) -> &SpaceCurve3D {
        &self.base
    }

    pub fn resolution(&self) -> (usize, usize) {
        (self.n_s, self.n_r)
    }

    pub fn s_values(&self) -> &[f64] {
        &self.s_values
    }

    pub fn r_values(&self) -> &[f64] {
        &self.r_values
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    /// Unit ruling direction for each s row.
    pub fn rulings(&self) -> &[Vec3] {
        &self.rulings
    }

    pub fn vertex(&self, i: usize, j: usize) -> Vec3 {
        self.vertices[i * self.n_r + j]
    }

    pub fn normal(&self, i: usize, j: usize) -> Vec3 {
        self.normals[i * self.n_r + j]
    }

    /// Column index holding `r = 0`, the base curve.
    pub fn zero_column(&self) -> usize {
        self.zero_column
    }

    /// Triangles with counterclockwise winding seen from the side the
    /// field's normal points to.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        let idx = |i: usize, j: usize| i * self.n_r + j;
        let mut tris = Vec::with_capacity(2 * (self.n_s - 1) * (self.n_r - 1));
        for i in 0..self.n_s - 1 {
            for j in 0..self.n_r - 1 {
                tris.push([idx(i, j), idx(i, j + 1), idx(i + 1, j)]);
                tris.push([idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1)]);
            }
        }
        tris
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// `n` ruling offsets over `[lo, hi]` that always contain an exact zero.
fn ruling_offsets(lo: f64, hi: f64, n: usize) -> (Vec<f64>, usize) {
    let intervals = n - 1;
    let mut below = ((intervals as f64) * (-lo) / (hi - lo)).round() as usize;
    if lo < 0.0 && below == 0 {
        below = 1;
    }
    if hi > 0.0 && below == intervals {
        below = intervals - 1;
    }
    let above = intervals - below;
    let mut r = if below > 0 {
        linspace(lo, 0.0, below + 1)
    } else {
        vec![0.0]
    };
    if above > 0 {
        r.extend(linspace(0.0, hi, above + 1).into_iter().skip(1));
    }
    (r, below)
}

/// Builds the ruled surface `alpha(s) + r (alpha'(s) x N(alpha'(s)))` over
/// the whole base curve.
pub fn build_surface(
    curve: &SpaceCurve3D,
    field: &TangentField,
    r_extent: (f64, f64),
    resolution: (usize, usize),
) -> Result<RampSurface3D, Ramp3dError> {
    let (lo, hi) = r_extent;
    if !(lo.is_finite() && hi.is_finite() && lo <= 0.0 && hi >= 0.0 && lo < hi) {
        return Err(Ramp3dError::BadExtent(lo, hi));
    }
    let (n_s, n_r) = resolution;
    if n_s < 2 || n_r < 2 {
        return Err(Ramp3dError::BadResolution(n_s, n_r));
    }
    let s_values = linspace(0.0, curve.s_max(), n_s);
    let (r_values, zero_column) = ruling_offsets(lo, hi, n_r);
    let mut vertices = Vec::with_capacity(n_s * n_r);
    let mut normals = Vec::with_capacity(n_s * n_r);
    let mut rulings = Vec::with_capacity(n_s);
    for &s in &s_values {
        let base = curve.position(s);
        let gamma = curve.tangent(s);
        let normal = field.eval(&gamma)?;
        let ruling = gamma.cross(&normal);
        let magnitude = ruling.norm();
        if magnitude < SINGULAR_DISTANCE {
            return Err(Ramp3dError::DegenerateRuling { s, magnitude });
        }
        let ruling = ruling / magnitude;
        // d(ruling)/ds, with the field's directional derivative by central
        // differences along gamma'.
        let rate = curve.tangent_rate(s)?;
        let eps = 1e-6;
        let dn =
            (field.eval(&(gamma + rate * eps))? - field.eval(&(gamma - rate * eps))?) / (2.0 * eps);
        let ruling_rate = rate.cross(&normal) + gamma.cross(&dn);
        for &r in &r_values {
            vertices.push(base + ruling * r);
            let ds = gamma + ruling_rate * r;
            let n = ruling.cross(&ds);
            normals.push(n / n.norm());
        }
        rulings.push(ruling);
    }
    Ok(RampSurface3D {
        base: curve.clone(),
        n_s,
        n_r,
        s_values,
        r_values,
        vertices,
        normals,
        rulings,
        zero_column,
    })
}

/// Pure spatial dilation.
pub trait Dilate: Sized {
    fn dilate(&self, kappa: f64) -> Result<Self, Ramp3dError>;
}

fn check_kappa(kappa: f64) -> Result<(), Ramp3dError> {
    if kappa.is_finite() && kappa > 0.0 {
        Ok(())
    } else {
        Err(Ramp3dError::BadDilation(kappa))
    }
}

impl Dilate for SpaceCurve3D {
    fn dilate(&self, kappa: f64) -> Result<Self, Ramp3dError> {
        check_kappa(kappa)?;
        if kappa == 1.0 {
            return Ok(self.clone());
        }
        let mut out = self.clone();
        out.step *= kappa;
        out.dilation *= kappa;
        out.s.iter_mut().for_each(|s| *s *= kappa);
        out.position.iter_mut().for_each(|p| *p *= kappa);
        out.rate.iter_mut().for_each(|r| *r /= kappa);
        if let StopReason::SingularSet { s, .. } = &mut out.stop {
            *s *= kappa;
        }
        Ok(out)
    }
}

impl Dilate for RampSurface3D {
    fn dilate(&self, kappa: f64) -> Result<Self, Ramp3dError> {
        check_kappa(kappa)?;
        let mut out = self.clone();
        out.base = self.base.dilate(kappa)?;
        if kappa != 1.0 {
            out.s_values.iter_mut().for_each(|s| *s *= kappa);
            out.r_values.iter_mut().for_each(|r| *r *= kappa);
            out.vertices.iter_mut().for_each(|v| *v *= kappa);
        }
        Ok(out)
    }
}

impl Dilate for Ramp2D {
    fn dilate(&self, kappa: f64) -> Result<Self, Ramp3dError> {
        Ok(Ramp2D::dilate(self, kappa)?)
    }
}

/// Dilates a ramp geometry by `kappa`.
pub fn scale_ramp<T: Dilate>(geometry: &T, kappa: f64) -> Result<T, Ramp3dError> {
    geometry.dilate(kappa)
}
