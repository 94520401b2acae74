//! Closed-form planar constant-speed ramps.
//!
//! The base curve is the arc-length parametrized U-shaped curve
//!
//! ```text
//! alpha(s) = ( s + ln(1 + e^(-2as)) / a , (2/a) arccot(e^(-as)) )
//! alpha'(s) = ( tanh(as), sech(as) )
//! ```
//!
//! Rotating it clockwise by the friction angle and cutting it at its highest
//! point yields two ramps, both starting at the apex `alpha_delta(s0)`:
//!
//! * [`Branch::Lower`] runs backwards along the rotated curve. It leaves the
//!   apex heading left, loops down with the block pressed against the inside
//!   of the loop, and flattens out onto the lower asymptote.
//! * [`Branch::Upper`] runs forward from the apex. The block rides on top of
//!   a convex crest that flattens onto the upper asymptote.
//!
//! On both branches the ramp normal is the tangent rotated a quarter turn
//! counterclockwise.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::FrictionSpec;

pub type Vec2 = Vector2<f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanarError {
    #[error("arc-length parameter must be finite, got {0}")]
    NonFiniteParameter(f64),
    #[error("time must be finite and non-negative, got {0}")]
    NegativeTime(f64),
    #[error("dilation factor must be finite and positive, got {0}")]
    BadDilation(f64),
}

/// A twice-differentiable planar curve.
///
/// `tangent` is the first derivative with respect to the curve parameter. For
/// arc-length parametrized curves (everything built in this module) it has
/// unit length; user-supplied curves such as a parabola need not.
pub trait PlanarCurve: fmt::Debug + Send + Sync {
    fn position(&self, s: f64) -> Vec2;
    fn tangent(&self, s: f64) -> Vec2;
    fn second_derivative(&self, s: f64) -> Vec2;
    /// Closed parameter interval on which the evaluators are meaningful.
    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
}

/// `ln(1 + e^z)` without overflow for large positive `z`.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sech(z: f64) -> f64 {
    1.0 / z.cosh()
}

/// The unrotated base curve for inverse length scale `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alpha {
    a: f64,
}

impl Alpha {
    pub fn new(a: f64) -> Self {
        Alpha { a }
    }

    pub fn for_spec(spec: &FrictionSpec) -> Self {
        Alpha { a: spec.a() }
    }

    pub fn a(&self) -> f64 {
        self.a
    }
}

impl PlanarCurve for Alpha {
    fn position(&self, s: f64) -> Vec2 {
        let z = self.a * s;
        // arccot(u) = atan(1/u) for u > 0, with u = e^(-as).
        Vec2::new(
            s + softplus(-2.0 * z) / self.a,
            2.0 / self.a * z.exp().atan(),
        )
    }

    fn tangent(&self, s: f64) -> Vec2 {
        let z = self.a * s;
        Vec2::new(z.tanh(), sech(z))
    }

    fn second_derivative(&self, s: f64) -> Vec2 {
        let z = self.a * s;
        let (t, h) = (z.tanh(), sech(z));
        Vec2::new(self.a * h * h, -self.a * h * t)
    }
}

/// Clockwise rotation by `angle`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct ClockwiseRotation {
    cos: f64,
    sin: f64,
}

impl ClockwiseRotation {
    fn new(angle: f64) -> Self {
        ClockwiseRotation {
            cos: angle.cos(),
            sin: angle.sin(),
        }
    }

    fn apply(&self, p: Vec2) -> Vec2 {
        Vec2::new(
            self.cos * p.x + self.sin * p.y,
            -self.sin * p.x + self.cos * p.y,
        )
    }
}

/// The base curve rotated clockwise by the friction angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedAlpha {
    alpha: Alpha,
    rotation: ClockwiseRotation,
    delta: f64,
}

impl RotatedAlpha {
    pub fn new(a: f64, delta: f64) -> Self {
        RotatedAlpha {
            alpha: Alpha::new(a),
            rotation: ClockwiseRotation::new(delta),
            delta,
        }
    }

    pub fn for_spec(spec: &FrictionSpec) -> Self {
        Self::new(spec.a(), spec.delta())
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn a(&self) -> f64 {
        self.alpha.a
    }

    /// Closed form of the vertical velocity,
    /// `-sin(delta) tanh(as) + cos(delta) sech(as)`.
    pub fn vertical_slope(&self, s: f64) -> f64 {
        let z = self.alpha.a * s;
        -self.rotation.sin * z.tanh() + self.rotation.cos * sech(z)
    }
}

impl PlanarCurve for RotatedAlpha {
    fn position(&self, s: f64) -> Vec2 {
        self.rotation.apply(self.alpha.position(s))
    }

    fn tangent(&self, s: f64) -> Vec2 {
        self.rotation.apply(self.alpha.tangent(s))
    }

    fn second_derivative(&self, s: f64) -> Vec2 {
        self.rotation.apply(self.alpha.second_derivative(s))
    }
}

fn check_finite(s: f64) -> Result<(), PlanarError> {
    if s.is_finite() {
        Ok(())
    } else {
        Err(PlanarError::NonFiniteParameter(s))
    }
}

/// Position on the base curve.
pub fn alpha(spec: &FrictionSpec, s: f64) -> Result<Vec2, PlanarError> {
    check_finite(s)?;
    Ok(Alpha::for_spec(spec).position(s))
}

/// Position on the base curve after the clockwise rotation by δ.
pub fn alpha_rotated(spec: &FrictionSpec, s: f64) -> Result<Vec2, PlanarError> {
    check_finite(s)?;
    Ok(RotatedAlpha::for_spec(spec).position(s))
}

/// Arc-length parameter of the highest point of the rotated curve,
/// `asinh(cot δ) / a`.
pub fn apex_param(spec: &FrictionSpec) -> f64 {
    (1.0 / spec.delta().tan()).asinh() / spec.a()
}

/// Which half of the rotated curve a ramp follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// Backwards from the apex onto the lower asymptote.
    Lower,
    /// Forwards from the apex onto the upper asymptote.
    Upper,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::Lower => "lower",
            Branch::Upper => "upper",
        }
    }

    /// Where the block sits relative to the track at the apex.
    pub fn contact_at_apex(self) -> &'static str {
        match self {
            Branch::Lower => "underneath",
            Branch::Upper => "on-top",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Branch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lower" => Ok(Branch::Lower),
            "upper" => Ok(Branch::Upper),
            other => Err(format!("unknown branch `{other}` (expected lower|upper)")),
        }
    }
}

/// One branch of the rotated curve, re-parametrized to start at the apex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchCurve {
    rotated: RotatedAlpha,
    apex: f64,
    branch: Branch,
}

impl BranchCurve {
    pub fn new(spec: &FrictionSpec, branch: Branch) -> Self {
        BranchCurve {
            rotated: RotatedAlpha::for_spec(spec),
            apex: apex_param(spec),
            branch,
        }
    }

    /// Parameter on the rotated curve corresponding to ramp parameter `s`.
    pub fn rotated_param(&self, s: f64) -> f64 {
        match self.branch {
            Branch::Lower => self.apex - s,
            Branch::Upper => self.apex + s,
        }
    }

    fn orientation(&self) -> f64 {
        match self.branch {
            Branch::Lower => -1.0,
            Branch::Upper => 1.0,
        }
    }
}

impl PlanarCurve for BranchCurve {
    fn position(&self, s: f64) -> Vec2 {
        self.rotated.position(self.rotated_param(s))
    }

    fn tangent(&self, s: f64) -> Vec2 {
        self.orientation() * self.rotated.tangent(self.rotated_param(s))
    }

    fn second_derivative(&self, s: f64) -> Vec2 {
        self.rotated.second_derivative(self.rotated_param(s))
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
}

/// The straight incline of slope `-tan(delta)` through the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Incline {
    direction: Vec2,
}

impl Incline {
    pub fn new(delta: f64) -> Self {
        Incline {
            direction: Vec2::new(delta.cos(), -delta.sin()),
        }
    }
}

impl PlanarCurve for Incline {
    fn position(&self, s: f64) -> Vec2 {
        self.direction * s
    }

    fn tangent(&self, _s: f64) -> Vec2 {
        self.direction
    }

    fn second_derivative(&self, _s: f64) -> Vec2 {
        Vec2::zeros()
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
}

/// Curve assembled from closures, for shapes that have no dedicated type.
pub struct FnCurve {
    position: Box<dyn Fn(f64) -> Vec2 + Send + Sync>,
    tangent: Box<dyn Fn(f64) -> Vec2 + Send + Sync>,
    second: Box<dyn Fn(f64) -> Vec2 + Send + Sync>,
    domain: (f64, f64),
}

impl FnCurve {
    pub fn new(
        position: impl Fn(f64) -> Vec2 + Send + Sync + 'static,
        tangent: impl Fn(f64) -> Vec2 + Send + Sync + 'static,
        second: impl Fn(f64) -> Vec2 + Send + Sync + 'static,
        domain: (f64, f64),
    ) -> Self {
        FnCurve {
            position: Box::new(position),
            tangent: Box::new(tangent),
            second: Box::new(second),
            domain,
        }
    }
}

impl fmt::Debug for FnCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnCurve")
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl PlanarCurve for FnCurve {
    fn position(&self, s: f64) -> Vec2 {
        (self.position)(s)
    }

    fn tangent(&self, s: f64) -> Vec2 {
        (self.tangent)(s)
    }

    fn second_derivative(&self, s: f64) -> Vec2 {
        (self.second)(s)
    }

    fn domain(&self) -> (f64, f64) {
        self.domain
    }
}

/// Spatial dilation `kappa * c(s / kappa)`, which keeps arc-length
/// parametrization.
#[derive(Debug, Clone)]
pub struct DilatedCurve {
    inner: Arc<dyn PlanarCurve>,
    kappa: f64,
}

impl PlanarCurve for DilatedCurve {
    fn position(&self, s: f64) -> Vec2 {
        self.inner.position(s / self.kappa) * self.kappa
    }

    fn tangent(&self, s: f64) -> Vec2 {
        self.inner.tangent(s / self.kappa)
    }

    fn second_derivative(&self, s: f64) -> Vec2 {
        self.inner.second_derivative(s / self.kappa) / self.kappa
    }

    fn domain(&self) -> (f64, f64) {
        let (lo, hi) = self.inner.domain();
        (lo * self.kappa, hi * self.kappa)
    }
}

/// Which quarter turn of the tangent gives the ramp normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalSide {
    /// Counterclockwise: `(-t_y, t_x)`.
    Left,
    /// Clockwise: `(t_y, -t_x)`.
    Right,
}

impl NormalSide {
    pub fn normal_of(self, tangent: Vec2) -> Vec2 {
        let n = match self {
            NormalSide::Left => Vec2::new(-tangent.y, tangent.x),
            NormalSide::Right => Vec2::new(tangent.y, -tangent.x),
        };
        n / n.norm()
    }
}

/// A planar ramp: a regular curve together with the unit normal pointing
/// from the track towards the block.
#[derive(Debug, Clone)]
pub struct Ramp2D {
    curve: Arc<dyn PlanarCurve>,
    side: NormalSide,
    branch: Option<Branch>,
    design_delta: Option<f64>,
    dilation: f64,
}

impl Ramp2D {
    /// A ramp on an arbitrary curve. No normal-force law is attached, so
    /// verification recovers it from the normal balance.
    pub fn new(curve: Arc<dyn PlanarCurve>, side: NormalSide) -> Self {
        Ramp2D {
            curve,
            side,
            branch: None,
            design_delta: None,
            dilation: 1.0,
        }
    }

    /// Attaches the constant-speed normal-force law for friction angle
    /// `delta`, `lambda = -m g cot(delta) t_y`.
    pub fn with_design_angle(mut self, delta: f64) -> Self {
        self.design_delta = Some(delta);
        self
    }

    pub fn curve(&self) -> &Arc<dyn PlanarCurve> {
        &self.curve
    }

    pub fn side(&self) -> NormalSide {
        self.side
    }

    pub fn branch(&self) -> Option<Branch> {
        self.branch
    }

    pub fn design_delta(&self) -> Option<f64> {
        self.design_delta
    }

    /// Cumulative spatial dilation applied since construction.
    pub fn dilation(&self) -> f64 {
        self.dilation
    }

    pub fn domain(&self) -> (f64, f64) {
        self.curve.domain()
    }

    pub fn position(&self, s: f64) -> Vec2 {
        self.curve.position(s)
    }

    pub fn tangent(&self, s: f64) -> Vec2 {
        self.curve.tangent(s)
    }

    pub fn second_derivative(&self, s: f64) -> Vec2 {
        self.curve.second_derivative(s)
    }

    pub fn normal(&self, s: f64) -> Vec2 {
        self.side.normal_of(self.curve.tangent(s))
    }

    /// Normal force the constant-speed construction assigns at parameter `s`
    /// for a block of mass `m` under gravity `g`. `None` for ramps without a
    /// design angle.
    pub fn claimed_normal_force(&self, m: f64, g: f64, s: f64) -> Option<f64> {
        let delta = self.design_delta?;
        let t = self.curve.tangent(s);
        Some(-m * g * t.y / (delta.tan() * t.norm()))
    }

    /// Spatial dilation by `kappa`, re-parametrized by arc length.
    pub fn dilate(&self, kappa: f64) -> Result<Ramp2D, PlanarError> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(PlanarError::BadDilation(kappa));
        }
        if kappa == 1.0 {
            return Ok(self.clone());
        }
        Ok(Ramp2D {
            curve: Arc::new(DilatedCurve {
                inner: Arc::clone(&self.curve),
                kappa,
            }),
            dilation: self.dilation * kappa,
            ..self.clone()
        })
    }
}

fn branch_ramp(spec: &FrictionSpec, branch: Branch) -> Ramp2D {
    Ramp2D {
        curve: Arc::new(BranchCurve::new(spec, branch)),
        side: NormalSide::Left,
        branch: Some(branch),
        design_delta: Some(spec.delta()),
        dilation: 1.0,
    }
}

/// Ramp following the rotated curve backwards from the apex.
pub fn lower_ramp(spec: &FrictionSpec) -> Ramp2D {
    branch_ramp(spec, Branch::Lower)
}

/// Ramp following the rotated curve forwards from the apex.
pub fn upper_ramp(spec: &FrictionSpec) -> Ramp2D {
    branch_ramp(spec, Branch::Upper)
}

pub fn ramp_for_branch(spec: &FrictionSpec, branch: Branch) -> Ramp2D {
    branch_ramp(spec, branch)
}

/// The straight incline of slope `-mu`, block on top.
pub fn incline_ramp(spec: &FrictionSpec) -> Ramp2D {
    Ramp2D::new(Arc::new(Incline::new(spec.delta())), NormalSide::Left)
        .with_design_angle(spec.delta())
}

/// Magnitude of the normal force at time `t` for a block that left the apex
/// at `t = 0` with speed `v`.
pub fn normal_force_2d(spec: &FrictionSpec, branch: Branch, t: f64) -> Result<f64, PlanarError> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(PlanarError::NegativeTime(t));
    }
    let rotated = RotatedAlpha::for_spec(spec);
    let s0 = apex_param(spec);
    let weight_cot = spec.m() * spec.g() / spec.delta().tan();
    let lambda = match branch {
        Branch::Lower => weight_cot * rotated.vertical_slope(s0 - spec.v() * t),
        Branch::Upper => -weight_cot * rotated.vertical_slope(s0 + spec.v() * t),
    };
    Ok(lambda)
}

/// Default one-sided sampling span for exports, `8 / a`.
pub fn default_span(spec: &FrictionSpec) -> f64 {
    8.0 / spec.a()
}

/// One row of a sampled ramp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampSample {
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub tx: f64,
    pub ty: f64,
    pub nx: f64,
    pub ny: f64,
    pub lambda: f64,
}

/// Samples `n` equally spaced points on `[0, span]`. `lambda` is the
/// attached normal-force law for the spec's mass and gravity, or NaN for
/// ramps without one.
pub fn sample_ramp(spec: &FrictionSpec, ramp: &Ramp2D, span: f64, n: usize) -> Vec<RampSample> {
    let n = n.max(2);
    (0..n)
        .map(|i| {
            let s = span * i as f64 / (n - 1) as f64;
            let p = ramp.position(s);
            let t = ramp.tangent(s);
            let nrm = ramp.normal(s);
            RampSample {
                s,
                x: p.x,
                y: p.y,
                tx: t.x,
                ty: t.y,
                nx: nrm.x,
                ny: nrm.y,
                lambda: ramp
                    .claimed_normal_force(spec.m(), spec.g(), s)
                    .unwrap_or(f64::NAN),
            }
        })
        .collect()
}

/// Vertical distance between the two horizontal asymptotes of the base
/// curve, `pi / a`.
pub fn asymptote_gap(spec: &FrictionSpec) -> f64 {
    PI / spec.a()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{make_spec, spec_from_mu};
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_4, LN_2};

    fn figure_spec() -> FrictionSpec {
        spec_from_mu(0.5, 9.81, 5.0, 1.0).unwrap()
    }

    fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
        (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
    }

    #[test]
    fn alpha_at_origin() {
        let spec = figure_spec();
        let a = spec.a();
        let p = alpha(&spec, 0.0).unwrap();
        assert_relative_eq!(p.x, LN_2 / a, max_relative = 1e-15);
        assert_relative_eq!(p.y, PI / (2.0 * a), max_relative = 1e-15);
        let t = Alpha::for_spec(&spec).tangent(0.0);
        assert_eq!(t, Vec2::new(0.0, 1.0));
    }

    #[test]
    fn non_finite_parameter_rejected() {
        let spec = figure_spec();
        assert!(alpha(&spec, f64::NAN).is_err());
        assert!(alpha_rotated(&spec, f64::INFINITY).is_err());
    }

    #[test]
    fn unit_speed_samples() {
        let spec = figure_spec();
        let a = spec.a();
        let curve = Alpha::for_spec(&spec);
        for s in [-3.0 / a, -1.0 / a, 0.5 / a, 2.0 / a] {
            // independent route: tanh^2 + sech^2 written via exponentials
            let e = (2.0 * a * s).exp();
            let th = (e - 1.0) / (e + 1.0);
            let sh = 2.0 * (a * s).exp() / (e + 1.0);
            assert!((th * th + sh * sh - 1.0).abs() < 1e-12);
            assert!((curve.tangent(s).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tangent_is_derivative_of_position() {
        let spec = figure_spec();
        let h = 1e-4;
        for curve in [
            Box::new(Alpha::for_spec(&spec)) as Box<dyn PlanarCurve>,
            Box::new(RotatedAlpha::for_spec(&spec)),
            Box::new(BranchCurve::new(&spec, Branch::Lower)),
            Box::new(BranchCurve::new(&spec, Branch::Upper)),
        ] {
            for s in grid(0.1, 9.0, 40) {
                let fd = (curve.position(s + h) - curve.position(s - h)) / (2.0 * h);
                assert!((fd - curve.tangent(s)).norm() < 1e-6, "{curve:?} at {s}");
                let fd2 = (curve.tangent(s + h) - curve.tangent(s - h)) / (2.0 * h);
                assert!((fd2 - curve.second_derivative(s)).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn large_arguments_do_not_overflow() {
        let spec = figure_spec();
        let a = spec.a();
        for s in [
            -700.0 / a,
            -400.0 / a,
            400.0 / a,
            700.0 / a,
            1e3 / a,
            -1e3 / a,
        ] {
            let p = alpha(&spec, s).unwrap();
            assert!(p.x.is_finite() && p.y.is_finite(), "{s}: {p:?}");
        }
        // x(s) -> -s as s -> -inf, x(s) -> s as s -> +inf
        assert_relative_eq!(
            alpha(&spec, -500.0 / a).unwrap().x,
            500.0 / a,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            alpha(&spec, 500.0 / a).unwrap().x,
            500.0 / a,
            max_relative = 1e-12
        );
    }

    #[test]
    fn asymptotes_separated_by_pi_over_a() {
        let spec = figure_spec();
        let a = spec.a();
        let gap = alpha(&spec, 1e3 / a).unwrap().y - alpha(&spec, -1e3 / a).unwrap().y;
        assert!((gap - PI / a).abs() < 1e-9);
        assert_relative_eq!(
            asymptote_gap(&spec),
            3.580_435_642_732_276_4,
            max_relative = 1e-14
        );
    }

    #[test]
    fn tiny_rotation_is_near_identity() {
        let spec = make_spec(1e-9, 9.81, 5.0, 1.0).unwrap();
        let a = spec.a();
        for s in grid(-3.0 / a, 3.0 / a, 11) {
            let p = alpha(&spec, s).unwrap();
            let q = alpha_rotated(&spec, s).unwrap();
            assert!((p - q).norm() < 1e-8 * p.norm().max(1.0));
        }
    }

    #[test]
    fn apex_value_and_sign_change() {
        let spec = figure_spec();
        let a = spec.a();
        let s0 = apex_param(&spec);
        // asinh(2) = ln(2 + sqrt 5)
        assert_relative_eq!(s0, (2.0 + 5f64.sqrt()).ln() / a, max_relative = 1e-14);
        assert_relative_eq!(s0, 1.645_294_116_834_877_8, max_relative = 1e-14);
        let r = RotatedAlpha::for_spec(&spec);
        assert!(r.vertical_slope(s0).abs() < 1e-15);
        assert!(r.tangent(s0).y.abs() < 1e-15);
        let eps = 0.01 / a;
        assert!(r.vertical_slope(s0 - eps) > 0.0);
        assert!(r.vertical_slope(s0 + eps) < 0.0);
    }

    #[test]
    fn apex_near_quarter_pi() {
        let spec = make_spec(FRAC_PI_4 - 1e-12, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(
            apex_param(&spec),
            1f64.asinh() / spec.a(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn apex_is_unique_zero_of_vertical_slope() {
        for mu in [0.05, 0.3, 0.5, 0.9] {
            let spec = spec_from_mu(mu, 9.81, 5.0, 1.0).unwrap();
            let a = spec.a();
            let s0 = apex_param(&spec);
            let r = RotatedAlpha::for_spec(&spec);
            let (lo, hi) = (s0 - 5.0 / a, s0 + 5.0 / a);
            let samples: Vec<f64> = grid(lo, hi, 2001).map(|s| r.vertical_slope(s)).collect();
            let crossings = samples
                .windows(2)
                .filter(|w| w[0] > 0.0 && w[1] <= 0.0)
                .count();
            assert_eq!(crossings, 1);
            let (mut l, mut h) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (l + h);
                if r.vertical_slope(mid) > 0.0 {
                    l = mid;
                } else {
                    h = mid;
                }
            }
            assert!((0.5 * (l + h) - s0).abs() < 1e-10);
        }
    }

    #[test]
    fn curvature_identity() {
        let spec = figure_spec();
        let a = spec.a();
        let r = RotatedAlpha::for_spec(&spec);
        for s in grid(-10.0 / a, 10.0 / a, 1000) {
            let t = r.tangent(s);
            let k = r.second_derivative(s).dot(&Vec2::new(t.y, -t.x));
            assert!((k - a / (a * s).cosh()).abs() < 1e-10);
        }
    }

    #[test]
    fn rotation_is_isometry() {
        let spec = figure_spec();
        let a = spec.a();
        let base = Alpha::for_spec(&spec);
        let rot = RotatedAlpha::for_spec(&spec);
        let pts: Vec<f64> = grid(-6.0 / a, 6.0 / a, 25).collect();
        for &s in &pts {
            for &u in &pts {
                let d0 = (base.position(s) - base.position(u)).norm();
                let d1 = (rot.position(s) - rot.position(u)).norm();
                assert!((d0 - d1).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn branches_share_apex_and_descend() {
        let spec = figure_spec();
        let lower = lower_ramp(&spec);
        let upper = upper_ramp(&spec);
        let apex = alpha_rotated(&spec, apex_param(&spec)).unwrap();
        assert_eq!(lower.position(0.0), apex);
        assert_eq!(upper.position(0.0), apex);
        for ramp in [&lower, &upper] {
            let ys: Vec<f64> = grid(0.0, 8.0 / spec.a(), 500)
                .map(|s| ramp.position(s).y)
                .collect();
            assert!(ys.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn branch_normals_match_explicit_formulas() {
        let spec = figure_spec();
        let r = RotatedAlpha::for_spec(&spec);
        let s0 = apex_param(&spec);
        let lower = lower_ramp(&spec);
        let upper = upper_ramp(&spec);
        for s in grid(0.0, 10.0, 101) {
            let d = r.tangent(s0 - s);
            let n_lower = Vec2::new(d.y, -d.x);
            assert!((lower.normal(s) - n_lower).norm() < 1e-12);
            let d = r.tangent(s + s0);
            let n_upper = Vec2::new(-d.y, d.x);
            assert!((upper.normal(s) - n_upper).norm() < 1e-12);
            for ramp in [&lower, &upper] {
                assert!(ramp.normal(s).dot(&ramp.tangent(s)).abs() < 1e-12);
                assert!((ramp.normal(s).norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn apex_normals_are_vertical() {
        let spec = figure_spec();
        let x_slope = RotatedAlpha::for_spec(&spec).tangent(apex_param(&spec)).x;
        assert!(x_slope > 0.0);
        let n = lower_ramp(&spec).normal(0.0);
        assert!((n - Vec2::new(0.0, -1.0)).norm() < 1e-15);
        let n = upper_ramp(&spec).normal(0.0);
        assert!((n - Vec2::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn normal_force_profile() {
        let spec = figure_spec();
        for branch in [Branch::Lower, Branch::Upper] {
            assert!(normal_force_2d(&spec, branch, 0.0).unwrap().abs() < 1e-12);
            for t in grid(1e-3, 20.0, 200) {
                assert!(normal_force_2d(&spec, branch, t).unwrap() > 0.0);
            }
            let ramp = ramp_for_branch(&spec, branch);
            for t in grid(0.0, 3.0, 31) {
                let law = ramp
                    .claimed_normal_force(spec.m(), spec.g(), spec.v() * t)
                    .unwrap();
                let closed = normal_force_2d(&spec, branch, t).unwrap();
                assert!((law - closed).abs() < 1e-12);
            }
        }
        assert!(normal_force_2d(&spec, Branch::Lower, -1.0).is_err());
    }

    #[test]
    fn lower_branch_normal_force_tends_to_incline_value() {
        let spec = figure_spec();
        let far = normal_force_2d(&spec, Branch::Lower, 60.0 / (spec.a() * spec.v())).unwrap();
        let incline = spec.m() * spec.g() * spec.delta().cos();
        assert!((far - incline).abs() < 1e-9);
    }

    #[test]
    fn dilation_scales_geometry() {
        let spec = figure_spec();
        let ramp = lower_ramp(&spec);
        assert!(ramp.dilate(0.0).is_err());
        let same = ramp.dilate(1.0).unwrap();
        assert_eq!(same.position(1.3), ramp.position(1.3));
        let big = ramp.dilate(4.0).unwrap();
        assert_eq!(big.dilation(), 4.0);
        for s in grid(0.0, 6.0, 13) {
            assert!((big.position(4.0 * s) - 4.0 * ramp.position(s)).norm() < 1e-12);
            assert!((big.tangent(4.0 * s).norm() - 1.0).abs() < 1e-12);
        }
        // A dilated branch ramp is the branch ramp of the spec with speed 2v.
        let fast = lower_ramp(&spec.with_speed(2.0 * spec.v()).unwrap());
        for s in grid(0.0, 20.0, 21) {
            assert!((big.position(s) - fast.position(s)).norm() < 1e-10);
        }
    }
}
