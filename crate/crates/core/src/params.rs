//! Physical parameters shared by every ramp construction.
//!
//! A [`FrictionSpec`] bundles the friction angle, gravity, target speed and
//! mass together with the derived quantities `mu = tan(delta)` and the inverse
//! length scale `a = g / (v^2 sin(delta))`. All values are SI; angles are in
//! radians.

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Standard gravity used when the caller does not supply one, in m/s².
pub const EARTH_GRAVITY: f64 = 9.81;

/// Relative tolerance applied when a serialized spec is reloaded and its
/// stored derived fields are compared with freshly computed ones.
pub const DERIVED_FIELD_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("friction angle {delta} rad is outside the open interval (0, pi/4)")]
    AngleOutOfRange { delta: f64 },
    #[error("friction coefficient {mu} is outside the open interval (0, 1)")]
    FrictionOutOfRange { mu: f64 },
    #[error("{name} must be finite and strictly positive, got {value}")]
    NonPositiveMagnitude { name: &'static str, value: f64 },
    #[error("stored {name} = {stored} disagrees with recomputed value {computed}")]
    DerivedMismatch {
        name: &'static str,
        stored: f64,
        computed: f64,
    },
}

/// Validated parameter bundle for a constant-speed ramp.
///
/// Construct through [`make_spec`] or [`spec_from_mu`]; the fields are
/// read-only so the derived constants can never drift from their inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct FrictionSpec {
    delta: f64,
    mu: f64,
    g: f64,
    v: f64,
    m: f64,
    a: f64,
}

impl FrictionSpec {
    /// Friction angle δ in radians.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Kinetic friction coefficient μ = tan δ.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Gravity magnitude in m/s².
    pub fn g(&self) -> f64 {
        self.g
    }

    /// Target constant speed in m/s.
    pub fn v(&self) -> f64 {
        self.v
    }

    /// Block mass in kg.
    pub fn m(&self) -> f64 {
        self.m
    }

    /// Inverse length scale a = g / (v² sin δ), in 1/m.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Same friction (bit-exact `mu`) at a different speed.
    pub fn with_speed(&self, v: f64) -> Result<Self, ParamError> {
        Ok(FrictionSpec {
            mu: self.mu,
            ..make_spec(self.delta, self.g, v, self.m)?
        })
    }

    pub fn with_gravity(&self, g: f64) -> Result<Self, ParamError> {
        Ok(FrictionSpec {
            mu: self.mu,
            ..make_spec(self.delta, g, self.v, self.m)?
        })
    }

    pub fn with_mass(&self, m: f64) -> Result<Self, ParamError> {
        Ok(FrictionSpec {
            mu: self.mu,
            ..make_spec(self.delta, self.g, self.v, m)?
        })
    }

    /// Same speed, gravity and mass with a different friction coefficient.
    pub fn with_mu(&self, mu: f64) -> Result<Self, ParamError> {
        spec_from_mu(mu, self.g, self.v, self.m)
    }
}

fn check_magnitude(name: &'static str, value: f64) -> Result<(), ParamError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ParamError::NonPositiveMagnitude { name, value })
    }
}

/// Builds a spec from the friction angle.
///
/// The angle must lie strictly inside (0, π/4); gravity, speed and mass must
/// be finite and positive. Angle and magnitude failures are reported with
/// distinct error variants.
pub fn make_spec(delta: f64, g: f64, v: f64, m: f64) -> Result<FrictionSpec, ParamError> {
    if !(delta.is_finite() && delta > 0.0 && delta < FRAC_PI_4) {
        return Err(ParamError::AngleOutOfRange { delta });
    }
    check_magnitude("g", g)?;
    check_magnitude("v", v)?;
    check_magnitude("m", m)?;
    let a = g / (v * v * delta.sin());
    check_magnitude("a", a)?;
    Ok(FrictionSpec {
        delta,
        mu: delta.tan(),
        g,
        v,
        m,
        a,
    })
}

/// Builds a spec from the friction coefficient, `delta = atan(mu)`.
pub fn spec_from_mu(mu: f64, g: f64, v: f64, m: f64) -> Result<FrictionSpec, ParamError> {
    if !(mu.is_finite() && mu > 0.0 && mu < 1.0) {
        return Err(ParamError::FrictionOutOfRange { mu });
    }
    let spec = make_spec(mu.atan(), g, v, m)?;
    // Keep the caller's mu bit-exact rather than tan(atan(mu)).
    Ok(FrictionSpec { mu, ..spec })
}

/// Flat JSON representation `{delta, mu, g, v, m, a}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    delta: f64,
    mu: f64,
    g: f64,
    v: f64,
    m: f64,
    a: f64,
}

impl From<FrictionSpec> for RawSpec {
    fn from(s: FrictionSpec) -> Self {
        RawSpec {
            delta: s.delta,
            mu: s.mu,
            g: s.g,
            v: s.v,
            m: s.m,
            a: s.a,
        }
    }
}

fn close(stored: f64, computed: f64) -> bool {
    (stored - computed).abs() <= DERIVED_FIELD_TOLERANCE * computed.abs().max(1.0)
}

impl TryFrom<RawSpec> for FrictionSpec {
    type Error = ParamError;

    fn try_from(raw: RawSpec) -> Result<Self, Self::Error> {
        let spec = make_spec(raw.delta, raw.g, raw.v, raw.m)?;
        for (name, stored, computed) in [("mu", raw.mu, spec.mu), ("a", raw.a, spec.a)] {
            if !close(stored, computed) {
                return Err(ParamError::DerivedMismatch {
                    name,
                    stored,
                    computed,
                });
            }
        }
        // mu may come from spec_from_mu, where it is kept bit-exact
        Ok(FrictionSpec { mu: raw.mu, ..spec })
    }
}
