//! Config-file values and their merge with command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{invalid, CliError, SpaceArgs, SpecArgs};
use crate::params::{make_spec, spec_from_mu, FrictionSpec, EARTH_GRAVITY};
use crate::ramp3d::{BuiltinField, HemispherePoint, Vec3};

/// Every option a command accepts, all optional. Unknown keys are errors.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mu: Option<f64>,
    pub delta_deg: Option<f64>,
    pub v: Option<f64>,
    pub g: Option<f64>,
    pub mass: Option<f64>,
    pub spec: Option<PathBuf>,
    pub kind: Option<String>,
    pub branch: Option<String>,
    pub span: Option<f64>,
    pub samples: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub theta_out: Option<PathBuf>,
    pub field: Option<String>,
    pub y0: Option<[f64; 3]>,
    pub smax: Option<f64>,
    pub r_extent: Option<[f64; 2]>,
    pub mesh: Option<String>,
    pub kappa: Option<f64>,
    pub t_end: Option<f64>,
    pub fps: Option<f64>,
    pub assume_mu: Option<f64>,
    pub polyline: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => serde_json::from_str(&read(p)?)
                .map_err(|e| invalid(format!("{}: {e}", p.display()))),
        }
    }
}

/// Flag value if given, else the config value.
pub fn pick<T: Clone>(flag: &Option<T>, file: &Option<T>) -> Option<T> {
    flag.clone().or_else(|| file.clone())
}

pub fn resolve_spec(args: &SpecArgs, file: &RunConfig) -> Result<FrictionSpec, CliError> {
    let explicit = args.mu.is_some()
        || args.delta_deg.is_some()
        || args.v.is_some()
        || args.g.is_some()
        || args.mass.is_some();
    if let Some(path) = pick(&args.spec, &file.spec) {
        if explicit {
            return Err(invalid(
                "--spec cannot be combined with --mu, --delta-deg, --v, --g or --mass",
            ));
        }
        return serde_json::from_str(&read(&path)?)
            .map_err(|e| invalid(format!("{}: {e}", path.display())));
    }
    let v = pick(&args.v, &file.v).unwrap_or(5.0);
    let g = pick(&args.g, &file.g).unwrap_or(EARTH_GRAVITY);
    let m = pick(&args.mass, &file.mass).unwrap_or(1.0);
    let spec = match (args.mu, args.delta_deg) {
        (Some(mu), _) => spec_from_mu(mu, g, v, m),
        (None, Some(deg)) => make_spec(deg.to_radians(), g, v, m),
        (None, None) => match (file.mu, file.delta_deg) {
            (Some(_), Some(_)) => {
                return Err(invalid("config sets both mu and delta_deg"));
            }
            (Some(mu), None) => spec_from_mu(mu, g, v, m),
            (None, Some(deg)) => make_spec(deg.to_radians(), g, v, m),
            (None, None) => spec_from_mu(0.5, g, v, m),
        },
    };
    spec.map_err(invalid)
}

fn parse_list(text: &str, n: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let values: Result<Vec<f64>, _> = text.split(',').map(|c| c.trim().parse::<f64>()).collect();
    match values {
        Ok(v) if v.len() == n && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(invalid(format!(
            "{what} expects {n} comma-separated numbers, got `{text}`"
        ))),
    }
}

/// Parsed spatial-ramp options.
#[derive(Debug, Clone)]
pub struct SpaceOptions {
    pub field: BuiltinField,
    pub y0: HemispherePoint,
    pub smax: f64,
}

pub fn resolve_space(
    args: &SpaceArgs,
    file: &RunConfig,
    spec: &FrictionSpec,
) -> Result<SpaceOptions, CliError> {
    let field = match pick(&args.field, &file.field) {
        Some(name) => name.parse::<BuiltinField>().map_err(invalid)?,
        None => BuiltinField::UpSlope,
    };
    let y0 = match (&args.y0, &file.y0) {
        (Some(text), _) => {
            let v = parse_list(text, 3, "--y0")?;
            Vec3::new(v[0], v[1], v[2])
        }
        (None, Some(v)) => Vec3::from(*v),
        (None, None) => Vec3::x(),
    };
    let y0 = HemispherePoint::from_direction(y0).map_err(invalid)?;
    let smax = pick(&args.smax, &file.smax).unwrap_or(5.0 / spec.a());
    if !(smax.is_finite() && smax > 0.0) {
        return Err(invalid(format!("--smax must be positive, got {smax}")));
    }
    Ok(SpaceOptions { field, y0, smax })
}

pub fn resolve_r_extent(
    flag: &Option<String>,
    file: &RunConfig,
    spec: &FrictionSpec,
) -> Result<(f64, f64), CliError> {
    match (flag, &file.r_extent) {
        (Some(text), _) => {
            let v = parse_list(text, 2, "--r-extent")?;
            Ok((v[0], v[1]))
        }
        (None, Some([lo, hi])) => Ok((*lo, *hi)),
        (None, None) => Ok((-0.5 / spec.a(), 0.5 / spec.a())),
    }
}

pub fn resolve_mesh(flag: &Option<String>, file: &RunConfig) -> Result<(usize, usize), CliError> {
    let Some(text) = pick(flag, &file.mesh) else {
        return Ok((200, 9));
    };
    let parsed = text
        .split_once(['x', 'X'])
        .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
    match parsed {
        Some((n, m)) if n >= 2 && m >= 2 => Ok((n, m)),
        _ => Err(invalid(format!(
            "--mesh expects NxM with N, M >= 2, got `{text}`"
        ))),
    }
}

pub fn positive(name: &str, value: f64) -> Result<f64, CliError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(invalid(format!("{name} must be positive, got {value}")))
    }
}

pub fn at_least_two(name: &str, value: usize) -> Result<usize, CliError> {
    if value >= 2 {
        Ok(value)
    } else {
        Err(invalid(format!("{name} must be at least 2, got {value}")))
    }
}

/// One of `allowed`, defaulting to the first.
pub fn choice(
    name: &str,
    value: Option<String>,
    allowed: &[&'static str],
) -> Result<&'static str, CliError> {
    match value {
        None => Ok(allowed[0]),
        Some(v) => allowed.iter().find(|a| **a == v).copied().ok_or_else(|| {
            invalid(format!(
                "{name} must be one of {}, got `{v}`",
                allowed.join("|")
            ))
        }),
    }
}
