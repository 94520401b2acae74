//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rampforge::ode::{
    integrate_rk4, integrate_theta, theta_closed_form, theta_ode_rhs, IntegratorConfig,
    ThetaSolution,
};
use rampforge::params::{make_spec, spec_from_mu, FrictionSpec};
use rampforge::planar::{
    lower_ramp, upper_ramp, Alpha, FnCurve, NormalSide, PlanarCurve, Ramp2D, RotatedAlpha, Vec2,
};
use rampforge::ramp3d::{
    integrate_ramp3d, scale_ramp, BuiltinField, HemispherePoint, SpaceCurve3D, TangentField, Vec3,
};
use rampforge::verify::{
    normal_sign_diagnostic, verify_2d, verify_3d, verify_scaling, Feasibility, Motion,
    ScalingTarget, Verdict,
};

const SEED: u64 = 0x5eed_2a3b;

const TOL_ARC_LENGTH: f64 = 1e-12;
const TOL_ASYMPTOTE_GAP: f64 = 1e-9;
const TOL_THETA_CLOSED: f64 = 1e-10;
const TOL_THETA_RK4: f64 = 1e-8;
const ORDER_TARGET: f64 = 4.0;
const ORDER_TOLERANCE: f64 = 0.2;
const TOL_CURVATURE_IDENTITY: f64 = 1e-10;
const TOL_RESIDUAL_2D: f64 = 1e-8;
const TOL_LAMBDA_APEX: f64 = 1e-10;
const TOL_CONTAINMENT: f64 = 1e-9;
const TOL_NORM_DRIFT: f64 = 1e-9;
const TOL_RESIDUAL_3D: f64 = 1e-6;
const TOL_FD_RESIDUAL_3D: f64 = 1e-6;
const TOL_PLANAR_REDUCTION: f64 = 1e-6;
const LIMIT_FAST: Duration = Duration::from_secs(1);
const LIMIT_3D: Duration = Duration::from_secs(10);

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn figure_spec() -> FrictionSpec {
    spec_from_mu(0.5, 9.81, 5.0, 1.0).unwrap()
}

fn random_spec(rng: &mut ChaCha8Rng) -> FrictionSpec {
    let delta = rng.gen_range(0.01..FRAC_PI_4 - 0.01);
    let g = rng.gen_range(1.0..25.0);
    let v = rng.gen_range(0.5..20.0);
    let m = rng.gen_range(0.1..10.0);
    make_spec(delta, g, v, m).unwrap()
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

/// Closed-form tangent angle, written out independently of the library.
fn theta_oracle(spec: &FrictionSpec, s: f64) -> f64 {
    2.0 * (-spec.a() * s).exp().atan() - spec.delta()
}

/// Rotated planar curve, written out independently of the library.
fn rotated_alpha_oracle(spec: &FrictionSpec, s: f64) -> Vec2 {
    let a = spec.a();
    let x = s + (-2.0 * a * s).exp().ln_1p() / a;
    let y = 2.0 / a * (a * s).exp().atan();
    let (sd, cd) = spec.delta().sin_cos();
    Vec2::new(cd * x + sd * y, -sd * x + cd * y)
}

fn arc_length_law() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let spec = random_spec(&mut rng);
        let alpha = Alpha::for_spec(&spec);
        let a = spec.a();
        for s in grid(-10.0 / a, 10.0 / a, 1000) {
            worst = worst.max((alpha.tangent(s).norm() - 1.0).abs());
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: worst <= TOL_ARC_LENGTH && elapsed < LIMIT_FAST,
        detail: format!(
            "20 random specs x 1000 points: max ||alpha'| - 1| = {worst:.2e} (tol {TOL_ARC_LENGTH:.0e}), {:.3} s (limit 1 s)",
            elapsed.as_secs_f64()
        ),
    }
}

fn asymptote_gap() -> Outcome {
    let spec = figure_spec();
    let a = spec.a();
    let alpha = Alpha::for_spec(&spec);
    let gap = alpha.position(1e3 / a).y - alpha.position(-1e3 / a).y;
    let err = (gap - PI / a).abs();
    // pi / a for the figure spec, evaluated in 50-digit arithmetic
    let reference = 3.580_435_642_732_276_4;
    let ref_err = (gap - reference).abs();
    Outcome {
        pass: err <= TOL_ASYMPTOTE_GAP && ref_err <= TOL_ASYMPTOTE_GAP,
        detail: format!(
            "y(1000/a) - y(-1000/a) = {gap:.15}; |gap - pi/a| = {err:.2e}, |gap - reference| = {ref_err:.2e} (tol {TOL_ASYMPTOTE_GAP:.0e})"
        ),
    }
}

fn angle_ode() -> Outcome {
    let spec = figure_spec();
    let a = spec.a();
    let closed = ThetaSolution::new(spec);

    let mut closed_residual: f64 = 0.0;
    let mut oracle_gap: f64 = 0.0;
    for s in grid(-10.0 / a, 10.0 / a, 2001) {
        let th = theta_closed_form(&spec, s);
        closed_residual =
            closed_residual.max((closed.derivative(s) - theta_ode_rhs(&spec, th)).abs());
        oracle_gap = oracle_gap.max((th - theta_oracle(&spec, s)).abs());
    }

    let config = IntegratorConfig::rk4(1e-3 / a);
    let theta0 = FRAC_PI_2 - spec.delta();
    let sol = integrate_theta(&spec, theta0, (0.0, 10.0 / a), &config).unwrap();
    let rk4_err = sol
        .s
        .iter()
        .zip(&sol.y)
        .map(|(s, y)| (y - theta_oracle(&spec, *s)).abs())
        .fold(0.0, f64::max);

    let err_at = |h: f64| {
        let sol =
            integrate_rk4(|_, t| theta_ode_rhs(&spec, t), theta0, (0.0, 10.0 / a), h).unwrap();
        sol.s
            .iter()
            .zip(&sol.y)
            .map(|(s, y)| (y - theta_oracle(&spec, *s)).abs())
            .fold(0.0, f64::max)
    };
    let order = (err_at(0.1 / a) / err_at(0.05 / a)).log2();

    Outcome {
        pass: closed_residual < TOL_THETA_CLOSED
            && oracle_gap < TOL_THETA_CLOSED
            && rk4_err < TOL_THETA_RK4
            && (order - ORDER_TARGET).abs() <= ORDER_TOLERANCE,
        detail: format!(
            "closed-form residual {closed_residual:.2e}, oracle gap {oracle_gap:.2e} (tol {TOL_THETA_CLOSED:.0e}); RK4 h=1e-3/a error {rk4_err:.2e} (tol {TOL_THETA_RK4:.0e}); observed order {order:.3} (target {ORDER_TARGET} +- {ORDER_TOLERANCE})"
        ),
    }
}

fn curvature_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut worst: f64 = 0.0;
    for spec in std::iter::once(figure_spec()).chain((0..10).map(|_| random_spec(&mut rng))) {
        let a = spec.a();
        let curve = RotatedAlpha::for_spec(&spec);
        for s in grid(-10.0 / a, 10.0 / a, 1001) {
            let t = curve.tangent(s);
            let k = curve.second_derivative(s).dot(&Vec2::new(t.y, -t.x));
            worst = worst.max((k - a / (a * s).cosh()).abs());
        }
    }
    Outcome {
        pass: worst < TOL_CURVATURE_IDENTITY,
        detail: format!(
            "alpha_d'' . (y_d', -x_d') - a sech(a s) over 11 specs x 1001 points: max {worst:.2e} (tol {TOL_CURVATURE_IDENTITY:.0e})"
        ),
    }
}

fn planar_theorem() -> Outcome {
    let start = Instant::now();
    let spec = figure_spec();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, ramp) in [("lower", lower_ramp(&spec)), ("upper", upper_ramp(&spec))] {
        let r = verify_2d(&spec, &ramp, (0.0, 2.0), 2001).unwrap();
        let lambda0 = r.lambda_profile[0].value;
        let positive_after = r.lambda_profile[1..].iter().all(|p| p.value > 0.0);
        pass &= r.verdict == Verdict::Valid
            && r.max_residual < TOL_RESIDUAL_2D
            && lambda0.abs() <= TOL_LAMBDA_APEX
            && positive_after;
        parts.push(format!(
            "{name}: {:?}, residual {:.2e}, lambda(0) {:.1e}, lambda>0 after start: {positive_after}",
            r.verdict, r.max_residual, lambda0
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < LIMIT_FAST;
    Outcome {
        pass,
        detail: format!(
            "{} (tol {TOL_RESIDUAL_2D:.0e} N, apex {TOL_LAMBDA_APEX:.0e} N), {:.3} s (limit 1 s)",
            parts.join("; "),
            elapsed.as_secs_f64()
        ),
    }
}

fn parabola_no_solution() -> Outcome {
    let curve = FnCurve::new(
        |t| Vec2::new(t, t * t),
        |t| Vec2::new(1.0, 2.0 * t),
        |_| Vec2::new(0.0, 2.0),
        (f64::NEG_INFINITY, f64::INFINITY),
    );
    let ramp = Ramp2D::new(Arc::new(curve), NormalSide::Right);
    let downward = ramp.normal(0.0).y < 0.0;
    let gravity = |_: Vec2| Vec2::new(0.0, -9.81);
    let mut all_infeasible = true;
    let mut worst = f64::INFINITY;
    for rate in [0.1, 1.0, 3.0] {
        let motion = Motion::Affine { offset: -1.0, rate };
        let d = normal_sign_diagnostic(&ramp, &gravity, 1.0, 0.0, &motion, (0.0, 2.0 / rate), 201)
            .unwrap();
        all_infeasible &= d.verdict == Feasibility::Infeasible;
        worst = worst.min(d.lambda_min);
    }
    Outcome {
        pass: downward && all_infeasible,
        detail: format!(
            "gamma(t) = (t, t^2) with downward normal, three motions through the apex: Infeasible = {all_infeasible}, min required lambda {worst:.3} N"
        ),
    }
}

fn random_interior_start(rng: &mut ChaCha8Rng) -> HemispherePoint {
    let z: f64 = rng.gen_range(-0.9..-0.1);
    let az: f64 = rng.gen_range(0.0..2.0 * PI);
    let r = (1.0 - z * z).sqrt();
    HemispherePoint::from_direction(Vec3::new(r * az.cos(), r * az.sin(), z)).unwrap()
}

/// Newton residual with gamma' from five-point central differences of the
/// stored direction samples instead of the generating field.
fn finite_difference_residual(
    spec: &FrictionSpec,
    curve: &SpaceCurve3D,
    field: &TangentField,
) -> f64 {
    let (m, g, v, mu) = (spec.m(), spec.g(), spec.v(), spec.mu());
    let t = curve.tangents();
    let h = curve.step();
    (2..t.len() - 2)
        .map(|i| {
            let gamma = t[i];
            let rate = (t[i - 2] - t[i + 2] + (t[i + 1] - t[i - 1]) * 8.0) / (12.0 * h);
            let lambda = -m * g * gamma.z / mu;
            let n = field.eval(&gamma).unwrap();
            (Vec3::new(0.0, 0.0, -m * g) + n * lambda - gamma * (mu * lambda) - rate * (m * v * v))
                .norm()
        })
        .fold(0.0, f64::max)
}

fn spatial_theorem() -> Outcome {
    let start = Instant::now();
    let spec = figure_spec();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let config = IntegratorConfig::default_for(&spec);
    let s_max = 5.0 / spec.a();
    let mut pass = true;
    let mut parts = Vec::new();
    for kind in [BuiltinField::UpSlope, BuiltinField::Horizontal] {
        let field = TangentField::builtin(kind).unwrap();
        let (mut z_max, mut drift, mut residual, mut fd_residual) =
            (f64::NEG_INFINITY, 0.0f64, 0.0f64, 0.0f64);
        let mut lambda_positive = true;
        let mut all_valid = true;
        for _ in 0..10 {
            let y0 = random_interior_start(&mut rng);
            let curve = integrate_ramp3d(&spec, &field, &y0, s_max, &config).unwrap();
            z_max = curve.tangents().iter().map(|t| t.z).fold(z_max, f64::max);
            drift = drift.max(curve.drift().max_step);
            drift = curve
                .tangents()
                .iter()
                .map(|t| (t.norm() - 1.0).abs())
                .fold(drift, f64::max);
            let r = verify_3d(&spec, &curve, (0.0, s_max / spec.v()), 1001).unwrap();
            residual = residual.max(r.max_residual);
            all_valid &= r.verdict == Verdict::Valid;
            lambda_positive &= r.lambda_min > 0.0;
            fd_residual = fd_residual.max(finite_difference_residual(&spec, &curve, &field));
        }
        pass &= z_max <= TOL_CONTAINMENT
            && drift < TOL_NORM_DRIFT
            && residual < TOL_RESIDUAL_3D
            && all_valid
            && lambda_positive
            && fd_residual < TOL_FD_RESIDUAL_3D;
        parts.push(format!(
            "{}: max gamma3 {z_max:.3}, drift {drift:.1e}, residual {residual:.1e} (finite-difference {fd_residual:.1e}), all Valid {all_valid}, lambda>0 {lambda_positive}",
            field.name()
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < LIMIT_3D;
    Outcome {
        pass,
        detail: format!(
            "10 random interior starts per field; {} (tol: containment {TOL_CONTAINMENT:.0e}, drift {TOL_NORM_DRIFT:.0e}, residual {TOL_RESIDUAL_3D:.0e} N, finite-difference {TOL_FD_RESIDUAL_3D:.0e} N), {:.2} s (limit 10 s)",
            parts.join("; "),
            elapsed.as_secs_f64()
        ),
    }
}

fn planar_reduction() -> Outcome {
    let spec = figure_spec();
    let a = spec.a();
    let field = TangentField::builtin(BuiltinField::UpSlope).unwrap();
    let y0 = HemispherePoint::new(Vec3::x()).unwrap();
    let curve = integrate_ramp3d(
        &spec,
        &field,
        &y0,
        5.0 / a,
        &IntegratorConfig::default_for(&spec),
    )
    .unwrap();
    let apex = (1.0 / spec.delta().tan()).asinh() / a;
    let origin = rotated_alpha_oracle(&spec, apex);
    let mut worst: f64 = 0.0;
    for (s, p) in curve.params().iter().zip(curve.positions()) {
        let q = rotated_alpha_oracle(&spec, apex + s) - origin;
        worst = worst.max((p - Vec3::new(q.x, 0.0, q.y)).norm());
        // also between samples
        let mid = s + 0.5 * curve.step();
        if mid <= curve.s_max() {
            let q = rotated_alpha_oracle(&spec, apex + mid) - origin;
            worst = worst.max((curve.position(mid) - Vec3::new(q.x, 0.0, q.y)).norm());
        }
    }
    Outcome {
        pass: worst < TOL_PLANAR_REDUCTION,
        detail: format!(
            "UpSlope from (1,0,0) vs closed-form upper branch in the x-z plane over [0, 5/a]: max deviation {worst:.2e} m (tol {TOL_PLANAR_REDUCTION:.0e})"
        ),
    }
}

fn scaling_law() -> Outcome {
    let spec = figure_spec();
    let lower = lower_ramp(&spec);
    let config = IntegratorConfig::default_for(&spec);
    let mut curves = Vec::new();
    for (kind, y0) in [
        (BuiltinField::UpSlope, Vec3::new(1.0, 0.0, 0.0)),
        (BuiltinField::Horizontal, Vec3::new(0.6, 0.5, -0.4)),
    ] {
        let field = TangentField::builtin(kind).unwrap();
        let y0 = HemispherePoint::from_direction(y0).unwrap();
        curves.push(integrate_ramp3d(&spec, &field, &y0, 5.0 / spec.a(), &config).unwrap());
    }
    let mut pass = true;
    let mut parts = Vec::new();
    for kappa in [0.25, 4.0, 6.0] {
        let mut ok = verify_scaling(&spec, ScalingTarget::Planar(&lower), kappa, (0.0, 1.0), 401)
            .unwrap()
            .both_valid();
        for curve in &curves {
            let r =
                verify_scaling(&spec, ScalingTarget::Space(curve), kappa, (0.0, 1.0), 401).unwrap();
            ok &= r.both_valid();
            if kappa == 6.0 {
                ok &= (r.weaker_gravity.spec.g() - 9.81 / 6.0).abs() < 1e-15;
            }
        }
        pass &= ok;
        parts.push(format!(
            "kappa {kappa}: {}",
            if ok { "both Valid" } else { "not Valid" }
        ));
    }
    Outcome {
        pass,
        detail: format!(
            "planar lower branch and two spatial ramps under (sqrt(kappa) v, g) and (v, g/kappa): {}",
            parts.join(", ")
        ),
    }
}

fn negative_controls() -> Outcome {
    let spec = figure_spec();
    let perturbed = spec.with_mu(spec.mu() * 1.1).unwrap();
    let ramp = lower_ramp(&spec);
    let field = TangentField::builtin(BuiltinField::Horizontal).unwrap();
    let y0 = HemispherePoint::from_direction(Vec3::new(0.7, 0.2, -0.5)).unwrap();
    let curve = integrate_ramp3d(
        &spec,
        &field,
        &y0,
        5.0 / spec.a(),
        &IntegratorConfig::default_for(&spec),
    )
    .unwrap();
    let t = (0.0, 0.9 / spec.a());
    let checks = [
        (
            "planar mu+10%",
            verify_2d(&perturbed, &ramp, (0.0, 2.0), 401)
                .unwrap()
                .verdict,
        ),
        (
            "planar x1.01",
            verify_2d(&spec, &scale_ramp(&ramp, 1.01).unwrap(), (0.0, 2.0), 401)
                .unwrap()
                .verdict,
        ),
        (
            "spatial mu+10%",
            verify_3d(&perturbed, &curve, t, 401).unwrap().verdict,
        ),
        (
            "spatial x1.01",
            verify_3d(&spec, &scale_ramp(&curve, 1.01).unwrap(), t, 401)
                .unwrap()
                .verdict,
        ),
    ];
    let pass = checks.iter().all(|(_, v)| *v == Verdict::ResidualExceeded);
    Outcome {
        pass,
        detail: checks
            .iter()
            .map(|(n, v)| format!("{n}: {v:?}"))
            .collect::<Vec<_>>()
            .join(", "),
    }
}

const CLI_RUNS: &[&[&str]] = &[
    &[
        "generate2d",
        "--mu",
        "0.5",
        "--v",
        "5",
        "--branch",
        "lower",
        "--out",
        "lower.csv",
        "--theta-out",
        "theta.csv",
    ],
    &[
        "generate2d",
        "--delta-deg",
        "20",
        "--branch",
        "upper",
        "--format",
        "svg",
        "--out",
        "upper.svg",
    ],
    &["generate2d", "--format", "json", "--out", "ramp.json"],
    &[
        "generate3d",
        "--field",
        "horizontal",
        "--y0",
        "1,0.2,-0.5",
        "--mesh",
        "40x5",
        "--out",
        "space",
    ],
    &[
        "generate3d",
        "--field",
        "blend:0.3",
        "--y0",
        "0.3,0.9,-0.2",
        "--out",
        "blend",
    ],
    &["verify", "--branch", "upper", "--out", "verify.json"],
    &[
        "verify",
        "--kind",
        "space",
        "--field",
        "horizontal",
        "--y0",
        "0,1,-1",
        "--format",
        "csv",
        "--out",
        "verify.csv",
    ],
    &[
        "simulate",
        "--branch",
        "lower",
        "--t-end",
        "2",
        "--out",
        "trace.jsonl",
    ],
    &[
        "simulate",
        "--kind",
        "space",
        "--y0",
        "1,0.5,-0.5",
        "--format",
        "csv",
        "--out",
        "trace.csv",
        "--polyline",
        "trace.obj",
    ],
    &["scale", "--kappa", "6", "--out", "moon.json"],
    &[
        "scale",
        "--kind",
        "space",
        "--field",
        "horizontal",
        "--y0",
        "1,0,-0.5",
        "--kappa",
        "0.25",
        "--out",
        "small.json",
    ],
];

fn run_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let bin = env!("CARGO_BIN_EXE_rampforge");
    let mut captured = Vec::new();
    for args in CLI_RUNS {
        let out = Command::new(bin)
            .args(*args)
            .current_dir(dir)
            .output()
            .unwrap();
        captured.push((
            format!("{} [exit {:?}]", args.join(" "), out.status.code()),
            out.stdout,
        ));
    }
    let mut files: Vec<_> = walk(dir);
    files.sort();
    for path in files {
        let rel = path.strip_prefix(dir).unwrap().display().to_string();
        captured.push((rel, std::fs::read(&path).unwrap()));
    }
    captured
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(walk(&path));
        } else {
            out.push(path);
        }
    }
    out
}

fn cli_determinism() -> Outcome {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let a = run_all(first.path());
    let b = run_all(second.path());
    let all_ok = a
        .iter()
        .take(CLI_RUNS.len())
        .all(|(k, _)| k.ends_with("[exit Some(0)]"));
    let differing: Vec<&str> = a
        .iter()
        .zip(&b)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.0.as_str())
        .collect();
    let same_shape = a.len() == b.len();
    Outcome {
        pass: all_ok && same_shape && differing.is_empty(),
        detail: format!(
            "{} commands run twice, {} outputs compared byte for byte: all exit 0 = {all_ok}, differing = {:?}",
            CLI_RUNS.len(),
            a.len(),
            differing
        ),
    }
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("arc-length parametrization", arc_length_law),
        ("asymptote gap", asymptote_gap),
        ("tangent-angle ODE", angle_ode),
        ("curvature identity", curvature_identity),
        ("planar constant-speed ramps", planar_theorem),
        ("parabola without solution", parabola_no_solution),
        ("spatial constant-speed ramps", spatial_theorem),
        ("planar reduction of spatial ramps", planar_reduction),
        ("scaling law", scaling_law),
        ("negative controls", negative_controls),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = check();
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{tag} [{:>2}] {name}: {}", i + 1, outcome.detail);
        if !outcome.pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
