use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::info;
use serde_json::json;

use super::config::{
    at_least_two, choice, pick, positive, resolve_mesh, resolve_r_extent, resolve_space,
    resolve_spec, RunConfig, SpaceOptions,
};
use super::{
    invalid, CliError, Generate2dArgs, Generate3dArgs, ScaleArgs, SimulateArgs, VerifyArgs,
};
use crate::export::{
    write_curve3d_csv, write_json, write_obj_mesh, write_obj_polyline, write_ramp_csv,
    write_report_csv, write_svg, write_theta_csv, write_trace_csv, write_trace_jsonl,
};
use crate::ode::{compare_with_closed_form, integrate_theta, IntegratorConfig, ThetaSolution};
use crate::params::FrictionSpec;
use crate::planar::{
    apex_param, asymptote_gap, default_span, ramp_for_branch, sample_ramp, Branch, Ramp2D,
};
use crate::ramp3d::{
    build_surface, integrate_ramp3d, planar_reduction_error, SpaceCurve3D, TangentField,
};
use crate::sim::{simulate_2d, simulate_3d, DEFAULT_FPS};
use crate::verify::{
    verify_2d, verify_3d, verify_scaling, ForceBalanceReport, ScalingTarget, TOL_RESIDUAL_3D,
};

fn write_file<F>(path: &Path, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> io::Result<()>,
{
    let io_err = |e: io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    body(&mut w).map_err(io_err)?;
    w.flush().map_err(io_err)?;
    info!("wrote {}", path.display());
    Ok(())
}

fn print_summary(value: &serde_json::Value) {
    let text = serde_json::to_string_pretty(value).expect("summary serializes");
    // a closed stdout (e.g. piped into head) is not an error worth failing on
    let _ = writeln!(io::stdout().lock(), "{text}");
}

fn resolve_branch(flag: &Option<String>, file: &RunConfig) -> Result<Branch, CliError> {
    match pick(flag, &file.branch) {
        Some(b) => b.parse().map_err(invalid),
        None => Ok(Branch::Lower),
    }
}

fn resolve_kind(flag: &Option<String>, file: &RunConfig) -> Result<&'static str, CliError> {
    choice("--kind", pick(flag, &file.kind), &["planar", "space"])
}

fn build_curve(spec: &FrictionSpec, opts: &SpaceOptions) -> Result<SpaceCurve3D, CliError> {
    let field = TangentField::builtin(opts.field).map_err(invalid)?;
    integrate_ramp3d(
        spec,
        &field,
        &opts.y0,
        opts.smax,
        &IntegratorConfig::default_for(spec),
    )
    .map_err(invalid)
}

fn verdict_result(report_valid: bool, what: &str) -> Result<(), CliError> {
    if report_valid {
        Ok(())
    } else {
        Err(CliError::VerificationFailed(format!(
            "{what} did not verify"
        )))
    }
}

fn report_summary(report: &ForceBalanceReport) -> serde_json::Value {
    json!({
        "verdict": report.verdict,
        "max_residual": report.max_residual,
        "max_normal_component": report.max_normal_component,
        "max_tangential_component": report.max_tangential_component,
        "lambda_min": report.lambda_min,
    })
}

pub fn generate2d(args: Generate2dArgs) -> Result<(), CliError> {
    let file = RunConfig::load(args.spec.config.as_deref())?;
    let spec = resolve_spec(&args.spec, &file)?;
    let branch = resolve_branch(&args.branch, &file)?;
    let span = positive(
        "--span",
        pick(&args.span, &file.span).unwrap_or_else(|| default_span(&spec)),
    )?;
    let samples = at_least_two(
        "--samples",
        pick(&args.samples, &file.samples).unwrap_or(401),
    )?;
    let format = choice(
        "--format",
        pick(&args.format, &file.format),
        &["csv", "svg", "json"],
    )?;
    let out =
        pick(&args.out, &file.out).unwrap_or_else(|| PathBuf::from(format!("ramp2d.{format}")));
    let theta_out = pick(&args.theta_out, &file.theta_out);

    let ramp = ramp_for_branch(&spec, branch);
    let rows = sample_ramp(&spec, &ramp, span, samples);
    write_file(&out, |w| match format {
        "csv" => write_ramp_csv(w, &rows),
        "svg" => write_svg(w, &rows),
        _ => write_json(
            w,
            &json!({
                "spec": spec,
                "branch": branch,
                "contact_at_apex": branch.contact_at_apex(),
                "samples": rows,
            }),
        ),
    })?;
    if let Some(path) = &theta_out {
        let closed = ThetaSolution::new(spec);
        let solution = integrate_theta(
            &spec,
            closed.theta(0.0),
            (0.0, span),
            &IntegratorConfig::default_for(&spec),
        )
        .map_err(invalid)?;
        let table = compare_with_closed_form(&solution, &closed);
        write_file(path, |w| write_theta_csv(w, &table))?;
    }
    print_summary(&json!({
        "a": spec.a(),
        "apex_s0": apex_param(&spec),
        "asymptote_gap": asymptote_gap(&spec),
        "branch": branch,
        "contact_at_apex": branch.contact_at_apex(),
        "samples": samples,
        "out": out,
    }));
    Ok(())
}

pub fn generate3d(args: Generate3dArgs) -> Result<(), CliError> {
    let file = RunConfig::load(args.spec.config.as_deref())?;
    let spec = resolve_spec(&args.spec, &file)?;
    let opts = resolve_space(&args.space, &file, &spec)?;
    let r_extent = resolve_r_extent(&args.r_extent, &file, &spec)?;
    let mesh = resolve_mesh(&args.mesh, &file)?;
    let samples = at_least_two(
        "--samples",
        pick(&args.samples, &file.samples).unwrap_or(1001),
    )?;
    let out = pick(&args.out, &file.out).unwrap_or_else(|| PathBuf::from("ramp3d"));

    let curve = build_curve(&spec, &opts)?;
    let field = curve.field().clone();
    let surface = build_surface(&curve, &field, r_extent, mesh).map_err(invalid)?;
    let report =
        verify_3d(&spec, &curve, (0.0, curve.s_max() / spec.v()), samples).map_err(invalid)?;
    let planar = planar_reduction_error(&curve);
    let highest = curve
        .tangents()
        .iter()
        .map(|t| t.z)
        .fold(f64::NEG_INFINITY, f64::max);

    fs::create_dir_all(&out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    let mesh_path = out.join("mesh.obj");
    let curve_path = out.join("curve.csv");
    let report_path = out.join("report.json");
    write_file(&mesh_path, |w| write_obj_mesh(w, &surface))?;
    write_file(&curve_path, |w| write_curve3d_csv(w, &spec, &curve))?;
    write_file(&report_path, |w| {
        write_json(
            w,
            &json!({
                "spec": spec,
                "field": field.name(),
                "y0": opts.y0,
                "s_max": curve.s_max(),
                "stop_reason": curve.stop_reason(),
                "norm_drift": curve.drift(),
                "max_tangent_z": highest,
                "mesh": [mesh.0, mesh.1],
                "r_extent": [r_extent.0, r_extent.1],
                "verification": report,
                "planar_reduction": planar.map(|e| json!({
                    "reference": "upper branch of the planar ramp",
                    "max_deviation": e,
                    "tolerance": TOL_RESIDUAL_3D,
                })),
            }),
        )
    })?;
    let mut summary = report_summary(&report);
    summary["field"] = json!(field.name());
    summary["s_max"] = json!(curve.s_max());
    summary["stop_reason"] = json!(curve.stop_reason());
    summary["planar_reduction_max_deviation"] = json!(planar);
    summary["out"] = json!(out);
    print_summary(&summary);
    verdict_result(report.verdict.is_valid(), "spatial ramp")
}

enum Geometry {
    Planar(Ramp2D),
    Space(Box<SpaceCurve3D>),
}

fn build_geometry(
    kind: &str,
    spec: &FrictionSpec,
    branch: &Option<String>,
    space: &super::SpaceArgs,
    file: &RunConfig,
) -> Result<Geometry, CliError> {
    if kind == "planar" {
        Ok(Geometry::Planar(ramp_for_branch(
            spec,
            resolve_branch(branch, file)?,
        )))
    } else {
        let opts = resolve_space(space, file, spec)?;
        Ok(Geometry::Space(Box::new(build_curve(spec, &opts)?)))
    }
}

fn default_t_end(geometry: &Geometry, spec: &FrictionSpec, planar: f64) -> f64 {
    match geometry {
        Geometry::Planar(_) => planar,
        Geometry::Space(c) => c.s_max() / spec.v(),
    }
}

pub fn verify(args: VerifyArgs) -> Result<(), CliError> {
    let file = RunConfig::load(args.spec.config.as_deref())?;
    let spec = resolve_spec(&args.spec, &file)?;
    let kind = resolve_kind(&args.kind, &file)?;
    let format = choice(
        "--format",
        pick(&args.format, &file.format),
        &["json", "csv"],
    )?;
    let samples = at_least_two(
        "--samples",
        pick(&args.samples, &file.samples).unwrap_or(401),
    )?;
    let checked = match pick(&args.assume_mu, &file.assume_mu) {
        Some(mu) => spec.with_mu(mu).map_err(invalid)?,
        None => spec,
    };
    let out =
        pick(&args.out, &file.out).unwrap_or_else(|| PathBuf::from(format!("report.{format}")));
    let geometry = build_geometry(kind, &spec, &args.branch, &args.space, &file)?;
    let t_end =
        pick(&args.t_end, &file.t_end).unwrap_or_else(|| default_t_end(&geometry, &spec, 2.0));
    let t_end = positive("--t-end", t_end)?;

    let report = match &geometry {
        Geometry::Planar(ramp) => verify_2d(&checked, ramp, (0.0, t_end), samples),
        Geometry::Space(curve) => verify_3d(&checked, curve, (0.0, t_end), samples),
    }
    .map_err(invalid)?;
    write_file(&out, |w| match format {
        "json" => write_json(w, &report),
        _ => write_report_csv(w, &report),
    })?;
    let mut summary = report_summary(&report);
    summary["kind"] = json!(kind);
    summary["out"] = json!(out);
    print_summary(&summary);
    verdict_result(report.verdict.is_valid(), "ramp")
}

pub fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let file = RunConfig::load(args.spec.config.as_deref())?;
    let spec = resolve_spec(&args.spec, &file)?;
    let kind = resolve_kind(&args.kind, &file)?;
    let format = choice(
        "--format",
        pick(&args.format, &file.format),
        &["jsonl", "csv"],
    )?;
    let fps = positive("--fps", pick(&args.fps, &file.fps).unwrap_or(DEFAULT_FPS))?;
    let out =
        pick(&args.out, &file.out).unwrap_or_else(|| PathBuf::from(format!("trace.{format}")));
    let polyline = pick(&args.polyline, &file.polyline);
    if polyline.is_some() && kind == "planar" {
        return Err(invalid("--polyline needs --kind space"));
    }
    let geometry = build_geometry(kind, &spec, &args.branch, &args.space, &file)?;
    let t_end =
        pick(&args.t_end, &file.t_end).unwrap_or_else(|| default_t_end(&geometry, &spec, 2.0));
    let t_end = positive("--t-end", t_end)?;

    let (frames, truncated, max_residual) = match &geometry {
        Geometry::Planar(ramp) => {
            let trace = simulate_2d(&spec, ramp, (0.0, t_end), fps).map_err(invalid)?;
            write_file(&out, |w| match format {
                "jsonl" => write_trace_jsonl(w, &trace),
                _ => write_trace_csv(w, &trace),
            })?;
            let worst = trace.frames.iter().map(|f| f.residual).fold(0.0, f64::max);
            (trace.frames.len(), trace.truncated, worst)
        }
        Geometry::Space(curve) => {
            let trace = simulate_3d(&spec, curve, (0.0, t_end), fps).map_err(invalid)?;
            write_file(&out, |w| match format {
                "jsonl" => write_trace_jsonl(w, &trace),
                _ => write_trace_csv(w, &trace),
            })?;
            if let Some(path) = &polyline {
                let points: Vec<[f64; 3]> = trace.frames.iter().map(|f| f.position).collect();
                write_file(path, |w| write_obj_polyline(w, &points))?;
            }
            let worst = trace.frames.iter().map(|f| f.residual).fold(0.0, f64::max);
            (trace.frames.len(), trace.truncated, worst)
        }
    };
    print_summary(&json!({
        "kind": kind,
        "frames": frames,
        "fps": fps,
        "truncated": truncated,
        "max_residual": max_residual,
        "out": out,
    }));
    Ok(())
}

pub fn scale(args: ScaleArgs) -> Result<(), CliError> {
    let file = RunConfig::load(args.spec.config.as_deref())?;
    let spec = resolve_spec(&args.spec, &file)?;
    let kind = resolve_kind(&args.kind, &file)?;
    let kappa = pick(&args.kappa, &file.kappa).ok_or_else(|| invalid("--kappa is required"))?;
    let kappa = positive("--kappa", kappa)?;
    let samples = at_least_two(
        "--samples",
        pick(&args.samples, &file.samples).unwrap_or(401),
    )?;
    let out = pick(&args.out, &file.out).unwrap_or_else(|| PathBuf::from("scaling.json"));
    let geometry = build_geometry(kind, &spec, &args.branch, &args.space, &file)?;
    let t_end =
        pick(&args.t_end, &file.t_end).unwrap_or_else(|| default_t_end(&geometry, &spec, 1.0));
    let t_end = positive("--t-end", t_end)?;

    let target = match &geometry {
        Geometry::Planar(ramp) => ScalingTarget::Planar(ramp),
        Geometry::Space(curve) => ScalingTarget::Space(curve),
    };
    let report = verify_scaling(&spec, target, kappa, (0.0, t_end), samples).map_err(invalid)?;
    write_file(&out, |w| write_json(w, &report))?;
    print_summary(&json!({
        "kind": kind,
        "kappa": kappa,
        "faster": {
            "v": report.reinterpretation.faster.v(),
            "g": report.reinterpretation.faster.g(),
            "verdict": report.faster.verdict,
            "max_residual": report.faster.max_residual,
        },
        "weaker_gravity": {
            "v": report.reinterpretation.weaker_gravity.v(),
            "g": report.reinterpretation.weaker_gravity.g(),
            "verdict": report.weaker_gravity.verdict,
            "max_residual": report.weaker_gravity.max_residual,
        },
        "out": out,
    }));
    verdict_result(report.both_valid(), "dilated ramp")
}
