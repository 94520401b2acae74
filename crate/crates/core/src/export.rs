//! File writers: CSV, SVG, OBJ, JSON and JSON-lines.
//!
//! Numeric columns in CSV and OBJ use 17 significant digits so values
//! round-trip exactly and repeated runs are byte-identical. SVG coordinates
//! use 6 significant digits.

use std::io::{self, Write};

use serde::Serialize;

use crate::ode::ThetaSample;
use crate::params::FrictionSpec;
use crate::planar::RampSample;
use crate::ramp3d::{lambda_3d, HemispherePoint, RampSurface3D, SpaceCurve3D};
use crate::sim::MotionTrace;
use crate::verify::ForceBalanceReport;

/// 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// 6 significant digits, fixed notation where reasonable.
pub fn fmt_short(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = 5 - magnitude;
    if (0..=12).contains(&decimals) {
        let s = format!("{x:.*}", decimals as usize);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else if decimals < 0 && magnitude < 15 {
        format!("{:.0}", x)
    } else {
        format!("{x:.5e}")
    }
}

fn row<W: Write>(w: &mut W, values: &[f64]) -> io::Result<()> {
    let cells: Vec<String> = values.iter().map(|&v| fmt_f64(v)).collect();
    writeln!(w, "{}", cells.join(","))
}

pub const RAMP_CSV_HEADER: &str = "s,x,y,tx,ty,nx,ny,lambda";
pub const THETA_CSV_HEADER: &str = "s,theta,theta_closed,abs_err";
pub const CURVE3D_CSV_HEADER: &str = "s,x,y,z,tx,ty,tz,lambda";

pub fn write_ramp_csv<W: Write>(w: &mut W, samples: &[RampSample]) -> io::Result<()> {
    writeln!(w, "{RAMP_CSV_HEADER}")?;
    for r in samples {
        row(w, &[r.s, r.x, r.y, r.tx, r.ty, r.nx, r.ny, r.lambda])?;
    }
    Ok(())
}

pub fn write_theta_csv<W: Write>(w: &mut W, samples: &[ThetaSample]) -> io::Result<()> {
    writeln!(w, "{THETA_CSV_HEADER}")?;
    for r in samples {
        row(w, &[r.s, r.theta, r.theta_closed, r.abs_err])?;
    }
    Ok(())
}

/// Curve samples with the normal force for `spec` at each node.
pub fn write_curve3d_csv<W: Write>(
    w: &mut W,
    spec: &FrictionSpec,
    curve: &SpaceCurve3D,
) -> io::Result<()> {
    writeln!(w, "{CURVE3D_CSV_HEADER}")?;
    for ((s, p), t) in curve
        .params()
        .iter()
        .zip(curve.positions())
        .zip(curve.tangents())
    {
        let lambda = HemispherePoint::new(*t)
            .map(|y| lambda_3d(spec, &y))
            .unwrap_or(f64::NAN);
        row(w, &[*s, p.x, p.y, p.z, t.x, t.y, t.z, lambda])?;
    }
    Ok(())
}

/// The ramp profile as an SVG path, y axis pointing up, framed with a small
/// margin.
pub fn write_svg<W: Write>(w: &mut W, samples: &[RampSample]) -> io::Result<()> {
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for r in samples {
        x0 = x0.min(r.x);
        x1 = x1.max(r.x);
        y0 = y0.min(r.y);
        y1 = y1.max(r.y);
    }
    if samples.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let margin = 0.05 * (x1 - x0).max(y1 - y0).max(1e-9);
    let (vx, vy) = (x0 - margin, -y1 - margin);
    let (vw, vh) = (x1 - x0 + 2.0 * margin, y1 - y0 + 2.0 * margin);
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}">"#,
        fmt_short(vx),
        fmt_short(vy),
        fmt_short(vw),
        fmt_short(vh)
    )?;
    let mut d = String::new();
    for (i, r) in samples.iter().enumerate() {
        d.push_str(if i == 0 { "M" } else { " L" });
        d.push_str(&format!("{} {}", fmt_short(r.x), fmt_short(-r.y)));
    }
    writeln!(
        w,
        r#"<path d="{d}" fill="none" stroke="black" stroke-width="{}"/>"#,
        fmt_short(margin * 0.1)
    )?;
    writeln!(w, "</svg>")
}

/// Vertices, per-vertex normals and triangles of a ramp surface.
pub fn write_obj_mesh<W: Write>(w: &mut W, surface: &RampSurface3D) -> io::Result<()> {
    let (n_s, n_r) = surface.resolution();
    writeln!(w, "# ramp surface {n_s}x{n_r}")?;
    for v in surface.vertices() {
        writeln!(w, "v {} {} {}", fmt_f64(v.x), fmt_f64(v.y), fmt_f64(v.z))?;
    }
    for n in surface.normals() {
        writeln!(w, "vn {} {} {}", fmt_f64(n.x), fmt_f64(n.y), fmt_f64(n.z))?;
    }
    for [a, b, c] in surface.triangles() {
        let (a, b, c) = (a + 1, b + 1, c + 1);
        writeln!(w, "f {a}//{a} {b}//{b} {c}//{c}")?;
    }
    Ok(())
}

/// Points joined as a single OBJ line element.
pub fn write_obj_polyline<W: Write>(w: &mut W, points: &[[f64; 3]]) -> io::Result<()> {
    for p in points {
        writeln!(w, "v {} {} {}", fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(p[2]))?;
    }
    if points.len() >= 2 {
        let idx: Vec<String> = (1..=points.len()).map(|i| i.to_string()).collect();
        writeln!(w, "l {}", idx.join(" "))?;
    }
    Ok(())
}

/// One JSON object per frame per line.
pub fn write_trace_jsonl<W: Write, const D: usize>(
    w: &mut W,
    trace: &MotionTrace<D>,
) -> io::Result<()> {
    for f in &trace.frames {
        serde_json::to_writer(&mut *w, f)?;
        writeln!(w)?;
    }
    Ok(())
}

fn axis_names(d: usize) -> &'static [&'static str] {
    &["x", "y", "z"][..d]
}

pub fn trace_csv_header(d: usize) -> String {
    let mut cols = vec!["t".to_string()];
    for prefix in ["p", "v", "gravity_", "normal_", "friction_"] {
        cols.extend(axis_names(d).iter().map(|a| format!("{prefix}{a}")));
    }
    cols.push("residual".into());
    cols.join(",")
}

pub fn write_trace_csv<W: Write, const D: usize>(
    w: &mut W,
    trace: &MotionTrace<D>,
) -> io::Result<()> {
    writeln!(w, "{}", trace_csv_header(D))?;
    for f in &trace.frames {
        let mut values = vec![f.t];
        for v in [
            &f.position,
            &f.velocity,
            &f.gravity_force,
            &f.normal_force,
            &f.friction_force,
        ] {
            values.extend_from_slice(v);
        }
        values.push(f.residual);
        row(w, &values)?;
    }
    Ok(())
}

/// Pretty-printed JSON followed by a newline.
pub fn write_json<W: Write, T: Serialize>(w: &mut W, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)
}

pub const REPORT_CSV_HEADER: &str = "t,residual,lambda";

/// Residual and normal-force profiles side by side.
pub fn write_report_csv<W: Write>(w: &mut W, report: &ForceBalanceReport) -> io::Result<()> {
    writeln!(w, "{REPORT_CSV_HEADER}")?;
    for (r, l) in report.residual_profile.iter().zip(&report.lambda_profile) {
        row(w, &[r.t, r.value, l.value])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::IntegratorConfig;
    use crate::params::spec_from_mu;
    use crate::planar::{lower_ramp, sample_ramp};
    use crate::ramp3d::{build_surface, integrate_ramp3d, BuiltinField, TangentField, Vec3};
    use crate::sim::simulate_2d;
    use crate::verify::verify_2d;

    fn spec() -> FrictionSpec {
        spec_from_mu(0.5, 9.81, 5.0, 1.0).unwrap()
    }

    #[test]
    fn full_precision_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, std::f64::consts::PI] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn short_format() {
        assert_eq!(fmt_short(1.23456789), "1.23457");
        assert_eq!(fmt_short(-0.5), "-0.5");
        assert_eq!(fmt_short(1234567.0), "1234567");
        assert_eq!(fmt_short(1.5e-9), "1.50000e-9");
        assert_eq!(fmt_short(0.0), "0");
    }

    #[test]
    fn ramp_csv_layout() {
        let spec = spec();
        let samples = sample_ramp(&spec, &lower_ramp(&spec), 5.0, 11);
        let mut out = Vec::new();
        write_ramp_csv(&mut out, &samples).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], RAMP_CSV_HEADER);
        assert_eq!(lines.len(), 12);
        let cells: Vec<f64> = lines[3].split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells[1], samples[2].x);
    }

    #[test]
    fn svg_has_single_path() {
        let spec = spec();
        let samples = sample_ramp(&spec, &lower_ramp(&spec), 5.0, 20);
        let mut out = Vec::new();
        write_svg(&mut out, &samples).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("<svg"));
        assert_eq!(text.matches("<path").count(), 1);
        assert_eq!(text.matches(" L").count(), 19);
    }

    #[test]
    fn obj_mesh_counts() {
        let spec = spec();
        let field = TangentField::builtin(BuiltinField::UpSlope).unwrap();
        let y0 = HemispherePoint::from_direction(Vec3::new(1.0, 0.2, -0.3)).unwrap();
        let curve = integrate_ramp3d(
            &spec,
            &field,
            &y0,
            3.0,
            &IntegratorConfig::default_for(&spec),
        )
        .unwrap();
        let surface = build_surface(&curve, &field, (-0.5, 0.5), (6, 3)).unwrap();
        let mut out = Vec::new();
        write_obj_mesh(&mut out, &surface).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 18);
        assert_eq!(text.lines().filter(|l| l.starts_with("vn ")).count(), 18);
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 20);
    }

    #[test]
    fn polyline() {
        let mut out = Vec::new();
        write_obj_polyline(&mut out, &[[0.0; 3], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0]]).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.ends_with("l 1 2 3\n"));
    }

    #[test]
    fn trace_exports() {
        let spec = spec();
        let trace = simulate_2d(&spec, &lower_ramp(&spec), (0.0, 0.1), 30.0).unwrap();
        let mut jsonl = Vec::new();
        write_trace_jsonl(&mut jsonl, &trace).unwrap();
        assert_eq!(String::from_utf8(jsonl).unwrap().lines().count(), 4);
        let mut csv = Vec::new();
        write_trace_csv(&mut csv, &trace).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "t,px,py,vx,vy,gravity_x,gravity_y,normal_x,normal_y,friction_x,friction_y,residual"
        );
        assert_eq!(text.lines().nth(1).unwrap().split(',').count(), 12);
    }

    #[test]
    fn report_exports() {
        let spec = spec();
        let report = verify_2d(&spec, &lower_ramp(&spec), (0.0, 1.0), 5).unwrap();
        let mut csv = Vec::new();
        write_report_csv(&mut csv, &report).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 6);
        let mut json = Vec::new();
        write_json(&mut json, &report).unwrap();
        let back: ForceBalanceReport = serde_json::from_slice(&json).unwrap();
        assert_eq!(back, report);
    }
}
