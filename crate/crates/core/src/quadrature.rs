//! Cumulative composite Simpson integration on a uniform grid.

use crate::ode::OdeState;

/// Running integral of `values` sampled with spacing `h`, starting at zero.
///
/// Even nodes get the composite Simpson sum. Odd nodes add a three-point
/// partial-panel rule `h/12 (5 f0 + 8 f1 - f2)`, which is exact for
/// quadratics, so the whole sequence is locally fourth-order accurate.
pub fn cumulative_simpson<S>(values: &[S], h: f64, zero: S) -> Vec<S>
where
    S: OdeState,
{
    let n = values.len();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push(zero);
    if n == 1 {
        return out;
    }
    if n == 2 {
        // trapezoid is all two nodes allow
        out.push((values[0] + values[1]) * (0.5 * h));
        return out;
    }
    for i in 1..n {
        let next = if i % 2 == 0 {
            out[i - 2] + (values[i - 2] + values[i - 1] * 4.0 + values[i]) * (h / 3.0)
        } else if i + 1 < n {
            out[i - 1] + (values[i - 1] * 5.0 + values[i] * 8.0 + values[i + 1] * -1.0) * (h / 12.0)
        } else {
            out[i - 1] + (values[i - 2] * -1.0 + values[i - 1] * 8.0 + values[i] * 5.0) * (h / 12.0)
        };
        out.push(next);
    }
    out
}
