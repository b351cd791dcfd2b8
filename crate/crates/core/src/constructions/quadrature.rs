//! Adaptive Simpson quadrature on an interval.

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `int_a^b f` to absolute tolerance `tol` (Richardson-corrected Simpson).
///
/// The interval is split into 16 panels first so periodic integrands are
/// not mistaken for constants by the initial five-point estimate.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let panels = 16;
    let h = (b - a) / panels as f64;
    let f = &f as &dyn Fn(f64) -> f64;
    (0..panels)
        .map(|i| {
            let (x0, x1) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (f0, fm, f1) = (f(x0), f(0.5 * (x0 + x1)), f(x1));
            refine(f, x0, x1, f0, fm, f1, simpson(f0, fm, f1, h), tol / panels as f64, 40)
        })
        .sum()
}

/// Closed one-dimensional integral for `c_2^{12}` of the constant-trace
/// field `[[5 + sin, 1 + cos], [1 + cos, 5 - sin]](2 pi y1)`.
pub fn constant_trace_c212_integral(tol: f64) -> f64 {
    use std::f64::consts::PI;
    let s6 = 6f64.sqrt();
    adaptive_simpson(
        |t| {
            let (s, c) = (2.0 * PI * t).sin_cos();
            (1.0 / (2.0 * PI) - s6 / PI * (1.0 + c) / (5.0 + s)) * (5.0 + s).ln()
        },
        0.0,
        1.0,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = adaptive_simpson(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12);
        assert!((v - 0.0).abs() < 1e-12);
    }

    #[test]
    fn periodic_squares() {
        let v = adaptive_simpson(|t| (2.0 * std::f64::consts::PI * t).sin().powi(2), 0.0, 1.0, 1e-12);
        assert!((v - 0.5).abs() < 1e-11);
    }

    #[test]
    fn integral_leading_digits() {
        let v = constant_trace_c212_integral(1e-12);
        assert!(v > 0.0025 && v < 0.0045, "{v}");
    }
}
