//! Composite Simpson and trapezoid rules.

use crate::engine::SPACING_TOL;

fn same_spacing(h0: f64, h1: f64) -> bool {
    (h0 - h1).abs() <= SPACING_TOL * h0.max(h1)
}

/// Running integral of `values` over `points`, starting at zero.
///
/// Consecutive pairs of equal intervals are integrated with Simpson's rule
/// (the midpoint value uses the matching third-order half-panel rule); any
/// interval left over is integrated with the trapezoid rule. The pairing is
/// greedy from the left, so the result is a pure function of the inputs.
pub fn cumulative_integral(points: &[f64], values: &[f64]) -> Vec<f64> {
    assert_eq!(
        points.len(),
        values.len(),
        "points and values differ in length"
    );
    let n = points.len();
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i + 1 < n {
        let h0 = points[i + 1] - points[i];
        if i + 2 < n && same_spacing(h0, points[i + 2] - points[i + 1]) {
            let h = 0.5 * (points[i + 2] - points[i]);
            let (f0, f1, f2) = (values[i], values[i + 1], values[i + 2]);
            out[i + 1] = out[i] + h / 12.0 * (5.0 * f0 + 8.0 * f1 - f2);
            out[i + 2] = out[i] + h / 3.0 * (f0 + 4.0 * f1 + f2);
            i += 2;
        } else {
            out[i + 1] = out[i] + 0.5 * h0 * (values[i] + values[i + 1]);
            i += 1;
        }
    }
    out
}

/// Composite Simpson over uniformly spaced values. An odd number of
/// intervals closes with Simpson's 3/8 rule on the last three.
pub fn simpson_uniform<T>(values: &[T], h: f64) -> T
where
    T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let n = values.len();
    match n {
        0 | 1 => T::default(),
        2 => (values[0] + values[1]) * (0.5 * h),
        3 => (values[0] + values[1] * 4.0 + values[2]) * (h / 3.0),
        _ => {
            let intervals = n - 1;
            let simpson_end = if intervals.is_multiple_of(2) {
                n - 1
            } else {
                n - 4
            };
            let mut total = T::default();
            if simpson_end >= 2 {
                let mut acc = values[0] + values[simpson_end];
                for (j, &v) in values.iter().enumerate().take(simpson_end).skip(1) {
                    acc = acc + v * if j % 2 == 1 { 4.0 } else { 2.0 };
                }
                total = acc * (h / 3.0);
            }
            if simpson_end != n - 1 {
                let s = simpson_end;
                total = total
                    + (values[s] + values[s + 1] * 3.0 + values[s + 2] * 3.0 + values[s + 3])
                        * (3.0 * h / 8.0);
            }
            total
        }
    }
}

/// Trapezoid rule on arbitrary nodes.
pub fn trapezoid(points: &[f64], values: &[f64]) -> f64 {
    points
        .windows(2)
        .zip(values.windows(2))
        .map(|(x, f)| 0.5 * (x[1] - x[0]) * (f[0] + f[1]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cumulative_is_exact_for_cubics_on_uniform_pairs() {
        let pts: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let vals: Vec<f64> = pts.iter().map(|x| x * x * x - x + 2.0).collect();
        let cum = cumulative_integral(&pts, &vals);
        let exact = |x: f64| x.powi(4) / 4.0 - x * x / 2.0 + 2.0 * x;
        for (k, &x) in pts.iter().enumerate().step_by(2) {
            assert!((cum[k] - exact(x)).abs() < 1e-14, "{k}");
        }
        // odd nodes use the half-panel rule, exact for quadratics
        let vals: Vec<f64> = pts.iter().map(|x| 3.0 * x * x + 1.0).collect();
        let cum = cumulative_integral(&pts, &vals);
        for (k, &x) in pts.iter().enumerate() {
            assert!((cum[k] - (x * x * x + x)).abs() < 1e-14, "{k}");
        }
    }

    #[test]
    fn cumulative_falls_back_to_trapezoid() {
        let pts = [0.0, 1.0, 3.0];
        let vals = [1.0, 1.0, 1.0];
        assert_eq!(cumulative_integral(&pts, &vals), vec![0.0, 1.0, 3.0]);
    }

    #[test]
    fn simpson_handles_both_parities() {
        for n in [2usize, 3, 4, 5, 6, 8, 9, 100, 101] {
            let h = 1.0 / (n - 1) as f64;
            let vals: Vec<f64> = (0..n).map(|i| (i as f64 * h).powi(2)).collect();
            let s = simpson_uniform(&vals, h);
            let tol = if n == 2 { 0.2 } else { 1e-13 };
            assert!((s - 1.0 / 3.0).abs() < tol, "n = {n}: {s}");
        }
    }
}
