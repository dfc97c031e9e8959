//! Internal adaptive quadrature helpers.

/// Adaptive Simpson integration with Richardson correction. `tol` is an
/// absolute tolerance for the whole interval; recursion stops at `max_depth`
/// halvings.
pub(crate) fn adaptive_simpson<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> f64 {
    if a >= b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(&mut f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integrates over `[a, b]` split at the given interior points (clipped,
/// sorted and deduplicated), summing adaptive Simpson panels. Useful when
/// the integrand has known scale changes.
pub(crate) fn adaptive_simpson_split<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    splits: &[f64],
    tol: f64,
    max_depth: u32,
) -> f64 {
    let mut knots: Vec<f64> = splits
        .iter()
        .copied()
        .filter(|x| *x > a && *x < b)
        .collect();
    knots.push(a);
    knots.push(b);
    knots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    knots.dedup();
    let panels = (knots.len() - 1) as f64;
    let mut acc = 0.0;
    for w in knots.windows(2) {
        acc += adaptive_simpson(&mut f, w[0], w[1], tol / panels, max_depth);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let v = adaptive_simpson(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-12, 40);
        // antiderivative x^4/4 - x^2 + x
        let exact = (81.0 / 4.0 - 9.0 + 3.0) - (0.25 - 1.0 - 1.0);
        assert!((v - exact).abs() < 1e-10);
    }

    #[test]
    fn integrates_gaussian_bump() {
        let v = adaptive_simpson(|x: f64| (-x * x / 2.0).exp(), -10.0, 10.0, 1e-12, 48);
        assert!((v - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn split_handles_narrow_feature() {
        // narrow spike at 5 inside a wide interval
        let f = |x: f64| (-(x - 5.0) * (x - 5.0) / (2.0 * 1e-4)).exp();
        let v = adaptive_simpson_split(f, 0.0, 100.0, &[5.0], 1e-12, 48);
        let exact = (2.0 * std::f64::consts::PI * 1e-4).sqrt();
        assert!((v - exact).abs() < 1e-9, "{v} vs {exact}");
    }
}
