//! Floating-point integration of `|h|^p` over simplices for affine `h`.
//!
//! The push-forward of the uniform distribution on an `m`-simplex under an
//! affine map `h` is the normalized B-spline `M` whose knots are the vertex
//! values of `h`. So `E|h|^p = ∫ |t|^p M(t) dt`, a one-dimensional integral of a
//! piecewise polynomial against `|t|^p`. Integer `p` is integrated exactly by
//! Gauss–Legendre on each knot interval; other `p` go through adaptive
//! double-exponential quadrature.

// 8-point Gauss–Legendre on [-1, 1]; exact through degree 15.
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Normalized B-spline density with the given sorted knots, evaluated at `t`.
fn bspline_density(knots: &[f64], t: f64) -> f64 {
    let m = knots.len() - 1;
    // order-1 pieces
    let mut n: Vec<f64> = (0..m)
        .map(|i| {
            let inside = knots[i] <= t && t < knots[i + 1];
            let last = i + 1 == m && t == knots[m] && knots[i] < knots[i + 1];
            if inside || last {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    for r in 2..=m {
        for i in 0..=m - r {
            let left = knots[i + r - 1] - knots[i];
            let right = knots[i + r] - knots[i + 1];
            let a = if left > 0.0 { (t - knots[i]) / left * n[i] } else { 0.0 };
            let b = if right > 0.0 { (knots[i + r] - t) / right * n[i + 1] } else { 0.0 };
            n[i] = a + b;
        }
    }
    m as f64 / (knots[m] - knots[0]) * n[0]
}

/// `E|h|^p` over a simplex, given the values of the affine `h` at its vertices.
pub fn simplex_mean_abs_power(values: &[f64], p: f64, tol: f64) -> f64 {
    let mut knots = values.to_vec();
    knots.sort_by(f64::total_cmp);
    let m = knots.len() - 1;
    let spread = knots[m] - knots[0];
    let scale = knots.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if m == 0 || spread <= 1e-14 * scale.max(1e-300) {
        let mean = knots.iter().sum::<f64>() / knots.len() as f64;
        return mean.abs().powf(p);
    }
    let mut breaks: Vec<f64> = knots.clone();
    if knots[0] < 0.0 && knots[m] > 0.0 {
        breaks.push(0.0);
        breaks.sort_by(f64::total_cmp);
    }
    breaks.dedup();
    let integer_p = p.fract() == 0.0 && p + (m as f64) - 1.0 <= 15.0;
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let f = |t: f64| t.abs().powf(p) * bspline_density(&knots, t);
        if integer_p {
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            total += half * GL_NODES.iter().zip(GL_WEIGHTS).map(|(&x, w)| w * f(mid + half * x)).sum::<f64>();
        } else {
            total += quadrature::double_exponential::integrate(f, a, b, tol).integral;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_closed_forms() {
        // h = x - 1/2 on [0,1]
        let v = [-0.5, 0.5];
        assert!((simplex_mean_abs_power(&v, 2.0, 1e-12) - 1.0 / 12.0).abs() < 1e-15);
        assert!((simplex_mean_abs_power(&v, 1.0, 1e-12) - 0.25).abs() < 1e-15);
        // E|x - 1/2|^{3/2} = 2 ∫_0^{1/2} t^{3/2} dt = (1/2)^{5/2} · 4/5
        let exact = 0.8 * 0.5f64.powf(2.5);
        assert!((simplex_mean_abs_power(&v, 1.5, 1e-13) - exact).abs() < 1e-11);
    }

    #[test]
    fn triangle_second_moment() {
        // h = x on the standard triangle: E[x^2] = 1/6
        let got = simplex_mean_abs_power(&[0.0, 1.0, 0.0], 2.0, 1e-12);
        assert!((got - 1.0 / 6.0).abs() < 1e-14, "{got}");
        // h = x + y - 1/2: E|h| by symmetry of Beta(2,1): ∫_0^1 |s - 1/2| 2s ds = 1/4
        let got = simplex_mean_abs_power(&[-0.5, 0.5, 0.5], 1.0, 1e-12);
        assert!((got - 0.25).abs() < 1e-14, "{got}");
    }

    #[test]
    fn constant_values() {
        assert!((simplex_mean_abs_power(&[-2.0, -2.0, -2.0], 3.0, 1e-12) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn density_integrates_to_one() {
        let knots = [0.0, 0.3, 0.3, 1.2];
        let n = 20000;
        let h = 1.2 / n as f64;
        let s: f64 = (0..n).map(|i| bspline_density(&knots, (i as f64 + 0.5) * h) * h).sum();
        assert!((s - 1.0).abs() < 1e-6, "{s}");
    }
}
