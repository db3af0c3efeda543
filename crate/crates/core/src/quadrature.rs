//! Composite rules on uniform grids.

/// Composite Simpson weights for `m` cells (`m` even) of width `h`.
pub fn simpson_weights(m: usize, h: f64) -> Vec<f64> {
    assert!(m >= 2 && m % 2 == 0, "Simpson needs an even number of cells");
    let mut w = vec![0.0; m + 1];
    for k in 0..=m {
        w[k] = h / 3.0
            * if k == 0 || k == m {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
    }
    w
}

/// `∫ f` over `[0, m·h]` from samples at the `m + 1` nodes.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let m = values.len() - 1;
    simpson_weights(m, h)
        .iter()
        .zip(values)
        .map(|(w, v)| w * v)
        .sum()
}

/// Simpson on `g(v)` for a pointwise map `g`.
pub fn simpson_map(values: &[f64], h: f64, g: impl Fn(f64) -> f64) -> f64 {
    let m = values.len() - 1;
    simpson_weights(m, h)
        .iter()
        .zip(values)
        .map(|(w, &v)| w * g(v))
        .sum()
}

/// Running integrals of `e^{−σ(t_k − s)} g(s)` over `[0, t_k]` at every node
/// `t_k = k·h`.
///
/// Even nodes use Simpson blocks, odd nodes a closing 3/8 block (a
/// three-point rule for the first cell). Nonnegative `g` gives nonnegative
/// results. The exponential factor is carried block by block,
/// which keeps the recursion free of overflow.
pub fn damped_running_integral(g: &[f64], h: f64, sigma: f64) -> Vec<f64> {
    let m = g.len() - 1;
    let d1 = (-sigma * h).exp();
    let d2 = d1 * d1;
    let d3 = d2 * d1;
    let mut out = vec![0.0; m + 1];
    for k in (2..=m).step_by(2) {
        out[k] = d2 * out[k - 2] + h / 3.0 * (d2 * g[k - 2] + 4.0 * d1 * g[k - 1] + g[k]);
    }
    if m >= 2 {
        // quadratic through the first three nodes, trapezoid if that would
        // break the sign of nonnegative data
        let q = h / 12.0 * (5.0 * d1 * g[0] + 8.0 * g[1] - g[2] / d1);
        let trap = h / 2.0 * (d1 * g[0] + g[1]);
        out[1] = if q < 0.0 && trap >= 0.0 { trap } else { q };
    } else if m == 1 {
        out[1] = h / 2.0 * (d1 * g[0] + g[1]);
    }
    for k in (3..=m).step_by(2) {
        out[k] = d3 * out[k - 3]
            + 3.0 * h / 8.0 * (d3 * g[k - 3] + 3.0 * d2 * g[k - 2] + 3.0 * d1 * g[k - 1] + g[k]);
    }
    out
}
