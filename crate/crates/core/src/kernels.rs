//! Scalar formulas for a single edge of intrinsic length `L` and `σ = √α`.
//!
//! Everything is written through `e1(x) = 1 − e^{−2x}` so that neither large
//! nor small `σL` loses accuracy.

/// `1 − e^{−2x}`
#[inline]
pub(crate) fn e1(x: f64) -> f64 {
    -(-2.0 * x).exp_m1()
}

/// `h(t) = sinh(σ(L−t)) / sinh(σL)`, or `(L−t)/L` for `σ = 0`.
pub(crate) fn h(sigma: f64, len: f64, t: f64) -> f64 {
    if sigma == 0.0 {
        return (len - t) / len;
    }
    (-sigma * t).exp() * e1(sigma * (len - t)) / e1(sigma * len)
}

/// `h′(t) = −σ cosh(σ(L−t)) / sinh(σL)`, or `−1/L`.
pub(crate) fn dh(sigma: f64, len: f64, t: f64) -> f64 {
    if sigma == 0.0 {
        return -1.0 / len;
    }
    -sigma * (-sigma * t).exp() * (1.0 + (-2.0 * sigma * (len - t)).exp()) / e1(sigma * len)
}

/// `−h′(L) = σ / sinh(σL)`, or `1/L`.
pub(crate) fn neg_dh_end(sigma: f64, len: f64) -> f64 {
    if sigma == 0.0 {
        return 1.0 / len;
    }
    2.0 * sigma * (-sigma * len).exp() / e1(sigma * len)
}

/// `−h′(0) = σ coth(σL)`, or `1/L`.
pub(crate) fn neg_dh_start(sigma: f64, len: f64) -> f64 {
    if sigma == 0.0 {
        return 1.0 / len;
    }
    sigma * (1.0 + (-2.0 * sigma * len).exp()) / e1(sigma * len)
}

/// `σ (cosh σL − 1) / sinh σL = σ tanh(σL/2)`, the per-edge vertex potential.
pub(crate) fn potential(sigma: f64, len: f64) -> f64 {
    sigma * (0.5 * sigma * len).tanh()
}

/// `∫₀^L h = tanh(σL/2) / σ`, or `L/2`.
pub(crate) fn h_integral(sigma: f64, len: f64) -> f64 {
    if sigma == 0.0 {
        return len / 2.0;
    }
    (0.5 * sigma * len).tanh() / sigma
}

/// Green function `G(t,s) = sinh(σ min)·sinh(σ(L−max)) / (σ sinh σL)`,
/// or `min·(L−max)/L` for `σ = 0`.
pub(crate) fn green(sigma: f64, len: f64, t: f64, s: f64) -> f64 {
    let (lo, hi) = if t <= s { (t, s) } else { (s, t) };
    if sigma == 0.0 {
        return lo * (len - hi) / len;
    }
    (-sigma * (hi - lo)).exp() * e1(sigma * lo) * e1(sigma * (len - hi))
        / (2.0 * sigma * e1(sigma * len))
}

/// `sinh(2x) − 2x` without cancellation.
fn sinh2x_minus_2x(x: f64) -> f64 {
    if x >= 1.0 {
        return (2.0 * x).sinh() - 2.0 * x;
    }
    let y = 2.0 * x;
    let (mut term, mut sum, mut k): (f64, f64, f64) = (y * y * y / 6.0, 0.0, 3.0);
    while term.abs() > 1e-18 * sum.abs() || sum == 0.0 {
        sum += term;
        term *= y * y / ((k + 1.0) * (k + 2.0));
        k += 2.0;
        if k > 60.0 {
            break;
        }
    }
    sum
}

/// `x cosh x − sinh x` without cancellation.
fn xcosh_minus_sinh(x: f64) -> f64 {
    if x >= 1.0 {
        return x * x.cosh() - x.sinh();
    }
    // Σ_{k≥1} 2k·x^{2k+1}/(2k+1)!
    let mut pow_fact = x * x * x / 6.0; // x^{2k+1}/(2k+1)!
    let mut sum = 0.0;
    let mut k = 1.0;
    loop {
        let term = 2.0 * k * pow_fact;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() || k > 30.0 {
            break;
        }
        pow_fact *= x * x / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
        k += 1.0;
    }
    sum
}

/// `(∫h², ∫h(t)h(L−t) dt)` over `[0, L]`.
pub(crate) fn h_l2_products(sigma: f64, len: f64) -> (f64, f64) {
    let x = sigma * len;
    if x == 0.0 {
        return (len / 3.0, len / 6.0);
    }
    if x > 20.0 {
        // sinh² x overflows long before e^{−x} underflows; use exponentials
        let q = (-2.0 * x).exp();
        let e = e1(x);
        let coth = (1.0 + q) / e;
        let inv_sinh2 = 4.0 * q / (e * e);
        let i1 = (coth - x * inv_sinh2) / (2.0 * sigma);
        let inv_sinh = 2.0 * (-x).exp() / e;
        let cosh_over_sinh2 = 2.0 * (-x).exp() * (1.0 + q) / (e * e);
        let i2 = (x * cosh_over_sinh2 - inv_sinh) / (2.0 * sigma);
        return (i1, i2);
    }
    let s = x.sinh();
    let i1 = len * sinh2x_minus_2x(x) / (4.0 * x * s * s);
    let i2 = len * xcosh_minus_sinh(x) / (2.0 * x * s * s);
    (i1, i2)
}

/// `(∫h′², −∫h′(t)·(d/dt)h(L−t) dt)` over `[0, L]`.
pub(crate) fn h_energy_products(sigma: f64, len: f64) -> (f64, f64) {
    let x = sigma * len;
    if x == 0.0 {
        return (1.0 / len, 1.0 / len);
    }
    let q = (-2.0 * x).exp();
    let e = e1(x);
    let x_over_sinh = 2.0 * x * (-x).exp() / e;
    let x_coth = x * (1.0 + q) / e;
    let j1 = (x_coth + x_over_sinh * x_over_sinh) / (2.0 * len);
    let cosh_x2_over_sinh2 = 2.0 * x * x * (-x).exp() * (1.0 + q) / (e * e);
    let j2 = (cosh_x2_over_sinh2 + x_over_sinh) / (2.0 * len);
    (j1, j2)
}

/// `∫u²` and `∫u′²` for `u = c⁺h(t) + c⁻h(L−t)`.
pub(crate) fn harmonic_integrals(sigma: f64, len: f64, cp: f64, cm: f64) -> (f64, f64) {
    let (i1, i2) = h_l2_products(sigma, len);
    let (j1, j2) = h_energy_products(sigma, len);
    let sq = cp * cp + cm * cm;
    let l2 = (sq * i1 + 2.0 * cp * cm * i2).max(0.0);
    let en = (sq * j1 - 2.0 * cp * cm * j2).max(0.0);
    (l2, en)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::simpson;

    fn quad(len: f64, f: impl Fn(f64) -> f64) -> f64 {
        let m = 20000;
        let hh = len / m as f64;
        let v: Vec<f64> = (0..=m).map(|k| f(k as f64 * hh)).collect();
        simpson(&v, hh)
    }

    #[test]
    fn kernel_values() {
        assert_eq!(h(2.0, 1.0, 0.0), 1.0);
        assert_eq!(h(2.0, 1.0, 1.0), 0.0);
        assert!((h(0.0, 2.0, 0.5) - 0.75).abs() < 1e-15);
        assert!((h(2.0, 1.0, 0.5) - 1f64.sinh() / 2f64.sinh()).abs() < 1e-15);
        assert!((h(1.0, 1.0, 0.5) - 0.5f64.sinh() / 1f64.sinh()).abs() < 1e-15);
        // no overflow for large σL
        assert!(h(1000.0, 1.0, 0.001) > 0.0 && h(1000.0, 1.0, 0.001) < 1.0);
    }

    #[test]
    fn derivative_values() {
        for &(s, l) in &[(0.3, 0.7), (1.0, 1.0), (3.0, 0.2)] {
            let x: f64 = s * l;
            assert!((neg_dh_end(s, l) - s / x.sinh()).abs() < 1e-14);
            assert!((neg_dh_start(s, l) - s / x.tanh()).abs() < 1e-13);
            assert!((-dh(s, l, l) - neg_dh_end(s, l)).abs() < 1e-14);
            assert!((potential(s, l) - s * (x.cosh() - 1.0) / x.sinh()).abs() < 1e-14);
            // capacity identity 1/sinh x + tanh(x/2) = coth x
            assert!((neg_dh_end(s, l) + potential(s, l) - neg_dh_start(s, l)).abs() < 1e-13);
            assert!((h_integral(s, l) - quad(l, |t| h(s, l, t))).abs() < 1e-12);
        }
    }

    #[test]
    fn reference_values() {
        assert!((neg_dh_end(1.0, 1.0) - 0.850_918_128_239_321_5).abs() < 1e-15);
        assert!((potential(1.0, 1.0) - 0.462_117_157_260_009_7).abs() < 1e-15);
        assert!((green(0.0, 1.0, 0.5, 0.5) - 0.25).abs() < 1e-16);
    }

    #[test]
    fn green_is_symmetric_and_vanishes_at_ends() {
        for &(s, l) in &[(0.0, 1.0), (1.0, 0.8), (5.0, 1.0)] {
            for k in 0..10 {
                let t = l * k as f64 / 9.0;
                let r = l * ((k * 7) % 10) as f64 / 9.0;
                assert_eq!(green(s, l, t, r), green(s, l, r, t));
                assert_eq!(green(s, l, 0.0, r), 0.0);
                assert!(green(s, l, l, r).abs() < 1e-16);
            }
        }
        let (s, l, t, r) = (1.3f64, 0.9f64, 0.2f64, 0.6f64);
        let naive = (s * t).sinh() * (s * (l - r)).sinh() / (s * (s * l).sinh());
        assert!((green(s, l, t, r) - naive).abs() < 1e-15);
    }

    #[test]
    fn closed_form_integrals_match_quadrature() {
        for &(s, l) in &[(1e-5, 1.0), (0.01, 0.5), (0.7, 1.0), (1.0, 1.0), (3.0, 0.9), (30.0, 1.0)] {
            let (i1, i2) = h_l2_products(s, l);
            let (j1, j2) = h_energy_products(s, l);
            let q1 = quad(l, |t| h(s, l, t).powi(2));
            let q2 = quad(l, |t| h(s, l, t) * h(s, l, l - t));
            let p1 = quad(l, |t| dh(s, l, t).powi(2));
            let p2 = quad(l, |t| dh(s, l, t) * dh(s, l, l - t));
            assert!((i1 - q1).abs() < 1e-10 * q1, "{s} {l}");
            assert!((i2 - q2).abs() < 1e-10 * q2, "{s} {l} {i2} {q2}");
            assert!((j1 - p1).abs() < 1e-9 * p1, "{s} {l}");
            // (d/dt)h(L−t) = −h′(L−t)
            assert!((j2 - p2).abs() < 1e-9 * p2.abs(), "{s} {l}");
        }
    }

    #[test]
    fn energy_identity_per_edge() {
        // α∫u² + ∫u′² = (σ / sinh x)·((c⁺² + c⁻²) cosh x − 2c⁺c⁻)
        for &(s, l, cp, cm) in &[(1.0, 1.0, 1.0, 0.0), (0.4, 0.3, 0.7, -1.2), (2.0, 0.9, 1.0, 1.0)] {
            let (a, b) = harmonic_integrals(s, l, cp, cm);
            let x: f64 = s * l;
            let rhs = s / x.sinh() * ((cp * cp + cm * cm) * x.cosh() - 2.0 * cp * cm);
            assert!((s * s * a + b - rhs).abs() < 1e-13 * rhs.abs());
        }
        let (a, b) = harmonic_integrals(0.0, 2.0, 1.0, 3.0);
        assert!((a - (2.0 * 10.0 / 3.0 + 2.0 * 3.0 / 3.0)).abs() < 1e-14);
        assert!((b - 4.0 / 2.0).abs() < 1e-14);
    }

    #[test]
    fn small_argument_series_are_continuous() {
        let l = 1.0;
        let below = h_l2_products(0.999_999_999, l);
        let above = h_l2_products(1.000_000_001, l);
        assert!((below.0 - above.0).abs() < 1e-9);
        assert!((below.1 - above.1).abs() < 1e-9);
        let tiny = h_l2_products(1e-9, l);
        assert!((tiny.0 - 1.0 / 3.0).abs() < 1e-12);
        assert!((tiny.1 - 1.0 / 6.0).abs() < 1e-12);
    }
}
