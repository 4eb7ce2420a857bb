//! Quadrature: trapezoid on closed sampled loops (spectrally accurate for
//! smooth periodic integrands) and composite Simpson along open sampled paths.

use super::C64;

/// Trapezoid rule over a closed loop given integrand samples at uniform
/// parameter values, the last sample repeating the first.
pub fn trapezoid_closed(values: &[C64], param_length: f64) -> C64 {
    assert!(values.len() >= 2, "closed loop needs at least 2 samples");
    let n = values.len() - 1;
    let h = param_length / n as f64;
    let mut sum = C64::new(0.0, 0.0);
    for v in &values[..n] {
        sum += v;
    }
    sum * h
}

/// Composite Simpson over uniformly sampled values on [0, length]; falls back
/// to trapezoid on the final interval when the count is even.
pub fn simpson(values: &[C64], length: f64) -> C64 {
    let n = values.len();
    assert!(n >= 2);
    let h = length / (n - 1) as f64;
    let mut sum = C64::new(0.0, 0.0);
    let pairs = (n - 1) / 2;
    for p in 0..pairs {
        let i = 2 * p;
        sum += (values[i] + 4.0 * values[i + 1] + values[i + 2]) * (h / 3.0);
    }
    if (n - 1) % 2 == 1 {
        sum += (values[n - 2] + values[n - 1]) * (h / 2.0);
    }
    sum
}

/// Cumulative integral along a uniformly sampled path: per-interval cubic
/// interpolation (fourth order throughout), one-sided cubics on the first and
/// last intervals. `out[k]` approximates the integral over `[0, k*h]`.
pub fn cumulative(values: &[C64], length: f64) -> Vec<C64> {
    let n = values.len();
    assert!(n >= 2);
    let h = length / (n - 1) as f64;
    let mut out = vec![C64::new(0.0, 0.0); n];
    if n < 4 {
        for k in 1..n {
            out[k] = out[k - 1] + (values[k - 1] + values[k]) * (h / 2.0);
        }
        return out;
    }
    let c = h / 24.0;
    out[1] = (9.0 * values[0] + 19.0 * values[1] - 5.0 * values[2] + values[3]) * c;
    for k in 1..n - 2 {
        out[k + 1] = out[k]
            + (-values[k - 1] + 13.0 * values[k] + 13.0 * values[k + 1] - values[k + 2]) * c;
    }
    out[n - 1] = out[n - 2]
        + (values[n - 4] - 5.0 * values[n - 3] + 19.0 * values[n - 2] + 9.0 * values[n - 1]) * c;
    out
}

/// Trapezoid with Euler-Maclaurin boundary corrections through the h^4 term
/// (derivatives estimated one-sidedly from the samples). For smooth data the
/// error is O(h^6) from the boundary and exponentially small from any
/// well-resolved interior oscillation, which is what the convex-integration
/// consistency gates rely on.
pub fn trapezoid_corrected(values: &[C64], length: f64) -> C64 {
    let n = values.len();
    assert!(n >= 7);
    let h = length / (n - 1) as f64;
    let mut sum = 0.5 * (values[0] + values[n - 1]);
    for v in &values[1..n - 1] {
        sum += v;
    }
    sum *= h;
    let d1_0 = (-25.0 * values[0] + 48.0 * values[1] - 36.0 * values[2] + 16.0 * values[3]
        - 3.0 * values[4])
        / (12.0 * h);
    let d1_n = (25.0 * values[n - 1] - 48.0 * values[n - 2] + 36.0 * values[n - 3]
        - 16.0 * values[n - 4]
        + 3.0 * values[n - 5])
        / (12.0 * h);
    let d3_0 = (-2.5 * values[0] + 9.0 * values[1] - 12.0 * values[2] + 7.0 * values[3]
        - 1.5 * values[4])
        / (h * h * h);
    let d3_n = (2.5 * values[n - 1] - 9.0 * values[n - 2] + 12.0 * values[n - 3]
        - 7.0 * values[n - 4]
        + 1.5 * values[n - 5])
        / (h * h * h);
    sum - (d1_n - d1_0) * (h * h / 12.0) + (d3_n - d3_0) * (h * h * h * h / 720.0)
}

/// Cumulative primitive along a periodic row (no repeated endpoint):
/// F(t_j) = mean * t_j + sum_{k != 0} v_k (e^{i k t_j} - 1)/(i k omega),
/// exact on band-limited data. Returns the node values and the increment
/// over one full period (mean * period).
pub fn cumulative_periodic_spectral(values: &[C64], period: f64) -> (Vec<C64>, C64) {
    use rustfft::FftPlanner;
    let n = values.len();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let mut hat: Vec<C64> = values.to_vec();
    fwd.process(&mut hat);
    let scale = 1.0 / n as f64;
    for h in hat.iter_mut() {
        *h *= scale;
    }
    let omega = 2.0 * std::f64::consts::PI / period;
    let mean = hat[0];
    // coefficients of the oscillatory primitive
    let mut prim = vec![C64::new(0.0, 0.0); n];
    for (j, p) in prim.iter_mut().enumerate() {
        if j == 0 {
            continue;
        }
        let k = if j <= n / 2 { j as i64 } else { j as i64 - n as i64 };
        if n % 2 == 0 && j == n / 2 {
            // unmatched Nyquist mode: drop (consistent with the derivative)
            continue;
        }
        *p = hat[j] / C64::new(0.0, k as f64 * omega);
    }
    // node values of the oscillatory primitive via inverse FFT, minus its
    // value at t = 0 so the cumulative starts at zero
    let offset: C64 = prim.iter().sum();
    let inv = planner.plan_fft_inverse(n);
    let mut osc = prim;
    inv.process(&mut osc);
    let mut out = vec![C64::new(0.0, 0.0); n];
    for (idx, o) in out.iter_mut().enumerate() {
        let t = period * idx as f64 / n as f64;
        *o = mean * t + osc[idx] - offset;
    }
    (out, mean * period)
}

/// Nodes and weights of 8-point Gauss-Legendre on [-1, 1].
pub const GAUSS8: [(f64, f64); 8] = [
    (-0.9602898564975363, 0.10122853629037626),
    (-0.7966664774136267, 0.22238103445337448),
    (-0.5255324099163290, 0.31370664587788727),
    (-0.1834346424956498, 0.36268378337836198),
    (0.1834346424956498, 0.36268378337836198),
    (0.5255324099163290, 0.31370664587788727),
    (0.7966664774136267, 0.22238103445337448),
    (0.9602898564975363, 0.10122853629037626),
];

/// Cumulative primitive of a closure on n uniform samples of [0, length],
/// each interval integrated with 8-point Gauss-Legendre. Essentially exact
/// for integrands with a handful of wavelengths per interval.
pub fn gauss_cumulative(f: &dyn Fn(f64) -> C64, n: usize, length: f64) -> Vec<C64> {
    assert!(n >= 2);
    let h = length / (n - 1) as f64;
    let mut out = vec![C64::new(0.0, 0.0); n];
    for k in 1..n {
        let a = (k - 1) as f64 * h;
        let mut acc = C64::new(0.0, 0.0);
        for &(x, w) in &GAUSS8 {
            acc += w * f(a + 0.5 * h * (x + 1.0));
        }
        out[k] = out[k - 1] + acc * (0.5 * h);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn trapezoid_is_exact_on_residue_integrand() {
        // contour |w| = 1: integrand of dw/w in the angle parameter is the
        // constant i, so the integral is exactly 2 pi i.
        let n = 64;
        let vals: Vec<C64> = (0..=n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                let w = C64::from_polar(1.0, t);
                let dw_dt = C64::new(0.0, 1.0) * w;
                dw_dt / w
            })
            .collect();
        let integral = trapezoid_closed(&vals, 2.0 * PI);
        assert!((integral - C64::new(0.0, 2.0 * PI)).norm() < 1e-13);
    }

    #[test]
    fn simpson_fourth_order() {
        // integral of exp(t) over [0,1]
        let f = |t: f64| C64::new(t.exp(), 0.0);
        let coarse: Vec<C64> = (0..=32).map(|k| f(k as f64 / 32.0)).collect();
        let fine: Vec<C64> = (0..=64).map(|k| f(k as f64 / 64.0)).collect();
        let exact = std::f64::consts::E - 1.0;
        let ec = (simpson(&coarse, 1.0).re - exact).abs();
        let ef = (simpson(&fine, 1.0).re - exact).abs();
        assert!(ec < 1e-8);
        assert!(ef < ec / 12.0, "expected ~16x reduction, got {ec:.3e} -> {ef:.3e}");
    }

    #[test]
    fn periodic_cumulative_exact_on_band_limited() {
        let n = 64;
        let f = |t: f64| C64::new(1.5 + (3.0 * t).cos(), (2.0 * t).sin());
        let vals: Vec<C64> = (0..n).map(|k| f(2.0 * PI * k as f64 / n as f64)).collect();
        let (cum, total) = cumulative_periodic_spectral(&vals, 2.0 * PI);
        // exact primitive: 1.5 t + sin(3t)/3 + i (1 - cos(2t))/2
        for (k, v) in cum.iter().enumerate() {
            let t = 2.0 * PI * k as f64 / n as f64;
            let exact = C64::new(1.5 * t + (3.0 * t).sin() / 3.0, (1.0 - (2.0 * t).cos()) / 2.0);
            assert!((v - exact).norm() < 1e-12, "node {k}: {:?}", v - exact);
        }
        assert!((total - C64::new(1.5 * 2.0 * PI, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn gauss8_table_sane() {
        let wsum: f64 = GAUSS8.iter().map(|&(_, w)| w).sum();
        assert!((wsum - 2.0).abs() < 1e-14);
        // degree-15 polynomial integrated exactly on [-1,1]
        let exact = 2.0 / 15.0; // integral of x^14
        let quad: f64 = GAUSS8.iter().map(|&(x, w)| w * x.powi(14)).sum();
        assert!((quad - exact).abs() < 1e-13, "{quad} vs {exact}");
    }

    #[test]
    fn gauss_cumulative_resolves_oscillation() {
        // 20 wavelengths over [0,1], 512 intervals: interval-level Gauss
        // integrates this to near machine precision.
        let om = 2.0 * PI * 20.0;
        let f = move |t: f64| C64::new((om * t).cos(), 0.0);
        let cum = gauss_cumulative(&f, 513, 1.0);
        for (k, v) in cum.iter().enumerate() {
            let t = k as f64 / 512.0;
            let exact = (om * t).sin() / om;
            assert!((v.re - exact).abs() < 1e-13, "k={k}");
        }
    }

    #[test]
    fn corrected_trapezoid_is_high_order() {
        let f = |t: f64| C64::new((1.3 * t).exp(), 0.0);
        let vals: Vec<C64> = (0..=64).map(|k| f(k as f64 / 64.0)).collect();
        let exact = ((1.3f64).exp() - 1.0) / 1.3;
        let err = (trapezoid_corrected(&vals, 1.0).re - exact).abs();
        assert!(err < 1e-11, "err {err:.3e}");
        // oscillation with flat ends: interior wiggles contribute nothing
        let g = |t: f64| {
            let w = if t <= 0.0 || t >= 1.0 { 0.0 } else { (-1.0 / (t * (1.0 - t))).exp() };
            C64::new(w * (2.0 * PI * 24.0 * t).sin(), 0.0)
        };
        let vals: Vec<C64> = (0..=768).map(|k| g(k as f64 / 768.0)).collect();
        let dense: Vec<C64> = (0..=12288).map(|k| g(k as f64 / 12288.0)).collect();
        let a = trapezoid_corrected(&vals, 1.0);
        let b = trapezoid_corrected(&dense, 1.0);
        assert!((a - b).norm() < 1e-12, "{:.3e}", (a - b).norm());
    }

    #[test]
    fn cumulative_endpoint_matches_exact_integral() {
        let f = |t: f64| C64::new((3.0 * t).sin(), (2.0 * t).cos());
        let vals: Vec<C64> = (0..=512).map(|k| f(k as f64 / 512.0 * 2.0)).collect();
        let cum = cumulative(&vals, 2.0);
        let exact = C64::new((1.0 - (6.0f64).cos()) / 3.0, (4.0f64).sin() / 2.0);
        assert!((cum.last().unwrap() - exact).norm() < 5e-9);
        // interior sample too
        let mid = cum[256];
        let exact_mid = C64::new((1.0 - (3.0f64).cos()) / 3.0, (2.0f64).sin() / 2.0);
        assert!((mid - exact_mid).norm() < 5e-9);
    }
}
