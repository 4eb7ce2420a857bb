//! Finite-difference derivatives on uniform 1-D stencils, plus a spectral
//! derivative for periodic directions.

use rustfft::FftPlanner;

use super::C64;

/// Second-order centered first derivative, one-sided at the ends.
pub fn deriv_centered2(values: &[C64], h: f64) -> Vec<C64> {
    let n = values.len();
    assert!(n >= 3);
    let mut out = vec![C64::new(0.0, 0.0); n];
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
    }
    out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
    out
}

/// Sixth-order centered first derivative in the interior, degrading to lower
/// centered/one-sided stencils within three nodes of either end.
pub fn deriv_centered6(values: &[C64], h: f64) -> Vec<C64> {
    let n = values.len();
    if n < 7 {
        return deriv_centered2(values, h);
    }
    let mut out = vec![C64::new(0.0, 0.0); n];
    for i in 3..n - 3 {
        out[i] = (45.0 * (values[i + 1] - values[i - 1])
            - 9.0 * (values[i + 2] - values[i - 2])
            + (values[i + 3] - values[i - 3]))
            / (60.0 * h);
    }
    // fourth-order centered where a 5-point stencil fits
    for &i in &[1usize, 2, n - 3, n - 2] {
        if i >= 2 && i + 2 < n {
            out[i] = (8.0 * (values[i + 1] - values[i - 1]) - (values[i + 2] - values[i - 2]))
                / (12.0 * h);
        } else {
            out[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
        }
    }
    out[0] = (-25.0 * values[0] + 48.0 * values[1] - 36.0 * values[2] + 16.0 * values[3]
        - 3.0 * values[4])
        / (12.0 * h);
    out[n - 1] = (25.0 * values[n - 1] - 48.0 * values[n - 2] + 36.0 * values[n - 3]
        - 16.0 * values[n - 4]
        + 3.0 * values[n - 5])
        / (12.0 * h);
    out
}

/// Spectral derivative of a periodic sample row (no repeated endpoint),
/// period `period`.
pub fn deriv_periodic_spectral(values: &[C64], period: f64) -> Vec<C64> {
    let n = values.len();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<C64> = values.to_vec();
    fwd.process(&mut buf);
    let factor = 2.0 * std::f64::consts::PI / period;
    for (j, v) in buf.iter_mut().enumerate() {
        let k = if j <= n / 2 { j as i64 } else { j as i64 - n as i64 };
        // drop the unmatched Nyquist mode for even n
        let k = if n % 2 == 0 && j == n / 2 { 0 } else { k };
        *v *= C64::new(0.0, k as f64 * factor);
    }
    inv.process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn centered6_beats_centered2() {
        let n = 64;
        let h = 1.0 / (n - 1) as f64;
        let vals: Vec<C64> = (0..n).map(|i| C64::new((4.0 * i as f64 * h).sin(), 0.0)).collect();
        let exact: Vec<f64> = (0..n).map(|i| 4.0 * (4.0 * i as f64 * h).cos()).collect();
        let d2 = deriv_centered2(&vals, h);
        let d6 = deriv_centered6(&vals, h);
        let err = |d: &[C64]| -> f64 {
            (8..n - 8).map(|i| (d[i].re - exact[i]).abs()).fold(0.0, f64::max)
        };
        assert!(err(&d6) < err(&d2) * 1e-3);
    }

    #[test]
    fn spectral_derivative_is_exact_on_band_limited_data() {
        let n = 32;
        let vals: Vec<C64> = (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                C64::new((3.0 * t).cos(), (5.0 * t).sin())
            })
            .collect();
        let d = deriv_periodic_spectral(&vals, 2.0 * PI);
        for i in 0..n {
            let t = 2.0 * PI * i as f64 / n as f64;
            let exact = C64::new(-3.0 * (3.0 * t).sin(), 5.0 * (5.0 * t).cos());
            assert!((d[i] - exact).norm() < 1e-11);
        }
    }
}
