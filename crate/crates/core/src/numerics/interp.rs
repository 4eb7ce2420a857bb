//! Cubic interpolation of uniformly sampled paths on [0, 1].

use super::C64;

/// Catmull-Rom style cubic through uniform samples, clamped stencils at the
/// ends. Exact at nodes, C^1 across them.
pub fn cubic(samples: &[C64], t: f64) -> C64 {
    let n = samples.len();
    assert!(n >= 2);
    if n == 2 {
        return samples[0] + (samples[1] - samples[0]) * t;
    }
    let x = t.clamp(0.0, 1.0) * (n - 1) as f64;
    let mut k = x.floor() as usize;
    if k >= n - 1 {
        k = n - 2;
    }
    let s = x - k as f64;
    let im = if k == 0 { 0 } else { k - 1 };
    let ip = (k + 2).min(n - 1);
    let p0 = samples[im];
    let p1 = samples[k];
    let p2 = samples[k + 1];
    let p3 = samples[ip];
    // quadratic ghost values keep third-order accuracy at the ends
    let p0 = if k == 0 { 3.0 * p1 - 3.0 * p2 + samples[2.min(n - 1)] } else { p0 };
    let p3 = if k + 2 > n - 1 { samples[n.saturating_sub(3)] - 3.0 * p1 + 3.0 * p2 } else { p3 };
    let a = 2.0 * p1;
    let b = p2 - p0;
    let c = 2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3;
    let d = -p0 + 3.0 * p1 - 3.0 * p2 + p3;
    0.5 * (a + b * s + c * s * s + d * s * s * s)
}

/// Component-wise cubic interpolation of a C^D-valued path (O(1) per call:
/// only the 4-point stencil is touched).
pub fn cubic_vec<const D: usize>(samples: &[[C64; D]], t: f64) -> [C64; D] {
    let n = samples.len();
    assert!(n >= 2);
    let mut out = [C64::new(0.0, 0.0); D];
    if n == 2 {
        for d in 0..D {
            out[d] = samples[0][d] + (samples[1][d] - samples[0][d]) * t;
        }
        return out;
    }
    let x = t.clamp(0.0, 1.0) * (n - 1) as f64;
    let mut k = x.floor() as usize;
    if k >= n - 1 {
        k = n - 2;
    }
    let s = x - k as f64;
    let im = if k == 0 { 0 } else { k - 1 };
    let ip = (k + 2).min(n - 1);
    for d in 0..D {
        let p1 = samples[k][d];
        let p2 = samples[k + 1][d];
        let p0 = if k == 0 {
            3.0 * p1 - 3.0 * p2 + samples[2.min(n - 1)][d]
        } else {
            samples[im][d]
        };
        let p3 = if k + 2 > n - 1 {
            samples[n.saturating_sub(3)][d] - 3.0 * p1 + 3.0 * p2
        } else {
            samples[ip][d]
        };
        let a = 2.0 * p1;
        let b = p2 - p0;
        let c = 2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3;
        let dd = -p0 + 3.0 * p1 - 3.0 * p2 + p3;
        out[d] = 0.5 * (a + b * s + c * s * s + dd * s * s * s);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_at_nodes_and_smooth_between() {
        let f = |t: f64| C64::new((2.0 * t).sin(), t * t);
        let samples: Vec<C64> = (0..=32).map(|k| f(k as f64 / 32.0)).collect();
        for k in 0..=32 {
            let t = k as f64 / 32.0;
            assert!((cubic(&samples, t) - f(t)).norm() < 1e-14);
        }
        for k in 0..200 {
            let t = k as f64 / 199.0;
            assert!((cubic(&samples, t) - f(t)).norm() < 2e-4);
        }
    }
}
