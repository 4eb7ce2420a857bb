//! Geometric scaffolding of the noncritical step on an annular shell between
//! two concentric circles: radial spur arcs at the junction angles, collar
//! rectangles pressed against the outer boundary, connector arcs from the
//! base arcs to the rectangles, and the sample sets the checks run on.
//!
//! Also the smooth ramp constructions used along those arcs: closed-form
//! paths in the null quadric (or in a quadric curve) whose pullback gains
//! prescribed heights. The convex-integration machinery remains the general
//! tool; these ramps are the specialization to monotone targets, which keeps
//! the subsequent Laurent refits low-degree.

use crate::numerics::{C64, I};
use crate::riemann::OneFormSample;

use super::super::convex_integration::CiError;

/// Shell between the base circle (carrying the previous division) and the
/// target circle (a boundary circle of the next domain), both centered at
/// the origin. `outward` when the target radius exceeds the base radius.
#[derive(Debug, Clone, Copy)]
pub struct Shell {
    pub r_base: f64,
    pub r_target: f64,
}

impl Shell {
    pub fn outward(&self) -> bool {
        self.r_target > self.r_base
    }

    /// log-radial interpolation between the circles.
    pub fn radius_at(&self, s: f64) -> f64 {
        (self.r_base.ln() + s * (self.r_target.ln() - self.r_base.ln())).exp()
    }
}

/// Polar rectangle [theta_lo, theta_hi] x [r_lo, r_hi].
#[derive(Debug, Clone, Copy)]
pub struct PolarRect {
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub r_lo: f64,
    pub r_hi: f64,
}

impl PolarRect {
    pub fn contains(&self, z: C64) -> bool {
        let r = z.norm();
        if r < self.r_lo || r > self.r_hi {
            return false;
        }
        let mut th = z.arg();
        while th < self.theta_lo {
            th += 2.0 * std::f64::consts::PI;
        }
        th <= self.theta_hi || {
            let mut t2 = th - 2.0 * std::f64::consts::PI;
            while t2 < self.theta_lo {
                t2 += 2.0 * std::f64::consts::PI;
            }
            t2 <= self.theta_hi
        }
    }

    pub fn samples(&self, n_theta: usize, n_r: usize) -> Vec<C64> {
        let mut out = Vec::with_capacity(n_theta * n_r);
        for i in 0..n_r {
            let r = self.r_lo
                + (self.r_hi - self.r_lo) * (i as f64 + 0.5) / n_r as f64;
            for j in 0..n_theta {
                let th = self.theta_lo
                    + (self.theta_hi - self.theta_lo) * (j as f64 + 0.5) / n_theta as f64;
                out.push(C64::from_polar(r, th));
            }
        }
        out
    }
}

/// Uniformly sampled polyline with tangent samples.
#[derive(Debug, Clone)]
pub struct SampledArc {
    pub z: Vec<C64>,
    pub zdot: Vec<C64>,
}

impl SampledArc {
    /// Radial segment at fixed angle, log-uniform in radius.
    pub fn radial(shell: Shell, angle: f64, n: usize) -> Self {
        let lr0 = shell.r_base.ln();
        let lr1 = shell.r_target.ln();
        let mut z = Vec::with_capacity(n);
        let mut zdot = Vec::with_capacity(n);
        for k in 0..n {
            let s = k as f64 / (n - 1) as f64;
            let w = C64::from_polar((lr0 + s * (lr1 - lr0)).exp(), angle);
            z.push(w);
            zdot.push(w * (lr1 - lr0));
        }
        Self { z, zdot }
    }

    /// Circular arc at fixed radius from angle a to angle b.
    pub fn angular(radius: f64, a: f64, b: f64, n: usize) -> Self {
        let mut z = Vec::with_capacity(n);
        let mut zdot = Vec::with_capacity(n);
        for k in 0..n {
            let s = k as f64 / (n - 1) as f64;
            let th = a + s * (b - a);
            let w = C64::from_polar(radius, th);
            z.push(w);
            zdot.push(I * w * (b - a));
        }
        Self { z, zdot }
    }

    /// Two-leg polar polyline: radial from (r0, angle) to (r1, angle), then
    /// angular at r1 to angle_end. The tangent is rescaled so each leg is
    /// traversed on half of the parameter interval.
    pub fn radial_then_angular(r0: f64, r1: f64, angle: f64, angle_end: f64, n: usize) -> Self {
        let mut z = Vec::with_capacity(n);
        let mut zdot = Vec::with_capacity(n);
        let lr0 = r0.ln();
        let lr1 = r1.ln();
        for k in 0..n {
            let t = k as f64 / (n - 1) as f64;
            if t <= 0.5 {
                let s = 2.0 * t;
                let w = C64::from_polar((lr0 + s * (lr1 - lr0)).exp(), angle);
                z.push(w);
                zdot.push(w * (lr1 - lr0) * 2.0);
            } else {
                let s = 2.0 * (t - 0.5);
                let th = angle + s * (angle_end - angle);
                let w = C64::from_polar(r1, th);
                z.push(w);
                zdot.push(I * w * (angle_end - angle) * 2.0);
            }
        }
        Self { z, zdot }
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// Pullback factor of a 1-form along the arc.
    pub fn pullback(&self, theta: &OneFormSample) -> Vec<C64> {
        self.z.iter().zip(&self.zdot).map(|(&z, &v)| theta.pair(z, v)).collect()
    }
}

/// Decoration of one shell sector (between consecutive spur angles): the
/// collar rectangle against the target circle and the connector arc from the
/// base arc into the rectangle's boundary.
#[derive(Debug, Clone)]
pub struct SectorDecoration {
    pub arc_index: usize,
    pub omega: PolarRect,
    pub xi: SampledArc,
    /// angular window of omega on the target circle
    pub window: (f64, f64),
}

/// Build decorations for the listed arcs of a division component over a
/// shell. Arc `a` spans junction angles (t_{a-1}, t_a); its rectangle hugs
/// the target circle over the middle half of the sector and the connector
/// runs from just inside the base arc's far end to the rectangle's side.
pub fn decorate_sectors(
    shell: Shell,
    junctions: &[f64],
    active: &[usize],
    samples: usize,
) -> Vec<SectorDecoration> {
    let l = junctions.len();
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut out = Vec::with_capacity(active.len());
    for &a in active {
        let t_end = junctions[a];
        let t_start = if a == 0 { junctions[l - 1] - two_pi } else { junctions[a - 1] };
        let width = t_end - t_start;
        let w_lo = t_start + 0.25 * width;
        let w_hi = t_end - 0.25 * width;
        let (r_lo, r_hi) = if shell.outward() {
            (shell.radius_at(0.55), shell.r_target)
        } else {
            (shell.r_target, shell.radius_at(0.55))
        };
        let omega = PolarRect { theta_lo: w_lo, theta_hi: w_hi, r_lo, r_hi };
        // connector: from p' on the base arc (near its far junction) radially
        // to the rectangle's radial midline, then angularly onto its side
        let t_p = t_end - 0.10 * width;
        let r_mid = (r_lo * r_hi).sqrt();
        let xi = SampledArc::radial_then_angular(shell.r_base, r_mid, t_p, w_hi, samples);
        out.push(SectorDecoration { arc_index: a, omega, xi, window: (w_lo, w_hi) });
    }
    out
}

// --- smooth ramp constructions ------------------------------------------------

fn smooth_step(x: f64) -> f64 {
    let b = |y: f64| if y <= 0.0 { 0.0 } else { (-1.0f64 / y).exp() };
    let a = b(x);
    let c = b(1.0 - x);
    a / (a + c)
}

/// A null triple from (g, v).
fn null_of(g: C64, v: C64) -> [C64; 3] {
    let gi = 1.0 / g;
    [v, 0.5 * (g - gi) * v, 0.5 * I * (g + gi) * v]
}

/// Smooth non-oscillatory path in the null quadric whose pullback by `c`
/// gains prescribed real heights in the first two components: in the middle
/// of the arc, f * c is a real ramp vector solved in the (g, v) chart; near
/// the ends it glues in parameter space to the prescribed null vectors.
///
/// Returns per-sample (u, f) with u the real primitive of f * c starting at
/// `u_start`; the compatibility identity d(u)/dt = Re(f c) is the definition
/// of u.
pub fn ramp_extension(
    c: &[C64],
    u_start: [f64; 3],
    f_start: [C64; 3],
    f_end: [C64; 3],
    gains: [f64; 2],
) -> Result<(Vec<[f64; 3]>, Vec<[C64; 3]>), CiError> {
    let n = c.len();
    assert!(n >= 33);
    let w = 0.14;

    let params = |f: &[C64; 3]| -> Result<[C64; 2], CiError> {
        let scale = (f[0].norm_sqr() + f[1].norm_sqr() + f[2].norm_sqr()).sqrt();
        if f[0].norm() < 1e-9 * scale {
            return Err(CiError::DegenerateInput {
                t: 0.0,
                what: "vanishing first component at an arc root".into(),
            });
        }
        Ok([((f[1] - I * f[2]) / f[0]).ln(), f[0].ln()])
    };
    let p0 = params(&f_start)?;
    let mut p1 = params(&f_end)?;
    for k in 0..2 {
        let two_pi = 2.0 * std::f64::consts::PI;
        let shift = ((p0[k].im - p1[k].im) / two_pi).round();
        p1[k] = C64::new(p1[k].re, p1[k].im + shift * two_pi);
    }

    // middle ramp rates: the effective ramp length is the window integral
    let mid_mass: f64 = (0..n)
        .map(|k| {
            let t = k as f64 / (n - 1) as f64;
            smooth_step(t / w) * smooth_step((1.0 - t) / w) / (n - 1) as f64
        })
        .sum();
    let rate = [gains[0].max(0.15) / mid_mass, gains[1].max(0.15) / mid_mass];

    // ramp parameters in the (g, v) chart: v = r1/c, g real solving
    // (g - 1/g)/2 = r2/r1
    let ramp_params = |t: f64, cv: C64| -> [C64; 2] {
        let _ = t;
        let ratio = rate[1] / rate[0];
        let g = ratio + (ratio * ratio + 1.0).sqrt();
        let v = C64::new(rate[0], 0.0) / cv;
        [C64::new(g.ln(), 0.0), v.ln()]
    };

    let mut u = Vec::with_capacity(n);
    let mut f = Vec::with_capacity(n);
    let mut acc = u_start;
    let h = 1.0 / (n - 1) as f64;
    let mut prev_fc: Option<[C64; 3]> = None;
    let mut prev_ramp_lv: Option<C64> = None;
    for k in 0..n {
        let t = k as f64 / (n - 1) as f64;
        let wt = smooth_step(t / w) * smooth_step((1.0 - t) / w);
        // blend endpoint parameters along t, then blend with the ramp
        let base = [p0[0] + (p1[0] - p0[0]) * t, p0[1] + (p1[1] - p0[1]) * t];
        let mut rp = ramp_params(t, c[k]);
        if let Some(prev) = prev_ramp_lv {
            let two_pi = 2.0 * std::f64::consts::PI;
            let shift = ((prev.im - rp[1].im) / two_pi).round();
            rp[1] = C64::new(rp[1].re, rp[1].im + shift * two_pi);
        } else {
            // align the ramp branch with the base branch at first use
            let two_pi = 2.0 * std::f64::consts::PI;
            let shift = ((base[1].im - rp[1].im) / two_pi).round();
            rp[1] = C64::new(rp[1].re, rp[1].im + shift * two_pi);
        }
        prev_ramp_lv = Some(rp[1]);
        let lg = base[0] + (rp[0] - base[0]) * wt;
        let lv = base[1] + (rp[1] - base[1]) * wt;
        let fv = null_of(lg.exp(), lv.exp());
        let fc = [fv[0] * c[k], fv[1] * c[k], fv[2] * c[k]];
        if let Some(p) = prev_fc {
            for comp in 0..3 {
                acc[comp] += 0.5 * h * (p[comp].re + fc[comp].re);
            }
        }
        u.push(acc);
        f.push(fv);
        prev_fc = Some(fc);
    }
    Ok((u, f))
}

/// Smooth path on the quadric x^2 + y^2 = q(t) whose first component
/// integrates (in the arc parameter) to at least `target`. Everything runs
/// in the complex angle chart (x, y) = sqrt(q)(cos rho, sin rho), so the
/// constraint is an identity: the middle blends toward the ramp angle
/// rho_ramp = arccos(rate / sqrt(q)) where the first component is the real
/// constant `rate`, and the ends glue to the prescribed points.
pub fn quadric_ramp(
    q: &[C64],
    p_start: [C64; 2],
    p_end: [C64; 2],
    target: f64,
    n: usize,
) -> Result<Vec<[C64; 2]>, CiError> {
    assert!(n >= 33);
    let w = 0.14;
    let angle = |p: &[C64; 2], sq: C64, prev: Option<C64>| -> C64 {
        let xi = (p[0] + I * p[1]) / sq;
        let rho = -I * xi.ln();
        match prev {
            Some(pr) => {
                let two_pi = 2.0 * std::f64::consts::PI;
                let shift = ((pr.re - rho.re) / two_pi).round();
                rho + C64::new(shift * two_pi, 0.0)
            }
            None => rho,
        }
    };
    let mut sq_track: Vec<C64> = Vec::with_capacity(n);
    let mut prev_sq: Option<C64> = None;
    let q_at = |t: f64| -> C64 {
        crate::numerics::interp::cubic(q, t)
    };
    for k in 0..n {
        let t = k as f64 / (n - 1) as f64;
        let sq = crate::convex_integration::track_sqrt(prev_sq, q_at(t));
        prev_sq = Some(sq);
        sq_track.push(sq);
    }
    let rho0 = angle(&p_start, sq_track[0], None);
    let rho1 = angle(&p_end, sq_track[n - 1], Some(rho0));

    let mid_mass: f64 = (0..n)
        .map(|k| {
            let t = k as f64 / (n - 1) as f64;
            smooth_step(t / w) * smooth_step((1.0 - t) / w) / (n - 1) as f64
        })
        .sum();
    let rate = (target.max(0.2) * 1.15) / mid_mass;

    let mut out = Vec::with_capacity(n);
    let mut prev_ramp: Option<C64> = None;
    for k in 0..n {
        let t = k as f64 / (n - 1) as f64;
        let wt = smooth_step(t / w) * smooth_step((1.0 - t) / w);
        let sq = sq_track[k];
        // ramp angle: cos(rho) = rate / sqrt(q), branch-tracked along t
        let ratio = C64::new(rate, 0.0) / sq;
        let rho_ramp_raw = ratio.acos();
        let rho_ramp = match prev_ramp {
            Some(pr) => {
                // candidates +-rho + 2 pi k, nearest to the previous value
                let two_pi = 2.0 * std::f64::consts::PI;
                let mut best = rho_ramp_raw;
                let mut dist = f64::INFINITY;
                for sign in [1.0, -1.0] {
                    for m in -1i32..=1 {
                        let cand = rho_ramp_raw * sign + C64::new(two_pi * m as f64, 0.0);
                        let d = (cand - pr).norm();
                        if d < dist {
                            dist = d;
                            best = cand;
                        }
                    }
                }
                best
            }
            None => rho_ramp_raw,
        };
        prev_ramp = Some(rho_ramp);
        let rho_base = rho0 + (rho1 - rho0) * t;
        let rho = rho_base + (rho_ramp - rho_base) * wt;
        out.push([sq * rho.cos(), sq * rho.sin()]);
    }
    Ok(out)
}
