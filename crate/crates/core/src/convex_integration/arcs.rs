//! Extension of generalized conformal-minimal data along boundary arcs: given
//! the datum value at the arc's root and the pulled-back 1-form along the
//! arc, build a compatible pair (u, f) whose first two components clear
//! prescribed height targets. The compatibility identity
//! `Re(pullback(f theta)) = d(u on the arc)` holds exactly by construction:
//! `u` is defined as the real part of the primitive whose derivative is
//! `f` times the pullback factor.

use crate::numerics::interp::cubic;
use crate::numerics::{C64, I};
use crate::weierstrass::norm3;

use super::{
    ci_null_path, smooth_step, ArcPath, CiError, CiOptions, CiReport,
};

/// Height targets along and at the end of one arc. `None` leaves a component
/// unconstrained (the bridge variant constrains the second component only).
#[derive(Debug, Clone, Default)]
pub struct ArcTargets {
    pub along_floor: [Option<f64>; 2],
    pub end_floor: [Option<f64>; 2],
    /// require f1 f2 != 0 at the far endpoint
    pub end_nonvanishing: bool,
    /// headroom added above every floor
    pub margin: f64,
}

/// One extension job: the pullback factor `c(t) = theta(beta_dot(t))`
/// sampled along the arc, the root data, and the targets.
#[derive(Debug, Clone)]
pub struct ArcJob {
    pub c: Vec<C64>,
    pub u_start: [f64; 3],
    pub f_start: [C64; 3],
    /// optional prescribed end vector in the null quadric; a safe default is
    /// chosen otherwise
    pub f_end: Option<[C64; 3]>,
    pub targets: ArcTargets,
}

#[derive(Debug, Clone)]
pub struct ArcExtension {
    pub u: Vec<[f64; 3]>,
    pub f: Vec<[C64; 3]>,
    pub report: CiReport,
    /// worst margin over all requested inequalities (positive = satisfied)
    pub worst_margin: f64,
}

fn c_at(c: &[C64], t: f64) -> C64 {
    cubic(c, t)
}

/// Default far-end null vector: the start vector with its Gauss parameter
/// rotated and scaled away from the axes, so both leading components are
/// bounded away from zero.
fn default_end_vector(f_start: &[C64; 3]) -> Result<[C64; 3], CiError> {
    let scale = norm3(f_start);
    if f_start[0].norm() < 1e-9 * scale {
        return Err(CiError::DegenerateInput {
            t: 1.0,
            what: "arc root has vanishing first component".into(),
        });
    }
    let g = (f_start[1] - I * f_start[2]) / f_start[0];
    let mut ge = g * C64::from_polar(1.18, std::f64::consts::PI / 7.0);
    // keep g clear of +-1 and +-i (zeros of f2, f3)
    for _ in 0..8 {
        let bad = (ge - 1.0).norm().min((ge + 1.0).norm()).min((ge - I).norm()).min((ge + I).norm());
        if bad > 0.15 {
            break;
        }
        ge *= C64::from_polar(1.1, 0.31);
    }
    let v = f_start[0];
    let geinv = 1.0 / ge;
    Ok([v, 0.5 * (ge - geinv) * v, 0.5 * I * (ge + geinv) * v])
}

/// Extend one arc. Returns samples of the generalized pair along the arc and
/// the verified margins.
pub fn extend_arc(job: &ArcJob, opts: &CiOptions) -> Result<ArcExtension, CiError> {
    let n_c = job.c.len();
    assert!(n_c >= 3, "pullback factor needs at least 3 samples");
    let min_c = job.c.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    if min_c <= 0.0 {
        return Err(CiError::DegenerateInput { t: 0.0, what: "pullback factor vanishes".into() });
    }
    let margin = if job.targets.margin > 0.0 { job.targets.margin } else { 0.5 };

    let f_end = match job.f_end {
        Some(v) => v,
        None => default_end_vector(&job.f_start)?,
    };

    // base derivative path h(t) = f-interp(t) * c(t), a path in the quadric
    // cone; interpolation runs in the (log g, log v) chart
    let params = |f: &[C64; 3]| -> Result<[C64; 2], CiError> {
        let scale = norm3(f);
        if f[0].norm() < 1e-9 * scale {
            return Err(CiError::DegenerateInput {
                t: 0.0,
                what: "first component vanishes on the arc data".into(),
            });
        }
        Ok([((f[1] - I * f[2]) / f[0]).ln(), f[0].ln()])
    };
    let p0 = params(&job.f_start)?;
    let mut p1 = params(&f_end)?;
    // align branches
    for k in 0..2 {
        let two_pi = 2.0 * std::f64::consts::PI;
        let shift = ((p0[k].im - p1[k].im) / two_pi).round();
        p1[k] = C64::new(p1[k].re, p1[k].im + shift * two_pi);
    }
    let base_f = move |t: f64| -> [C64; 3] {
        let lg = p0[0] + (p1[0] - p0[0]) * t;
        let lv = p0[1] + (p1[1] - p0[1]) * t;
        let g = lg.exp();
        let v = lv.exp();
        let ginv = 1.0 / g;
        let f = [v, 0.5 * (g - ginv) * v, 0.5 * I * (g + ginv) * v];
        let c = c_at(&job.c, t);
        [f[0] * c, f[1] * c, f[2] * c]
    };

    // required real gains for the constrained components
    let mut gain = [0.0f64; 3];
    for k in 0..2 {
        let mut need: f64 = 0.0;
        if let Some(floor) = job.targets.end_floor[k] {
            need = need.max(floor + margin - job.u_start[k]);
        }
        if let Some(floor) = job.targets.along_floor[k] {
            // the along-floor must already hold at the root
            if job.u_start[k] <= floor + 0.25 * margin {
                return Err(CiError::InfeasibleTarget {
                    sample: 0,
                    what: format!(
                        "root value u[{k}] = {:.3} sits below the along-arc floor {:.3}",
                        job.u_start[k], floor
                    ),
                });
            }
            need = need.max(0.0);
        }
        gain[k] = need.max(0.0);
    }

    // ramp derivative: flat windows at both ends glue to the base path, a
    // real displacement vector R in between supplies the gains
    let w = 0.12;
    let window = move |t: f64| smooth_step(t / w) * smooth_step((1.0 - t) / w);
    // measure the contribution of the glued base part
    let probe_n = 257;
    let mut base_part = [C64::new(0.0, 0.0); 3];
    for j in 0..probe_n {
        let t = j as f64 / (probe_n - 1) as f64;
        let b = base_f(t);
        let wt = 1.0 - window(t);
        let trap = if j == 0 || j == probe_n - 1 { 0.5 } else { 1.0 };
        for k in 0..3 {
            base_part[k] += b[k] * wt * trap / (probe_n - 1) as f64;
        }
    }
    let int_window: f64 = (0..probe_n)
        .map(|j| {
            let t = j as f64 / (probe_n - 1) as f64;
            let trap = if j == 0 || j == probe_n - 1 { 0.5 } else { 1.0 };
            window(t) * trap / (probe_n - 1) as f64
        })
        .sum();
    let mut ramp = [C64::new(0.0, 0.0); 3];
    for k in 0..3 {
        let target_re = gain[k] + 0.5 * margin;
        ramp[k] = (C64::new(target_re, 0.0) - base_part[k]) / int_window;
        // keep the ramp off the real axis a little so the split stays tame
        ramp[k] += I * C64::new(0.1 * margin, 0.0);
    }

    let n_path = opts.samples.max(n_c);
    let mut big_f0 = ArcPath::<3> {
        samples: vec![[C64::new(0.0, 0.0); 3]; n_path],
        derivs: vec![[C64::new(0.0, 0.0); 3]; n_path],
    };
    let deriv0 = |t: f64| -> [C64; 3] {
        let b = base_f(t);
        let wt = window(t);
        [
            b[0] * (1.0 - wt) + ramp[0] * wt,
            b[1] * (1.0 - wt) + ramp[1] * wt,
            b[2] * (1.0 - wt) + ramp[2] * wt,
        ]
    };
    for c in 0..3 {
        let cum = crate::numerics::quad::gauss_cumulative(&|t| deriv0(t)[c], n_path, 1.0);
        for k in 0..n_path {
            big_f0.samples[k][c] = cum[k];
        }
    }
    for k in 0..n_path {
        let t = k as f64 / (n_path - 1) as f64;
        big_f0.derivs[k] = deriv0(t);
    }

    // base quadric path for the derivative constraint
    let mut f0 = ArcPath::<3> {
        samples: vec![[C64::new(0.0, 0.0); 3]; n_path],
        derivs: vec![[C64::new(0.0, 0.0); 3]; n_path],
    };
    for k in 0..n_path {
        let t = k as f64 / (n_path - 1) as f64;
        f0.samples[k] = base_f(t);
    }

    let eps_arc = (0.45 * margin).min(0.35);
    let (big_f, f_cone, report) = ci_null_path(&f0, &big_f0, eps_arc, opts)?;

    // recover (u, f) along the arc; f = dG / c is in the quadric because the
    // quadric is a cone
    let n_out = big_f.len();
    let mut u = Vec::with_capacity(n_out);
    let mut f = Vec::with_capacity(n_out);
    for k in 0..n_out {
        let t = k as f64 / (n_out - 1) as f64;
        let c = c_at(&job.c, t);
        let g = big_f.samples[k];
        let df = f_cone.samples[k];
        u.push([
            job.u_start[0] + g[0].re,
            job.u_start[1] + g[1].re,
            job.u_start[2] + g[2].re,
        ]);
        f.push([df[0] / c, df[1] / c, df[2] / c]);
    }

    // verify targets
    let mut worst: f64 = f64::INFINITY;
    for (k, floor) in job.targets.along_floor.iter().enumerate() {
        if let Some(fl) = floor {
            for (s, uv) in u.iter().enumerate() {
                let m = uv[k] - fl;
                if m < worst {
                    worst = m;
                }
                if m <= 0.0 {
                    return Err(CiError::InfeasibleTarget {
                        sample: s,
                        what: format!("u[{k}] = {:.4} fell below floor {fl}", uv[k]),
                    });
                }
            }
        }
    }
    for (k, floor) in job.targets.end_floor.iter().enumerate() {
        if let Some(fl) = floor {
            let m = u.last().unwrap()[k] - fl;
            worst = worst.min(m);
            if m <= 0.0 {
                return Err(CiError::InfeasibleTarget {
                    sample: n_out - 1,
                    what: format!("end value u[{k}] = {:.4} below floor {fl}", u.last().unwrap()[k]),
                });
            }
        }
    }
    if job.targets.end_nonvanishing {
        let fe = f.last().unwrap();
        let floor = 1e-6 * norm3(fe);
        let m = fe[0].norm().min(fe[1].norm()) - floor;
        worst = worst.min(m);
        if m <= 0.0 {
            return Err(CiError::InfeasibleTarget {
                sample: n_out - 1,
                what: "f1 f2 vanishes at the far endpoint".into(),
            });
        }
    }

    Ok(ArcExtension { u, f, report, worst_margin: worst })
}

/// Extend a family of arcs; each job is independent.
pub fn extend_gcmi_arcs(
    jobs: &[ArcJob],
    opts: &CiOptions,
) -> Result<Vec<ArcExtension>, CiError> {
    jobs.iter().map(|j| extend_arc(j, opts)).collect()
}
