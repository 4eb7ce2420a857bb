//! One-dimensional convex integration. Paths are deformed so their
//! derivatives live on the punctured null quadric (ci_null_path) or on
//! variable quadric curves x^2 + y^2 = c(t) (ci_quadric_path).
//!
//! The oscillation runs inside a rational parameterization of the constraint
//! manifold, so the derivative constraint is an algebraic identity. Both
//! manifolds admit an angle coordinate in which the components are linear in
//! e^{+-i rho}; oscillating the angle as rho = center + Delta (1 - 2 dwell)
//! with a symmetric dwell profile makes the period average of e^{i rho}
//! equal e^{i center} W(Delta) for a single real-analytic kernel W. The
//! construction inverts W so the period mean of the derivative is exactly
//! the base-path derivative, which keeps the primitive inside the eps-tube
//! at every frequency; the exact terminal value (needed in the null-quadric
//! variant) comes from a least-norm Newton solve on band-shift knobs.

pub mod arcs;

use thiserror::Error;

use crate::numerics::interp::{cubic, cubic_vec};
use crate::numerics::newton::{self, NewtonOptions};
use crate::numerics::{C64, I};
use crate::tol;
use crate::weierstrass::qform;

pub use arcs::{extend_arc, extend_gcmi_arcs, ArcExtension, ArcJob, ArcTargets};

#[derive(Debug, Error)]
pub enum CiError {
    #[error("eps = {eps:.3e} infeasible at the sample cap; smallest achievable ~ {floor:.3e}")]
    EpsInfeasible { eps: f64, floor: f64 },
    #[error("endpoint correction failed: residual {residual:.3e}")]
    EndpointSolveFailed { residual: f64 },
    #[error("degenerate input at t = {t}: {what}")]
    DegenerateInput { t: f64, what: String },
    #[error("oscillation span rank-deficient (sigma ratio {ratio:.3e}) even after escalation")]
    RankDeficient { ratio: f64 },
    #[error("input paths disagree at the endpoints: |dF0 - f0| = {mismatch:.3e}")]
    EndpointMismatch { mismatch: f64 },
    #[error("arc target infeasible at sample {sample}: {what}")]
    InfeasibleTarget { sample: usize, what: String },
}

/// A sampled path in C^D on uniform parameters in [0, 1], with derivative
/// samples.
#[derive(Debug, Clone)]
pub struct ArcPath<const D: usize> {
    pub samples: Vec<[C64; D]>,
    pub derivs: Vec<[C64; D]>,
}

impl<const D: usize> ArcPath<D> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn value(&self, t: f64) -> [C64; D] {
        cubic_vec(&self.samples, t)
    }

    pub fn deriv(&self, t: f64) -> [C64; D] {
        cubic_vec(&self.derivs, t)
    }

    /// Max deviation between stored derivatives and centered differences of
    /// the stored samples.
    pub fn fd_consistency(&self) -> f64 {
        let n = self.len();
        let h = 1.0 / (n - 1) as f64;
        let mut worst: f64 = 0.0;
        for i in 1..n - 1 {
            for d in 0..D {
                let fd = (self.samples[i + 1][d] - self.samples[i - 1][d]) / (2.0 * h);
                worst = worst.max((fd - self.derivs[i][d]).norm());
            }
        }
        worst
    }

    /// Line path from a to b with constant derivative samples.
    pub fn line(a: [C64; D], b: [C64; D], n: usize) -> Self {
        let mut samples = Vec::with_capacity(n);
        let mut derivs = Vec::with_capacity(n);
        for k in 0..n {
            let t = k as f64 / (n - 1) as f64;
            let mut s = [C64::new(0.0, 0.0); D];
            let mut d = [C64::new(0.0, 0.0); D];
            for j in 0..D {
                s[j] = a[j] + (b[j] - a[j]) * t;
                d[j] = b[j] - a[j];
            }
            samples.push(s);
            derivs.push(d);
        }
        Self { samples, derivs }
    }
}

/// Per-parameter quadric constraint x^2 + y^2 = c(t), c bounded away from 0.
#[derive(Debug, Clone)]
pub struct QuadricConstraint {
    pub c: Vec<C64>,
}

impl QuadricConstraint {
    pub fn min_abs(&self) -> f64 {
        self.c.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn at(&self, t: f64) -> C64 {
        cubic(&self.c, t)
    }
}

#[derive(Debug, Clone)]
pub struct CiOptions {
    pub samples: usize,
    pub max_samples: usize,
    pub endpoint_tol: f64,
}

impl Default for CiOptions {
    fn default() -> Self {
        Self { samples: tol::ARC_SAMPLES, max_samples: 65536, endpoint_tol: 1e-11 }
    }
}

#[derive(Debug, Clone)]
pub struct CiReport {
    pub periods: usize,
    pub samples: usize,
    pub sup_deviation: f64,
    pub endpoint_error: f64,
    pub constraint_max: f64,
    pub ftc_error: f64,
    pub moment_sigma_ratio: f64,
}

// --- smooth profile pieces --------------------------------------------------

fn flat_bump(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// C-infinity step: 0 for x <= 0, 1 for x >= 1.
pub(crate) fn smooth_step(x: f64) -> f64 {
    let a = flat_bump(x);
    let b = flat_bump(1.0 - x);
    a / (a + b)
}

/// Window vanishing to all orders at t = 0, 1, equal to 1 on [w, 1-w].
fn end_window(t: f64, w: f64) -> f64 {
    smooth_step(t / w) * smooth_step((1.0 - t) / w)
}

/// Transition width of the dwell profile (fraction of one period per edge).
const DWELL_TR: f64 = 0.28;

/// Minimum output samples per oscillation period (about 14 per transition;
/// this is what pushes sampled-quadrature aliasing below the
/// fundamental-theorem gate).
const SAMPLES_PER_PERIOD: usize = 64;

/// Dwell profile: equal plateaus at 0 and 1 joined by C-infinity edges. Its
/// sign profile v = 1 - 2 dwell has a distribution symmetric under v -> -v,
/// which kills the odd part of the oscillation average identically.
fn dwell(phase: f64) -> f64 {
    let x = phase - phase.floor();
    let plateau = 0.5 - DWELL_TR;
    if x < plateau {
        0.0
    } else if x < 0.5 {
        smooth_step((x - plateau) / DWELL_TR)
    } else if x < 0.5 + plateau {
        1.0
    } else {
        1.0 - smooth_step((x - 0.5 - plateau) / DWELL_TR)
    }
}

// --- the mean kernel W(Delta) -------------------------------------------------

/// < cos(Delta v) > over one dwell period of v = 1 - 2 dwell.
fn kernel_w(delta: C64) -> C64 {
    let n = 48;
    let mut trans = C64::new(0.0, 0.0);
    for j in 0..n {
        let s = (j as f64 + 0.5) / n as f64;
        let v = 1.0 - 2.0 * smooth_step(s);
        trans += (delta * v).cos();
    }
    trans /= n as f64;
    (1.0 - 2.0 * DWELL_TR) * delta.cos() + 2.0 * DWELL_TR * trans
}

fn kernel_w_deriv(delta: C64) -> C64 {
    let n = 48;
    let mut trans = C64::new(0.0, 0.0);
    for j in 0..n {
        let s = (j as f64 + 0.5) / n as f64;
        let v = 1.0 - 2.0 * smooth_step(s);
        trans += -v * (delta * v).sin();
    }
    trans /= n as f64;
    -(1.0 - 2.0 * DWELL_TR) * delta.sin() + 2.0 * DWELL_TR * trans
}

/// Solve W(Delta) = k for Delta. W is even, so the solve runs in
/// y = Delta^2 where the root is simple even at k = 1 (Delta = 0).
fn solve_kernel(k: C64, guess: C64) -> Result<C64, CiError> {
    // alpha = -W''(0), from the quadratic model W ~ 1 - alpha y / 2
    let alpha = (C64::new(2e6, 0.0) * (C64::new(1.0, 0.0) - kernel_w(C64::new(1e-3, 0.0)))).re;
    let mut y = if guess.norm() > 1e-6 {
        guess * guess
    } else if k.norm() < 1.05 {
        2.0 * (C64::new(1.0, 0.0) - k) / alpha
    } else {
        let d0 = k.acos();
        d0 * d0
    };
    let g_of = |y: C64| kernel_w(y.sqrt());
    let gp_of = |y: C64| -> C64 {
        if y.norm() < 1e-10 {
            C64::new(-alpha / 2.0, 0.0)
        } else {
            let d = y.sqrt();
            kernel_w_deriv(d) / (2.0 * d)
        }
    };
    let tol = 1e-12 * (1.0 + k.norm());
    let mut f = g_of(y) - k;
    for _ in 0..100 {
        if f.norm() <= tol {
            return Ok(y.sqrt());
        }
        let gp = gp_of(y);
        if gp.norm() < 1e-14 {
            y += C64::new(0.05, 0.02);
            f = g_of(y) - k;
            continue;
        }
        let mut step = f / gp;
        // damped update
        for _ in 0..24 {
            let cand = y - step;
            let fc = g_of(cand) - k;
            if fc.norm() < f.norm() {
                y = cand;
                f = fc;
                break;
            }
            step *= 0.5;
        }
    }
    if f.norm() < 1e-9 * (1.0 + k.norm()) {
        Ok(y.sqrt())
    } else {
        Err(CiError::DegenerateInput {
            t: f64::NAN,
            what: format!("kernel inversion stalled at residual {:.3e}", f.norm()),
        })
    }
}

// --- branch tracking ----------------------------------------------------------

/// Continue a logarithm branch: shift `raw` by 2 pi i multiples nearest prev.
fn track_log(prev: C64, raw: C64) -> C64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let k = ((prev.im - raw.im) / two_pi).round();
    C64::new(raw.re, raw.im + k * two_pi)
}

/// Nearest square-root continuation.
pub(crate) fn track_sqrt(prev: Option<C64>, value: C64) -> C64 {
    let r = value.sqrt();
    match prev {
        Some(p) if (r + p).norm() < (r - p).norm() => -r,
        _ => r,
    }
}

fn sub3(a: &[C64; 3], b: &[C64; 3]) -> [C64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm3f(a: &[C64; 3]) -> f64 {
    (a[0].norm_sqr() + a[1].norm_sqr() + a[2].norm_sqr()).sqrt()
}

fn null_value(lg: C64, lv: C64) -> [C64; 3] {
    let g = lg.exp();
    let v = lv.exp();
    let ginv = 1.0 / g;
    [v, 0.5 * (g - ginv) * v, 0.5 * I * (g + ginv) * v]
}

/// (log g, log v) of a null triple with nonvanishing first component.
fn null_params(f: &[C64; 3], prev: Option<[C64; 2]>) -> Result<[C64; 2], CiError> {
    let scale = norm3f(f);
    if f[0].norm() < 1e-9 * scale {
        return Err(CiError::DegenerateInput {
            t: f64::NAN,
            what: "first component vanishes; the rational chart misses this slice".into(),
        });
    }
    let g = (f[1] - I * f[2]) / f[0];
    let lg = g.ln();
    let lv = f[0].ln();
    Ok(match prev {
        Some([plg, plv]) => [track_log(plg, lg), track_log(plv, lv)],
        None => [lg, lv],
    })
}

// --- null-quadric engine --------------------------------------------------------

/// Oscillation data per track node: center log-Gauss parameter, log first
/// component, complex swing angle.
#[derive(Debug, Clone, Copy)]
struct NullOsc {
    lg_center: C64,
    lv: C64,
    delta: C64,
}

#[derive(Clone)]
struct NullEngine {
    n_track: usize,
    m: Vec<[C64; 3]>,
    base_params: Vec<[C64; 2]>,
    periods: usize,
    window: f64,
    knob: [C64; 3],
}

impl NullEngine {
    fn band_weight(t: f64, w: f64) -> f64 {
        // one smooth band over the interior; the endpoint residual is only
        // six-dimensional, so a single complex 3-vector knob suffices
        end_window(t, (2.5 * w).max(0.08))
    }

    fn m_eff(&self, t: f64) -> [C64; 3] {
        let mt = cubic_vec(&self.m, t);
        let bw = Self::band_weight(t, self.window);
        let mut out = [C64::new(0.0, 0.0); 3];
        for k in 0..3 {
            out[k] = mt[k] + self.knob[k] * bw;
        }
        out
    }

    /// Closed-form oscillation whose period mean is exactly m: v = m1,
    /// k^2 = 1 - Q(m)/m1^2, G = (m2 - i m3)/(m1 k), Delta solves
    /// W(Delta) = k.
    fn build_tracks(&self) -> Result<Vec<NullOsc>, CiError> {
        let n = self.n_track;
        let mut out = Vec::with_capacity(n);
        let mut prev_k: Option<C64> = None;
        let mut prev_lg: Option<C64> = None;
        let mut prev_lv: Option<C64> = None;
        let mut prev_delta = C64::new(0.0, 0.0);
        for i in 0..n {
            let t = i as f64 / (n - 1) as f64;
            let m = self.m_eff(t);
            let scale = norm3f(&m);
            if scale == 0.0 || m[0].norm() < 1e-9 * scale {
                return Err(CiError::DegenerateInput {
                    t,
                    what: "base derivative has (near) vanishing first component".into(),
                });
            }
            let k2 = 1.0 - qform(&m) / (m[0] * m[0]);
            let k = track_sqrt(prev_k, k2);
            if k.norm() < 1e-8 {
                return Err(CiError::DegenerateInput {
                    t,
                    what: "mean kernel degenerates (m2^2 + m3^2 ~ 0)".into(),
                });
            }
            prev_k = Some(k);
            let w2 = m[1] / (m[0] * k);
            let w3 = m[2] / (m[0] * k);
            let g_center = w2 - I * w3;
            let lg_raw = g_center.ln();
            let lg = match prev_lg {
                Some(p) => track_log(p, lg_raw),
                None => lg_raw,
            };
            prev_lg = Some(lg);
            let lv_raw = m[0].ln();
            let lv = match prev_lv {
                Some(p) => track_log(p, lv_raw),
                None => lv_raw,
            };
            prev_lv = Some(lv);
            let delta = solve_kernel(k, prev_delta).map_err(|e| at_t(e, t))?;
            prev_delta = delta;
            out.push(NullOsc { lg_center: lg, lv, delta });
        }
        Ok(out)
    }

    fn f_at(&self, t: f64, tracks: &[NullOsc]) -> [C64; 3] {
        let lam = dwell(self.periods as f64 * t);
        let osc = interp_osc(tracks, t);
        let v_sign = 1.0 - 2.0 * lam;
        let lg_osc = osc[0] + I * osc[2] * v_sign;
        let lv_osc = osc[1];
        let base = cubic_vec(&self.base_params, t);
        let w = end_window(t, self.window);
        let lg = base[0] + (lg_osc - base[0]) * w;
        let lv = base[1] + (lv_osc - base[1]) * w;
        null_value(lg, lv)
    }
}

/// Local cubic interpolation of the three oscillation tracks.
fn interp_osc(tracks: &[NullOsc], t: f64) -> [C64; 3] {
    let n = tracks.len();
    let x = t.clamp(0.0, 1.0) * (n - 1) as f64;
    let mut k = x.floor() as usize;
    if k >= n - 1 {
        k = n - 2;
    }
    let s = x - k as f64;
    let field = |o: &NullOsc, d: usize| -> C64 {
        match d {
            0 => o.lg_center,
            1 => o.lv,
            _ => o.delta,
        }
    };
    let mut out = [C64::new(0.0, 0.0); 3];
    for (d, slot) in out.iter_mut().enumerate() {
        let p1 = field(&tracks[k], d);
        let p2 = field(&tracks[k + 1], d);
        let p0 = if k == 0 {
            3.0 * p1 - 3.0 * p2 + field(&tracks[2.min(n - 1)], d)
        } else {
            field(&tracks[k - 1], d)
        };
        let p3 = if k + 2 > n - 1 {
            field(&tracks[n.saturating_sub(3)], d) - 3.0 * p1 + 3.0 * p2
        } else {
            field(&tracks[k + 2], d)
        };
        let a = 2.0 * p1;
        let b = p2 - p0;
        let c = 2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3;
        let dd = -p0 + 3.0 * p1 - 3.0 * p2 + p3;
        *slot = 0.5 * (a + b * s + c * s * s + dd * s * s * s);
    }
    out
}

fn at_t(e: CiError, t: f64) -> CiError {
    match e {
        CiError::DegenerateInput { what, .. } => CiError::DegenerateInput { t, what },
        other => other,
    }
}

fn debug_note(msg: &str) {
    if std::env::var("MINSURF_CI_DEBUG").is_ok() {
        eprintln!("{msg}");
    }
}

/// Convex integration into the punctured null quadric. The output matches
/// `F0`'s endpoint values and derivatives, stays within `eps` of `F0`, has
/// its derivative everywhere on the quadric, and hits `F0(1)` to solver
/// tolerance. Returns `(F, f, report)`.
pub fn ci_null_path(
    f0: &ArcPath<3>,
    big_f0: &ArcPath<3>,
    eps: f64,
    opts: &CiOptions,
) -> Result<(ArcPath<3>, ArcPath<3>, CiReport), CiError> {
    assert!(eps > 0.0, "eps must be positive");
    let mm = norm3f(&sub3(&big_f0.derivs[0], &f0.samples[0])).max(norm3f(&sub3(
        big_f0.derivs.last().unwrap(),
        f0.samples.last().unwrap(),
    )));
    if mm > 1e-10 * (1.0 + norm3f(&f0.samples[0])) {
        return Err(CiError::EndpointMismatch { mismatch: mm });
    }

    let n_track = 512;
    let scale: f64 = (0..n_track)
        .map(|i| norm3f(&big_f0.deriv(i as f64 / (n_track - 1) as f64)))
        .fold(0.0, f64::max)
        .max(1e-9);

    // fast path: base derivative already on the quadric everywhere
    let already = (0..n_track).all(|i| {
        let d = big_f0.deriv(i as f64 / (n_track - 1) as f64);
        let n2 = norm3f(&d).powi(2);
        n2 > 0.0 && qform(&d).norm() <= tol::NULL_RESIDUAL_REL * n2
    });
    if already {
        return Ok(passthrough(big_f0, opts.samples));
    }

    let m_track: Vec<[C64; 3]> =
        (0..n_track).map(|i| big_f0.deriv(i as f64 / (n_track - 1) as f64)).collect();
    let mut base_params = Vec::with_capacity(n_track);
    let mut prev = None;
    for i in 0..n_track {
        let t = i as f64 / (n_track - 1) as f64;
        let p = null_params(&f0.value(t), prev).map_err(|e| at_t(e, t))?;
        prev = Some(p);
        base_params.push(p);
    }
    let mismatch_scale: f64 = (0..n_track)
        .map(|i| {
            let t = i as f64 / (n_track - 1) as f64;
            norm3f(&sub3(&big_f0.deriv(t), &f0.value(t)))
        })
        .fold(0.0, f64::max);

    let probe = NullEngine {
        n_track,
        m: m_track.clone(),
        base_params: base_params.clone(),
        periods: 8,
        window: 0.05,
        knob: [C64::new(0.0, 0.0); 3],
    };
    let tracks = probe.build_tracks()?;
    let amp = oscillation_amplitude(&probe, &tracks);
    let mut periods = ((3.0 * (amp + mismatch_scale) / eps).ceil() as usize).max(6);
    let mut n_out = opts.samples;

    for _escalation in 0..7 {
        while periods * SAMPLES_PER_PERIOD > n_out {
            if n_out >= opts.max_samples {
                let floor = 3.0 * (amp + mismatch_scale) * SAMPLES_PER_PERIOD as f64
                    / opts.max_samples as f64;
                return Err(CiError::EpsInfeasible { eps, floor });
            }
            n_out = (n_out * 2).min(opts.max_samples);
        }
        let mut engine = NullEngine {
            n_track,
            m: m_track.clone(),
            base_params: base_params.clone(),
            periods,
            window: (1.0 / periods as f64).clamp(0.004, 0.08),
            knob: [C64::new(0.0, 0.0); 3],
        };

        // endpoint Newton on the band knobs
        let target = *big_f0.samples.last().unwrap();
        let start = big_f0.samples[0];
        let residual = |knobs: &nalgebra::DVector<f64>| -> nalgebra::DVector<f64> {
            let mut knob = [C64::new(0.0, 0.0); 3];
            for c in 0..3 {
                knob[c] = C64::new(knobs[2 * c], knobs[2 * c + 1]);
            }
            let eng = NullEngine { knob, ..engine.clone() };
            let tracks = match eng.build_tracks() {
                Ok(v) => v,
                Err(_) => return nalgebra::DVector::from_element(6, 1e6),
            };
            let endpoint = integrate_endpoint(&eng, &tracks, start, n_out);
            let mut r = nalgebra::DVector::zeros(6);
            for c in 0..3 {
                r[2 * c] = (endpoint[c] - target[c]).re / scale;
                r[2 * c + 1] = (endpoint[c] - target[c]).im / scale;
            }
            r
        };
        let mut knobs_vec = nalgebra::DVector::zeros(6);
        let rep = newton::solve(
            &mut knobs_vec,
            residual,
            &NewtonOptions {
                tol: opts.endpoint_tol / scale,
                max_iter: 30,
                radius: (10.0 * eps).max(1.0),
                fd_step: 1e-7,
            },
        );
        for c in 0..3 {
            engine.knob[c] = C64::new(knobs_vec[2 * c], knobs_vec[2 * c + 1]);
        }
        if !rep.converged {
            debug_note(&format!(
                "[ci1] periods {periods}: newton stalled at {:?}",
                rep.residual_history.last()
            ));
            periods *= 2;
            continue;
        }

        let tracks = engine.build_tracks()?;
        let f_closure = |t: f64| engine.f_at(t, &tracks);
        let (big_f, f_path) = assemble3(&f_closure, start, n_out);

        let mut sup_dev: f64 = 0.0;
        let mut constraint: f64 = 0.0;
        for k in 0..n_out {
            let t = k as f64 / (n_out - 1) as f64;
            sup_dev = sup_dev.max(norm3f(&sub3(&big_f.samples[k], &big_f0.value(t))));
            let f = &f_path.samples[k];
            constraint = constraint.max(qform(f).norm() / norm3f(f).powi(2));
        }
        let endpoint_error = norm3f(&sub3(big_f.samples.last().unwrap(), &target));
        let ftc = ftc_check(&f_path, &big_f);
        let sigma_ratio = moment_ratio(&f_path);

        if sup_dev >= eps {
            debug_note(&format!(
                "[ci1] periods {periods} n_out {n_out}: sup {sup_dev:.3e} >= eps {eps:.3e}"
            ));
            periods *= 2;
            continue;
        }
        if sigma_ratio < 1e-8 {
            debug_note(&format!("[ci1] periods {periods}: sigma ratio {sigma_ratio:.3e}"));
            periods *= 2;
            continue;
        }
        let report = CiReport {
            periods,
            samples: n_out,
            sup_deviation: sup_dev,
            endpoint_error,
            constraint_max: constraint,
            ftc_error: ftc,
            moment_sigma_ratio: sigma_ratio,
        };
        return Ok((big_f, f_path, report));
    }
    Err(CiError::EndpointSolveFailed { residual: f64::NAN })
}

fn passthrough(big_f0: &ArcPath<3>, n_out: usize) -> (ArcPath<3>, ArcPath<3>, CiReport) {
    let mut big_f = ArcPath::<3> {
        samples: vec![[C64::new(0.0, 0.0); 3]; n_out],
        derivs: vec![[C64::new(0.0, 0.0); 3]; n_out],
    };
    let mut f_path = big_f.clone();
    for k in 0..n_out {
        let t = k as f64 / (n_out - 1) as f64;
        big_f.samples[k] = big_f0.value(t);
        let d = big_f0.deriv(t);
        big_f.derivs[k] = d;
        f_path.samples[k] = d;
        let h = 1e-6;
        let tp = (t + h).min(1.0);
        let tm = (t - h).max(0.0);
        let dp = big_f0.deriv(tp);
        let dm = big_f0.deriv(tm);
        for c in 0..3 {
            f_path.derivs[k][c] = (dp[c] - dm[c]) / (tp - tm);
        }
    }
    let report = CiReport {
        periods: 0,
        samples: n_out,
        sup_deviation: 0.0,
        endpoint_error: 0.0,
        constraint_max: big_f
            .derivs
            .iter()
            .map(|d| qform(d).norm() / norm3f(d).powi(2))
            .fold(0.0, f64::max),
        ftc_error: ftc_check(&f_path, &big_f),
        moment_sigma_ratio: moment_ratio(&f_path),
    };
    (big_f, f_path, report)
}

fn oscillation_amplitude(engine: &NullEngine, tracks: &[NullOsc]) -> f64 {
    let mut amp: f64 = 0.0;
    for i in 0..24 {
        let t = (i as f64 + 0.5) / 24.0;
        let m = engine.m_eff(t);
        let per = 1.0 / engine.periods as f64;
        for j in 0..16 {
            let tj = (t - 0.5 * per + per * j as f64 / 16.0).clamp(0.0, 1.0);
            let f = engine.f_at(tj, tracks);
            amp = amp.max(norm3f(&sub3(&f, &m)));
        }
    }
    amp
}

/// Cumulative Gauss integration of a C^3-valued closure, one evaluation per
/// quadrature node.
fn gauss_cumulative3(f: &dyn Fn(f64) -> [C64; 3], n: usize) -> Vec<[C64; 3]> {
    let h = 1.0 / (n - 1) as f64;
    let mut out = vec![[C64::new(0.0, 0.0); 3]; n];
    for k in 1..n {
        let a = (k - 1) as f64 * h;
        let mut acc = [C64::new(0.0, 0.0); 3];
        for &(x, w) in &crate::numerics::quad::GAUSS8 {
            let v = f(a + 0.5 * h * (x + 1.0));
            for c in 0..3 {
                acc[c] += w * v[c];
            }
        }
        for c in 0..3 {
            out[k][c] = out[k - 1][c] + acc[c] * (0.5 * h);
        }
    }
    out
}

fn assemble3(
    f_closure: &dyn Fn(f64) -> [C64; 3],
    start: [C64; 3],
    n_out: usize,
) -> (ArcPath<3>, ArcPath<3>) {
    let mut big_f = ArcPath::<3> {
        samples: vec![[C64::new(0.0, 0.0); 3]; n_out],
        derivs: vec![[C64::new(0.0, 0.0); 3]; n_out],
    };
    let mut f_path = big_f.clone();
    let cum = gauss_cumulative3(f_closure, n_out);
    for k in 0..n_out {
        for c in 0..3 {
            big_f.samples[k][c] = start[c] + cum[k][c];
        }
    }
    let fd_h = 1e-7;
    for k in 0..n_out {
        let t = k as f64 / (n_out - 1) as f64;
        let f = f_closure(t);
        big_f.derivs[k] = f;
        f_path.samples[k] = f;
        let tp = (t + fd_h).min(1.0);
        let tm = (t - fd_h).max(0.0);
        let fp = f_closure(tp);
        let fm = f_closure(tm);
        for c in 0..3 {
            f_path.derivs[k][c] = (fp[c] - fm[c]) / (tp - tm);
        }
    }
    (big_f, f_path)
}

/// Endpoint of the integral on exactly the grid the final assembly uses, so
/// the Newton target and the assembled path agree to rounding.
fn integrate_endpoint(
    eng: &NullEngine,
    tracks: &[NullOsc],
    start: [C64; 3],
    n_out: usize,
) -> [C64; 3] {
    let h = 1.0 / (n_out - 1) as f64;
    let mut acc = [C64::new(0.0, 0.0); 3];
    for k in 1..n_out {
        let a = (k - 1) as f64 * h;
        for &(x, w) in &crate::numerics::quad::GAUSS8 {
            let v = eng.f_at(a + 0.5 * h * (x + 1.0), tracks);
            for c in 0..3 {
                acc[c] += (0.5 * h) * w * v[c];
            }
        }
    }
    [start[0] + acc[0], start[1] + acc[1], start[2] + acc[2]]
}

fn ftc_check<const D: usize>(f: &ArcPath<D>, big_f: &ArcPath<D>) -> f64 {
    let mut worst: f64 = 0.0;
    for c in 0..D {
        let vals: Vec<C64> = f.samples.iter().map(|s| s[c]).collect();
        let integral = crate::numerics::quad::trapezoid_corrected(&vals, 1.0);
        let displacement = big_f.samples.last().unwrap()[c] - big_f.samples[0][c];
        worst = worst.max((integral - displacement).norm());
    }
    worst
}

/// sigma_min / sigma_max of the 3x3 moment matrix of the derivative path.
fn moment_ratio(f: &ArcPath<3>) -> f64 {
    let n = f.len();
    let mut m = nalgebra::DMatrix::<C64>::zeros(3, 3);
    for s in &f.samples {
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] += s[i] * s[j].conj() / n as f64;
            }
        }
    }
    let svd = m.svd(false, false);
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let smin = svd.singular_values.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if smax == 0.0 {
        0.0
    } else {
        smin / smax
    }
}

// --- quadric-curve engine -------------------------------------------------------

/// Convex integration with derivatives on the moving quadric
/// x^2 + y^2 = c(t). Matches F(0) and both end derivatives exactly; no
/// terminal-value correction is applied.
pub fn ci_quadric_path(
    f0: &ArcPath<2>,
    big_f0: &ArcPath<2>,
    constraint: &QuadricConstraint,
    eps: f64,
    opts: &CiOptions,
) -> Result<(ArcPath<2>, CiReport), CiError> {
    assert!(eps > 0.0);
    if constraint.min_abs() <= 0.0 {
        return Err(CiError::DegenerateInput {
            t: f64::NAN,
            what: "quadric constant vanishes".into(),
        });
    }
    let norm2 = |a: &[C64; 2]| (a[0].norm_sqr() + a[1].norm_sqr()).sqrt();
    let mm = {
        let d0 = [big_f0.derivs[0][0] - f0.samples[0][0], big_f0.derivs[0][1] - f0.samples[0][1]];
        let dl = [
            big_f0.derivs.last().unwrap()[0] - f0.samples.last().unwrap()[0],
            big_f0.derivs.last().unwrap()[1] - f0.samples.last().unwrap()[1],
        ];
        norm2(&d0).max(norm2(&dl))
    };
    if mm > 1e-10 * (1.0 + norm2(&f0.samples[0])) {
        return Err(CiError::EndpointMismatch { mismatch: mm });
    }

    let n_track = 512;
    let mut n_out = opts.samples;

    let mut sqrt_c = Vec::with_capacity(n_track);
    let mut prev_sq: Option<C64> = None;
    for i in 0..n_track {
        let t = i as f64 / (n_track - 1) as f64;
        let s = track_sqrt(prev_sq, constraint.at(t));
        prev_sq = Some(s);
        sqrt_c.push(s);
    }
    let mut base_rho = Vec::with_capacity(n_track);
    let mut prev_rho: Option<C64> = None;
    for i in 0..n_track {
        let t = i as f64 / (n_track - 1) as f64;
        let f = f0.value(t);
        let xi = (f[0] + I * f[1]) / sqrt_c[i];
        let rho = -I * xi.ln();
        let rho = match prev_rho {
            Some(p) => track_log(I * p, I * rho) / I,
            None => rho,
        };
        prev_rho = Some(rho);
        base_rho.push(rho);
    }
    let m_track: Vec<[C64; 2]> =
        (0..n_track).map(|i| big_f0.deriv(i as f64 / (n_track - 1) as f64)).collect();

    // split tracks: direction angle S and swing Delta with W(Delta) = chi,
    // where the period mean sqrt(c) chi e^{iS}-representation equals m
    let mut splits = Vec::with_capacity(n_track);
    {
        let mut prev_s: Option<C64> = None;
        let mut prev_d = C64::new(0.0, 0.0);
        let mut prev_chi: Option<C64> = None;
        for i in 0..n_track {
            let t = i as f64 / (n_track - 1) as f64;
            let u = [m_track[i][0] / sqrt_c[i], m_track[i][1] / sqrt_c[i]];
            let chi_sq = u[0] * u[0] + u[1] * u[1];
            let chi = track_sqrt(prev_chi, chi_sq);
            prev_chi = Some(chi);
            let (s, d) = if chi.norm() < 1e-12 {
                let s = prev_s.unwrap_or(C64::new(0.0, 0.0));
                let d = solve_kernel(C64::new(0.0, 0.0), prev_d).map_err(|e| at_t(e, t))?;
                (s, d)
            } else {
                let eis = (u[0] + I * u[1]) / chi;
                let s_raw = -I * eis.ln();
                let s = match prev_s {
                    Some(p) => track_log(I * p, I * s_raw) / I,
                    None => s_raw,
                };
                let d = solve_kernel(chi, prev_d).map_err(|e| at_t(e, t))?;
                (s, d)
            };
            prev_s = Some(s);
            prev_d = d;
            splits.push([s, d]);
        }
    }

    let mut amp: f64 = 0.0;
    for i in 0..n_track {
        let sc = sqrt_c[i];
        let [s, d] = splits[i];
        let p = [(s + d).cos() * sc, (s + d).sin() * sc];
        let m = m_track[i];
        amp = amp.max(((p[0] - m[0]).norm_sqr() + (p[1] - m[1]).norm_sqr()).sqrt());
    }
    let mismatch_scale: f64 = (0..n_track)
        .map(|i| {
            let t = i as f64 / (n_track - 1) as f64;
            let a = big_f0.deriv(t);
            let b = f0.value(t);
            ((a[0] - b[0]).norm_sqr() + (a[1] - b[1]).norm_sqr()).sqrt()
        })
        .fold(0.0, f64::max);
    let mut periods = ((3.0 * (amp + mismatch_scale) / eps).ceil() as usize).max(6);

    let f_at = |t: f64, periods: usize| -> [C64; 2] {
        let lam = dwell(periods as f64 * t);
        let sp = cubic_vec(&splits, t);
        let rho_osc = sp[0] + sp[1] * (1.0 - 2.0 * lam);
        let rho_base = cubic(&base_rho, t);
        let window = (1.0 / periods as f64).clamp(0.004, 0.08);
        let w = end_window(t, window);
        let rho = rho_base + (rho_osc - rho_base) * w;
        let sc = track_sqrt(Some(cubic(&sqrt_c, t.min(1.0))), constraint.at(t));
        [sc * rho.cos(), sc * rho.sin()]
    };

    for _escalation in 0..7 {
        while periods * SAMPLES_PER_PERIOD > n_out {
            if n_out >= opts.max_samples {
                let floor = 3.0 * (amp + mismatch_scale) * SAMPLES_PER_PERIOD as f64
                    / opts.max_samples as f64;
                return Err(CiError::EpsInfeasible { eps, floor });
            }
            n_out = (n_out * 2).min(opts.max_samples);
        }

        let start = big_f0.samples[0];
        let mut big_f = ArcPath::<2> {
            samples: vec![[C64::new(0.0, 0.0); 2]; n_out],
            derivs: vec![[C64::new(0.0, 0.0); 2]; n_out],
        };
        {
            let h = 1.0 / (n_out - 1) as f64;
            let mut acc = [C64::new(0.0, 0.0); 2];
            for k in 1..n_out {
                let a = (k - 1) as f64 * h;
                for &(x, w) in &crate::numerics::quad::GAUSS8 {
                    let v = f_at(a + 0.5 * h * (x + 1.0), periods);
                    for c in 0..2 {
                        acc[c] += (0.5 * h) * w * v[c];
                    }
                }
                for c in 0..2 {
                    big_f.samples[k][c] = start[c] + acc[c];
                }
            }
        }
        let mut constraint_max: f64 = 0.0;
        let mut sup_dev: f64 = 0.0;
        for k in 0..n_out {
            let t = k as f64 / (n_out - 1) as f64;
            let f = f_at(t, periods);
            big_f.derivs[k] = f;
            let c = constraint.at(t);
            constraint_max =
                constraint_max.max((f[0] * f[0] + f[1] * f[1] - c).norm() / c.norm().max(1.0));
            let b0 = big_f0.value(t);
            sup_dev = sup_dev.max(
                ((big_f.samples[k][0] - b0[0]).norm_sqr()
                    + (big_f.samples[k][1] - b0[1]).norm_sqr())
                .sqrt(),
            );
        }
        if sup_dev >= eps {
            debug_note(&format!(
                "[ci2] periods {periods} n_out {n_out}: sup {sup_dev:.3e} >= eps {eps:.3e}"
            ));
            periods *= 2;
            continue;
        }
        let mut f_path = ArcPath::<2> {
            samples: big_f.derivs.clone(),
            derivs: vec![[C64::new(0.0, 0.0); 2]; n_out],
        };
        let fd_h = 1e-7;
        for k in 0..n_out {
            let t = k as f64 / (n_out - 1) as f64;
            let tp = (t + fd_h).min(1.0);
            let tm = (t - fd_h).max(0.0);
            let fp = f_at(tp, periods);
            let fm = f_at(tm, periods);
            for c in 0..2 {
                f_path.derivs[k][c] = (fp[c] - fm[c]) / (tp - tm);
            }
        }
        let ftc = ftc_check(&f_path, &big_f);
        let report = CiReport {
            periods,
            samples: n_out,
            sup_deviation: sup_dev,
            endpoint_error: 0.0,
            constraint_max,
            ftc_error: ftc,
            moment_sigma_ratio: 1.0,
        };
        return Ok((big_f, report));
    }
    Err(CiError::EpsInfeasible { eps, floor: amp / periods as f64 })
}

#[cfg(test)]
mod tests;
