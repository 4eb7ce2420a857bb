use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numerics::{C64, I};
use crate::tol;
use crate::weierstrass::qform;

use super::arcs::extend_arc;
use super::*;

fn null_from_g(g: C64, v: C64) -> [C64; 3] {
    let ginv = 1.0 / g;
    [v, 0.5 * (g - ginv) * v, 0.5 * I * (g + ginv) * v]
}

fn norm3(a: &[C64; 3]) -> f64 {
    (a[0].norm_sqr() + a[1].norm_sqr() + a[2].norm_sqr()).sqrt()
}

/// A smooth random path in the null quadric plus a compatible C^1 base path
/// whose end derivatives match.
fn random_admissible_ci1(rng: &mut ChaCha8Rng, n: usize) -> (ArcPath<3>, ArcPath<3>) {
    // random smooth Gauss parameters
    let a1 = rng.gen_range(-0.6..0.6);
    let a2 = rng.gen_range(-0.6..0.6);
    let b1 = rng.gen_range(-0.4..0.4);
    let b2 = rng.gen_range(-0.4..0.4);
    let g0 = C64::from_polar(rng.gen_range(0.6..1.8), rng.gen_range(-1.2..1.2f64));
    let v0 = C64::from_polar(rng.gen_range(0.7..1.4), rng.gen_range(-1.0..1.0f64));
    let f_of = move |t: f64| -> [C64; 3] {
        let g = g0 * (C64::new(a1 * t, b1 * (2.3 * t).sin())).exp();
        let v = v0 * (C64::new(a2 * (1.7 * t).sin(), b2 * t)).exp();
        null_from_g(g, v)
    };
    let mut f0 = ArcPath::<3> {
        samples: vec![[C64::new(0.0, 0.0); 3]; n],
        derivs: vec![[C64::new(0.0, 0.0); 3]; n],
    };
    for k in 0..n {
        let t = k as f64 / (n - 1) as f64;
        f0.samples[k] = f_of(t);
    }
    // base path: ends glued to f0's end values, middle drifting near the
    // chord of the two (keeps the data admissible: the middle derivative
    // stays in the tube where the split is well-conditioned)
    let start = [C64::new(0.0, 0.0); 3];
    let disp = [
        C64::new(rng.gen_range(-0.15..0.15), rng.gen_range(-0.15..0.15)),
        C64::new(rng.gen_range(-0.15..0.15), rng.gen_range(-0.15..0.15)),
        C64::new(rng.gen_range(-0.15..0.15), rng.gen_range(-0.15..0.15)),
    ];
    let fa = f_of(0.0);
    let fb = f_of(1.0);
    let w = 0.1;
    let deriv = move |t: f64| -> [C64; 3] {
        let sa = smooth_step(1.0 - t / w);
        let sb = smooth_step(1.0 - (1.0 - t) / w);
        let mid = (1.0 - sa - sb).max(0.0);
        let mut out = [C64::new(0.0, 0.0); 3];
        for c in 0..3 {
            let chord = 0.5 * (fa[c] + fb[c]);
            out[c] = fa[c] * sa + fb[c] * sb + (chord + disp[c]) * mid;
        }
        out
    };
    let mut big = ArcPath::<3> {
        samples: vec![[C64::new(0.0, 0.0); 3]; n],
        derivs: vec![[C64::new(0.0, 0.0); 3]; n],
    };
    for c in 0..3 {
        let cum = crate::numerics::quad::gauss_cumulative(&|t| deriv(t)[c], n, 1.0);
        for k in 0..n {
            big.samples[k][c] = start[c] + cum[k];
        }
    }
    for k in 0..n {
        let t = k as f64 / (n - 1) as f64;
        big.derivs[k] = deriv(t);
    }
    (f0, big)
}

#[test]
fn ci1_trivial_when_already_compliant() {
    // constant null derivative: F0 already has dF in the quadric
    let f = null_from_g(I, C64::new(1.0, 0.0)); // (1, i, 0)
    let n = 129;
    let f0 = ArcPath::<3> {
        samples: vec![f; n],
        derivs: vec![[C64::new(0.0, 0.0); 3]; n],
    };
    let mut big = ArcPath::<3>::line([C64::new(0.0, 0.0); 3], f, n);
    for k in 0..n {
        big.derivs[k] = f;
    }
    let (out, fpath, rep) = ci_null_path(&f0, &big, 1e-1, &CiOptions::default()).unwrap();
    assert!(rep.constraint_max <= tol::CI_CONSTRAINT_TOL);
    assert!(rep.sup_deviation < 1e-1);
    assert!(rep.endpoint_error < 1e-9);
    // endpoint derivatives match exactly
    for c in 0..3 {
        assert!((out.derivs[0][c] - f[c]).norm() < tol::CI_ENDPOINT_TOL);
        assert!((fpath.samples.last().unwrap()[c] - f[c]).norm() < 1e-6);
    }
}

#[test]
fn ci1_randomized_admissible_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..20 {
        let (f0, big) = random_admissible_ci1(&mut rng, 257);
        let eps = if trial % 2 == 0 { 1e-1 } else { 1e-2 };
        let (out, fpath, rep) =
            ci_null_path(&f0, &big, eps, &CiOptions::default()).unwrap_or_else(|e| {
                panic!("trial {trial}: {e}");
            });
        assert!(
            rep.constraint_max <= tol::CI_CONSTRAINT_TOL,
            "trial {trial}: constraint {:.3e}",
            rep.constraint_max
        );
        assert!(rep.sup_deviation < eps, "trial {trial}: sup {:.3e}", rep.sup_deviation);
        assert!(
            rep.endpoint_error <= 10.0 * tol::CI_ENDPOINT_TOL * (1.0 + norm3(&big.samples[0])),
            "trial {trial}: endpoint {:.3e}",
            rep.endpoint_error
        );
        assert!(rep.ftc_error <= tol::CI_FTC_TOL, "trial {trial}: ftc {:.3e}", rep.ftc_error);
        // endpoint C1 matching
        for c in 0..3 {
            assert!((out.samples[0][c] - big.samples[0][c]).norm() < tol::CI_ENDPOINT_TOL);
            assert!((out.derivs[0][c] - f0.samples[0][c]).norm() < tol::CI_ENDPOINT_TOL);
            let last = out.derivs.last().unwrap()[c];
            assert!((last - f0.samples.last().unwrap()[c]).norm() < tol::CI_ENDPOINT_TOL);
        }
        let _ = fpath;
    }
}

#[test]
fn ci1_eps_nesting() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (f0, big) = random_admissible_ci1(&mut rng, 257);
    let (out1, _, rep1) = ci_null_path(&f0, &big, 1e-1, &CiOptions::default()).unwrap();
    let (out2, _, rep2) = ci_null_path(&f0, &big, 1e-2, &CiOptions::default()).unwrap();
    assert!(rep1.sup_deviation < 1e-1);
    assert!(rep2.sup_deviation < 1e-2);
    // the tighter run also satisfies the looser bound
    assert!(rep2.sup_deviation < 1e-1);
    assert!(out1.len() >= 2 && out2.len() >= 2);
}

#[test]
fn ci1_fundamental_theorem_on_line_base() {
    // spec example: base path is the straight line between the endpoints of
    // a quadric path, with matched end derivatives
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (f0, big) = random_admissible_ci1(&mut rng, 257);
    let (out, fpath, rep) = ci_null_path(&f0, &big, 5e-2, &CiOptions::default()).unwrap();
    // quadrature of f equals the displacement
    let mut worst: f64 = 0.0;
    for c in 0..3 {
        let vals: Vec<C64> = fpath.samples.iter().map(|s| s[c]).collect();
        let q = crate::numerics::quad::trapezoid_corrected(&vals, 1.0);
        let disp = out.samples.last().unwrap()[c] - out.samples[0][c];
        worst = worst.max((q - disp).norm());
    }
    assert!(worst <= tol::CI_FTC_TOL, "ftc {worst:.3e}");
    assert!(rep.moment_sigma_ratio > 1e-8);
}

#[test]
fn ci2_trivial_and_circle_cases() {
    // c = -1, f0 = (i, 0): i^2 + 0 = -1
    let n = 129;
    let f = [I, C64::new(0.0, 0.0)];
    let f0 = ArcPath::<2> { samples: vec![f; n], derivs: vec![[C64::new(0.0, 0.0); 2]; n] };
    let mut big = ArcPath::<2>::line([C64::new(0.0, 0.0); 2], f, n);
    for k in 0..n {
        big.derivs[k] = f;
    }
    let q = QuadricConstraint { c: vec![C64::new(-1.0, 0.0); n] };
    let (out, rep) = ci_quadric_path(&f0, &big, &q, 1e-1, &CiOptions::default()).unwrap();
    assert!(rep.constraint_max < tol::CI_CONSTRAINT_TOL);
    assert!(rep.sup_deviation < 1e-1);
    assert!((out.samples[0][0]).norm() < 1e-12, "F(0) must be exact");

    // c = 1, f0 = (cos pi t, sin pi t)
    let f_of = |t: f64| -> [C64; 2] {
        let th = std::f64::consts::PI * t;
        [C64::new(th.cos(), 0.0), C64::new(th.sin(), 0.0)]
    };
    let mut f0 = ArcPath::<2> {
        samples: vec![[C64::new(0.0, 0.0); 2]; n],
        derivs: vec![[C64::new(0.0, 0.0); 2]; n],
    };
    for k in 0..n {
        f0.samples[k] = f_of(k as f64 / (n - 1) as f64);
    }
    // C^1 interpolant with matching ends: integrate a blend
    let w = 0.1;
    let deriv = move |t: f64| -> [C64; 2] {
        let fa = f_of(0.0);
        let fb = f_of(1.0);
        let sa = smooth_step(1.0 - t / w);
        let sb = smooth_step(1.0 - (1.0 - t) / w);
        [fa[0] * sa + fb[0] * sb, fa[1] * sa + fb[1] * sb]
    };
    let mut big = ArcPath::<2> {
        samples: vec![[C64::new(0.0, 0.0); 2]; n],
        derivs: vec![[C64::new(0.0, 0.0); 2]; n],
    };
    for c in 0..2 {
        let cum = crate::numerics::quad::gauss_cumulative(&|t| deriv(t)[c], n, 1.0);
        for k in 0..n {
            big.samples[k][c] = cum[k];
        }
    }
    for k in 0..n {
        big.derivs[k] = deriv(k as f64 / (n - 1) as f64);
    }
    let q = QuadricConstraint { c: vec![C64::new(1.0, 0.0); n] };
    let (out, rep) = ci_quadric_path(&f0, &big, &q, 1e-1, &CiOptions::default()).unwrap();
    assert!(rep.constraint_max < tol::CI_CONSTRAINT_TOL, "constraint {:.3e}", rep.constraint_max);
    assert!(rep.sup_deviation < 1e-1);
    // end derivatives
    for c in 0..2 {
        assert!((out.derivs[0][c] - f_of(0.0)[c]).norm() < tol::CI_ENDPOINT_TOL);
        assert!((out.derivs.last().unwrap()[c] - f_of(1.0)[c]).norm() < 1e-8);
    }
}

#[test]
fn ci2_large_real_displacement_zigzag() {
    // oracle first: a zig-zag base whose first component integrates to 10
    // while the derivative stays on x^2 + y^2 = 1
    let n = 513;
    let x_of = |t: f64| C64::new(10.0 + 6.0 * (2.0 * std::f64::consts::PI * t).cos(), 0.0);
    let y_of = |t: f64, prev: Option<C64>| -> C64 {
        let x = x_of(t);
        super::track_sqrt(prev, C64::new(1.0, 0.0) - x * x)
    };
    let mut f0 = ArcPath::<2> {
        samples: vec![[C64::new(0.0, 0.0); 2]; n],
        derivs: vec![[C64::new(0.0, 0.0); 2]; n],
    };
    let mut prev = None;
    for k in 0..n {
        let t = k as f64 / (n - 1) as f64;
        let y = y_of(t, prev);
        prev = Some(y);
        f0.samples[k] = [x_of(t), y];
    }
    // base path: exact primitive of f0 (the zig-zag primitive)
    let mut big = ArcPath::<2> {
        samples: vec![[C64::new(0.0, 0.0); 2]; n],
        derivs: f0.samples.clone(),
    };
    let prev = std::cell::Cell::new(None);
    for c in 0..2 {
        prev.set(None);
        let cum = crate::numerics::quad::gauss_cumulative(
            &|t| {
                if c == 0 {
                    x_of(t)
                } else {
                    let y = y_of(t, prev.get());
                    prev.set(Some(y));
                    y
                }
            },
            n,
            1.0,
        );
        for k in 0..n {
            big.samples[k][c] = cum[k];
        }
    }
    let q = QuadricConstraint { c: vec![C64::new(1.0, 0.0); n] };
    let (out, rep) = ci_quadric_path(&f0, &big, &q, 1e-1, &CiOptions::default()).unwrap();
    assert!(rep.constraint_max < tol::CI_CONSTRAINT_TOL);
    let disp = out.samples.last().unwrap()[0] - out.samples[0][0];
    assert!(disp.re >= 10.0 - 0.2, "displacement {:.3}", disp.re);
}

#[test]
fn arc_extension_straight_and_rising() {
    // trivial: endpoint values already above target, constant pullback
    let n = 65;
    let job = ArcJob {
        c: vec![C64::new(1.0, 0.0); n],
        u_start: [3.0, 3.2, 0.0],
        f_start: null_from_g(C64::new(2.0, 0.3), C64::new(1.0, 0.0)),
        f_end: None,
        targets: ArcTargets {
            along_floor: [Some(1.0), Some(1.0)],
            end_floor: [Some(1.5), Some(1.5)],
            end_nonvanishing: true,
            margin: 0.5,
        },
    };
    let ext = extend_arc(&job, &CiOptions::default()).unwrap();
    assert!(ext.worst_margin > 0.0);
    // compatibility identity: du/dt = Re(f * c); the centered difference of
    // the sampled u sees the oscillation curvature, so the tolerance scales
    // with (2 pi N h)^2 |f|
    let m = ext.u.len();
    let h = 1.0 / (m - 1) as f64;
    let omega = 2.0 * std::f64::consts::PI * ext.report.periods.max(1) as f64;
    let fmax = ext.f.iter().map(norm3).fold(0.0, f64::max);
    let fd_tol = 1.25 * (omega * h).powi(2) * fmax + 1e-9;
    for k in 1..m - 1 {
        let c = C64::new(1.0, 0.0);
        for comp in 0..3 {
            let fd = (ext.u[k + 1][comp] - ext.u[k - 1][comp]) / (2.0 * h);
            let expect = (ext.f[k][comp] * c).re;
            assert!(
                (fd - expect).abs() < fd_tol,
                "compat at {k}: {fd} vs {expect} (tol {fd_tol:.3e})"
            );
        }
    }

    // far-end target exceeding the start by 5
    let job = ArcJob {
        c: vec![C64::new(0.8, 0.1); n],
        u_start: [2.0, 2.0, 0.0],
        f_start: null_from_g(C64::new(1.4, -0.2), C64::new(0.9, 0.1)),
        f_end: None,
        targets: ArcTargets {
            along_floor: [Some(1.0), Some(1.0)],
            end_floor: [Some(7.0), Some(7.0)],
            end_nonvanishing: true,
            margin: 0.5,
        },
    };
    let ext = extend_arc(&job, &CiOptions::default()).unwrap();
    let last = ext.u.last().unwrap();
    assert!(last[0] > 7.0 && last[1] > 7.0, "end {last:?}");
    for f in &ext.f {
        let q = qform(f).norm() / norm3(f).powi(2);
        assert!(q <= tol::CI_CONSTRAINT_TOL);
    }
}

#[test]
fn arc_extension_bridge_variant_second_component_only() {
    let n = 65;
    let job = ArcJob {
        c: vec![C64::new(1.0, -0.2); n],
        u_start: [0.2, 2.0, 0.0],
        f_start: null_from_g(C64::new(0.8, 0.5), C64::new(1.0, 0.0)),
        f_end: None,
        targets: ArcTargets {
            along_floor: [None, Some(1.0)],
            end_floor: [None, Some(4.0)],
            end_nonvanishing: false,
            margin: 0.5,
        },
    };
    let ext = extend_arc(&job, &CiOptions::default()).unwrap();
    for uv in &ext.u {
        assert!(uv[1] > 1.0);
    }
    assert!(ext.u.last().unwrap()[1] > 4.0);
}

#[test]
fn arc_extension_rejects_root_below_floor() {
    let n = 33;
    let job = ArcJob {
        c: vec![C64::new(1.0, 0.0); n],
        u_start: [0.5, 2.0, 0.0],
        f_start: null_from_g(C64::new(1.2, 0.1), C64::new(1.0, 0.0)),
        f_end: None,
        targets: ArcTargets {
            along_floor: [Some(1.0), None],
            end_floor: [None, None],
            end_nonvanishing: false,
            margin: 0.5,
        },
    };
    assert!(matches!(
        extend_arc(&job, &CiOptions::default()),
        Err(CiError::InfeasibleTarget { .. })
    ));
}
