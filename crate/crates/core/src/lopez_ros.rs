//! Multiplier transformations that fix one Weierstrass component, period
//! maps over homology bases, period-dominating sprays, and the trust-region
//! Newton that drives a deformed datum's periods onto a prescribed target.
//!
//! The multiplier h rescales the Gauss quotient psi; the transformed triple
//! stays exactly on the null quadric and shares the pinned component with
//! the input. A spray is a multiplier family sigma(zeta) = exp(sum zeta_k
//! eta_k) over Laurent-monomial seeds; domination is certified per run by
//! the smallest singular value of the finite-difference period Jacobian.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::fd;
use crate::numerics::laurent::{ExpLaurent, LaurentPoly};
use crate::numerics::newton::{self, NewtonOptions};
use crate::numerics::quad::trapezoid_closed;
use crate::numerics::{C64, I};
use crate::riemann::{ChartEval, HomologyBasis};
use crate::tol;
use crate::weierstrass::{DatumAnalytic, FiberRep, WeierstrassDatum, WeierstrassError};

#[derive(Debug, Error)]
pub enum LopezRosError {
    #[error("multiplier vanishes at node {node}")]
    VanishingMultiplier { node: usize },
    #[error("datum lacks the analytic representation needed here")]
    NoAnalyticRep,
    #[error("spray rank-deficient after escalation to N = {n}: singular values {svals:?}")]
    RankDeficient { n: usize, svals: Vec<f64> },
    #[error("period Newton diverged at fiber {fiber}: residual history {history:?}")]
    NewtonDiverged { fiber: usize, history: Vec<f64> },
    #[error("datum is flat; the period map cannot be dominated")]
    FlatDatum,
    #[error(transparent)]
    Weierstrass(#[from] WeierstrassError),
}

/// A nonvanishing multiplier in closed form on the chart.
#[derive(Debug, Clone)]
pub struct Multiplier(pub ExpLaurent);

impl Multiplier {
    pub fn one() -> Self {
        Multiplier(ExpLaurent::one())
    }

    pub fn eval(&self, w: C64) -> C64 {
        self.0.eval(w)
    }
}

/// Spray parameters: a point in C^N inside the trust ball.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SprayParams {
    pub zeta: Vec<C64>,
    pub ball_radius: f64,
}

impl SprayParams {
    pub fn norm(&self) -> f64 {
        self.zeta.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Values of the two multiplier-sensitive contour integrals per cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodVector(pub Vec<[C64; 2]>);

impl PeriodVector {
    pub fn dist(&self, other: &PeriodVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| ((a[0] - b[0]).norm_sqr() + (a[1] - b[1]).norm_sqr()).sqrt())
            .fold(0.0, f64::max)
    }
}

/// The period-dominating spray: seeds plus the certified Jacobian data.
#[derive(Debug, Clone)]
pub struct Spray {
    pub seeds: Vec<LaurentPoly>,
    pub singular_values: Vec<f64>,
    pub ball_radius: f64,
}

impl Spray {
    /// sigma(zeta, w) = exp(sum zeta_k eta_k(w)); identically 1 at zeta = 0,
    /// nonvanishing and holomorphic for every zeta.
    pub fn multiplier(&self, zeta: &[C64]) -> Multiplier {
        let mut log_part = LaurentPoly::zero();
        for (z, seed) in zeta.iter().zip(&self.seeds) {
            log_part = log_part.add(&seed.scale(*z));
        }
        Multiplier(ExpLaurent::new(0, log_part))
    }

    pub fn n(&self) -> usize {
        self.seeds.len()
    }

    pub fn smallest_singular_value(&self) -> f64 {
        self.singular_values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Closed-form function entering a period integrand.
#[derive(Clone)]
pub enum PeriodFun {
    /// a(w) * e(w)
    Prod(LaurentPoly, ExpLaurent),
    /// arbitrary holomorphic closure (used by the second-pinned frame whose
    /// integrands are rational in the quotient)
    Fun(std::sync::Arc<dyn Fn(C64) -> C64 + Send + Sync>),
}

impl std::fmt::Debug for PeriodFun {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PeriodFun::Prod(a, e) => f.debug_tuple("Prod").field(a).field(e).finish(),
            PeriodFun::Fun(_) => f.write_str("Fun(<closure>)"),
        }
    }
}

impl PeriodFun {
    pub fn eval(&self, w: C64) -> C64 {
        match self {
            PeriodFun::Prod(a, e) => a.eval(w) * e.eval(w),
            PeriodFun::Fun(g) => g(w),
        }
    }
}

/// Pinned-component fields entering the period map: for a first-pinned core
/// (a, psi) these are (a / psi) and (a psi) as closed-form functions on the
/// chart.
#[derive(Debug, Clone)]
pub struct PeriodCore {
    pub chart: ChartEval,
    pub over: PeriodFun,
    pub under: PeriodFun,
}

/// Extract the period core of an analytic one-pinned datum. Overlay data is
/// refit to a fresh one-pinned core before the next spray round, so it is
/// rejected here.
pub fn period_core(datum: &WeierstrassDatum) -> Result<PeriodCore, LopezRosError> {
    let analytic = datum.analytic.as_ref().ok_or(LopezRosError::NoAnalyticRep)?;
    let chart = analytic.chart.clone();
    match &analytic.rep {
        FiberRep::OnePinned { a, psi } => Ok(PeriodCore {
            chart,
            over: PeriodFun::Prod(a.clone(), psi.recip()),
            under: PeriodFun::Prod(a.clone(), psi.clone()),
        }),
        FiberRep::TwoPinnedOverlay { .. } => Err(LopezRosError::NoAnalyticRep),
    }
}

/// Contour integral of a closed-form integrand (times dw) over the image of
/// each basis cycle under the chart, trapezoid over the sampled loop.
pub fn cycle_integrals(
    chart: &ChartEval,
    fun: &dyn Fn(C64) -> C64,
    basis: &HomologyBasis,
) -> Vec<C64> {
    let mut out = Vec::with_capacity(basis.cycles.len());
    for cycle in &basis.cycles {
        let pts = &cycle.points[..cycle.points.len() - 1];
        let n = pts.len();
        let zdot = fd::deriv_periodic_spectral(pts, 1.0);
        let mut vals = Vec::with_capacity(n + 1);
        for (j, &z) in pts.iter().enumerate() {
            let (w, dz, dzb) = chart.eval_d(z);
            let dw = dz * zdot[j] + dzb * zdot[j].conj();
            vals.push(fun(w) * dw);
        }
        vals.push(vals[0]);
        out.push(trapezoid_closed(&vals, 1.0));
    }
    out
}

/// The period map: per cycle, the integrals of (pinned/(h psi)) theta and
/// (h psi pinned) theta.
pub fn period_map(core: &PeriodCore, h: &Multiplier, basis: &HomologyBasis) -> PeriodVector {
    let hinv = h.0.recip();
    let over = cycle_integrals(&core.chart, &|w| core.over.eval(w) * hinv.eval(w), basis);
    let under = cycle_integrals(&core.chart, &|w| core.under.eval(w) * h.0.eval(w), basis);
    PeriodVector(over.into_iter().zip(under).map(|(a, b)| [a, b]).collect())
}

/// Lopez-Ros transform: replace the Gauss quotient by h psi. The pinned
/// component is untouched (the same Laurent object), the output is exactly
/// null, and h = 1 returns the input unchanged.
pub fn lopez_ros_transform(
    datum: &WeierstrassDatum,
    h: &Multiplier,
) -> Result<WeierstrassDatum, LopezRosError> {
    let analytic = datum.analytic.as_ref().ok_or(LopezRosError::NoAnalyticRep)?;
    let rep = match &analytic.rep {
        FiberRep::OnePinned { a, psi } => {
            FiberRep::OnePinned { a: a.clone(), psi: psi.mul(&h.0) }
        }
        FiberRep::TwoPinnedOverlay { a, psi, h2 } => {
            FiberRep::TwoPinnedOverlay { a: a.clone(), psi: psi.clone(), h2: h2.mul(&h.0) }
        }
    };
    let out = WeierstrassDatum::from_analytic(
        datum.domain.clone(),
        datum.theta.clone(),
        DatumAnalytic { chart: analytic.chart.clone(), rep },
    );
    out.validate()?;
    Ok(out)
}

/// Node-wise transform for sampled data (no analytic rep required).
pub fn lopez_ros_transform_samples(
    datum: &WeierstrassDatum,
    h: &[C64],
) -> Result<WeierstrassDatum, LopezRosError> {
    let psi = crate::weierstrass::gauss_quotient(datum)?;
    let n = datum.f.len();
    if h.len() != n {
        return Err(WeierstrassError::GridMismatch { values: h.len(), nodes: n }.into());
    }
    let mut new_psi = Vec::with_capacity(n);
    for i in 0..n {
        if h[i].norm() == 0.0 {
            return Err(LopezRosError::VanishingMultiplier { node: i });
        }
        new_psi.push(psi[i] * h[i]);
    }
    let f1: Vec<C64> = datum.f.iter().map(|v| v[0]).collect();
    let out = crate::weierstrass::datum_from_quotient(
        datum.domain.clone(),
        datum.theta.clone(),
        &new_psi,
        &f1,
    )?;
    Ok(out)
}

/// The transformed datum routed through psi_hat = h psi; identical formula
/// to the transform, named separately because the induction composes it with
/// spray multipliers.
pub fn assemble_transformed_datum(
    datum: &WeierstrassDatum,
    h: &Multiplier,
) -> Result<WeierstrassDatum, LopezRosError> {
    lopez_ros_transform(datum, h)
}

/// Build a period-dominating spray over the basis: Laurent-monomial seeds
/// w^{+-k}, N escalating until the smallest relevant singular value of the
/// finite-difference period Jacobian at zeta = 0 clears the relative floor.
pub fn build_spray(
    datum: &WeierstrassDatum,
    basis: &HomologyBasis,
    n_start: usize,
) -> Result<Spray, LopezRosError> {
    if !basis.cycles.is_empty() && crate::weierstrass::nonflat_score(datum) < 1e-10 {
        return Err(LopezRosError::FlatDatum);
    }
    if basis.cycles.is_empty() {
        return Ok(Spray { seeds: Vec::new(), singular_values: Vec::new(), ball_radius: 1.0 });
    }
    let core = period_core(datum)?;
    build_spray_core(&core, basis, n_start)
}

/// Spray construction directly from a period core.
pub fn build_spray_core(
    core: &PeriodCore,
    basis: &HomologyBasis,
    n_start: usize,
) -> Result<Spray, LopezRosError> {
    let m = basis.cycles.len();
    if m == 0 {
        return Ok(Spray { seeds: Vec::new(), singular_values: Vec::new(), ball_radius: 1.0 });
    }
    let core = core.clone();
    let mut n = n_start.max(4 * m);
    loop {
        let seeds = monomial_seeds(n);
        let spray = Spray { seeds, singular_values: Vec::new(), ball_radius: 1.0 };
        let jac = period_jacobian(&core, &spray, basis);
        let svd = jac.svd(false, false);
        let mut svals: Vec<f64> = svd.singular_values.iter().copied().collect();
        svals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let smax = svals.first().copied().unwrap_or(0.0);
        let smin = svals.get(4 * m - 1).copied().unwrap_or(0.0);
        if smax > 0.0 && smin > tol::SPRAY_SVAL_RATIO * smax {
            return Ok(Spray {
                seeds: monomial_seeds(n),
                singular_values: svals,
                ball_radius: 1.0,
            });
        }
        if n >= tol::SPRAY_N_MAX {
            return Err(LopezRosError::RankDeficient { n, svals });
        }
        n = (2 * n).min(tol::SPRAY_N_MAX);
    }
}

/// Seeds w, w^{-1}, w^2, w^{-2}, ...
fn monomial_seeds(n: usize) -> Vec<LaurentPoly> {
    (0..n)
        .map(|j| {
            let k = (j / 2 + 1) as i32;
            let k = if j % 2 == 0 { k } else { -k };
            LaurentPoly::monomial(k, C64::new(1.0, 0.0))
        })
        .collect()
}

/// Real 4m x 2N central-difference Jacobian of zeta -> P(sigma(zeta)) at 0.
fn period_jacobian(core: &PeriodCore, spray: &Spray, basis: &HomologyBasis) -> DMatrix<f64> {
    let m = basis.cycles.len();
    let n = spray.n();
    let mut jac = DMatrix::<f64>::zeros(4 * m, 2 * n);
    let step = tol::FD_JACOBIAN_STEP;
    let mut zeta = vec![C64::new(0.0, 0.0); n];
    for j in 0..2 * n {
        let (idx, im_part) = (j / 2, j % 2 == 1);
        let dz = if im_part { C64::new(0.0, step) } else { C64::new(step, 0.0) };
        zeta[idx] = dz;
        let plus = period_map(core, &spray.multiplier(&zeta), basis);
        zeta[idx] = -dz;
        let minus = period_map(core, &spray.multiplier(&zeta), basis);
        zeta[idx] = C64::new(0.0, 0.0);
        for c in 0..m {
            for slot in 0..2 {
                let d = (plus.0[c][slot] - minus.0[c][slot]) / (2.0 * step);
                jac[(4 * c + 2 * slot, j)] = d.re;
                jac[(4 * c + 2 * slot + 1, j)] = d.im;
            }
        }
    }
    jac
}

/// Result of a period-killing solve on one fiber.
#[derive(Debug, Clone)]
pub struct KillReport {
    pub residual: f64,
    pub zeta_norm: f64,
    pub iterations: usize,
    pub smallest_singular_value: f64,
}

/// Solve for spray parameters with P(sigma(zeta) mu_hat) = target: damped
/// least-norm Newton inside the ball radius, warm-startable across fibers.
pub fn kill_periods(
    datum: &WeierstrassDatum,
    mu_hat: &Multiplier,
    spray: &Spray,
    basis: &HomologyBasis,
    target: &PeriodVector,
    warm: Option<&SprayParams>,
) -> Result<(SprayParams, KillReport), LopezRosError> {
    if basis.cycles.is_empty() {
        let params = SprayParams { zeta: Vec::new(), ball_radius: spray.ball_radius };
        return Ok((
            params,
            KillReport {
                residual: 0.0,
                zeta_norm: 0.0,
                iterations: 0,
                smallest_singular_value: f64::INFINITY,
            },
        ));
    }
    let core = period_core(datum)?;
    kill_periods_core(&core, mu_hat, spray, basis, target, warm)
}

/// Period killing directly on a period core.
pub fn kill_periods_core(
    core: &PeriodCore,
    mu_hat: &Multiplier,
    spray: &Spray,
    basis: &HomologyBasis,
    target: &PeriodVector,
    warm: Option<&SprayParams>,
) -> Result<(SprayParams, KillReport), LopezRosError> {
    let m = basis.cycles.len();
    if m == 0 {
        let params = SprayParams { zeta: Vec::new(), ball_radius: spray.ball_radius };
        return Ok((
            params,
            KillReport {
                residual: 0.0,
                zeta_norm: 0.0,
                iterations: 0,
                smallest_singular_value: f64::INFINITY,
            },
        ));
    }
    let core = core.clone();
    let n = spray.n();
    let scale: f64 =
        target.0.iter().map(|p| p[0].norm().max(p[1].norm())).fold(1.0, f64::max);

    let residual = |x: &DVector<f64>| -> DVector<f64> {
        let zeta: Vec<C64> = (0..n).map(|j| C64::new(x[2 * j], x[2 * j + 1])).collect();
        let h = Multiplier(spray.multiplier(&zeta).0.mul(&mu_hat.0));
        let p = period_map(&core, &h, basis);
        let mut r = DVector::zeros(4 * m);
        for c in 0..m {
            for slot in 0..2 {
                let d = p.0[c][slot] - target.0[c][slot];
                r[4 * c + 2 * slot] = d.re / scale;
                r[4 * c + 2 * slot + 1] = d.im / scale;
            }
        }
        r
    };

    let mut x = DVector::zeros(2 * n);
    if let Some(w) = warm {
        for (j, z) in w.zeta.iter().enumerate().take(n) {
            x[2 * j] = z.re;
            x[2 * j + 1] = z.im;
        }
    }
    let rep = newton::solve(
        &mut x,
        residual,
        &NewtonOptions {
            tol: tol::PERIOD_KILL_TOL / scale,
            max_iter: 60,
            radius: spray.ball_radius,
            fd_step: tol::FD_JACOBIAN_STEP,
        },
    );
    let zeta: Vec<C64> = (0..n).map(|j| C64::new(x[2 * j], x[2 * j + 1])).collect();
    let final_res = {
        let h = Multiplier(spray.multiplier(&zeta).0.mul(&mu_hat.0));
        period_map(&core, &h, basis).dist(target)
    };
    if !rep.converged || final_res > tol::PERIOD_KILL_TOL * scale.max(1.0) {
        return Err(LopezRosError::NewtonDiverged { fiber: 0, history: rep.residual_history });
    }
    let params = SprayParams { zeta, ball_radius: spray.ball_radius };
    let report = KillReport {
        residual: final_res,
        zeta_norm: params.norm(),
        iterations: rep.iterations,
        smallest_singular_value: spray.smallest_singular_value(),
    };
    Ok((params, report))
}

/// Period targets from a prescribed flux vector on each cycle: components 2
/// and 3 of the datum must have periods i * flux, which in the (over, under)
/// slots reads (P2 - i P3, -P2 - i P3).
pub fn targets_from_flux(flux: &[[f64; 3]]) -> PeriodVector {
    PeriodVector(
        flux.iter()
            .map(|f| {
                let p2 = I * f[1];
                let p3 = I * f[2];
                [p2 - I * p3, -p2 - I * p3]
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use crate::riemann::homology_basis;
    use crate::tol;
    use crate::weierstrass::{fixtures, flux, gauss_quotient, norm3, qform};

    use super::*;

    #[test]
    fn identity_multiplier_is_identity_transform() {
        let d = fixtures::catenoid(32, 64);
        let out = lopez_ros_transform(&d, &Multiplier::one()).unwrap();
        for (a, b) in out.f.iter().zip(&d.f) {
            for k in 0..3 {
                assert_eq!(a[k], b[k], "h = 1 must reproduce the datum exactly");
            }
        }
    }

    #[test]
    fn constant_multiplier_preserves_first_component_and_nullity() {
        let d = fixtures::catenoid(32, 64);
        let h = Multiplier(ExpLaurent::constant(C64::new(2.0, 0.0)));
        let out = lopez_ros_transform(&d, &h).unwrap();
        for (a, b) in out.f.iter().zip(&d.f) {
            assert_eq!(a[0], b[0]);
        }
        assert!(out.max_null_residual() <= tol::NULL_RESIDUAL_REL);

        // residue oracle for the transformed flux: f1 theta = dz/z unchanged
        // gives flux_1 = 2 pi; with h psi = 2/z the other integrands are
        // (1/4 - 1/z^2) dz and (i/4 + i/z^2) dz, both residue-free.
        let basis = homology_basis(&out.domain).unwrap();
        let fl = flux(&out, &basis).unwrap();
        assert!((fl.0[0][0] - 2.0 * PI).abs() < tol::FLUX_TOL);
        assert!(fl.0[0][1].abs() < tol::FLUX_TOL);
        assert!(fl.0[0][2].abs() < tol::FLUX_TOL);
    }

    #[test]
    fn small_multiplier_continuity() {
        let d = fixtures::catenoid(24, 48);
        let eps_log = LaurentPoly::new(0, vec![C64::new(0.02, 0.01), C64::new(0.0, 0.015)]);
        let h_full = Multiplier(ExpLaurent::new(0, eps_log.clone()));
        let h_half = Multiplier(ExpLaurent::new(0, eps_log.scale(C64::new(0.5, 0.0))));
        let full = lopez_ros_transform(&d, &h_full).unwrap();
        let half = lopez_ros_transform(&d, &h_half).unwrap();
        let dev = |x: &WeierstrassDatum| -> f64 {
            x.f.iter()
                .zip(&d.f)
                .map(|(a, b)| norm3(&[a[0] - b[0], a[1] - b[1], a[2] - b[2]]))
                .fold(0.0, f64::max)
        };
        let r = dev(&half) / dev(&full);
        assert!((r - 0.5).abs() < 0.1, "deviation ratio {r}");
    }

    #[test]
    fn period_map_trivial_and_doubling() {
        let d = fixtures::catenoid(32, 256);
        let core = period_core(&d).unwrap();
        let basis = homology_basis(&d.domain).unwrap();
        let p = period_map(&core, &Multiplier::one(), &basis);

        // residue oracle for h = 1: over = (dz/z)/(1/z) = dz, zero residue;
        // under = (1/z)(1/z) dz = dz/z^2, zero residue.
        assert!(p.0[0][0].norm() < tol::FLUX_TOL);
        assert!(p.0[0][1].norm() < tol::FLUX_TOL);

        // a doubled cycle doubles the periods
        let mut doubled = basis.clone();
        let pts = doubled.cycles[0].points.clone();
        let mut twice = pts[..pts.len() - 1].to_vec();
        twice.extend_from_slice(&pts[..pts.len() - 1]);
        twice.push(pts[0]);
        doubled.cycles[0].points = twice;
        doubled.cycles[0].ring_row = None;
        let h = Multiplier(ExpLaurent::constant(C64::new(1.3, 0.2)));
        let once = period_map(&core, &h, &basis);
        let two = period_map(&core, &h, &doubled);
        for slot in 0..2 {
            assert!((two.0[0][slot] - 2.0 * once.0[0][slot]).norm() < 10.0 * tol::FLUX_TOL);
        }

        // disc: empty period vector
        let disc = fixtures::plane(24);
        let dbasis = homology_basis(&disc.domain).unwrap();
        let dcore = period_core(&disc).unwrap();
        let dp = period_map(&dcore, &Multiplier::one(), &dbasis);
        assert!(dp.0.is_empty());
    }

    #[test]
    fn spray_dominates_catenoid_periods() {
        let d = fixtures::catenoid(32, 256);
        let basis = homology_basis(&d.domain).unwrap();
        let spray = build_spray(&d, &basis, 4).unwrap();
        assert!(spray.n() >= 4);
        let smin = spray.smallest_singular_value();
        assert!(smin > 0.0, "smallest singular value {smin}");
        let bigger = build_spray(&d, &basis, 8).unwrap();
        assert!(bigger.smallest_singular_value() > 0.0);

        // disc: trivial spray accepted
        let disc = fixtures::plane(24);
        let dbasis = homology_basis(&disc.domain).unwrap();
        let trivial = build_spray(&disc, &dbasis, 4).unwrap();
        assert_eq!(trivial.n(), 0);
    }

    #[test]
    fn kill_periods_identity_and_perturbation() {
        let d = fixtures::catenoid(32, 256);
        let basis = homology_basis(&d.domain).unwrap();
        let core = period_core(&d).unwrap();
        let spray = build_spray(&d, &basis, 4).unwrap();
        let target = period_map(&core, &Multiplier::one(), &basis);

        // mu_hat = 1: zeta = 0 already solves
        let (params, report) =
            kill_periods(&d, &Multiplier::one(), &spray, &basis, &target, None).unwrap();
        assert!(params.norm() < 1e-9);
        assert!(report.residual <= tol::PERIOD_KILL_TOL);

        // small perturbing multiplier: solved with small zeta
        let mu = Multiplier(ExpLaurent::new(
            0,
            LaurentPoly::new(0, vec![C64::new(0.03, -0.01), C64::new(0.01, 0.02)]),
        ));
        let (params, report) = kill_periods(&d, &mu, &spray, &basis, &target, None).unwrap();
        assert!(report.residual <= tol::PERIOD_KILL_TOL, "residual {:.3e}", report.residual);
        assert!(params.norm() < 0.5);

        // downstream: the corrected datum keeps the original periods, so it
        // integrates to a single-valued immersion with the same flux
        let h = Multiplier(spray.multiplier(&params.zeta).0.mul(&mu.0));
        let out = lopez_ros_transform(&d, &h).unwrap();
        let im =
            crate::weierstrass::integrate_cmi(&out, &basis, C64::new(1.0, 0.0), [0.0; 3]);
        assert!(im.is_ok(), "integration after killing: {:?}", im.err());
        let f_in = flux(&d, &basis).unwrap();
        let f_out = flux(&out, &basis).unwrap();
        assert!(crate::weierstrass::flux_distance(&f_in, &f_out) <= tol::PERIOD_KILL_TOL);
    }

    #[test]
    fn overlay_core_is_rejected_gracefully() {
        // period machinery runs on one-pinned cores; overlays are refit
        // before the next spray round
        let d = fixtures::catenoid(16, 32);
        let analytic = d.analytic.clone().unwrap();
        let rep = match analytic.rep {
            FiberRep::OnePinned { a, psi } => {
                FiberRep::TwoPinnedOverlay { a, psi, h2: ExpLaurent::one() }
            }
            other => other,
        };
        let overlay = WeierstrassDatum::from_analytic(
            d.domain.clone(),
            d.theta.clone(),
            DatumAnalytic { chart: analytic.chart, rep },
        );
        assert!(matches!(period_core(&overlay), Err(LopezRosError::NoAnalyticRep)));
    }

    #[test]
    fn quotient_consistency_between_routes() {
        // the closed-form transform agrees with the node-wise sampled route
        let d = fixtures::catenoid(24, 48);
        let h_exp = ExpLaurent::new(0, LaurentPoly::new(0, vec![C64::new(0.1, 0.05)]));
        let analytic_route = lopez_ros_transform(&d, &Multiplier(h_exp.clone())).unwrap();
        let h_samples: Vec<C64> =
            d.domain.grid.nodes().iter().map(|&z| h_exp.eval(z)).collect();
        let sampled_route = lopez_ros_transform_samples(&d, &h_samples).unwrap();
        for (a, b) in analytic_route.f.iter().zip(&sampled_route.f) {
            for k in 0..3 {
                assert!((a[k] - b[k]).norm() < 1e-12 * (1.0 + a[k].norm()));
            }
        }
        let psi = gauss_quotient(&analytic_route).unwrap();
        assert!(psi.iter().all(|p| p.norm() > 0.0));
        for c in &analytic_route.f {
            assert!(qform(c).norm() <= tol::NULL_RESIDUAL_REL * norm3(c).powi(2));
        }
    }
}
