//! Least-squares holomorphic refit onto a model domain: the constructive
//! stand-in for Runge-type approximation of generalized immersion data. The
//! pinned component's form is fitted as a Laurent (or plain) polynomial in
//! the chart coordinate with its residue pinned linearly — cycle periods of
//! that component are exact — and the Gauss quotient is fitted in log space
//! after a winding-aware phase unwrap, so the result is nonvanishing by
//! construction and the reconstructed triple is exactly null.

use thiserror::Error;

use crate::numerics::fit::{fit_laurent, FitError};
use crate::numerics::laurent::{ExpLaurent, LaurentPoly};
use crate::numerics::{C64, I};
use crate::riemann::ChartEval;
use crate::tol;
use crate::weierstrass::FiberRep;

#[derive(Debug, Error)]
pub enum RefitError {
    #[error("fit failed: {0}")]
    Fit(#[from] FitError),
    #[error("quotient denominator vanishes at {count} samples (kept {kept})")]
    DegenerateQuotient { count: usize, kept: usize },
    #[error("requested accuracy {wanted:.3e} not reached at degree {degree}: sup error {got:.3e}")]
    AccuracyStalled { degree: usize, wanted: f64, got: f64 },
    #[error("fitted pinned form vanishes on the domain (min |a| = {min:.3e})")]
    PinnedFormVanishes { min: f64 },
    #[error("phase unwrap found inconsistent winding {winding} on a closed ring")]
    WindingInconsistent { winding: i32 },
}

/// One refit target: location, Weierstrass triple, weight.
#[derive(Debug, Clone, Copy)]
pub struct RefitTarget {
    pub z: C64,
    pub f: [C64; 3],
    pub weight: f64,
}

/// Refit inputs. `chains` are index lists into `targets` along which the
/// quotient's phase varies slowly (grid rows, arc orders); each chain's head
/// is aligned against the nearest already-unwrapped target.
pub struct RefitInput<'a> {
    pub chart: &'a ChartEval,
    pub targets: Vec<RefitTarget>,
    pub chains: Vec<Vec<usize>>,
    /// full Laurent window (annulus image); plain polynomial otherwise
    pub laurent: bool,
    /// pinned residue of the first-component form (flux_1 / 2 pi)
    pub residue_pin: Option<f64>,
    /// points where the fitted pinned form must not vanish
    pub validation: Vec<C64>,
    pub sup_tol: f64,
    pub degree_start: usize,
    pub degree_max: usize,
}

#[derive(Debug, Clone)]
pub struct RefitReport {
    pub degree: usize,
    pub sup_error: f64,
    pub min_pinned_abs: f64,
    pub psi_winding: i32,
}

/// Winding of the quotient around one closed chain (phase sum / 2 pi).
fn chain_winding(values: &[C64]) -> i32 {
    let mut total = 0.0;
    for k in 0..values.len() {
        let a = values[k];
        let b = values[(k + 1) % values.len()];
        total += (b / a).arg();
    }
    (total / (2.0 * std::f64::consts::PI)).round() as i32
}

pub fn runge_refit(input: &RefitInput) -> Result<(FiberRep, RefitReport), RefitError> {
    let n = input.targets.len();
    // quotient targets; drop (zero-weight) samples with degenerate denominator
    let mut psi = vec![C64::new(0.0, 0.0); n];
    let mut psi_w = vec![0.0f64; n];
    let mut dropped = 0usize;
    for (i, t) in input.targets.iter().enumerate() {
        let den = t.f[1] - I * t.f[2];
        let scale = (t.f[0].norm_sqr() + t.f[1].norm_sqr() + t.f[2].norm_sqr()).sqrt();
        if den.norm() < 1e-8 * scale || t.f[0].norm() < 1e-10 * scale {
            dropped += 1;
            psi_w[i] = 0.0;
            psi[i] = C64::new(1.0, 0.0);
        } else {
            psi[i] = t.f[0] / den;
            psi_w[i] = t.weight;
        }
    }
    if dropped * 4 > n {
        return Err(RefitError::DegenerateQuotient { count: dropped, kept: n - dropped });
    }

    let w_of: Vec<C64> = input.targets.iter().map(|t| input.chart.eval(t.z)).collect();

    // winding of psi around the annulus from the first closed chain (the
    // chains are grid rows; rows on an annulus close up)
    let winding = if input.laurent {
        let ring = &input.chains[input.chains.len() / 2];
        let vals: Vec<C64> = ring.iter().map(|&i| psi[i]).collect();
        let k_psi = chain_winding(&vals);
        // w itself winds once along the ring; q = psi w^{-k} must close
        let q_vals: Vec<C64> = ring
            .iter()
            .map(|&i| psi[i] * crate::numerics::powi(w_of[i], -k_psi))
            .collect();
        let residual_winding = chain_winding(&q_vals);
        if residual_winding != 0 {
            return Err(RefitError::WindingInconsistent { winding: residual_winding });
        }
        k_psi
    } else {
        0
    };

    // phase unwrap of log(psi w^{-winding}) along the chains
    let mut logq = vec![C64::new(0.0, 0.0); n];
    let mut done = vec![false; n];
    let mut anchors: Vec<usize> = Vec::new();
    for chain in &input.chains {
        if chain.is_empty() {
            continue;
        }
        let head = chain[0];
        let q_head = psi[head] * crate::numerics::powi(w_of[head], -winding);
        let mut lg = q_head.ln();
        if let Some(&near) = anchors.iter().min_by(|&&a, &&b| {
            let da = (input.targets[a].z - input.targets[head].z).norm();
            let db = (input.targets[b].z - input.targets[head].z).norm();
            da.partial_cmp(&db).unwrap()
        }) {
            let two_pi = 2.0 * std::f64::consts::PI;
            let shift = ((logq[near].im - lg.im) / two_pi).round();
            lg = C64::new(lg.re, lg.im + shift * two_pi);
        }
        logq[head] = lg;
        done[head] = true;
        anchors.push(head);
        let mut prev = lg;
        for &i in &chain[1..] {
            let q = psi[i] * crate::numerics::powi(w_of[i], -winding);
            let mut lg = q.ln();
            let two_pi = 2.0 * std::f64::consts::PI;
            let shift = ((prev.im - lg.im) / two_pi).round();
            lg = C64::new(lg.re, lg.im + shift * two_pi);
            logq[i] = lg;
            done[i] = true;
            prev = lg;
        }
    }
    // any stragglers: principal branch
    for i in 0..n {
        if !done[i] {
            logq[i] = (psi[i] * crate::numerics::powi(w_of[i], -winding)).ln();
        }
    }

    // degree ladder
    let mut degree = input.degree_start.max(4);
    loop {
        let k_min = if input.laurent { -(degree as i32) } else { 0 };
        let k_max = degree as i32;

        let psi_samples: Vec<(C64, C64, f64)> = (0..n)
            .filter(|&i| psi_w[i] > 0.0)
            .map(|i| (w_of[i], logq[i], psi_w[i]))
            .collect();
        let l_psi = fit_laurent(&psi_samples, k_min, k_max, &[])?;

        let a_samples: Vec<(C64, C64, f64)> = (0..n)
            .map(|i| (w_of[i], input.targets[i].f[0], input.targets[i].weight))
            .collect();
        let pins: Vec<(i32, C64)> = match input.residue_pin {
            Some(r) if input.laurent => vec![(-1, C64::new(r, 0.0))],
            _ => Vec::new(),
        };
        let a_fit = fit_laurent(&a_samples, k_min, k_max, &pins)?;

        // validation: reconstruct the triple at the targets
        let psi_exp = ExpLaurent::new(winding, l_psi.clone());
        let mut sup: f64 = 0.0;
        for (i, t) in input.targets.iter().enumerate() {
            if t.weight == 0.0 {
                continue;
            }
            let w = w_of[i];
            let av = a_fit.eval(w);
            let pv = psi_exp.eval(w);
            let pinv = 1.0 / pv;
            let f = [av, 0.5 * (pinv - pv) * av, 0.5 * I * (pinv + pv) * av];
            let d = ((f[0] - t.f[0]).norm_sqr()
                + (f[1] - t.f[1]).norm_sqr()
                + (f[2] - t.f[2]).norm_sqr())
            .sqrt();
            sup = sup.max(d);
        }

        let min_a = input
            .validation
            .iter()
            .map(|&z| a_fit.eval(input.chart.eval(z)).norm())
            .fold(f64::INFINITY, f64::min);

        if sup <= input.sup_tol && min_a > 0.0 {
            let scale_a = a_fit.max_coeff_norm().max(1e-300);
            if min_a < 1e-9 * scale_a {
                if degree < input.degree_max {
                    degree = (degree * 2).min(input.degree_max);
                    continue;
                }
                return Err(RefitError::PinnedFormVanishes { min: min_a });
            }
            let report = RefitReport {
                degree,
                sup_error: sup,
                min_pinned_abs: min_a,
                psi_winding: winding,
            };
            return Ok((FiberRep::OnePinned { a: a_fit, psi: psi_exp }, report));
        }
        if degree >= input.degree_max {
            return Err(RefitError::AccuracyStalled {
                degree,
                wanted: input.sup_tol,
                got: sup,
            });
        }
        degree = (degree * 2).min(input.degree_max);
    }
}

/// Degree defaults from the configured ladder.
pub fn default_ladder() -> (usize, usize) {
    (tol::REFIT_DEGREE_START, tol::REFIT_DEGREE_MAX)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use crate::riemann::ModelDomain;
    use crate::weierstrass::fixtures;

    use super::*;

    fn grid_chains(dom: &ModelDomain, keep: &dyn Fn(C64) -> bool) -> (Vec<usize>, Vec<Vec<usize>>) {
        // returns kept node indices and chains (rows) in target-local indexing
        let g = &dom.grid;
        let mut kept = Vec::new();
        let mut chains = Vec::new();
        let mut local = vec![usize::MAX; g.len()];
        for i_s in 0..g.n_s {
            let mut chain = Vec::new();
            for i_t in 0..g.n_t {
                let idx = g.idx(i_s, i_t);
                let z = g.node_z(idx);
                if keep(z) {
                    local[idx] = kept.len();
                    chain.push(kept.len());
                    kept.push(idx);
                }
            }
            if chain.len() >= 2 {
                chains.push(chain);
            }
        }
        (kept, chains)
    }

    #[test]
    fn refit_reproduces_catenoid_datum() {
        let d = fixtures::catenoid(40, 96);
        let dom = d.domain.clone();
        let (kept, chains) = grid_chains(&dom, &|z| {
            let r = z.norm();
            (0.5..=2.0).contains(&r)
        });
        let targets: Vec<RefitTarget> = kept
            .iter()
            .map(|&i| RefitTarget { z: dom.grid.node_z(i), f: d.f[i], weight: 1.0 })
            .collect();
        let chart = d.analytic.as_ref().unwrap().chart.clone();
        let validation: Vec<C64> =
            (0..64).map(|k| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 64.0)).collect();
        let input = RefitInput {
            chart: &chart,
            targets,
            chains,
            laurent: true,
            residue_pin: Some(1.0), // f1 theta = dz/z has residue 1
            validation,
            sup_tol: 1e-9,
            degree_start: 8,
            degree_max: 64,
        };
        let (rep, report) = runge_refit(&input).unwrap();
        assert!(report.sup_error < 1e-9, "sup {:.3e}", report.sup_error);
        assert_eq!(report.psi_winding, -1, "catenoid quotient is 1/z");
        // fitted triple matches the source off the fit nodes too
        let analytic = crate::weierstrass::DatumAnalytic { chart, rep: rep.clone() };
        for &z in &[C64::new(0.9, 0.7), C64::new(-1.2, 0.4)] {
            let f_true = d.analytic.as_ref().unwrap().f_at(z);
            let f_fit = analytic.f_at(z);
            for k in 0..3 {
                assert!((f_true[k] - f_fit[k]).norm() < 1e-7);
            }
        }
        let _ = rep;
    }

    #[test]
    fn refit_pins_exact_residue() {
        let d = fixtures::catenoid(32, 64);
        let dom = d.domain.clone();
        let (kept, chains) = grid_chains(&dom, &|z| (0.5..=2.0).contains(&z.norm()));
        let targets: Vec<RefitTarget> = kept
            .iter()
            .map(|&i| RefitTarget { z: dom.grid.node_z(i), f: d.f[i], weight: 1.0 })
            .collect();
        let chart = d.analytic.as_ref().unwrap().chart.clone();
        let input = RefitInput {
            chart: &chart,
            targets,
            chains,
            laurent: true,
            residue_pin: Some(0.75),
            validation: vec![C64::new(1.0, 0.0)],
            sup_tol: 1.0, // accuracy not the point here: the pin must bind
            degree_start: 8,
            degree_max: 16,
        };
        let (rep, _) = runge_refit(&input).unwrap();
        match rep {
            FiberRep::OnePinned { a, .. } => {
                assert_eq!(a.coeff(-1), C64::new(0.75, 0.0));
            }
            _ => panic!("expected one-pinned"),
        }
    }

    #[test]
    fn refit_polynomial_case_disc() {
        let d = fixtures::plane(40);
        let dom = d.domain.clone();
        let (kept, chains) = grid_chains(&dom, &|z| z.norm() <= 1.0);
        let targets: Vec<RefitTarget> = kept
            .iter()
            .map(|&i| RefitTarget { z: dom.grid.node_z(i), f: d.f[i], weight: 1.0 })
            .collect();
        let chart = d.analytic.as_ref().unwrap().chart.clone();
        let input = RefitInput {
            chart: &chart,
            targets,
            chains,
            laurent: false,
            residue_pin: None,
            validation: vec![C64::new(0.0, 0.0), C64::new(0.5, 0.5)],
            sup_tol: 1e-10,
            degree_start: 4,
            degree_max: 16,
        };
        let (_, report) = runge_refit(&input).unwrap();
        assert!(report.sup_error < 1e-10);
        assert_eq!(report.psi_winding, 0);
    }
}
