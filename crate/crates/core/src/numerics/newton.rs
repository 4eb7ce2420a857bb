//! Damped Gauss-Newton with a norm trust region and SVD least-norm steps.
//! Used for period killing, convex-integration endpoint correction, and the
//! residue-constrained refits. Jacobians come from central finite differences.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct NewtonReport {
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Hard cap on ||x||; steps are clipped back inside.
    pub radius: f64,
    /// Relative finite-difference step for the Jacobian.
    pub fd_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 40, radius: f64::INFINITY, fd_step: 1e-6 }
    }
}

/// Central-difference Jacobian of `f` at `x`.
pub fn fd_jacobian<F>(f: &mut F, x: &DVector<f64>, fd_step: f64) -> DMatrix<f64>
where
    F: FnMut(&DVector<f64>) -> DVector<f64>,
{
    let n = x.len();
    let m = f(x).len();
    let mut jac = DMatrix::<f64>::zeros(m, n);
    for j in 0..n {
        let h = fd_step * x[j].abs().max(1.0);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        let fp = f(&xp);
        let fm = f(&xm);
        for i in 0..m {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

/// Solve `f(x) = 0` in the least-squares sense from `x`, damped line search,
/// least-norm SVD step (fine for underdetermined systems). Returns the report;
/// `x` holds the final iterate.
pub fn solve<F>(x: &mut DVector<f64>, mut f: F, opts: &NewtonOptions) -> NewtonReport
where
    F: FnMut(&DVector<f64>) -> DVector<f64>,
{
    let mut history = Vec::new();
    let mut r = f(x);
    let mut rnorm = r.norm();
    history.push(rnorm);
    for it in 0..opts.max_iter {
        if rnorm <= opts.tol {
            return NewtonReport { residual_history: history, converged: true, iterations: it };
        }
        let jac = fd_jacobian(&mut f, x, opts.fd_step);
        let svd = jac.svd(true, true);
        let step = match svd.solve(&(-&r), 1e-12) {
            Ok(s) => s,
            Err(_) => break,
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let mut cand = &*x + &step * lambda;
            let cn = cand.norm();
            if cn > opts.radius {
                cand *= opts.radius / cn;
            }
            let rc = f(&cand);
            let rcn = rc.norm();
            if rcn < rnorm * (1.0 - 1e-4 * lambda) || rcn < opts.tol {
                *x = cand;
                r = rc;
                rnorm = rcn;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        history.push(rnorm);
        if !accepted {
            break;
        }
    }
    let converged = rnorm <= opts.tol;
    let iterations = history.len() - 1;
    NewtonReport { residual_history: history, converged, iterations }
}
