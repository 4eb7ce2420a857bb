//! Beltrami solves. The plane solve runs a fixed-point iteration for
//! `phi_zbar = mu phi_z` on a periodized square patch with the ansatz
//! `phi = alpha z + beta conj(z) + p(z)`, `p` periodic: the Beurling
//! transform acts diagonally in Fourier space with unit-modulus symbol, so
//! the iteration contracts at rate `sup |mu|`. The disc solve reuses the
//! plane machinery on the reflection-extended multiplier, which forces the
//! unit circle to be invariant up to discretization error and is checked.

use std::sync::Arc;

use thiserror::Error;

use crate::numerics::fft2::Fft2;
use crate::numerics::{C64, I};
use crate::tol;

use super::chart::{BeltramiReport, ChartEval, QcMap};
use super::domain::{DerivOrder, DomainKind, ModelDomain};

#[derive(Debug, Error)]
pub enum RiemannError {
    #[error("Beltrami multiplier not elliptic: sup |mu| = {sup} >= 1")]
    DegenerateMultiplier { sup: f64 },
    #[error("field has {values} samples, grid has {nodes} nodes")]
    GridMismatch { values: usize, nodes: usize },
    #[error("fixed point stalled after {iterations} iterations, last increment {last:.3e}")]
    SolverDiverged { iterations: usize, last: f64, history: Vec<f64> },
    #[error("disc boundary escaped the circle by {escape:.3e} (tolerance {tol:.3e})")]
    BoundaryEscape { escape: f64, tol: f64 },
    #[error("solve on a {kind} model needs an evaluable multiplier, not bare samples")]
    NoGenerator { kind: String },
    #[error("chart Jacobian degenerates: min interior value {min:.3e}")]
    DegenerateJacobian { min: f64 },
    #[error("operation requires a disc or annulus model")]
    UnsupportedDomain,
}

type MuFn = Arc<dyn Fn(C64) -> C64 + Send + Sync>;

/// A complex structure as a Beltrami coefficient sample grid. Presets carry
/// their generating closure so charts can be solved on an embedding patch;
/// CSV imports are samples only.
#[derive(Clone)]
pub struct BeltramiField {
    pub domain: Arc<ModelDomain>,
    pub samples: Vec<C64>,
    pub sup_bound: f64,
    pub generator: Option<MuFn>,
}

impl std::fmt::Debug for BeltramiField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BeltramiField")
            .field("domain", &self.domain.kind)
            .field("sup_bound", &self.sup_bound)
            .field("generator", &self.generator.is_some())
            .finish()
    }
}

impl BeltramiField {
    pub fn from_fn(
        domain: Arc<ModelDomain>,
        mu: impl Fn(C64) -> C64 + Send + Sync + 'static,
    ) -> Result<Self, RiemannError> {
        let samples: Vec<C64> = domain.grid.nodes().iter().map(|&z| mu(z)).collect();
        let sup = samples.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if sup >= 1.0 {
            return Err(RiemannError::DegenerateMultiplier { sup });
        }
        Ok(Self { domain, samples, sup_bound: sup, generator: Some(Arc::new(mu)) })
    }

    pub fn from_samples(domain: Arc<ModelDomain>, samples: Vec<C64>) -> Result<Self, RiemannError> {
        if samples.len() != domain.grid.len() {
            return Err(RiemannError::GridMismatch {
                values: samples.len(),
                nodes: domain.grid.len(),
            });
        }
        let sup = samples.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if sup >= 1.0 {
            return Err(RiemannError::DegenerateMultiplier { sup });
        }
        Ok(Self { domain, samples, sup_bound: sup, generator: None })
    }

    pub fn zero(domain: Arc<ModelDomain>) -> Self {
        let n = domain.grid.len();
        Self {
            domain,
            samples: vec![C64::new(0.0, 0.0); n],
            sup_bound: 0.0,
            generator: Some(Arc::new(|_| C64::new(0.0, 0.0))),
        }
    }

    /// Evaluate the multiplier anywhere (generator-backed fields only).
    pub fn eval(&self, z: C64) -> Option<C64> {
        self.generator.as_ref().map(|g| g(z))
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub patch_n: usize,
    /// Override the automatic embedding-patch half width.
    pub patch_half_width: Option<f64>,
    /// Disc solves fail if the rim drifts farther than this.
    pub boundary_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: tol::BELTRAMI_FP_TOL,
            max_iter: tol::BELTRAMI_MAX_ITER,
            patch_n: 256,
            patch_half_width: None,
            boundary_tol: tol::DISC_BOUNDARY_TOL,
        }
    }
}

/// Core patch iteration. Returns the un-normalized chart evaluator
/// (alpha = 1) and the fixed-point increment history.
fn patch_fixed_point(
    mu_at: &dyn Fn(C64) -> C64,
    half_width: f64,
    n: usize,
    opts: &SolveOptions,
) -> Result<(ChartEval, Vec<f64>), RiemannError> {
    let fft = Fft2::new(n, n);
    let step = 2.0 * half_width / n as f64;
    let coord = |i: usize| -half_width + step * i as f64;

    let mut mu = vec![C64::new(0.0, 0.0); n * n];
    for iy in 0..n {
        for ix in 0..n {
            mu[iy * n + ix] = mu_at(C64::new(coord(ix), coord(iy)));
        }
    }
    let sup = mu.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if sup >= 1.0 {
        return Err(RiemannError::DegenerateMultiplier { sup });
    }

    let alpha = C64::new(1.0, 0.0);
    let mut q = vec![C64::new(0.0, 0.0); n * n];
    let mut beta = C64::new(0.0, 0.0);
    let mut history = Vec::new();
    let mut converged = sup == 0.0;
    let k = std::f64::consts::PI / half_width;

    for _it in 0..opts.max_iter {
        if converged {
            break;
        }
        // Bq = p_z from q = p_zbar via the unit-modulus symbol conj(m)/m
        let mut bq = q.clone();
        fft.forward(&mut bq);
        for jy in 0..n {
            for jx in 0..n {
                let m = C64::new(
                    k * Fft2::freq(jx, n) as f64,
                    k * Fft2::freq(jy, n) as f64,
                );
                let idx = jy * n + jx;
                if m.norm_sqr() == 0.0 {
                    bq[idx] = C64::new(0.0, 0.0);
                } else {
                    bq[idx] *= m.conj() / m;
                }
            }
        }
        fft.inverse(&mut bq);

        let mut mean = C64::new(0.0, 0.0);
        for i in 0..n * n {
            bq[i] = mu[i] * (alpha + bq[i]);
            mean += bq[i];
        }
        mean /= (n * n) as f64;
        let mut delta: f64 = 0.0;
        for i in 0..n * n {
            let newq = bq[i] - mean;
            delta = delta.max((newq - q[i]).norm());
            q[i] = newq;
        }
        beta = mean;
        history.push(delta);
        if delta <= opts.tol {
            converged = true;
        }
    }
    if !converged && sup > 0.0 {
        let last = history.last().copied().unwrap_or(f64::NAN);
        return Err(RiemannError::SolverDiverged { iterations: history.len(), last, history });
    }

    // p modes from q modes: p_hat = -2i q_hat / m
    let mut qh = q;
    fft.forward(&mut qh);
    let norm = 1.0 / (n * n) as f64;
    let mut modes = Vec::new();
    let mut max_coef: f64 = 0.0;
    let mut raw = Vec::new();
    for jy in 0..n {
        for jx in 0..n {
            let m = C64::new(k * Fft2::freq(jx, n) as f64, k * Fft2::freq(jy, n) as f64);
            if m.norm_sqr() == 0.0 {
                continue;
            }
            let coef = qh[jy * n + jx] * norm * (-2.0 * I) / m;
            let mag = coef.norm();
            if mag > 0.0 {
                max_coef = max_coef.max(mag);
                raw.push((Fft2::freq(jx, n) as i32, Fft2::freq(jy, n) as i32, coef));
            }
        }
    }
    let cutoff = max_coef * 1e-14;
    for (kx, ky, coef) in raw {
        if coef.norm() > cutoff {
            modes.push((kx, ky, coef));
        }
    }

    let eval = ChartEval {
        alpha,
        beta,
        c0: C64::new(0.0, 0.0),
        half_width,
        modes,
        pre_a: C64::new(1.0, 0.0),
        pre_b: C64::new(0.0, 0.0),
    };
    Ok((eval, history))
}

/// Normalize a raw chart to fix `z0 -> 0` and `z1 -> z1` (plane convention
/// with z0 = 0, z1 = 1; disc convention with z1 on the rim).
fn normalize_chart(eval: ChartEval, z0: C64, z1: C64) -> ChartEval {
    let at0 = eval.eval(z0);
    let at1 = eval.eval(z1);
    let s = z1 / (at1 - at0);
    eval.normalized(at0, s)
}

fn sample_on_domain(
    domain: &ModelDomain,
    eval: &ChartEval,
) -> (Vec<C64>, Vec<C64>, Vec<C64>) {
    let n = domain.grid.len();
    let mut values = vec![C64::new(0.0, 0.0); n];
    let mut dz = vec![C64::new(0.0, 0.0); n];
    let mut dzbar = vec![C64::new(0.0, 0.0); n];
    for i in 0..n {
        let (v, a, b) = eval.eval_d(domain.grid.node_z(i));
        values[i] = v;
        dz[i] = a;
        dzbar[i] = b;
    }
    (values, dz, dzbar)
}

fn cr_residual_against(
    domain: &ModelDomain,
    mu_samples: &[C64],
    dz: &[C64],
    dzbar: &[C64],
) -> f64 {
    domain
        .interior_indices()
        .into_iter()
        .map(|i| (dzbar[i] - mu_samples[i] * dz[i]).norm())
        .fold(0.0, f64::max)
}

/// Plane-normalized solve: `phi(0) = 0`, `phi(1) = 1`, linear growth at the
/// patch edge through the affine part. The returned chart is sampled on the
/// field's model grid.
pub fn solve_beltrami_plane(
    field: &BeltramiField,
    opts: &SolveOptions,
) -> Result<QcMap, RiemannError> {
    let domain = field.domain.as_ref();
    let auto_w = match domain.kind {
        DomainKind::PlanePatch { half_width } => half_width,
        DomainKind::Disc { radius } => 3.0 * radius,
        DomainKind::Annulus { r_out, .. } => 2.0 * r_out,
    };
    let half_width = opts.patch_half_width.unwrap_or(auto_w);

    let samples = field.samples.clone();
    let dom2 = field.domain.clone();
    let mu_at: Box<dyn Fn(C64) -> C64> = match (&field.generator, &domain.kind) {
        (Some(g), _) => {
            let g = g.clone();
            Box::new(move |z| g(z))
        }
        (None, DomainKind::PlanePatch { .. }) => {
            // nearest-node lookup on the native grid
            Box::new(move |z| nearest_sample(&dom2, &samples, z))
        }
        (None, k) => {
            return Err(RiemannError::NoGenerator { kind: format!("{k:?}") });
        }
    };

    let (raw, history) = patch_fixed_point(&*mu_at, half_width, opts.patch_n, opts)?;
    let eval = normalize_chart(raw, C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    let (values, dz, dzbar) = sample_on_domain(domain, &eval);
    let cr = cr_residual_against(domain, &field.samples, &dz, &dzbar);
    let report = BeltramiReport {
        iterations: history.len(),
        residual_history: history,
        cr_residual_max: cr,
        boundary_escape: None,
    };
    let map = QcMap { domain: domain.clone(), values, dz, dzbar, eval, report };
    let min_jac = map.min_interior_jacobian();
    if min_jac <= 0.0 {
        return Err(RiemannError::DegenerateJacobian { min: min_jac });
    }
    Ok(map)
}

fn nearest_sample(domain: &ModelDomain, samples: &[C64], z: C64) -> C64 {
    // patch grids are uniform Cartesian
    let g = &domain.grid;
    let (s0, s1, t0, t1) = match g.kind {
        super::domain::GridKind::Cartesian { s0, s1, t0, t1 } => (s0, s1, t0, t1),
        _ => unreachable!("nearest_sample is only used on patch grids"),
    };
    let fs = ((z.re - s0) / (s1 - s0) * (g.n_s - 1) as f64).round().clamp(0.0, (g.n_s - 1) as f64);
    let ft = ((z.im - t0) / (t1 - t0) * (g.n_t - 1) as f64).round().clamp(0.0, (g.n_t - 1) as f64);
    samples[g.idx(fs as usize, ft as usize)]
}

/// Disc-normalized solve (disc onto itself, `phi(0) = 0`, `phi(R) = R`): the
/// multiplier is extended outside by the circle reflection and the plane
/// machinery runs on the extension; rim invariance is then measured, not
/// assumed.
pub fn solve_beltrami_disc(
    field: &BeltramiField,
    opts: &SolveOptions,
) -> Result<QcMap, RiemannError> {
    let domain = field.domain.as_ref();
    let radius = match domain.kind {
        DomainKind::Disc { radius } => radius,
        _ => return Err(RiemannError::UnsupportedDomain),
    };
    let g = field
        .generator
        .clone()
        .ok_or_else(|| RiemannError::NoGenerator { kind: "Disc".into() })?;

    // reflection across |z| = radius
    let r2 = radius * radius;
    let mu_ext = move |z: C64| -> C64 {
        if z.norm_sqr() <= r2 {
            g(z)
        } else {
            let w = r2 / z.conj();
            let rot = z / z.conj();
            g(w).conj() * rot * rot
        }
    };

    let half_width = opts.patch_half_width.unwrap_or(4.0 * radius);
    let (raw, history) = patch_fixed_point(&mu_ext, half_width, opts.patch_n, opts)?;
    let eval = normalize_chart(raw, C64::new(0.0, 0.0), C64::new(radius, 0.0));

    // rim check
    let mut escape: f64 = 0.0;
    for k in 0..720 {
        let t = 2.0 * std::f64::consts::PI * k as f64 / 720.0;
        let z = C64::from_polar(radius, t);
        escape = escape.max((eval.eval(z).norm() - radius).abs());
    }
    if escape > opts.boundary_tol {
        return Err(RiemannError::BoundaryEscape { escape, tol: opts.boundary_tol });
    }

    let (values, dz, dzbar) = sample_on_domain(domain, &eval);
    let cr = cr_residual_against(domain, &field.samples, &dz, &dzbar);
    let report = BeltramiReport {
        iterations: history.len(),
        residual_history: history,
        cr_residual_max: cr,
        boundary_escape: Some(escape),
    };
    let map = QcMap { domain: domain.clone(), values, dz, dzbar, eval, report };
    // orientation: check inside the disc only, the extension may fold outside
    let jac = map.jacobian();
    let min_jac = (0..domain.grid.len())
        .filter(|&i| domain.grid.node_z(i).norm() <= radius)
        .map(|i| jac[i])
        .fold(f64::INFINITY, f64::min);
    if min_jac <= 0.0 {
        return Err(RiemannError::DegenerateJacobian { min: min_jac });
    }
    Ok(map)
}

/// Node-wise |f_zbar - mu f_z| by centered finite differences on the model
/// grid.
pub fn cr_residual(
    domain: &ModelDomain,
    f: &[C64],
    mu: &BeltramiField,
) -> Result<Vec<f64>, RiemannError> {
    if f.len() != domain.grid.len() {
        return Err(RiemannError::GridMismatch { values: f.len(), nodes: domain.grid.len() });
    }
    if mu.samples.len() != domain.grid.len() {
        return Err(RiemannError::GridMismatch {
            values: mu.samples.len(),
            nodes: domain.grid.len(),
        });
    }
    let (dz, dzb) = domain.grid.wirtinger(f, DerivOrder::Centered2);
    Ok((0..f.len()).map(|i| (dzb[i] - mu.samples[i] * dz[i]).norm()).collect())
}
