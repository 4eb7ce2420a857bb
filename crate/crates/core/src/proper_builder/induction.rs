//! The inductive construction: exhaustion bookkeeping, the seeded base step,
//! the three-deformation noncritical step on annular shells, the critical
//! transition from the base disc to the first annulus, and the limit checks.
//!
//! Every named inequality is measured and recorded; a failed gate aborts the
//! run with the stage, fiber, and margin in the report.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::convex_integration::CiError;
use crate::families::{FamilyError, ParamGrid};
use crate::lopez_ros::{
    build_spray_core, kill_periods_core, period_map, targets_from_flux, LopezRosError, Multiplier,
    PeriodCore, PeriodFun,
};
use crate::numerics::laurent::{ExpLaurent, LaurentPoly};
use crate::numerics::{C64, I};
use crate::riemann::{
    annulus_basis_at, solve_beltrami_disc, solve_beltrami_plane, BeltramiField, ChartEval,
    DomainKind, HomologyBasis, ModelDomain, OneFormSample, QcMap, RiemannError, SolveOptions,
};
use crate::tol;
use crate::weierstrass::{
    integrate_cmi, DatumAnalytic, FiberRep, Immersion, WeierstrassDatum, WeierstrassError,
};

use super::decoration::{decorate_sectors, quadric_ramp, ramp_extension, SampledArc, Shell};
use super::division::{
    check_compatible, critical_split, synthesize_division, CircleCurve, ComponentDivision,
    Division,
};
use super::refit::{runge_refit, RefitError, RefitInput, RefitTarget};

#[derive(Debug, Error)]
pub enum BuilderError {
    #[error("gate {gate} failed at step {j}, fiber {fiber}: margin {margin:.4e}")]
    GateFailed { gate: String, j: usize, fiber: usize, margin: f64 },
    #[error("seed immersion violates the base-step conditions: {what}")]
    SeedRejected { what: String },
    #[error("chart solve failed: {0}")]
    Riemann(#[from] RiemannError),
    #[error("refit failed at step {j}, fiber {fiber}: {source}")]
    Refit { j: usize, fiber: usize, source: RefitError },
    #[error("arc extension failed at step {j}, fiber {fiber}: {source}")]
    Extension { j: usize, fiber: usize, source: CiError },
    #[error("period solve failed at step {j}, fiber {fiber}: {source}")]
    Periods { j: usize, fiber: usize, source: LopezRosError },
    #[error(transparent)]
    Weierstrass(#[from] WeierstrassError),
    #[error(transparent)]
    Division(#[from] super::division::DivisionError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error("configuration rejected: {0}")]
    Config(String),
}

/// Shipped model kinds for the induction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Disc,
    Annulus,
}

/// Beltrami family presets; coefficients scale with the first parameter
/// coordinate b.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum BeltramiSpec {
    Zero,
    /// mu = scale * b (constant in z)
    Constant { scale: f64 },
    /// mu = scale * b * bump(|z|; lo, hi) * z / conj(z)
    RadialBump { scale: f64, lo: f64, hi: f64 },
}

impl BeltramiSpec {
    pub fn field(
        &self,
        domain: Arc<ModelDomain>,
        b: f64,
    ) -> Result<BeltramiField, RiemannError> {
        match *self {
            BeltramiSpec::Zero => Ok(BeltramiField::zero(domain)),
            BeltramiSpec::Constant { scale } => {
                let c = C64::new(scale * b, 0.0);
                BeltramiField::from_fn(domain, move |_| c)
            }
            BeltramiSpec::RadialBump { scale, lo, hi } => {
                let amp = scale * b;
                BeltramiField::from_fn(domain, move |z: C64| {
                    let r = z.norm();
                    if r <= lo || r >= hi || r < 1e-12 {
                        return C64::new(0.0, 0.0);
                    }
                    let x = (r - lo) / (hi - lo);
                    let bump = (-1.0 / (x * (1.0 - x))).exp() * 54.598150033144236;
                    amp * bump * z / z.conj()
                })
            }
        }
    }
}

/// Prescribed flux family: value(b) = base + b * slope on the single cycle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FluxSpec {
    pub base: [f64; 3],
    pub slope: [f64; 3],
}

impl FluxSpec {
    pub fn zero() -> Self {
        Self { base: [0.0; 3], slope: [0.0; 3] }
    }

    pub fn at(&self, b: f64) -> [f64; 3] {
        [
            self.base[0] + b * self.slope[0],
            self.base[1] + b * self.slope[1],
            self.base[2] + b * self.slope[2],
        ]
    }

    pub fn is_zero(&self) -> bool {
        self.base.iter().chain(self.slope.iter()).all(|&v| v == 0.0)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BuilderOptions {
    pub model: ModelKind,
    pub steps: usize,
    pub param_dim: usize,
    pub param_resolution: usize,
    pub beltrami: BeltramiSpec,
    pub flux: FluxSpec,
    /// global grid (radial/x rows, angular/y columns)
    pub grid_ns: usize,
    pub grid_nt: usize,
    /// Beltrami solver patch resolution
    pub patch_n: usize,
    /// arc extension height margin
    pub margin: f64,
    pub rng_seed: u64,
}

impl Default for BuilderOptions {
    fn default() -> Self {
        Self {
            model: ModelKind::Annulus,
            steps: 4,
            param_dim: 0,
            param_resolution: 1,
            beltrami: BeltramiSpec::Zero,
            flux: FluxSpec { base: [2.0 * std::f64::consts::PI, 0.0, 0.0], slope: [0.0; 3] },
            grid_ns: 160,
            grid_nt: 256,
            patch_n: 256,
            margin: 0.6,
            rng_seed: 7,
        }
    }
}

/// One exhaustion domain.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum ExDomain {
    Disc { center: C64, radius: f64 },
    Annulus { r_in: f64, r_out: f64 },
}

impl ExDomain {
    pub fn contains(&self, z: C64) -> bool {
        match *self {
            ExDomain::Disc { center, radius } => (z - center).norm() <= radius,
            ExDomain::Annulus { r_in, r_out } => {
                let r = z.norm();
                r >= r_in && r <= r_out
            }
        }
    }

    /// Boundary circles, outer first.
    pub fn boundary_circles(&self) -> Vec<CircleCurve> {
        match *self {
            ExDomain::Disc { center, radius } => vec![CircleCurve { center, radius }],
            ExDomain::Annulus { r_in, r_out } => vec![
                CircleCurve { center: C64::new(0.0, 0.0), radius: r_out },
                CircleCurve { center: C64::new(0.0, 0.0), radius: r_in },
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepKind {
    Noncritical,
    Critical,
}

/// The exhaustion: X_1 is a disc; each later step is tagged by the Euler
/// characteristic of its shell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Exhaustion {
    pub domains: Vec<ExDomain>,
    pub kinds: Vec<StepKind>, // kinds[j-2] tags the step into domains[j-1]
}

/// Models and charts shared by all steps.
pub struct Workspace {
    pub opts: BuilderOptions,
    pub global: Arc<ModelDomain>,
    pub exhaustion: Exhaustion,
    pub grid: ParamGrid,
    /// per fiber: multiplier, global chart, 1-form
    pub fibers: Vec<FiberCharts>,
    pub basis: Option<HomologyBasis>,
    pub anchor: usize,
}

pub struct FiberCharts {
    pub b: f64,
    pub mu: BeltramiField,
    pub chart: QcMap,
    pub theta: OneFormSample,
}

/// Snap a radius to the nearest global grid row (annulus grids).
fn snap_radius(global: &ModelDomain, r: f64) -> f64 {
    match global.kind {
        DomainKind::Annulus { .. } => global.row_radius(global.ring_row(r)),
        _ => r,
    }
}

/// Build the global domain and the exhaustion for the configured model.
pub fn make_workspace(opts: &BuilderOptions) -> Result<Workspace, BuilderError> {
    if opts.steps < 1 {
        return Err(BuilderError::Config("steps must be at least 1".into()));
    }
    let (global, exhaustion) = match opts.model {
        ModelKind::Disc => {
            let global = Arc::new(ModelDomain::disc(1.0, opts.grid_ns.max(96)));
            let steps = opts.steps;
            let mut domains = vec![];
            for j in 1..=steps {
                let r = 0.45 + 0.40 * (j - 1) as f64 / (steps.max(2) - 1) as f64;
                domains.push(ExDomain::Disc { center: C64::new(0.0, 0.0), radius: r });
            }
            let kinds = vec![StepKind::Noncritical; steps.saturating_sub(1)];
            (global, Exhaustion { domains, kinds })
        }
        ModelKind::Annulus => {
            if opts.steps < 2 {
                return Err(BuilderError::Config(
                    "the annulus model needs at least 2 steps (the first transition adds the cycle)"
                        .into(),
                ));
            }
            // outer radii 1.8, 3.1, 5.3, ...; inner mirrored below 1
            let steps = opts.steps;
            let mut r_out = 1.8;
            let mut r_in = 0.55;
            let mut outs = vec![r_out];
            let mut ins = vec![r_in];
            for _ in 3..=steps {
                r_out *= 1.72;
                r_in /= 1.72;
                outs.push(r_out);
                ins.push(r_in);
            }
            let global = Arc::new(ModelDomain::annulus(
                ins.last().unwrap() * 0.90,
                outs.last().unwrap() * 1.10,
                opts.grid_ns,
                opts.grid_nt,
            ));
            let mut domains = vec![ExDomain::Disc { center: C64::new(1.0, 0.0), radius: 0.12 }];
            for j in 2..=steps {
                domains.push(ExDomain::Annulus {
                    r_in: snap_radius(&global, ins[j - 2]),
                    r_out: snap_radius(&global, outs[j - 2]),
                });
            }
            let mut kinds = vec![StepKind::Critical];
            kinds.extend(vec![StepKind::Noncritical; steps.saturating_sub(2)]);
            (global, Exhaustion { domains, kinds })
        }
    };

    let grid = ParamGrid::new(opts.param_dim, opts.param_resolution)?;
    let mut fibers = Vec::with_capacity(grid.len());
    let solve_opts = SolveOptions { patch_n: opts.patch_n, ..Default::default() };
    for node in grid.nodes() {
        let b = node.first().copied().unwrap_or(0.0);
        let mu = opts.beltrami.field(global.clone(), b)?;
        let chart = solve_beltrami_plane(&mu, &solve_opts)?;
        let theta = crate::riemann::oneform_from_chart(&chart)?;
        fibers.push(FiberCharts { b, mu, chart, theta });
    }

    let basis = match global.kind {
        DomainKind::Annulus { .. } => Some(annulus_basis_at(&global, 1.0)),
        _ => None,
    };
    // anchor node: nearest to z = 1 (annulus; inside the seed disc) or 0 (disc)
    let target = match opts.model {
        ModelKind::Disc => C64::new(0.0, 0.0),
        ModelKind::Annulus => C64::new(1.0, 0.0),
    };
    let anchor = (0..global.grid.len())
        .min_by(|&a, &b| {
            (global.grid.node_z(a) - target)
                .norm()
                .partial_cmp(&(global.grid.node_z(b) - target).norm())
                .unwrap()
        })
        .unwrap();

    Ok(Workspace { opts: opts.clone(), global, exhaustion, grid, fibers, basis, anchor })
}

// --- fiber state ----------------------------------------------------------------

/// One fiber's datum with its anchored integration data and the cached u
/// values on the global grid.
#[derive(Clone)]
pub struct FiberState {
    pub datum: WeierstrassDatum,
    pub u0: [f64; 3],
    pub u_grid: Vec<[f64; 3]>,
    pub immersion: Immersion,
}

impl FiberState {
    fn rebuild(
        ws: &Workspace,
        datum: WeierstrassDatum,
        u0: [f64; 3],
    ) -> Result<Self, BuilderError> {
        let basis = ws
            .basis
            .clone()
            .unwrap_or(HomologyBasis { cycles: Vec::new(), base_point: C64::new(0.0, 0.0) });
        let x0 = ws.global.grid.node_z(ws.anchor);
        let immersion = integrate_cmi(&datum, &basis, x0, u0)?;
        let u_grid = immersion.u.clone();
        Ok(Self { datum, u0, u_grid, immersion })
    }

    /// u at an arbitrary point: nearest-node value plus a short segment
    /// integral of Re(f theta).
    pub fn u_near(&self, ws: &Workspace, z: C64) -> [f64; 3] {
        let g = &ws.global.grid;
        let idx = nearest_node(g, z);
        let base = self.u_grid[idx];
        let analytic = self.datum.analytic.as_ref().expect("builder data is analytic");
        let seg = crate::weierstrass::segment_integral(analytic, g.node_z(idx), z);
        [base[0] + seg[0].re, base[1] + seg[1].re, base[2] + seg[2].re]
    }

    /// u along a sampled arc, anchored at the arc's first sample.
    pub fn u_along(&self, ws: &Workspace, arc: &SampledArc) -> Vec<[f64; 3]> {
        let analytic = self.datum.analytic.as_ref().expect("builder data is analytic");
        let n = arc.len();
        let mut out = Vec::with_capacity(n);
        let mut acc = self.u_near(ws, arc.z[0]);
        out.push(acc);
        for k in 1..n {
            let seg = crate::weierstrass::segment_integral(analytic, arc.z[k - 1], arc.z[k]);
            for c in 0..3 {
                acc[c] += seg[c].re;
            }
            out.push(acc);
        }
        out
    }

    pub fn f_at(&self, z: C64) -> [C64; 3] {
        self.datum.analytic.as_ref().expect("builder data is analytic").f_at(z)
    }
}

fn nearest_node(grid: &crate::riemann::Grid2, z: C64) -> usize {
    match grid.kind {
        crate::riemann::GridKind::LogPolar { s0, s1 } => {
            let rho = z.norm().ln().clamp(s0, s1);
            let i_s = ((rho - s0) / (s1 - s0) * (grid.n_s - 1) as f64).round() as usize;
            let mut th = z.arg();
            if th < 0.0 {
                th += 2.0 * std::f64::consts::PI;
            }
            let i_t =
                ((th / (2.0 * std::f64::consts::PI)) * grid.n_t as f64).round() as usize % grid.n_t;
            grid.idx(i_s.min(grid.n_s - 1), i_t)
        }
        crate::riemann::GridKind::Cartesian { s0, s1, t0, t1 } => {
            let i_s =
                (((z.re - s0) / (s1 - s0)) * (grid.n_s - 1) as f64).round().clamp(0.0, (grid.n_s - 1) as f64) as usize;
            let i_t =
                (((z.im - t0) / (t1 - t0)) * (grid.n_t - 1) as f64).round().clamp(0.0, (grid.n_t - 1) as f64) as usize;
            grid.idx(i_s, i_t)
        }
    }
}

// --- trace records ----------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateRecord {
    pub name: String,
    pub fiber: Option<usize>,
    pub margin: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl GateRecord {
    fn new(name: &str, fiber: Option<usize>, margin: f64, threshold: f64) -> Self {
        Self { name: name.into(), fiber, margin, threshold, pass: margin > threshold }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepRecord {
    pub j: usize,
    pub kind: String,
    pub eps: f64,
    pub eps_bound_halving: f64,
    pub eps_bound_margin: f64,
    pub tau: f64,
    pub division_counts: Vec<usize>,
    pub spray_sigma_min: f64,
    pub kill_residual_max: f64,
    pub gates: Vec<GateRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InductionTrace {
    pub steps: Vec<StepRecord>,
    pub final_gates: Vec<GateRecord>,
    pub fiber_params: Vec<f64>,
}

impl InductionTrace {
    pub fn all_pass(&self) -> bool {
        self.steps.iter().flat_map(|s| s.gates.iter()).all(|g| g.pass)
            && self.final_gates.iter().all(|g| g.pass)
    }
}

/// The completed run: per-step fiber states plus the trace.
pub struct InductionRun {
    pub workspace: Workspace,
    pub per_step: Vec<Vec<FiberState>>,
    pub divisions: Vec<Division>,
    pub eps: Vec<f64>,
    pub trace: InductionTrace,
}

// --- seed -----------------------------------------------------------------------

/// Seed data on the unit disc: pinned form a = c (constant), quotient
/// psi = psi0 exp(lambda w'); both leading component forms are nonvanishing,
/// the Gauss direction varies, and the translate puts both leading
/// components above 1 with margin.
pub struct SeedImmersion {
    pub c: C64,
    pub psi0: C64,
    pub lambda: C64,
    pub v0: [f64; 3],
}

impl SeedImmersion {
    pub fn standard() -> Self {
        let mut seed = SeedImmersion {
            c: C64::new(0.42, 0.05),
            psi0: C64::new(2.0, 0.0),
            lambda: C64::new(0.33, 0.12),
            v0: [0.0; 3],
        };
        // translate so both leading components clear 1 with margin on the
        // closed disc
        let mut min1 = f64::INFINITY;
        let mut min2 = f64::INFINITY;
        for k in 0..2048 {
            let th = 2.0 * std::f64::consts::PI * (k % 256) as f64 / 256.0;
            let r = ((k / 256) as f64 + 1.0) / 8.0;
            let w = C64::from_polar(r, th);
            let g = seed.integral(w);
            min1 = min1.min(g[0].re);
            min2 = min2.min(g[1].re);
        }
        seed.v0 = [1.35 - min1, 1.35 - min2, 0.0];
        seed
    }

    /// F components of the seed datum at w'.
    pub fn f_components(&self, w: C64) -> [C64; 3] {
        let psi = self.psi0 * (self.lambda * w).exp();
        let pinv = 1.0 / psi;
        [self.c, 0.5 * (pinv - psi) * self.c, 0.5 * I * (pinv + psi) * self.c]
    }

    /// Closed-form primitive of the seed datum from 0 to w'.
    pub fn integral(&self, w: C64) -> [C64; 3] {
        let e = (self.lambda * w).exp();
        let g1 = self.c * w;
        // int (1/psi) dw = -(1/(psi0 lambda)) e^{-lambda w} + const
        let int_inv = (C64::new(1.0, 0.0) - 1.0 / e) / (self.psi0 * self.lambda);
        let int_psi = self.psi0 * (e - 1.0) / self.lambda;
        let g2 = 0.5 * self.c * (int_inv - int_psi);
        let g3 = 0.5 * I * self.c * (int_inv + int_psi);
        [g1, g2, g3]
    }

    /// u value at w'.
    pub fn u(&self, w: C64) -> [f64; 3] {
        let g = self.integral(w);
        [self.v0[0] + g[0].re, self.v0[1] + g[1].re, self.v0[2] + g[2].re]
    }

    /// Verify the base-step conditions on the closed disc: both leading
    /// components above 1 and their derivative forms nonvanishing.
    pub fn verify(&self) -> Result<(f64, f64), BuilderError> {
        let mut min_u = f64::INFINITY;
        let mut min_f = f64::INFINITY;
        for k in 0..4096 {
            let th = 2.0 * std::f64::consts::PI * (k % 64) as f64 / 64.0;
            let r = ((k / 64) as f64 + 0.5) / 64.0;
            let w = C64::from_polar(r, th);
            let u = self.u(w);
            min_u = min_u.min(u[0].min(u[1]) - 1.0);
            let f = self.f_components(w);
            min_f = min_f.min(f[0].norm().min(f[1].norm()));
        }
        if min_u <= 0.0 {
            return Err(BuilderError::SeedRejected {
                what: format!("leading components reach only 1 + {min_u:.3}"),
            });
        }
        if min_f <= 1e-6 {
            return Err(BuilderError::SeedRejected {
                what: format!("derivative form min {min_f:.3e}"),
            });
        }
        Ok((min_u, min_f))
    }
}

// --- epsilon --------------------------------------------------------------------

/// Immersion margin: smallest singular value of the real differential over
/// the nodes inside the current domain.
fn immersion_margin_on(ws: &Workspace, fiber: &FiberState, dom: &ExDomain) -> f64 {
    let g = &ws.global.grid;
    let mut min_sv = f64::INFINITY;
    for i in 0..g.len() {
        let z = g.node_z(i);
        if !dom.contains(z) {
            continue;
        }
        let du_z = &fiber.immersion.du_z[i];
        let du_zb = &fiber.immersion.du_zbar[i];
        let mut gxx = 0.0;
        let mut gxy = 0.0;
        let mut gyy = 0.0;
        for k in 0..3 {
            let ux = (du_z[k] + du_zb[k]).re;
            let uy = (I * (du_z[k] - du_zb[k])).re;
            gxx += ux * ux;
            gxy += ux * uy;
            gyy += uy * uy;
        }
        let tr = gxx + gyy;
        let det = gxx * gyy - gxy * gxy;
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        min_sv = min_sv.min((tr / 2.0 - disc).max(0.0).sqrt());
    }
    min_sv
}

/// Measured discrete-Cauchy constant: sup |d p| / sup |p| over random smooth
/// probe functions of the refit degree class, on the current domain.
fn cauchy_constant(ws: &Workspace, dom: &ExDomain, rng_seed: u64, trials: usize) -> f64 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(rng_seed);
    let g = &ws.global.grid;
    let nodes: Vec<usize> =
        (0..g.len()).filter(|&i| dom.contains(g.node_z(i))).collect();
    let laurent = matches!(ws.global.kind, DomainKind::Annulus { .. });
    let mut worst: f64 = 1.0;
    for _ in 0..trials {
        let deg = 6usize;
        let k_min = if laurent { -(deg as i32) } else { 0 };
        let coeffs: Vec<C64> = (k_min..=deg as i32)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let p = LaurentPoly::new(k_min, coeffs);
        let dp = p.deriv();
        let mut sup_p: f64 = 0.0;
        let mut sup_dp: f64 = 0.0;
        for &i in &nodes {
            let z = g.node_z(i);
            sup_p = sup_p.max(p.eval(z).norm());
            sup_dp = sup_dp.max(dp.eval(z).norm());
        }
        if sup_p > 0.0 {
            worst = worst.max(sup_dp / sup_p);
        }
    }
    2.0 * worst
}

/// eps_j from the halving rule and the measured immersion margin.
fn choose_epsilon(
    ws: &Workspace,
    fibers: &[FiberState],
    dom: &ExDomain,
    eps_prev: f64,
) -> (f64, f64, f64) {
    let margin = fibers
        .iter()
        .map(|f| immersion_margin_on(ws, f, dom))
        .fold(f64::INFINITY, f64::min);
    let c = cauchy_constant(ws, dom, ws.opts.rng_seed, 100);
    let bound_margin = margin / (4.0 * c);
    let bound_halving = 0.45 * eps_prev;
    (bound_halving.min(bound_margin).max(1e-9), bound_halving, bound_margin)
}

// --- helpers over the grid ---------------------------------------------------

fn nodes_in(ws: &Workspace, pred: &dyn Fn(C64) -> bool) -> Vec<usize> {
    let g = &ws.global.grid;
    (0..g.len()).filter(|&i| pred(g.node_z(i))).collect()
}

/// Refit targets and unwrap chains from the fiber's datum over a node set,
/// subsampled to roughly `cap` points; chains follow grid rows.
fn grid_targets(
    ws: &Workspace,
    fiber: &FiberState,
    keep: &dyn Fn(C64) -> bool,
    cap: usize,
    weight: f64,
) -> (Vec<RefitTarget>, Vec<Vec<usize>>, Option<usize>) {
    let g = &ws.global.grid;
    let total: usize = (0..g.len()).filter(|&i| keep(g.node_z(i))).count();
    let stride = (total / cap.max(1)).max(1);
    // node stride applied along each row to preserve the ring structure
    let theta_stride = if stride >= 2 { 2 } else { 1 };
    let row_stride = ((stride + 1) / theta_stride).max(1);
    let mut targets = Vec::new();
    let mut chains = Vec::new();
    let mut ring_chain = None;
    let mut full_rows = Vec::new();
    for i_s in (0..g.n_s).step_by(row_stride) {
        let mut chain = Vec::new();
        let mut full = true;
        for i_t in (0..g.n_t).step_by(theta_stride) {
            let idx = g.idx(i_s, i_t);
            let z = g.node_z(idx);
            if keep(z) {
                chain.push(targets.len());
                targets.push(RefitTarget { z, f: fiber.f_at(z), weight });
            } else {
                full = false;
            }
        }
        if chain.len() >= 2 {
            if full && g.periodic_t() {
                full_rows.push(chains.len());
            }
            chains.push(chain);
        }
    }
    if !full_rows.is_empty() {
        ring_chain = Some(full_rows[full_rows.len() / 2]);
    }
    (targets, chains, ring_chain)
}

/// Max over fibers of the sup-change of u between two states on a node set.
fn sup_change(a: &FiberState, b: &FiberState, nodes: &[usize]) -> f64 {
    nodes
        .iter()
        .map(|&i| {
            let x = a.u_grid[i];
            let y = b.u_grid[i];
            ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt()
        })
        .fold(0.0, f64::max)
}

fn max12_min_on(states: &[FiberState], nodes: &[usize]) -> f64 {
    let mut worst = f64::INFINITY;
    for s in states {
        for &i in nodes {
            let u = s.u_grid[i];
            worst = worst.min(u[0].max(u[1]));
        }
    }
    worst
}

pub(crate) use run::run_induction;

mod run;
