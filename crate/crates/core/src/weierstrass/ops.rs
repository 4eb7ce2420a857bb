//! Operations on Weierstrass data: null projection, Gauss-map constructors,
//! integration to immersions and null curves, flux, residual diagnostics,
//! and the Gauss-quotient round trip.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::numerics::fd;
use crate::numerics::quad::{cumulative, cumulative_periodic_spectral, trapezoid_closed};
use crate::numerics::{C64, I};
use crate::riemann::{BeltramiField, DerivOrder, GridKind, HomologyBasis, ModelDomain, OneFormSample};
use crate::tol;

use super::datum::{bform, norm3, qform, DatumAnalytic, NullVector, WeierstrassDatum, WeierstrassError};

/// Newton projection onto the punctured null quadric along the conjugate
/// gradient direction; fixed points are exactly the quadric members.
pub fn project_null(v: [C64; 3], tube_rel: f64) -> Result<NullVector, WeierstrassError> {
    let scale = norm3(&v);
    if scale == 0.0 {
        return Err(WeierstrassError::ZeroValue { node: 0 });
    }
    let q0 = qform(&v).norm();
    let bound = tube_rel * scale * scale;
    if q0 > bound {
        return Err(WeierstrassError::OutsideTube { q: q0, bound });
    }
    let mut x = v;
    for _ in 0..8 {
        let q = qform(&x);
        if q.norm() <= 1e-15 * scale * scale {
            break;
        }
        let xc = [x[0].conj(), x[1].conj(), x[2].conj()];
        let denom = 2.0 * bform(&x, &xc); // = 2 |x|^2
        let lam = q / denom;
        for k in 0..3 {
            x[k] -= lam * xc[k];
        }
    }
    NullVector::try_new(x)
}

/// Node-wise Weierstrass triple from a Gauss map `g` and the first-component
/// form `f1theta`: `(1, (g - 1/g)/2, i (g + 1/g)/2) * f1`.
pub fn datum_from_gauss_samples(
    domain: Arc<ModelDomain>,
    theta: OneFormSample,
    g: &[C64],
    f1_over_theta: &[C64],
) -> Result<WeierstrassDatum, WeierstrassError> {
    let n = domain.grid.len();
    if g.len() != n || f1_over_theta.len() != n {
        return Err(WeierstrassError::GridMismatch { values: g.len(), nodes: n });
    }
    let mut f = Vec::with_capacity(n);
    for i in 0..n {
        let f1 = f1_over_theta[i];
        if g[i].norm() == 0.0 {
            if f1.norm() != 0.0 {
                return Err(WeierstrassError::GaussMapZero { node: i });
            }
            return Err(WeierstrassError::ZeroValue { node: i });
        }
        let ginv = 1.0 / g[i];
        f.push([f1, 0.5 * (g[i] - ginv) * f1, 0.5 * I * (g[i] + ginv) * f1]);
    }
    let datum = WeierstrassDatum { domain, f, theta, analytic: None };
    datum.validate()?;
    Ok(datum)
}

/// Gauss quotient `psi = f1 / (f2 - i f3)` per node.
pub fn gauss_quotient(datum: &WeierstrassDatum) -> Result<Vec<C64>, WeierstrassError> {
    datum
        .f
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let den = c[1] - I * c[2];
            if den.norm() == 0.0 {
                Err(WeierstrassError::VanishingDenominator { node: i })
            } else {
                Ok(c[0] / den)
            }
        })
        .collect()
}

/// Reconstruction from a quotient field: for nonvanishing `psi` the triple
/// `(f1, (1/psi - psi) f1 / 2, i (1/psi + psi) f1 / 2)` is null identically.
pub fn datum_from_quotient(
    domain: Arc<ModelDomain>,
    theta: OneFormSample,
    psi: &[C64],
    f1: &[C64],
) -> Result<WeierstrassDatum, WeierstrassError> {
    let n = domain.grid.len();
    if psi.len() != n || f1.len() != n {
        return Err(WeierstrassError::GridMismatch { values: psi.len(), nodes: n });
    }
    let mut f = Vec::with_capacity(n);
    for i in 0..n {
        if psi[i].norm() == 0.0 {
            return Err(WeierstrassError::VanishingDenominator { node: i });
        }
        let p = psi[i];
        let pinv = 1.0 / p;
        f.push([f1[i], 0.5 * (pinv - p) * f1[i], 0.5 * I * (pinv + p) * f1[i]]);
    }
    let datum = WeierstrassDatum { domain, f, theta, analytic: None };
    datum.validate()?;
    Ok(datum)
}

/// Flux homomorphism values: one real 3-vector per homology cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxHom(pub Vec<[f64; 3]>);

/// Complex periods of `f theta` over each basis cycle, trapezoid on the
/// sampled loop (spectrally accurate on smooth closed loops).
pub fn cycle_periods(
    datum: &WeierstrassDatum,
    basis: &HomologyBasis,
) -> Result<Vec<[C64; 3]>, WeierstrassError> {
    let mut out = Vec::with_capacity(basis.cycles.len());
    for cycle in &basis.cycles {
        if !cycle.is_closed(1e-9 * datum.domain.diameter()) {
            return Err(WeierstrassError::OpenCycle);
        }
        let pts = &cycle.points[..cycle.points.len() - 1];
        let n = pts.len();
        let zdot = fd::deriv_periodic_spectral(pts, 1.0);
        let mut vals = [
            Vec::with_capacity(n + 1),
            Vec::with_capacity(n + 1),
            Vec::with_capacity(n + 1),
        ];
        for (j, &z) in pts.iter().enumerate() {
            let fz = sample_f(datum, cycle.ring_row, j, z)?;
            let (a, b) = theta_at(datum, cycle.ring_row, j, z);
            let pair = a * zdot[j] + b * zdot[j].conj();
            for k in 0..3 {
                vals[k].push(fz[k] * pair);
            }
        }
        for v in vals.iter_mut() {
            let first = v[0];
            v.push(first);
        }
        out.push([
            trapezoid_closed(&vals[0], 1.0),
            trapezoid_closed(&vals[1], 1.0),
            trapezoid_closed(&vals[2], 1.0),
        ]);
    }
    Ok(out)
}

fn sample_f(
    datum: &WeierstrassDatum,
    ring_row: Option<usize>,
    j: usize,
    z: C64,
) -> Result<[C64; 3], WeierstrassError> {
    if let Some(a) = &datum.analytic {
        return Ok(a.f_at(z));
    }
    if let Some(row) = ring_row {
        let idx = datum.domain.grid.idx(row, j % datum.domain.grid.n_t);
        return Ok(datum.f[idx]);
    }
    Err(WeierstrassError::NoAnalyticRep)
}

fn theta_at(datum: &WeierstrassDatum, ring_row: Option<usize>, j: usize, z: C64) -> (C64, C64) {
    if datum.analytic.is_some() {
        datum.theta.eval_at(z)
    } else if let Some(row) = ring_row {
        let idx = datum.domain.grid.idx(row, j % datum.domain.grid.n_t);
        (datum.theta.a[idx], datum.theta.b[idx])
    } else {
        datum.theta.eval_at(z)
    }
}

/// Flux over each basis cycle: `Im` of the contour integral of `f theta`.
pub fn flux(datum: &WeierstrassDatum, basis: &HomologyBasis) -> Result<FluxHom, WeierstrassError> {
    let periods = cycle_periods(datum, basis)?;
    Ok(FluxHom(periods.iter().map(|p| [p[0].im, p[1].im, p[2].im]).collect()))
}

/// A conformal minimal immersion sampled with analytic derivative data.
#[derive(Debug, Clone)]
pub struct Immersion {
    pub domain: Arc<ModelDomain>,
    pub u: Vec<[f64; 3]>,
    pub du_z: Vec<[C64; 3]>,
    pub du_zbar: Vec<[C64; 3]>,
}

/// A holomorphic null curve sampled with its differential.
#[derive(Debug, Clone)]
pub struct NullCurve {
    pub domain: Arc<ModelDomain>,
    pub big_f: Vec<[C64; 3]>,
    pub df_z: Vec<[C64; 3]>,
    pub df_zbar: Vec<[C64; 3]>,
}

/// Integration sweep shared by the real and complex Weierstrass integrals:
/// cumulative integrals of `f_k theta` along the anchor row, then along each
/// column. Returns complex primitives `G` with `G(anchor) = 0`.
fn integrate_sweep(datum: &WeierstrassDatum, anchor: usize) -> Vec<[C64; 3]> {
    let grid = &datum.domain.grid;
    let (n_s, n_t) = (grid.n_s, grid.n_t);
    let i_a = anchor / n_t;
    let j_a = anchor % n_t;
    let mut g = vec![[C64::new(0.0, 0.0); 3]; grid.len()];

    // tangent of the t-coordinate line and of the s-coordinate line
    let dz_dt = |z: C64| -> C64 {
        match grid.kind {
            GridKind::Cartesian { .. } => I,
            GridKind::LogPolar { .. } => I * z,
        }
    };
    let dz_ds = |z: C64| -> C64 {
        match grid.kind {
            GridKind::Cartesian { .. } => C64::new(1.0, 0.0),
            GridKind::LogPolar { .. } => z,
        }
    };
    let pair = |idx: usize, v: C64| -> [C64; 3] {
        let a = datum.theta.a[idx];
        let b = datum.theta.b[idx];
        let p = a * v + b * v.conj();
        [datum.f[idx][0] * p, datum.f[idx][1] * p, datum.f[idx][2] * p]
    };

    // anchor row, t-direction
    for k in 0..3 {
        let vals: Vec<C64> = (0..n_t)
            .map(|j| {
                let idx = grid.idx(i_a, j);
                pair(idx, dz_dt(grid.node_z(idx)))[k]
            })
            .collect();
        if grid.periodic_t() {
            let (cum, _) = cumulative_periodic_spectral(&vals, 2.0 * std::f64::consts::PI);
            let base = cum[j_a];
            for j in 0..n_t {
                g[grid.idx(i_a, j)][k] = cum[j] - base;
            }
        } else {
            let len = grid.h_t() * (n_t - 1) as f64;
            let cum = cumulative(&vals, len);
            let base = cum[j_a];
            for j in 0..n_t {
                g[grid.idx(i_a, j)][k] = cum[j] - base;
            }
        }
    }

    // columns, s-direction
    let len_s = grid.h_s() * (n_s - 1) as f64;
    for j in 0..n_t {
        for k in 0..3 {
            let vals: Vec<C64> = (0..n_s)
                .map(|i| {
                    let idx = grid.idx(i, j);
                    pair(idx, dz_ds(grid.node_z(idx)))[k]
                })
                .collect();
            let cum = cumulative(&vals, len_s);
            let base = cum[i_a] - g[grid.idx(i_a, j)][k];
            for i in 0..n_s {
                g[grid.idx(i, j)][k] = cum[i] - base;
            }
        }
    }
    g
}

fn anchor_index(domain: &ModelDomain, x0: C64) -> usize {
    let mut best = 0usize;
    let mut dist = f64::INFINITY;
    for i in 0..domain.grid.len() {
        let d = (domain.grid.node_z(i) - x0).norm();
        if d < dist {
            dist = d;
            best = i;
        }
    }
    best
}

fn derivative_samples(datum: &WeierstrassDatum) -> (Vec<[C64; 3]>, Vec<[C64; 3]>) {
    let n = datum.domain.grid.len();
    let mut du_z = vec![[C64::new(0.0, 0.0); 3]; n];
    let mut du_zb = vec![[C64::new(0.0, 0.0); 3]; n];
    for i in 0..n {
        let a = datum.theta.a[i];
        let b = datum.theta.b[i];
        for k in 0..3 {
            let fa = datum.f[i][k] * a;
            let fb = datum.f[i][k] * b;
            du_z[i][k] = 0.5 * (fa + fb.conj());
            du_zb[i][k] = 0.5 * (fb + fa.conj());
        }
    }
    (du_z, du_zb)
}

/// Real-part Weierstrass integral `u = u0 + Re int f theta`, refused when a
/// basis cycle carries a real period above the exactness threshold.
pub fn integrate_cmi(
    datum: &WeierstrassDatum,
    basis: &HomologyBasis,
    x0: C64,
    u0: [f64; 3],
) -> Result<Immersion, WeierstrassError> {
    let gate = tol::EXACTNESS_REL * datum.domain.diameter();
    let periods = cycle_periods(datum, basis)?;
    for (ci, p) in periods.iter().enumerate() {
        let mag = p.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
        if mag > gate {
            return Err(WeierstrassError::PeriodNonzero { cycle: ci, magnitude: mag, tol: gate });
        }
    }
    let anchor = anchor_index(&datum.domain, x0);
    // honor u(x0) = u0 even when x0 is off-node
    let offset = match &datum.analytic {
        Some(a) => segment_integral(a, x0, datum.domain.grid.node_z(anchor)),
        None => [C64::new(0.0, 0.0); 3],
    };
    let g = integrate_sweep(datum, anchor);
    let mut u = vec![[0.0f64; 3]; g.len()];
    for (i, gi) in g.iter().enumerate() {
        for k in 0..3 {
            u[i][k] = u0[k] + offset[k].re + gi[k].re;
        }
    }
    let (du_z, du_zbar) = derivative_samples(datum);
    Ok(Immersion { domain: datum.domain.clone(), u, du_z, du_zbar })
}

/// Complex Weierstrass integral, refused when any cycle period is nonzero.
pub fn integrate_null(
    datum: &WeierstrassDatum,
    basis: &HomologyBasis,
    x0: C64,
    f0: [C64; 3],
) -> Result<NullCurve, WeierstrassError> {
    let gate = tol::EXACTNESS_REL * datum.domain.diameter();
    let periods = cycle_periods(datum, basis)?;
    for (ci, p) in periods.iter().enumerate() {
        let mag = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if mag > gate {
            return Err(WeierstrassError::PeriodNonzero { cycle: ci, magnitude: mag, tol: gate });
        }
    }
    let anchor = anchor_index(&datum.domain, x0);
    let offset = match &datum.analytic {
        Some(a) => segment_integral(a, x0, datum.domain.grid.node_z(anchor)),
        None => [C64::new(0.0, 0.0); 3],
    };
    let g = integrate_sweep(datum, anchor);
    let mut big_f = vec![[C64::new(0.0, 0.0); 3]; g.len()];
    for (i, gi) in g.iter().enumerate() {
        for k in 0..3 {
            big_f[i][k] = f0[k] + offset[k] + gi[k];
        }
    }
    let n = datum.domain.grid.len();
    let mut df_z = vec![[C64::new(0.0, 0.0); 3]; n];
    let mut df_zb = vec![[C64::new(0.0, 0.0); 3]; n];
    for i in 0..n {
        for k in 0..3 {
            df_z[i][k] = datum.f[i][k] * datum.theta.a[i];
            df_zb[i][k] = datum.f[i][k] * datum.theta.b[i];
        }
    }
    Ok(NullCurve { domain: datum.domain.clone(), big_f, df_z, df_zbar: df_zb })
}

/// mu-twisted (1,0)-derivative coefficients `A_k` with
/// `d_J u_k = A_k (dz + mu dzbar)`.
fn twisted_parts(im: &Immersion, mu: &BeltramiField, i: usize) -> [C64; 3] {
    let m = mu.samples[i];
    let den = 1.0 - m.norm_sqr();
    let mut a = [C64::new(0.0, 0.0); 3];
    for k in 0..3 {
        a[k] = (im.du_z[i][k] - m.conj() * im.du_zbar[i][k]) / den;
    }
    a
}

/// Node-wise nullity defect `|sum_k (d_J u_k)^2|` through the mu-twisted
/// Wirtinger operator.
pub fn conformality_residual(im: &Immersion, mu: &BeltramiField) -> Vec<f64> {
    (0..im.u.len())
        .map(|i| {
            let a = twisted_parts(im, mu, i);
            (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).norm()
        })
        .collect()
}

/// Node-wise magnitude of the discrete `d(d^c u)` in the mu-structure:
/// the exterior derivative of `A_k (dz + mu dzbar)` summed over components.
pub fn harmonicity_residual(im: &Immersion, mu: &BeltramiField) -> Vec<f64> {
    let grid = &im.domain.grid;
    let n = grid.len();
    let mut out = vec![0.0f64; n];
    for k in 0..3 {
        let mut alpha = vec![C64::new(0.0, 0.0); n]; // coefficient of dz
        let mut beta = vec![C64::new(0.0, 0.0); n]; // coefficient of dzbar
        for i in 0..n {
            let a = twisted_parts(im, mu, i)[k];
            alpha[i] = a;
            beta[i] = a * mu.samples[i];
        }
        let (_, alpha_zb) = grid.wirtinger(&alpha, DerivOrder::High);
        let (beta_z, _) = grid.wirtinger(&beta, DerivOrder::High);
        for i in 0..n {
            let curl = beta_z[i] - alpha_zb[i];
            out[i] += (2.0 * curl).norm_sqr();
        }
    }
    out.iter_mut().for_each(|v| *v = v.sqrt());
    out
}

/// Variance of the direction field `f / |f|` over interior nodes; zero
/// exactly for constant (flat) data, invariant under positive rescaling of
/// theta.
pub fn nonflat_score(datum: &WeierstrassDatum) -> f64 {
    let idx = datum.domain.interior_indices();
    if idx.is_empty() {
        return 0.0;
    }
    let dirs: Vec<[C64; 3]> = idx
        .iter()
        .map(|&i| {
            let c = datum.f[i];
            let n = norm3(&c);
            [c[0] / n, c[1] / n, c[2] / n]
        })
        .collect();
    let mut mean = [C64::new(0.0, 0.0); 3];
    for d in &dirs {
        for k in 0..3 {
            mean[k] += d[k];
        }
    }
    for m in mean.iter_mut() {
        *m /= dirs.len() as f64;
    }
    let mut var = 0.0;
    for d in &dirs {
        let mut s = 0.0;
        for k in 0..3 {
            s += (d[k] - mean[k]).norm_sqr();
        }
        var += s;
    }
    var / dirs.len() as f64
}

/// Refresh the derivative samples of an immersion from its values by grid
/// finite differences (used by mutation-style diagnostics on sampled data
/// without analytic provenance).
pub fn refresh_derivatives_fd(im: &mut Immersion) {
    let grid = &im.domain.grid;
    let n = grid.len();
    for k in 0..3 {
        let vals: Vec<C64> = (0..n).map(|i| C64::new(im.u[i][k], 0.0)).collect();
        let (dz, dzb) = grid.wirtinger(&vals, DerivOrder::High);
        for i in 0..n {
            im.du_z[i][k] = dz[i];
            im.du_zbar[i][k] = dzb[i];
        }
    }
}

/// An immersion's pulled-back metric degeneracy margin: the smallest singular
/// value of the real 3x2 differential over interior nodes.
pub fn immersion_margin(im: &Immersion) -> f64 {
    im.domain
        .interior_indices()
        .into_iter()
        .map(|i| {
            // real differential columns: du/dx = du_z + du_zbar,
            // du/dy = i (du_z - du_zbar)
            let mut gxx = 0.0;
            let mut gxy = 0.0;
            let mut gyy = 0.0;
            for k in 0..3 {
                let ux = (im.du_z[i][k] + im.du_zbar[i][k]).re;
                let uy = (I * (im.du_z[i][k] - im.du_zbar[i][k])).re;
                gxx += ux * ux;
                gxy += ux * uy;
                gyy += uy * uy;
            }
            // smallest singular value^2 of the differential
            let tr = gxx + gyy;
            let det = gxx * gyy - gxy * gxy;
            let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
            (tr / 2.0 - disc).max(0.0).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Hausdorff-style distance between the sampled images of two immersions
/// restricted to interior nodes (used by image-equality diagnostics).
pub fn image_distance(a: &Immersion, b: &Immersion) -> f64 {
    let pa: Vec<[f64; 3]> = a.domain.interior_indices().iter().map(|&i| a.u[i]).collect();
    let pb: Vec<[f64; 3]> = b.domain.interior_indices().iter().map(|&i| b.u[i]).collect();
    let one_sided = |xs: &[[f64; 3]], ys: &[[f64; 3]]| -> f64 {
        xs.iter()
            .map(|x| {
                ys.iter()
                    .map(|y| {
                        ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2))
                            .sqrt()
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    one_sided(&pa, &pb).max(one_sided(&pb, &pa))
}

/// Real 3-vector distance helper for flux comparisons.
pub fn flux_distance(a: &FluxHom, b: &FluxHom) -> f64 {
    a.0.iter()
        .zip(&b.0)
        .map(|(x, y)| {
            ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt()
        })
        .fold(0.0, f64::max)
}

/// Complex line integral of `f theta` of an analytic datum along the
/// straight segment from `from_z` to `to_z` (composite 8-panel Gauss;
/// assumes the segment stays inside the domain).
pub fn segment_integral(analytic: &DatumAnalytic, from_z: C64, to_z: C64) -> [C64; 3] {
    let seg = to_z - from_z;
    let mut acc = [C64::new(0.0, 0.0); 3];
    for p in 0..8 {
        let a = p as f64 / 8.0;
        let h = 1.0 / 8.0;
        for &(x, w) in &crate::numerics::quad::GAUSS8 {
            let t = a + 0.5 * h * (x + 1.0);
            let v = analytic.ftheta_pair(from_z + seg * t, seg);
            for k in 0..3 {
                acc[k] += 0.5 * h * w * v[k];
            }
        }
    }
    acc
}
