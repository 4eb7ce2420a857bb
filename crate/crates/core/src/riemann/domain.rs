//! Model domains: disc, annulus and plane patch, each with a reference-chart
//! sample lattice and sampled boundary loops. Cartesian lattices serve the
//! disc and the plane patch; the annulus uses a log-polar lattice so that
//! rings are exact sample rows (contour quadrature then has spectral
//! accuracy) and the radial coordinate is uniform in log r.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::numerics::{fd, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DomainKind {
    Disc { radius: f64 },
    Annulus { r_in: f64, r_out: f64 },
    PlanePatch { half_width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GridKind {
    /// z = s + i t over the rectangle [s0,s1] x [t0,t1].
    Cartesian { s0: f64, s1: f64, t0: f64, t1: f64 },
    /// z = exp(s + i t), s = log r in [s0,s1], t = angle (periodic).
    LogPolar { s0: f64, s1: f64 },
}

/// Tensor sample lattice; node index is `i_s * n_t + i_t` so angular rows are
/// contiguous.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Grid2 {
    pub kind: GridKind,
    pub n_s: usize,
    pub n_t: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivOrder {
    /// Plain second-order centered differences.
    Centered2,
    /// Sixth-order radial stencils and spectral angular derivatives.
    High,
}

impl Grid2 {
    pub fn len(&self) -> usize {
        self.n_s * self.n_t
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn idx(&self, i_s: usize, i_t: usize) -> usize {
        i_s * self.n_t + i_t
    }

    pub fn s_value(&self, i_s: usize) -> f64 {
        let (s0, s1) = match self.kind {
            GridKind::Cartesian { s0, s1, .. } => (s0, s1),
            GridKind::LogPolar { s0, s1 } => (s0, s1),
        };
        s0 + (s1 - s0) * i_s as f64 / (self.n_s - 1) as f64
    }

    pub fn t_value(&self, i_t: usize) -> f64 {
        match self.kind {
            GridKind::Cartesian { t0, t1, .. } => {
                t0 + (t1 - t0) * i_t as f64 / (self.n_t - 1) as f64
            }
            GridKind::LogPolar { .. } => 2.0 * std::f64::consts::PI * i_t as f64 / self.n_t as f64,
        }
    }

    pub fn h_s(&self) -> f64 {
        (self.s_value(self.n_s - 1) - self.s_value(0)) / (self.n_s - 1) as f64
    }

    pub fn h_t(&self) -> f64 {
        match self.kind {
            GridKind::Cartesian { t0, t1, .. } => (t1 - t0) / (self.n_t - 1) as f64,
            GridKind::LogPolar { .. } => 2.0 * std::f64::consts::PI / self.n_t as f64,
        }
    }

    pub fn periodic_t(&self) -> bool {
        matches!(self.kind, GridKind::LogPolar { .. })
    }

    pub fn node_z(&self, idx: usize) -> C64 {
        let i_s = idx / self.n_t;
        let i_t = idx % self.n_t;
        let s = self.s_value(i_s);
        let t = self.t_value(i_t);
        match self.kind {
            GridKind::Cartesian { .. } => Complex64::new(s, t),
            GridKind::LogPolar { .. } => Complex64::from_polar(s.exp(), t),
        }
    }

    pub fn nodes(&self) -> Vec<C64> {
        (0..self.len()).map(|i| self.node_z(i)).collect()
    }

    /// Wirtinger derivatives (d/dz, d/dzbar) of a sampled field.
    pub fn wirtinger(&self, values: &[C64], order: DerivOrder) -> (Vec<C64>, Vec<C64>) {
        assert_eq!(values.len(), self.len(), "field/grid size mismatch");
        let n = self.len();
        let mut d_s = vec![C64::new(0.0, 0.0); n];
        let mut d_t = vec![C64::new(0.0, 0.0); n];

        // along t (contiguous rows)
        for i_s in 0..self.n_s {
            let row = &values[i_s * self.n_t..(i_s + 1) * self.n_t];
            let dr: Vec<C64> = if self.periodic_t() {
                match order {
                    DerivOrder::High => {
                        fd::deriv_periodic_spectral(row, 2.0 * std::f64::consts::PI)
                    }
                    DerivOrder::Centered2 => periodic_centered2(row, self.h_t()),
                }
            } else {
                match order {
                    DerivOrder::High => fd::deriv_centered6(row, self.h_t()),
                    DerivOrder::Centered2 => fd::deriv_centered2(row, self.h_t()),
                }
            };
            d_t[i_s * self.n_t..(i_s + 1) * self.n_t].copy_from_slice(&dr);
        }

        // along s (strided columns)
        let mut col = vec![C64::new(0.0, 0.0); self.n_s];
        for i_t in 0..self.n_t {
            for i_s in 0..self.n_s {
                col[i_s] = values[self.idx(i_s, i_t)];
            }
            let dc = match order {
                DerivOrder::High => fd::deriv_centered6(&col, self.h_s()),
                DerivOrder::Centered2 => fd::deriv_centered2(&col, self.h_s()),
            };
            for i_s in 0..self.n_s {
                d_s[self.idx(i_s, i_t)] = dc[i_s];
            }
        }

        let mut dz = vec![C64::new(0.0, 0.0); n];
        let mut dzb = vec![C64::new(0.0, 0.0); n];
        match self.kind {
            GridKind::Cartesian { .. } => {
                for i in 0..n {
                    dz[i] = 0.5 * (d_s[i] - crate::numerics::I * d_t[i]);
                    dzb[i] = 0.5 * (d_s[i] + crate::numerics::I * d_t[i]);
                }
            }
            GridKind::LogPolar { .. } => {
                for i in 0..n {
                    let z = self.node_z(i);
                    dz[i] = (d_s[i] - crate::numerics::I * d_t[i]) / (2.0 * z);
                    dzb[i] = (d_s[i] + crate::numerics::I * d_t[i]) / (2.0 * z.conj());
                }
            }
        }
        (dz, dzb)
    }
}

fn periodic_centered2(row: &[C64], h: f64) -> Vec<C64> {
    let n = row.len();
    (0..n)
        .map(|i| (row[(i + 1) % n] - row[(i + n - 1) % n]) / (2.0 * h))
        .collect()
}

/// A closed sampled loop; the first sample is repeated at the end.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryLoop {
    pub points: Vec<C64>,
}

impl BoundaryLoop {
    pub fn circle(center: C64, radius: f64, n: usize, counterclockwise: bool) -> Self {
        let sign = if counterclockwise { 1.0 } else { -1.0 };
        let points = (0..=n)
            .map(|k| {
                let t = sign * 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                center + Complex64::from_polar(radius, t)
            })
            .collect();
        Self { points }
    }

    pub fn is_closed(&self, tol: f64) -> bool {
        (self.points[0] - self.points[self.points.len() - 1]).norm() <= tol
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelDomain {
    pub kind: DomainKind,
    pub grid: Grid2,
    pub boundary: Vec<BoundaryLoop>,
}

impl ModelDomain {
    /// Disc of the given radius on a Cartesian lattice covering a 6% margin
    /// beyond the closed disc.
    pub fn disc(radius: f64, n: usize) -> Self {
        assert!(radius > 0.0 && n >= 8);
        let pad = 1.06 * radius;
        let grid = Grid2 {
            kind: GridKind::Cartesian { s0: -pad, s1: pad, t0: -pad, t1: pad },
            n_s: n,
            n_t: n,
        };
        let boundary = vec![BoundaryLoop::circle(Complex64::new(0.0, 0.0), radius, 512, true)];
        Self { kind: DomainKind::Disc { radius }, grid, boundary }
    }

    /// Annulus r_in < |z| < r_out on a log-polar lattice with three pad rows
    /// beyond each rim, arranged so that both rims are exact rows.
    pub fn annulus(r_in: f64, r_out: f64, n_rho: usize, n_theta: usize) -> Self {
        assert!(0.0 < r_in && r_in < r_out);
        assert!(n_rho >= 16 && n_theta >= 16);
        let core = n_rho - 6;
        let h = (r_out.ln() - r_in.ln()) / (core - 1) as f64;
        let s0 = r_in.ln() - 3.0 * h;
        let s1 = r_out.ln() + 3.0 * h;
        let grid = Grid2 { kind: GridKind::LogPolar { s0, s1 }, n_s: n_rho, n_t: n_theta };
        let boundary = vec![
            BoundaryLoop::circle(Complex64::new(0.0, 0.0), r_out, n_theta, true),
            BoundaryLoop::circle(Complex64::new(0.0, 0.0), r_in, n_theta, false),
        ];
        Self { kind: DomainKind::Annulus { r_in, r_out }, grid, boundary }
    }

    /// Square patch [-w, w]^2.
    pub fn plane_patch(half_width: f64, n: usize) -> Self {
        assert!(half_width > 0.0 && n >= 8);
        let grid = Grid2 {
            kind: GridKind::Cartesian { s0: -half_width, s1: half_width, t0: -half_width, t1: half_width },
            n_s: n,
            n_t: n,
        };
        let w = half_width;
        let corners = [
            Complex64::new(w, -w),
            Complex64::new(w, w),
            Complex64::new(-w, w),
            Complex64::new(-w, -w),
            Complex64::new(w, -w),
        ];
        let mut points = Vec::new();
        for seg in corners.windows(2) {
            for k in 0..128 {
                points.push(seg[0] + (seg[1] - seg[0]) * (k as f64 / 128.0));
            }
        }
        points.push(corners[0]);
        Self {
            kind: DomainKind::PlanePatch { half_width },
            grid,
            boundary: vec![BoundaryLoop { points }],
        }
    }

    /// Whether z lies in the closed domain (within `tol`).
    pub fn contains(&self, z: C64, tol: f64) -> bool {
        match self.kind {
            DomainKind::Disc { radius } => z.norm() <= radius + tol,
            DomainKind::Annulus { r_in, r_out } => {
                let r = z.norm();
                r >= r_in - tol && r <= r_out + tol
            }
            DomainKind::PlanePatch { half_width } => {
                z.re.abs() <= half_width + tol && z.im.abs() <= half_width + tol
            }
        }
    }

    /// Node indices inside the closed domain.
    pub fn interior_indices(&self) -> Vec<usize> {
        (0..self.grid.len()).filter(|&i| self.contains(self.grid.node_z(i), 0.0)).collect()
    }

    /// Node indices strictly inside, margin `m` away from the rim (for
    /// residual reports that avoid one-sided stencils).
    pub fn deep_interior_indices(&self, m: f64) -> Vec<usize> {
        (0..self.grid.len())
            .filter(|&i| {
                let z = self.grid.node_z(i);
                match self.kind {
                    DomainKind::Disc { radius } => z.norm() <= radius - m,
                    DomainKind::Annulus { r_in, r_out } => {
                        let r = z.norm();
                        r >= r_in * (1.0 + m) && r <= r_out * (1.0 - m)
                    }
                    DomainKind::PlanePatch { half_width } => {
                        z.re.abs() <= half_width - m && z.im.abs() <= half_width - m
                    }
                }
            })
            .collect()
    }

    pub fn diameter(&self) -> f64 {
        match self.kind {
            DomainKind::Disc { radius } => 2.0 * radius,
            DomainKind::Annulus { r_out, .. } => 2.0 * r_out,
            DomainKind::PlanePatch { half_width } => 2.0 * std::f64::consts::SQRT_2 * half_width,
        }
    }

    /// For annuli: the grid row index whose radius is closest to `r`.
    pub fn ring_row(&self, r: f64) -> usize {
        let target = r.ln();
        let mut best = 0usize;
        let mut dist = f64::INFINITY;
        for i_s in 0..self.grid.n_s {
            let d = (self.grid.s_value(i_s) - target).abs();
            if d < dist {
                dist = d;
                best = i_s;
            }
        }
        best
    }

    /// Radius of grid row `i_s` (annulus grids).
    pub fn row_radius(&self, i_s: usize) -> f64 {
        self.grid.s_value(i_s).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annulus_rims_are_grid_rows() {
        let dom = ModelDomain::annulus(0.5, 2.0, 38, 64);
        let row_in = dom.ring_row(0.5);
        let row_out = dom.ring_row(2.0);
        assert!((dom.row_radius(row_in) - 0.5).abs() < 1e-12);
        assert!((dom.row_radius(row_out) - 2.0).abs() < 1e-12);
        assert_eq!(row_in, 3);
        assert_eq!(row_out, dom.grid.n_s - 4);
    }

    #[test]
    fn wirtinger_on_holomorphic_data() {
        // f(z) = z^2 is holomorphic: dzbar ~ 0, dz = 2z
        for dom in [ModelDomain::disc(1.0, 48), ModelDomain::annulus(0.5, 2.0, 40, 64)] {
            let vals: Vec<C64> = dom.grid.nodes().iter().map(|z| z * z).collect();
            let (dz, dzb) = dom.grid.wirtinger(&vals, DerivOrder::High);
            for &i in dom.deep_interior_indices(0.05).iter() {
                let z = dom.grid.node_z(i);
                assert!((dz[i] - 2.0 * z).norm() < 1e-7, "dz error {}", (dz[i] - 2.0 * z).norm());
                assert!(dzb[i].norm() < 1e-7);
            }
        }
    }

    #[test]
    fn wirtinger_on_antiholomorphic_data() {
        // Cartesian grid: conj(z) is affine in (x, y), so centered
        // differences are exact.
        let dom = ModelDomain::plane_patch(1.5, 32);
        let vals: Vec<C64> = dom.grid.nodes().iter().map(|z| z.conj()).collect();
        let (dz, dzb) = dom.grid.wirtinger(&vals, DerivOrder::Centered2);
        for &i in dom.deep_interior_indices(0.05).iter() {
            assert!(dz[i].norm() < 1e-12);
            assert!((dzb[i] - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
        // Log-polar grid: same field through the polar chain rule, high order.
        let dom = ModelDomain::annulus(0.5, 2.0, 40, 64);
        let vals: Vec<C64> = dom.grid.nodes().iter().map(|z| z.conj()).collect();
        let (dz, dzb) = dom.grid.wirtinger(&vals, DerivOrder::High);
        for &i in dom.deep_interior_indices(0.05).iter() {
            assert!(dz[i].norm() < 1e-6);
            assert!((dzb[i] - C64::new(1.0, 0.0)).norm() < 1e-6);
        }
    }

    #[test]
    fn boundary_loops_closed() {
        let dom = ModelDomain::annulus(0.5, 2.0, 32, 64);
        for l in &dom.boundary {
            assert!(l.is_closed(1e-12));
        }
    }
}
