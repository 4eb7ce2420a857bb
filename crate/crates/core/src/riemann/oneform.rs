//! Nowhere vanishing 1-forms from chart differentials, and homology bases
//! of the model domains.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::numerics::C64;

use super::beltrami::{BeltramiField, RiemannError};
use super::chart::{ChartEval, QcMap};
use super::domain::{DomainKind, ModelDomain};

/// theta = a dz + b dzbar sampled per node, with the chart evaluator kept so
/// the form can be pulled back along arbitrary arcs.
#[derive(Debug, Clone)]
pub struct OneFormSample {
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    pub chart: ChartEval,
}

impl OneFormSample {
    /// Minimum of sqrt(|a|^2+|b|^2) over nodes.
    pub fn min_magnitude(&self) -> f64 {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(a, b)| (a.norm_sqr() + b.norm_sqr()).sqrt())
            .fold(f64::INFINITY, f64::min)
    }

    /// Holomorphy residual |b - mu a| per node in the structure of `mu`.
    pub fn holomorphy_residual(&self, mu: &BeltramiField) -> Vec<f64> {
        self.a
            .iter()
            .zip(&self.b)
            .zip(&mu.samples)
            .map(|((a, b), m)| (b - m * a).norm())
            .collect()
    }

    /// (a, b) coefficients at an arbitrary point via the chart.
    pub fn eval_at(&self, z: C64) -> (C64, C64) {
        let (_, dz, dzb) = self.chart.eval_d(z);
        (dz, dzb)
    }

    /// Pairing with a tangent vector: theta(v) = a v + b conj(v).
    pub fn pair(&self, z: C64, v: C64) -> C64 {
        let (a, b) = self.eval_at(z);
        a * v + b * v.conj()
    }
}

/// theta := d phi for a solved chart phi; nonvanishing because the chart is
/// an immersive diffeomorphism, which is re-checked here.
pub fn oneform_from_chart(phi: &QcMap) -> Result<OneFormSample, RiemannError> {
    let min_jac = phi.min_interior_jacobian();
    if min_jac <= 0.0 {
        return Err(RiemannError::DegenerateJacobian { min: min_jac });
    }
    Ok(OneFormSample { a: phi.dz.clone(), b: phi.dzbar.clone(), chart: phi.eval.clone() })
}

/// One sampled homology cycle: a closed loop, optionally pinned to an exact
/// grid ring of an annulus domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cycle {
    pub points: Vec<C64>,
    pub ring_row: Option<usize>,
    pub radius: Option<f64>,
}

impl Cycle {
    pub fn is_closed(&self, tol: f64) -> bool {
        (self.points[0] - self.points[self.points.len() - 1]).norm() <= tol
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HomologyBasis {
    pub cycles: Vec<Cycle>,
    pub base_point: C64,
}

impl HomologyBasis {
    pub fn rank(&self) -> usize {
        self.cycles.len()
    }
}

/// Disc and patch: trivial. Annulus: a single counterclockwise circle on the
/// grid ring nearest the geometric mean radius, through the angle-zero node.
pub fn homology_basis(dom: &ModelDomain) -> Result<HomologyBasis, RiemannError> {
    match dom.kind {
        DomainKind::Disc { .. } | DomainKind::PlanePatch { .. } => Ok(HomologyBasis {
            cycles: Vec::new(),
            base_point: Complex64::new(0.0, 0.0),
        }),
        DomainKind::Annulus { r_in, r_out } => {
            let r_mid = (r_in * r_out).sqrt();
            Ok(annulus_basis_at(dom, r_mid))
        }
    }
}

/// Annulus basis with the cycle pinned at the grid ring nearest `r`.
pub fn annulus_basis_at(dom: &ModelDomain, r: f64) -> HomologyBasis {
    let row = dom.ring_row(r);
    let radius = dom.row_radius(row);
    let n = dom.grid.n_t;
    let mut points: Vec<C64> = (0..n)
        .map(|i_t| dom.grid.node_z(dom.grid.idx(row, i_t)))
        .collect();
    points.push(points[0]);
    let base_point = points[0];
    HomologyBasis {
        cycles: vec![Cycle { points, ring_row: Some(row), radius: Some(radius) }],
        base_point,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disc_has_no_cycles() {
        let dom = ModelDomain::disc(1.0, 32);
        let basis = homology_basis(&dom).unwrap();
        assert_eq!(basis.rank(), 0);
    }

    #[test]
    fn annulus_cycle_at_unit_radius() {
        let dom = ModelDomain::annulus(0.5, 2.0, 38, 64);
        let basis = homology_basis(&dom).unwrap();
        assert_eq!(basis.rank(), 1);
        let c = &basis.cycles[0];
        assert!(c.is_closed(1e-12));
        assert!((c.radius.unwrap() - 1.0).abs() < 0.05);
        // counterclockwise: angle increases over the first quarter
        let a0 = c.points[0].arg();
        let a1 = c.points[1].arg();
        assert!(a1 > a0);
    }
}
