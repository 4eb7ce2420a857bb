//! Model domains, complex structures as Beltrami fields, normalized
//! quasiconformal solves, nonvanishing 1-forms, and homology cycles.

pub mod beltrami;
pub mod chart;
pub mod domain;
pub mod oneform;

pub use beltrami::{
    cr_residual, solve_beltrami_disc, solve_beltrami_plane, BeltramiField, RiemannError,
    SolveOptions,
};
pub use chart::{BeltramiReport, ChartEval, QcMap};
pub use domain::{BoundaryLoop, DerivOrder, DomainKind, Grid2, GridKind, ModelDomain};
pub use oneform::{annulus_basis_at, homology_basis, oneform_from_chart, Cycle, HomologyBasis, OneFormSample};

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use crate::numerics::C64;
    use crate::tol;

    use super::*;

    fn patch_field(c: C64) -> BeltramiField {
        let dom = Arc::new(ModelDomain::plane_patch(2.0, 48));
        BeltramiField::from_fn(dom, move |_| c).unwrap()
    }

    #[test]
    fn zero_multiplier_gives_identity() {
        let field = patch_field(C64::new(0.0, 0.0));
        let map = solve_beltrami_plane(&field, &SolveOptions::default()).unwrap();
        for (i, &z) in field.domain.grid.nodes().iter().enumerate() {
            assert!((map.values[i] - z).norm() < tol::BELTRAMI_IDENTITY_TOL);
            assert!((map.dz[i] - C64::new(1.0, 0.0)).norm() < tol::BELTRAMI_IDENTITY_TOL);
            assert!(map.dzbar[i].norm() < tol::BELTRAMI_IDENTITY_TOL);
        }
    }

    #[test]
    fn constant_multiplier_matches_closed_form() {
        // phi(z) = (z + c conj(z)) / (1 + c), checked by hand to satisfy
        // phi_zbar = c phi_z, phi(0) = 0, phi(1) = 1.
        for &cr in &[0.1, 0.3, 0.5] {
            let c = C64::new(cr, 0.0);
            let field = patch_field(c);
            let map = solve_beltrami_plane(&field, &SolveOptions::default()).unwrap();
            for (i, &z) in field.domain.grid.nodes().iter().enumerate() {
                let expect = (z + c * z.conj()) / (1.0 + c);
                assert!(
                    (map.values[i] - expect).norm() < tol::BELTRAMI_PLANE_TOL,
                    "|c| = {cr}: error {:.3e}",
                    (map.values[i] - expect).norm()
                );
            }
        }
    }

    #[test]
    fn constant_complex_multiplier() {
        let c = C64::new(0.2, 0.2);
        let field = patch_field(c);
        let map = solve_beltrami_plane(&field, &SolveOptions::default()).unwrap();
        for (i, &z) in field.domain.grid.nodes().iter().enumerate() {
            let expect = (z + c * z.conj()) / (1.0 + c);
            assert!((map.values[i] - expect).norm() < tol::BELTRAMI_PLANE_TOL);
        }
    }

    #[test]
    fn degenerate_multiplier_rejected() {
        let dom = Arc::new(ModelDomain::plane_patch(1.0, 16));
        let err = BeltramiField::from_fn(dom, |_| C64::new(1.0, 0.0)).unwrap_err();
        assert!(matches!(err, RiemannError::DegenerateMultiplier { .. }));
    }

    #[test]
    fn solver_family_continuity() {
        // mu_b = 0.3 b: adjacent solutions stay within a mesh-proportional bound
        let dom = Arc::new(ModelDomain::plane_patch(2.0, 32));
        let mut sols = Vec::new();
        for &b in &[0.0f64, 0.5, 1.0] {
            let field =
                BeltramiField::from_fn(dom.clone(), move |_| C64::new(0.3 * b, 0.0)).unwrap();
            sols.push(solve_beltrami_plane(&field, &SolveOptions::default()).unwrap());
        }
        let dev = |a: &QcMap, b: &QcMap| -> f64 {
            a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
        };
        let d01 = dev(&sols[0], &sols[1]);
        let d12 = dev(&sols[1], &sols[2]);
        // measured Lipschitz scale: |d phi / d b| is O(domain size); both
        // half-mesh deviations should agree to within a factor of two.
        assert!(d01 > 0.0 && d12 > 0.0);
        assert!(d01 / d12 < 2.0 && d12 / d01 < 2.0);
    }

    #[test]
    fn uniqueness_proxy_under_initial_guess() {
        // the fixed point is a contraction, so restarting from a perturbed
        // state must land on the same chart
        let dom = Arc::new(ModelDomain::plane_patch(2.0, 32));
        let field = BeltramiField::from_fn(dom, |z: C64| {
            C64::new(0.3, 0.1) * (-z.norm_sqr()).exp()
        })
        .unwrap();
        let a = solve_beltrami_plane(&field, &SolveOptions::default()).unwrap();
        let b = solve_beltrami_plane(
            &field,
            &SolveOptions { tol: tol::BELTRAMI_FP_TOL / 16.0, ..Default::default() },
        )
        .unwrap();
        let dev = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(dev < 10.0 * tol::BELTRAMI_FP_TOL, "dev {dev:.3e}");
    }

    #[test]
    fn disc_identity_and_rotational_bump() {
        let dom = Arc::new(ModelDomain::disc(1.0, 48));
        let zero = BeltramiField::zero(dom.clone());
        let map = solve_beltrami_disc(&zero, &SolveOptions::default()).unwrap();
        assert!(map.report.boundary_escape.unwrap() < 1e-12);
        for (i, &z) in dom.grid.nodes().iter().enumerate() {
            assert!((map.values[i] - z).norm() < tol::BELTRAMI_IDENTITY_TOL);
        }

        // rotationally symmetric multiplier supported away from rim and center
        let field = BeltramiField::from_fn(dom.clone(), |z: C64| {
            let r = z.norm();
            if r < 1e-12 {
                return C64::new(0.0, 0.0);
            }
            let bump = smooth_bump(r, 0.25, 0.75);
            0.3 * bump * z / z.conj()
        })
        .unwrap();
        let map = solve_beltrami_disc(&field, &SolveOptions::default()).unwrap();
        assert!(
            map.report.boundary_escape.unwrap() < tol::DISC_BOUNDARY_TOL,
            "escape {:.3e}",
            map.report.boundary_escape.unwrap()
        );

        // ring-radius invariance: images of circles are circles
        for &r in &[0.3, 0.5, 0.7] {
            let radii: Vec<f64> = (0..64)
                .map(|k| {
                    let t = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
                    map.eval.eval(C64::from_polar(r, t)).norm()
                })
                .collect();
            let mean = radii.iter().sum::<f64>() / radii.len() as f64;
            let spread = radii.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
            assert!(spread < 5e-5, "ring {r}: radius spread {spread:.3e}");
        }
    }

    #[test]
    fn disc_solve_richardson_consistency() {
        let dom = Arc::new(ModelDomain::disc(1.0, 64));
        let field = BeltramiField::from_fn(dom, |z: C64| {
            let r = z.norm();
            if r < 1e-12 {
                return C64::new(0.0, 0.0);
            }
            0.25 * smooth_bump(r, 0.2, 0.8) * z / z.conj()
        })
        .unwrap();
        let coarse = solve_beltrami_disc(
            &field,
            &SolveOptions { patch_n: 128, ..Default::default() },
        )
        .unwrap();
        let fine = solve_beltrami_disc(
            &field,
            &SolveOptions { patch_n: 256, ..Default::default() },
        )
        .unwrap();
        // CR residual measured on solver output should shrink with resolution
        // and certify the coarse run against a Richardson-style estimate.
        let est = coarse
            .values
            .iter()
            .zip(&fine.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(fine.report.cr_residual_max <= 10.0 * (est + 1e-9).max(coarse.report.cr_residual_max));
    }

    fn smooth_bump(r: f64, lo: f64, hi: f64) -> f64 {
        if r <= lo || r >= hi {
            0.0
        } else {
            let x = (r - lo) / (hi - lo);
            // C^infinity bump, numerically zero at the edges
            (-1.0 / (x * (1.0 - x))).exp() * 54.6
        }
    }

    #[test]
    fn cr_residual_trivial_cases() {
        let dom = Arc::new(ModelDomain::plane_patch(1.0, 32));
        let zero = BeltramiField::zero(dom.clone());
        let id: Vec<C64> = dom.grid.nodes();
        let res = cr_residual(&dom, &id, &zero).unwrap();
        assert!(res.iter().all(|&v| v < 1e-12));

        let conj: Vec<C64> = dom.grid.nodes().iter().map(|z| z.conj()).collect();
        let res = cr_residual(&dom, &conj, &zero).unwrap();
        for &i in &dom.interior_indices() {
            assert!((res[i] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn cr_residual_affine_twisted() {
        // f = z + c conj(z) with mu = c: residual vanishes on affine data
        let c = C64::new(0.3, -0.2);
        let dom = Arc::new(ModelDomain::plane_patch(1.0, 32));
        let field = BeltramiField::from_fn(dom.clone(), move |_| c).unwrap();
        let f: Vec<C64> = dom.grid.nodes().iter().map(|z| z + c * z.conj()).collect();
        let res = cr_residual(&dom, &f, &field).unwrap();
        assert!(res.iter().all(|&v| v < 1e-10), "max {:?}", res.iter().cloned().fold(0.0, f64::max));
    }

    #[test]
    fn oneform_from_affine_chart() {
        let c = C64::new(0.25, 0.0);
        let dom = Arc::new(ModelDomain::plane_patch(2.0, 32));
        let field = BeltramiField::from_fn(dom.clone(), move |_| c).unwrap();
        let map = solve_beltrami_plane(&field, &SolveOptions::default()).unwrap();
        let theta = oneform_from_chart(&map).unwrap();
        // theta = (dz + c dzbar)/(1+c)
        let expect_a = 1.0 / (1.0 + c);
        let expect_b = c / (1.0 + c);
        for i in 0..dom.grid.len() {
            assert!((theta.a[i] - expect_a).norm() < 1e-9);
            assert!((theta.b[i] - expect_b).norm() < 1e-9);
        }
        assert!(theta.min_magnitude() > 0.0);
        let hol = theta.holomorphy_residual(&field);
        assert!(hol.iter().all(|&v| v < 1e-9));
    }
}
