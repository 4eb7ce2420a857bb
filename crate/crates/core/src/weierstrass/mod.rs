//! The punctured null quadric, Weierstrass data, integration to conformal
//! minimal immersions and holomorphic null curves, flux, and validity
//! diagnostics.

pub mod datum;
pub mod export;
pub mod ops;

pub use datum::{
    bform, norm3, qform, DatumAnalytic, FiberRep, NullVector, Pinned, WeierstrassDatum,
    WeierstrassError,
};
pub use ops::{
    conformality_residual, cycle_periods, datum_from_gauss_samples, datum_from_quotient, flux,
    flux_distance, gauss_quotient, harmonicity_residual, image_distance, immersion_margin,
    integrate_cmi, integrate_null, nonflat_score, project_null, refresh_derivatives_fd,
    segment_integral, FluxHom, Immersion, NullCurve,
};

/// Standard-structure fixtures shared by tests and demos: data on disc and
/// annulus models in the reference chart (`mu = 0`, `theta = dz`).
pub mod fixtures {
    use std::sync::Arc;

    use crate::numerics::laurent::{ExpLaurent, LaurentPoly};
    use crate::numerics::C64;
    use crate::riemann::{ChartEval, ModelDomain, OneFormSample};

    use super::datum::{DatumAnalytic, FiberRep, WeierstrassDatum};

    /// theta = dz on the identity chart.
    pub fn flat_theta(domain: &ModelDomain) -> OneFormSample {
        let n = domain.grid.len();
        OneFormSample {
            a: vec![C64::new(1.0, 0.0); n],
            b: vec![C64::new(0.0, 0.0); n],
            chart: ChartEval::identity(),
        }
    }

    /// Analytic datum from a Gauss map `g = w^k exp(L)` and pinned form
    /// `a(w) dw` in the identity chart.
    pub fn analytic_datum(
        domain: Arc<ModelDomain>,
        g: ExpLaurent,
        a: LaurentPoly,
    ) -> WeierstrassDatum {
        let theta = flat_theta(&domain);
        let analytic =
            DatumAnalytic { chart: ChartEval::identity(), rep: FiberRep::OnePinned { a, psi: g.recip() } };
        WeierstrassDatum::from_analytic(domain, theta, analytic)
    }

    /// Catenoid-type datum: `g = z`, `f1 theta = dz / z` on an annulus.
    pub fn catenoid(n_rho: usize, n_theta: usize) -> WeierstrassDatum {
        let domain = Arc::new(ModelDomain::annulus(0.5, 2.0, n_rho, n_theta));
        analytic_datum(
            domain,
            ExpLaurent::new(1, LaurentPoly::zero()),
            LaurentPoly::monomial(-1, C64::new(1.0, 0.0)),
        )
    }

    /// Helicoid-type datum: `g = z`, `f1 theta = i dz / z` on an annulus.
    pub fn helicoid(n_rho: usize, n_theta: usize) -> WeierstrassDatum {
        let domain = Arc::new(ModelDomain::annulus(0.5, 2.0, n_rho, n_theta));
        analytic_datum(
            domain,
            ExpLaurent::new(1, LaurentPoly::zero()),
            LaurentPoly::monomial(-1, C64::new(0.0, 1.0)),
        )
    }

    /// Flat-plane datum: constant `f = (1, i, 0)`, `theta = dz` on a disc.
    pub fn plane(n: usize) -> WeierstrassDatum {
        let domain = Arc::new(ModelDomain::disc(1.0, n));
        // g = i gives (1, i, 0): (g - 1/g)/2 = (i + i)/2... see mod tests
        analytic_datum(
            domain,
            ExpLaurent::constant(C64::new(0.0, 1.0)),
            LaurentPoly::constant(C64::new(1.0, 0.0)),
        )
    }
}
