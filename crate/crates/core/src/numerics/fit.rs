//! Weighted least-squares fitting of Laurent polynomials from scattered
//! complex samples, with optional pinned coefficients (used to impose exact
//! residues, hence exact cycle periods, linearly).

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use super::laurent::LaurentPoly;
use super::{powi, C64};

#[derive(Debug, Error)]
pub enum FitError {
    #[error("no samples supplied to the fit")]
    NoSamples,
    #[error("normal equations singular at degree window [{k_min}, {k_max}]")]
    Singular { k_min: i32, k_max: i32 },
}

/// One fit sample: location in the chart, target value, nonnegative weight.
pub type FitSample = (C64, C64, f64);

/// Least-squares Laurent fit over the power window `[k_min, k_max]`.
///
/// `pinned` entries fix specific coefficients exactly; their contribution is
/// moved to the right-hand side before solving. Columns are norm-equilibrated
/// to keep the Vandermonde conditioning manageable across wide radius ratios.
pub fn fit_laurent(
    samples: &[FitSample],
    k_min: i32,
    k_max: i32,
    pinned: &[(i32, C64)],
) -> Result<LaurentPoly, FitError> {
    if samples.is_empty() {
        return Err(FitError::NoSamples);
    }
    let free_ks: Vec<i32> = (k_min..=k_max)
        .filter(|k| !pinned.iter().any(|(pk, _)| pk == k))
        .collect();
    let n = samples.len();
    let m = free_ks.len();

    // Power table per sample, built incrementally from w^{k_min}.
    let mut a = DMatrix::<C64>::zeros(n, m);
    let mut b = DVector::<C64>::zeros(n);
    for (i, &(w, y, weight)) in samples.iter().enumerate() {
        let sw = weight.sqrt();
        let mut rhs = y;
        for &(pk, pc) in pinned {
            rhs -= pc * powi(w, pk);
        }
        b[i] = rhs * sw;
        let mut p = powi(w, k_min);
        let mut col = 0usize;
        for k in k_min..=k_max {
            if free_ks.get(col) == Some(&k) {
                a[(i, col)] = p * sw;
                col += 1;
            }
            p *= w;
        }
    }

    // Column equilibration.
    let mut scale = vec![1.0f64; m];
    for (j, s) in scale.iter_mut().enumerate() {
        let norm = a.column(j).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            *s = 1.0 / norm;
        }
    }
    for j in 0..m {
        let s = C64::new(scale[j], 0.0);
        for i in 0..n {
            a[(i, j)] *= s;
        }
    }

    let ah = a.adjoint();
    let gram = &ah * &a;
    let rhs = &ah * &b;
    let x = match gram.clone().cholesky() {
        Some(chol) => chol.solve(&rhs),
        None => {
            let svd = gram.svd(true, true);
            svd.solve(&rhs, 1e-14)
                .map_err(|_| FitError::Singular { k_min, k_max })?
        }
    };

    let mut coeffs = vec![C64::new(0.0, 0.0); (k_max - k_min + 1) as usize];
    for (j, &k) in free_ks.iter().enumerate() {
        coeffs[(k - k_min) as usize] = x[j] * scale[j];
    }
    for &(pk, pc) in pinned {
        if pk >= k_min && pk <= k_max {
            coeffs[(pk - k_min) as usize] = pc;
        }
    }
    Ok(LaurentPoly::new(k_min, coeffs))
}

/// Maximum weighted residual of a fitted Laurent polynomial on the samples.
pub fn fit_sup_error(poly: &LaurentPoly, samples: &[FitSample]) -> f64 {
    samples
        .iter()
        .filter(|&&(_, _, wt)| wt > 0.0)
        .map(|&(w, y, _)| (poly.eval(w) - y).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_laurent_data() {
        let truth = LaurentPoly::new(-2, vec![C64::new(0.3, -0.1), C64::new(1.0, 0.0), C64::new(0.0, 0.5), C64::new(-0.2, 0.0), C64::new(0.05, 0.02)]);
        let mut samples = Vec::new();
        for i in 0..40 {
            let r = 0.6 + 0.1 * (i % 5) as f64;
            let t = 2.0 * std::f64::consts::PI * (i as f64) / 40.0;
            let w = C64::from_polar(r, t);
            samples.push((w, truth.eval(w), 1.0));
        }
        let fit = fit_laurent(&samples, -2, 2, &[]).unwrap();
        assert!(fit_sup_error(&fit, &samples) < 1e-11);
    }

    #[test]
    fn pinned_coefficient_is_exact() {
        let truth = LaurentPoly::new(-1, vec![C64::new(2.0, 0.0), C64::new(0.0, 1.0)]);
        let mut samples = Vec::new();
        for i in 0..24 {
            let t = 2.0 * std::f64::consts::PI * (i as f64) / 24.0;
            let w = C64::from_polar(1.1, t);
            samples.push((w, truth.eval(w), 1.0));
        }
        let pin = (-1, C64::new(2.0, 0.0));
        let fit = fit_laurent(&samples, -3, 3, &[pin]).unwrap();
        assert_eq!(fit.coeff(-1), C64::new(2.0, 0.0));
        assert!(fit_sup_error(&fit, &samples) < 1e-10);
    }
}
