//! Laurent polynomials and nonvanishing exp-of-Laurent functions on annular
//! charts. These are the closed-form backbone of every holomorphic field in
//! the pipeline: membership in the null quadric and nonvanishing are
//! structural, never enforced by projection after the fact.

use super::{powi, C64};

/// `sum_{k=k_min}^{k_min+coeffs.len()-1} coeffs[k-k_min] * w^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentPoly {
    pub k_min: i32,
    pub coeffs: Vec<C64>,
}

impl LaurentPoly {
    pub fn new(k_min: i32, coeffs: Vec<C64>) -> Self {
        assert!(!coeffs.is_empty(), "empty Laurent polynomial");
        Self { k_min, coeffs }
    }

    pub fn zero() -> Self {
        Self::new(0, vec![C64::new(0.0, 0.0)])
    }

    pub fn constant(c: C64) -> Self {
        Self::new(0, vec![c])
    }

    /// Single term c * w^k.
    pub fn monomial(k: i32, c: C64) -> Self {
        Self::new(k, vec![c])
    }

    pub fn k_max(&self) -> i32 {
        self.k_min + self.coeffs.len() as i32 - 1
    }

    pub fn coeff(&self, k: i32) -> C64 {
        if k < self.k_min || k > self.k_max() {
            C64::new(0.0, 0.0)
        } else {
            self.coeffs[(k - self.k_min) as usize]
        }
    }

    pub fn eval(&self, w: C64) -> C64 {
        // Horner on the nonnegative part, Horner in 1/w on the principal part.
        let mut plus = C64::new(0.0, 0.0);
        let mut minus = C64::new(0.0, 0.0);
        let k_max = self.k_max();
        if k_max >= 0 {
            for k in (0.max(self.k_min)..=k_max).rev() {
                plus = plus * w + self.coeff(k);
            }
        }
        if self.k_min < 0 {
            let winv = 1.0 / w;
            for k in self.k_min..=(-1).min(k_max) {
                minus = minus * winv + self.coeff(k);
            }
            // minus = c_{k_min} x^{|k_min|-1} + ... + c_{-1} in x = 1/w; one
            // more factor of x lands every term on its true power.
            minus *= winv;
        }
        plus + minus
    }

    pub fn deriv(&self) -> LaurentPoly {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = self.k_min + i as i32;
            coeffs.push(*c * C64::new(k as f64, 0.0));
        }
        LaurentPoly::new(self.k_min - 1, coeffs)
    }

    /// Antiderivative split as (Laurent part, residue), where
    /// `d/dw [part(w) + residue*Log w] = self`.
    pub fn primitive(&self) -> (LaurentPoly, C64) {
        let mut residue = C64::new(0.0, 0.0);
        let mut k_min = self.k_min + 1;
        if self.k_min <= -1 && self.k_max() >= -1 {
            // skip the w^{-1} slot
        }
        let mut coeffs = Vec::new();
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = self.k_min + i as i32;
            if k == -1 {
                residue = *c;
                continue;
            }
            let v = *c / C64::new((k + 1) as f64, 0.0);
            if first {
                k_min = k + 1;
                first = false;
            }
            coeffs.push(v);
            // a skipped w^{-1} slot leaves a hole; fill with zero to stay dense
            if k == -2 && self.k_max() >= 0 {
                coeffs.push(C64::new(0.0, 0.0)); // the w^0 slot fed by k=-1 is void
            }
        }
        if coeffs.is_empty() {
            coeffs.push(C64::new(0.0, 0.0));
            k_min = 0;
        }
        (LaurentPoly::new(k_min, coeffs), residue)
    }

    pub fn add(&self, other: &LaurentPoly) -> LaurentPoly {
        let k_min = self.k_min.min(other.k_min);
        let k_max = self.k_max().max(other.k_max());
        let mut coeffs = vec![C64::new(0.0, 0.0); (k_max - k_min + 1) as usize];
        for (i, c) in coeffs.iter_mut().enumerate() {
            let k = k_min + i as i32;
            *c = self.coeff(k) + other.coeff(k);
        }
        LaurentPoly::new(k_min, coeffs)
    }

    pub fn scale(&self, s: C64) -> LaurentPoly {
        LaurentPoly::new(self.k_min, self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Nonvanishing holomorphic function `w^winding * exp(log_part(w))` on an
/// annular chart. Products and reciprocals stay in the class, which is what
/// keeps multiplier pipelines free of accidental zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpLaurent {
    pub winding: i32,
    pub log_part: LaurentPoly,
}

impl ExpLaurent {
    pub fn new(winding: i32, log_part: LaurentPoly) -> Self {
        Self { winding, log_part }
    }

    pub fn one() -> Self {
        Self::new(0, LaurentPoly::zero())
    }

    pub fn constant(c: C64) -> Self {
        Self::new(0, LaurentPoly::constant(c.ln()))
    }

    pub fn eval(&self, w: C64) -> C64 {
        powi(w, self.winding) * self.log_part.eval(w).exp()
    }

    /// f'(w) / f(w) = winding/w + log_part'(w).
    pub fn log_deriv(&self) -> LaurentPoly {
        let d = self.log_part.deriv();
        d.add(&LaurentPoly::monomial(-1, C64::new(self.winding as f64, 0.0)))
    }

    pub fn mul(&self, other: &ExpLaurent) -> ExpLaurent {
        ExpLaurent::new(self.winding + other.winding, self.log_part.add(&other.log_part))
    }

    pub fn recip(&self) -> ExpLaurent {
        ExpLaurent::new(-self.winding, self.log_part.scale(C64::new(-1.0, 0.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eval_matches_direct_sum() {
        let p = LaurentPoly::new(-2, vec![C64::new(1.0, 0.5), C64::new(0.0, -1.0), C64::new(2.0, 0.0), C64::new(0.0, 0.0), C64::new(-0.5, 0.25)]);
        let w = C64::new(0.7, -0.4);
        let direct: C64 = (0..p.coeffs.len())
            .map(|i| p.coeffs[i] * powi(w, p.k_min + i as i32))
            .sum();
        assert_relative_eq!(p.eval(w).re, direct.re, epsilon = 1e-13);
        assert_relative_eq!(p.eval(w).im, direct.im, epsilon = 1e-13);
    }

    #[test]
    fn derivative_of_monomials() {
        let p = LaurentPoly::new(-1, vec![C64::new(3.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        // p = 3/w + w; p' = -3/w^2 + 1
        let d = p.deriv();
        let w = C64::new(1.3, 0.2);
        let expect = -3.0 / (w * w) + 1.0;
        assert!((d.eval(w) - expect).norm() < 1e-13);
    }

    #[test]
    fn primitive_reconstructs_with_residue() {
        let p = LaurentPoly::new(-3, vec![C64::new(0.5, 0.0), C64::new(1.0, -2.0), C64::new(4.0, 1.0), C64::new(0.0, 3.0), C64::new(2.0, 0.0)]);
        let (prim, res) = p.primitive();
        assert!((res - p.coeff(-1)).norm() < 1e-15);
        // check d/dw (prim + res log w) == p at a few points
        for &w in &[C64::new(0.9, 0.3), C64::new(-1.1, 0.7)] {
            let d = prim.deriv().eval(w) + res / w;
            assert!((d - p.eval(w)).norm() < 1e-12, "{:?}", d - p.eval(w));
        }
    }

    #[test]
    fn exp_laurent_product_and_recip() {
        let a = ExpLaurent::new(1, LaurentPoly::new(0, vec![C64::new(0.2, 0.1), C64::new(0.0, 0.3)]));
        let b = ExpLaurent::new(-2, LaurentPoly::new(-1, vec![C64::new(0.1, 0.0), C64::new(-0.2, 0.05)]));
        let w = C64::new(0.8, -0.5);
        let prod = a.mul(&b);
        assert!((prod.eval(w) - a.eval(w) * b.eval(w)).norm() < 1e-13);
        let inv = a.recip();
        assert!((inv.eval(w) * a.eval(w) - C64::new(1.0, 0.0)).norm() < 1e-13);
    }
}
