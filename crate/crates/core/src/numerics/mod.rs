//! Shared numerical kernels: Laurent calculus, weighted least squares,
//! quadrature, damped Gauss-Newton, finite differences, 2-D FFT.

pub mod fd;
pub mod fft2;
pub mod fit;
pub mod interp;
pub mod laurent;
pub mod newton;
pub mod quad;

pub type C64 = num_complex::Complex64;

use num_complex::Complex64;

/// i as a constant.
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c64(re: f64, im: f64) -> C64 {
    Complex64::new(re, im)
}

/// Integer power of a complex number, negative exponents allowed.
pub fn powi(w: C64, k: i32) -> C64 {
    if k == 0 {
        return C64::new(1.0, 0.0);
    }
    let base = if k > 0 { w } else { 1.0 / w };
    let mut acc = C64::new(1.0, 0.0);
    for _ in 0..k.unsigned_abs() {
        acc *= base;
    }
    acc
}
