//! Minimal 2-D FFT on row-major complex grids, built on rustfft.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::C64;

pub struct Fft2 {
    pub nx: usize,
    pub ny: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(nx: usize, ny: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            nx,
            ny,
            fwd_x: planner.plan_fft_forward(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_x: planner.plan_fft_inverse(nx),
            inv_y: planner.plan_fft_inverse(ny),
        }
    }

    /// In-place forward transform of `data[iy * nx + ix]` (unnormalized).
    pub fn forward(&self, data: &mut [C64]) {
        assert_eq!(data.len(), self.nx * self.ny);
        for row in data.chunks_exact_mut(self.nx) {
            self.fwd_x.process(row);
        }
        let mut col = vec![C64::new(0.0, 0.0); self.ny];
        for ix in 0..self.nx {
            for iy in 0..self.ny {
                col[iy] = data[iy * self.nx + ix];
            }
            self.fwd_y.process(&mut col);
            for iy in 0..self.ny {
                data[iy * self.nx + ix] = col[iy];
            }
        }
    }

    /// In-place inverse transform, normalized so `inverse(forward(x)) == x`.
    pub fn inverse(&self, data: &mut [C64]) {
        assert_eq!(data.len(), self.nx * self.ny);
        for row in data.chunks_exact_mut(self.nx) {
            self.inv_x.process(row);
        }
        let mut col = vec![C64::new(0.0, 0.0); self.ny];
        for ix in 0..self.nx {
            for iy in 0..self.ny {
                col[iy] = data[iy * self.nx + ix];
            }
            self.inv_y.process(&mut col);
            for iy in 0..self.ny {
                data[iy * self.nx + ix] = col[iy];
            }
        }
        let scale = 1.0 / (self.nx * self.ny) as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }

    /// Signed frequency index for bin `j` along an axis of length `n`.
    pub fn freq(j: usize, n: usize) -> i64 {
        if j <= n / 2 {
            j as i64
        } else {
            j as i64 - n as i64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let (nx, ny) = (16, 8);
        let fft = Fft2::new(nx, ny);
        let orig: Vec<C64> = (0..nx * ny)
            .map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut data = orig.clone();
        fft.forward(&mut data);
        fft.inverse(&mut data);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
