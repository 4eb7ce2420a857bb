//! Spectral representation of a solved quasiconformal chart: an affine part
//! plus a truncated Fourier series on the solver patch. The representation
//! evaluates the chart and its Wirtinger derivatives at arbitrary points,
//! which is what lets boundary loops, homology rings and decoration arcs
//! avoid grid interpolation entirely.

use serde::{Deserialize, Serialize};

use crate::numerics::{C64, I};

use super::domain::ModelDomain;

/// phi(z) = c0 + alpha*zeta + beta*conj(zeta) + sum coef * exp(i pi (kx x + ky y)/W),
/// where zeta = pre_a * z + pre_b and (x, y) = (Re zeta, Im zeta).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChartEval {
    pub alpha: C64,
    pub beta: C64,
    pub c0: C64,
    pub half_width: f64,
    pub modes: Vec<(i32, i32, C64)>,
    pub pre_a: C64,
    pub pre_b: C64,
}

impl ChartEval {
    pub fn identity() -> Self {
        Self {
            alpha: C64::new(1.0, 0.0),
            beta: C64::new(0.0, 0.0),
            c0: C64::new(0.0, 0.0),
            half_width: 1.0,
            modes: Vec::new(),
            pre_a: C64::new(1.0, 0.0),
            pre_b: C64::new(0.0, 0.0),
        }
    }

    /// Value only.
    pub fn eval(&self, z: C64) -> C64 {
        self.eval_d(z).0
    }

    /// (phi, d phi/dz, d phi/dzbar).
    pub fn eval_d(&self, z: C64) -> (C64, C64, C64) {
        let zeta = self.pre_a * z + self.pre_b;
        let mut phi = self.c0 + self.alpha * zeta + self.beta * zeta.conj();
        let mut dz = self.alpha;
        let mut dzb = self.beta;
        if !self.modes.is_empty() {
            let k = std::f64::consts::PI / self.half_width;
            for &(kx, ky, coef) in &self.modes {
                let wx = k * kx as f64;
                let wy = k * ky as f64;
                let phase = (I * (wx * zeta.re + wy * zeta.im)).exp();
                let term = coef * phase;
                phi += term;
                dz += term * C64::new(0.5 * wy, 0.5 * wx);
                dzb += term * C64::new(-0.5 * wy, 0.5 * wx);
            }
        }
        // chain rule through the affine pre-map
        (phi, dz * self.pre_a, dzb * self.pre_a.conj())
    }

    /// Compose with an affine holomorphic pre-map `z -> a z + b` (applied
    /// before the current one).
    pub fn with_pre(mut self, a: C64, b: C64) -> Self {
        self.pre_b = self.pre_a * b + self.pre_b;
        self.pre_a *= a;
        self
    }

    /// Post-scale: `s * (phi - shift)`.
    pub fn normalized(mut self, shift: C64, s: C64) -> Self {
        self.alpha *= s;
        self.beta *= s;
        self.c0 = s * (self.c0 - shift);
        for m in &mut self.modes {
            m.2 *= s;
        }
        self
    }
}

/// Convergence data for a Beltrami solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BeltramiReport {
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    /// max |phi_zbar - mu phi_z| over interior model nodes.
    pub cr_residual_max: f64,
    /// Disc solves: max | |phi| - radius | over rim samples.
    pub boundary_escape: Option<f64>,
}

/// Normalized quasiconformal chart sampled on a model domain, plus the
/// spectral evaluator it came from.
#[derive(Debug, Clone)]
pub struct QcMap {
    pub domain: ModelDomain,
    pub values: Vec<C64>,
    pub dz: Vec<C64>,
    pub dzbar: Vec<C64>,
    pub eval: ChartEval,
    pub report: BeltramiReport,
}

impl QcMap {
    /// Jacobian |phi_z|^2 - |phi_zbar|^2 per node; positive on the interior
    /// for an orientation-preserving immersion.
    pub fn jacobian(&self) -> Vec<f64> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, _)| self.dz[i].norm_sqr() - self.dzbar[i].norm_sqr())
            .collect()
    }

    pub fn min_interior_jacobian(&self) -> f64 {
        let jac = self.jacobian();
        self.domain
            .interior_indices()
            .into_iter()
            .map(|i| jac[i])
            .fold(f64::INFINITY, f64::min)
    }
}
