//! Containers and contracts for continuous families over a sampled compact
//! parameter box `[0,1]^m`. Everything downstream acts fiber-wise; this module
//! supplies the grid, the node-wise mapping plumbing, and the measured
//! continuity diagnostic that stands in for "continuous in the parameter".

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("resolution must be at least 1")]
    ZeroResolution,
    #[error("fiber operation failed at node {node}: {message}")]
    FiberOp { node: usize, message: String },
    #[error("payload count {values} does not match grid size {nodes}")]
    SizeMismatch { values: usize, nodes: usize },
}

/// Full tensor grid over `[0,1]^dim` with `resolution` nodes per axis.
/// `dim == 0` is the singleton grid (the single-surface case).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamGrid {
    dim: usize,
    resolution: usize,
    nodes: Vec<Vec<f64>>,
    mesh: Vec<f64>,
}

impl ParamGrid {
    pub fn new(dim: usize, resolution: usize) -> Result<Self, FamilyError> {
        if resolution == 0 {
            return Err(FamilyError::ZeroResolution);
        }
        let axis: Vec<f64> = if resolution == 1 {
            vec![0.0]
        } else {
            (0..resolution).map(|i| i as f64 / (resolution - 1) as f64).collect()
        };
        let count = axis.len().pow(dim as u32);
        let mut nodes = Vec::with_capacity(count);
        for flat in 0..count {
            let mut node = Vec::with_capacity(dim);
            let mut rem = flat;
            for _ in 0..dim {
                node.push(axis[rem % resolution]);
                rem /= resolution;
            }
            nodes.push(node);
        }
        let spacing = if resolution == 1 { 1.0 } else { 1.0 / (resolution - 1) as f64 };
        Ok(Self { dim, resolution, nodes, mesh: vec![spacing; dim] })
    }

    pub fn singleton() -> Self {
        Self::new(0, 1).expect("singleton grid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a grid always has at least the origin node
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn mesh(&self) -> &[f64] {
        &self.mesh
    }

    pub fn mesh_max(&self) -> f64 {
        self.mesh.iter().copied().fold(0.0, f64::max)
    }

    /// Pairs of node indices that differ by one step along exactly one axis.
    pub fn adjacent_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        let mut stride = 1usize;
        for _axis in 0..self.dim {
            for (i, node) in self.nodes.iter().enumerate() {
                let _ = node;
                let along = (i / stride) % self.resolution;
                if along + 1 < self.resolution {
                    pairs.push((i, i + stride));
                }
            }
            stride *= self.resolution;
        }
        pairs
    }
}

/// A metric on fiber payloads, used to recompute the continuity modulus after
/// node-wise maps.
pub trait PayloadMetric {
    fn payload_dist(&self, other: &Self) -> f64;
}

impl PayloadMetric for f64 {
    fn payload_dist(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
}

impl PayloadMetric for num_complex::Complex64 {
    fn payload_dist(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
}

impl<T: PayloadMetric> PayloadMetric for Vec<T> {
    fn payload_dist(&self, other: &Self) -> f64 {
        self.iter()
            .zip(other.iter())
            .map(|(a, b)| a.payload_dist(b))
            .fold(0.0, f64::max)
    }
}

/// A family: one payload per parameter node, plus the observed adjacent-node
/// deviation (the continuity modulus) under the payload metric.
#[derive(Debug, Clone)]
pub struct Family<T> {
    grid: ParamGrid,
    values: Vec<T>,
    modulus: f64,
}

impl<T> Family<T> {
    pub fn from_values(grid: ParamGrid, values: Vec<T>) -> Result<Self, FamilyError>
    where
        T: PayloadMetric,
    {
        if values.len() != grid.len() {
            return Err(FamilyError::SizeMismatch { values: values.len(), nodes: grid.len() });
        }
        let modulus = continuity_report_with(&grid, &values, |a, b| a.payload_dist(b));
        Ok(Self { grid, values, modulus })
    }

    /// Build a family by evaluating `op` at every node, in node order (so
    /// warm-started constructors see their predecessor).
    pub fn build<E, F>(grid: ParamGrid, mut op: F) -> Result<Self, FamilyError>
    where
        T: PayloadMetric,
        F: FnMut(usize, &[f64]) -> Result<T, E>,
        E: std::fmt::Display,
    {
        let mut values = Vec::with_capacity(grid.len());
        for (i, node) in grid.nodes().iter().enumerate() {
            let v = op(i, node)
                .map_err(|e| FamilyError::FiberOp { node: i, message: e.to_string() })?;
            values.push(v);
        }
        Self::from_values(grid, values)
    }

    pub fn grid(&self) -> &ParamGrid {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn modulus(&self) -> f64 {
        self.modulus
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Node-wise map; the modulus is recomputed for the new payload type.
    /// Failure reports the first offending node.
    pub fn map<U, E, F>(&self, mut op: F) -> Result<Family<U>, FamilyError>
    where
        U: PayloadMetric,
        F: FnMut(&T) -> Result<U, E>,
        E: std::fmt::Display,
    {
        let mut values = Vec::with_capacity(self.values.len());
        for (i, v) in self.values.iter().enumerate() {
            values.push(
                op(v).map_err(|e| FamilyError::FiberOp { node: i, message: e.to_string() })?,
            );
        }
        Family::from_values(self.grid.clone(), values)
    }
}

/// Max metric value over grid-adjacent node pairs; 0 for singleton grids.
pub fn continuity_report<T>(fam: &Family<T>, metric: impl Fn(&T, &T) -> f64) -> f64 {
    continuity_report_with(&fam.grid, &fam.values, metric)
}

fn continuity_report_with<T>(
    grid: &ParamGrid,
    values: &[T],
    metric: impl Fn(&T, &T) -> f64,
) -> f64 {
    grid.adjacent_pairs()
        .into_iter()
        .map(|(a, b)| metric(&values[a], &values[b]))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singleton_grid_has_one_node() {
        let g = ParamGrid::new(0, 1).unwrap();
        assert_eq!(g.len(), 1);
        assert!(g.adjacent_pairs().is_empty());
    }

    #[test]
    fn line_grid_nodes_and_mesh() {
        let g = ParamGrid::new(1, 11).unwrap();
        assert_eq!(g.len(), 11);
        assert!((g.nodes()[1][0] - 0.1).abs() < 1e-15);
        assert!((g.mesh()[0] - 0.1).abs() < 1e-15);
        assert!((g.nodes()[10][0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn square_grid_has_nine_nodes() {
        let g = ParamGrid::new(2, 3).unwrap();
        assert_eq!(g.len(), 9);
        // adjacency: 2 axes * 3 rows * 2 steps = 12 pairs
        assert_eq!(g.adjacent_pairs().len(), 12);
        for node in g.nodes() {
            for &c in node {
                assert!(c == 0.0 || c == 0.5 || c == 1.0);
            }
        }
    }

    #[test]
    fn zero_resolution_rejected() {
        assert!(matches!(ParamGrid::new(1, 0), Err(FamilyError::ZeroResolution)));
    }

    #[test]
    fn map_identity_preserves_modulus() {
        let g = ParamGrid::new(1, 3).unwrap();
        let fam = Family::build(g, |_, node| Ok::<_, std::convert::Infallible>(node[0])).unwrap();
        let mapped = fam.map(|v| Ok::<_, std::convert::Infallible>(*v)).unwrap();
        assert_eq!(mapped.values(), fam.values());
        assert_eq!(mapped.modulus(), fam.modulus());
    }

    #[test]
    fn constant_family_zero_modulus() {
        let g = ParamGrid::new(2, 3).unwrap();
        let fam = Family::build(g, |_, _| Ok::<_, std::convert::Infallible>(1.5)).unwrap();
        assert_eq!(fam.modulus(), 0.0);
        let doubled = fam.map(|v| Ok::<_, std::convert::Infallible>(2.0 * v)).unwrap();
        assert_eq!(doubled.modulus(), 0.0);
    }

    #[test]
    fn linear_family_doubling() {
        let g = ParamGrid::new(1, 3).unwrap();
        let fam = Family::build(g, |_, node| Ok::<_, std::convert::Infallible>(node[0])).unwrap();
        let doubled = fam.map(|v| Ok::<_, std::convert::Infallible>(2.0 * v)).unwrap();
        assert_eq!(doubled.values(), &[0.0, 1.0, 2.0]);
        assert!((doubled.modulus() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn continuity_report_linear_family() {
        let g = ParamGrid::new(1, 3).unwrap();
        let fam = Family::build(g, |_, node| Ok::<_, std::convert::Infallible>(node[0])).unwrap();
        let r = continuity_report(&fam, |a, b| (a - b).abs());
        assert!((r - 0.5).abs() < 1e-15);
    }

    #[test]
    fn report_decreases_under_refinement() {
        // a fixed smooth family sampled at increasing resolution
        let smooth = |b: f64| (2.0 * b).sin() + 0.5 * b;
        let mut last = f64::INFINITY;
        for res in [3usize, 5, 9] {
            let g = ParamGrid::new(1, res).unwrap();
            let fam =
                Family::build(g, |_, n| Ok::<_, std::convert::Infallible>(smooth(n[0]))).unwrap();
            let r = continuity_report(&fam, |a, b| (a - b).abs());
            assert!(r < last, "resolution {res}: report {r} did not decrease from {last}");
            last = r;
        }
    }

    #[test]
    fn fiber_error_carries_node_index() {
        let g = ParamGrid::new(1, 3).unwrap();
        let fam = Family::build(g, |_, node| Ok::<_, std::convert::Infallible>(node[0])).unwrap();
        let err = fam
            .map(|v| if *v > 0.4 { Err("too large") } else { Ok(*v) })
            .expect_err("must fail");
        match err {
            FamilyError::FiberOp { node, .. } => assert_eq!(node, 1),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn lipschitz_bound_on_report() {
        // report of a Lipschitz family is bounded by L * mesh
        let lip = 3.0;
        let g = ParamGrid::new(1, 9).unwrap();
        let fam =
            Family::build(g, |_, n| Ok::<_, std::convert::Infallible>(lip * n[0])).unwrap();
        let r = continuity_report(&fam, |a, b| (a - b).abs());
        assert!(r <= lip * fam.grid().mesh_max() + 1e-12);
    }
}
