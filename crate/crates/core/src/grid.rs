//! Uniform periodic chart on the flat torus.
//!
//! Nodes are stored row-major: node `(i0, i1)` lives at `i0 * nodes + i1`,
//! with coordinate `x_a = i_a * spacing`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spatial dimension of the grid layer.
pub const DIM: usize = 2;

pub const MIN_NODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridChart {
    nodes: usize,
    period: f64,
}

impl GridChart {
    pub fn new(dimension: usize, nodes_per_axis: usize, period: f64) -> Result<Self> {
        if !dimension.is_multiple_of(2) {
            return Err(Error::OddDimension(dimension));
        }
        if dimension != DIM {
            return Err(Error::UnsupportedDimension(dimension));
        }
        if nodes_per_axis < MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "{nodes_per_axis} nodes per axis, need at least {MIN_NODES}"
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "period {period} must be positive"
            )));
        }
        Ok(Self {
            nodes: nodes_per_axis,
            period,
        })
    }

    /// A `(2π)²` torus with `nodes` nodes per axis.
    pub fn torus(nodes: usize) -> Result<Self> {
        Self::new(DIM, nodes, std::f64::consts::TAU)
    }

    pub fn dimension(&self) -> usize {
        DIM
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.nodes
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.nodes as f64
    }

    pub fn len(&self) -> usize {
        self.nodes * self.nodes
    }

    pub fn is_empty(&self) -> bool {
        self.nodes == 0
    }

    /// Coordinate volume of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(DIM as i32)
    }

    #[inline]
    pub fn index(&self, i0: usize, i1: usize) -> usize {
        i0 * self.nodes + i1
    }

    #[inline]
    pub fn coords_of(&self, node: usize) -> [usize; DIM] {
        [node / self.nodes, node % self.nodes]
    }

    pub fn position(&self, node: usize) -> [f64; DIM] {
        let [i0, i1] = self.coords_of(node);
        let h = self.spacing();
        [i0 as f64 * h, i1 as f64 * h]
    }

    /// Neighbor of `node` displaced by `offset` nodes along `axis`, wrapping periodically.
    #[inline]
    pub fn shift(&self, node: usize, axis: usize, offset: isize) -> usize {
        let mut c = self.coords_of(node);
        let n = self.nodes as isize;
        c[axis] = (c[axis] as isize + offset).rem_euclid(n) as usize;
        self.index(c[0], c[1])
    }

    /// Samples `f(x, y)` at every node.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        (0..self.len())
            .map(|k| {
                let [x, y] = self.position(k);
                f(x, y)
            })
            .collect()
    }

    /// Second-order central first derivative along `axis`.
    pub fn d1(&self, values: &[f64], node: usize, axis: usize) -> f64 {
        let p = self.shift(node, axis, 1);
        let m = self.shift(node, axis, -1);
        (values[p] - values[m]) / (2.0 * self.spacing())
    }

    /// Compact second derivative `∂_a ∂_b`: three-point for `a == b`, cross stencil otherwise.
    pub fn d2(&self, values: &[f64], node: usize, a: usize, b: usize) -> f64 {
        let h = self.spacing();
        if a == b {
            let p = self.shift(node, a, 1);
            let m = self.shift(node, a, -1);
            (values[p] - 2.0 * values[node] + values[m]) / (h * h)
        } else {
            let pa = self.shift(node, a, 1);
            let ma = self.shift(node, a, -1);
            let pp = self.shift(pa, b, 1);
            let pm = self.shift(pa, b, -1);
            let mp = self.shift(ma, b, 1);
            let mm = self.shift(ma, b, -1);
            (values[pp] - values[pm] - values[mp] + values[mm]) / (4.0 * h * h)
        }
    }

    /// [`Self::d1`] at every node.
    pub fn d1_all(&self, values: &[f64], axis: usize) -> Vec<f64> {
        let n = self.nodes;
        let h2 = 2.0 * self.spacing();
        let mut out = vec![0.0; self.len()];
        for i0 in 0..n {
            for i1 in 0..n {
                let (p, m) = if axis == 0 {
                    (
                        self.index((i0 + 1) % n, i1),
                        self.index((i0 + n - 1) % n, i1),
                    )
                } else {
                    (
                        self.index(i0, (i1 + 1) % n),
                        self.index(i0, (i1 + n - 1) % n),
                    )
                };
                out[self.index(i0, i1)] = (values[p] - values[m]) / h2;
            }
        }
        out
    }

    /// [`Self::d2`] at every node.
    pub fn d2_all(&self, values: &[f64], a: usize, b: usize) -> Vec<f64> {
        let n = self.nodes;
        let h2 = self.spacing() * self.spacing();
        let mut out = vec![0.0; self.len()];
        for i0 in 0..n {
            let (u0, d0) = ((i0 + 1) % n, (i0 + n - 1) % n);
            for i1 in 0..n {
                let (u1, d1) = ((i1 + 1) % n, (i1 + n - 1) % n);
                let c = values[self.index(i0, i1)];
                out[self.index(i0, i1)] = match (a, b) {
                    (0, 0) => {
                        (values[self.index(u0, i1)] - 2.0 * c + values[self.index(d0, i1)]) / h2
                    }
                    (1, 1) => {
                        (values[self.index(i0, u1)] - 2.0 * c + values[self.index(i0, d1)]) / h2
                    }
                    _ => {
                        (values[self.index(u0, u1)]
                            - values[self.index(u0, d1)]
                            - values[self.index(d0, u1)]
                            + values[self.index(d0, d1)])
                            / (4.0 * h2)
                    }
                };
            }
        }
        out
    }
}
