//! Intrinsic mean curvature flow on compact space-like manifolds.
//!
//! A space-like manifold carries a metric `g` and a symmetric tensor `h`
//! obeying the Gauss equation `R_{ijkl} = −(h_{ik}h_{jl} − h_{il}h_{jk})`
//! and the Codazzi equation `∇_i h_{jk} = ∇_j h_{ik}`. This crate evolves
//! such pairs on periodic grids (n = 2) and on homogeneous space forms
//! (any even n), and measures the functionals, inequalities and
//! Euler-characteristic identities the flow is known to satisfy.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod field;
pub mod flow;
pub mod gbc;
pub mod grid;
pub mod monitor;
pub mod report;
pub mod scenario;
pub mod spacelike;
pub mod tensor;

pub use error::{Error, Result};
pub use field::{CurvatureField, ScalarField, SymTensorField, ThirdOrderField, Variance};
pub use flow::{evolve, FlowConfig, FlowForm, TrajectoryRecord};
pub use grid::GridChart;
pub use monitor::MonitorRecord;
pub use spacelike::{AnyState, HomogeneousState, SpacelikeState};
