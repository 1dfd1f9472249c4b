//! Space-like states and the constraints that define them.
//!
//! A state pairs a metric `g` with a symmetric `h` on the periodic grid.
//! The Gauss equation `R_{ijkl} = −(h_{ik}h_{jl} − h_{il}h_{jk})` and the
//! Codazzi equation `∇_i h_{jk} = ∇_j h_{ik}` are measured as residuals,
//! never imposed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, Sym2, SymTensorField, ThirdOrderField, Variance};
use crate::gbc::{euler_prefactor, parity_sign, sphere_volume};
use crate::grid::{GridChart, DIM};
use crate::tensor::{
    contract, covariant_gradient_with, det2, inv_spd2, matmul, riemann_with, Connection,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SpacelikeState {
    pub grid: GridChart,
    pub g: SymTensorField,
    pub h: SymTensorField,
    pub t: f64,
}

impl SpacelikeState {
    pub fn new(grid: GridChart, g: SymTensorField, h: SymTensorField, t: f64) -> Result<Self> {
        g.validate(&grid)?;
        h.validate(&grid)?;
        if let Some(node) = g.values.iter().position(|m| inv_spd2(m).is_none()) {
            return Err(Error::NotPositiveDefinite { node });
        }
        if !h.is_symmetric() || !g.is_symmetric() {
            return Err(Error::InvalidInput(
                "tensor fields must be symmetric".into(),
            ));
        }
        if !(t >= 0.0) {
            return Err(Error::InvalidInput(format!("negative time {t}")));
        }
        Ok(Self { grid, g, h, t })
    }

    pub fn flat(grid: GridChart) -> Self {
        Self {
            grid,
            g: SymTensorField::identity(grid.len()),
            h: SymTensorField::zeros(grid.len()),
            t: 0.0,
        }
    }

    pub fn dimension(&self) -> usize {
        DIM
    }

    pub fn connection(&self) -> Result<Connection> {
        Connection::new(&self.grid, &self.g)
    }
}

/// `H`, `|A|²`, `|∇A|²` and `|h − (H/n) g|²` node by node.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedScalars {
    pub mean: ScalarField,
    pub a2: ScalarField,
    pub grad_a2: ScalarField,
    pub traceless2: ScalarField,
}

/// Pointwise `(H, |A|²)` from `g⁻¹` and `h`.
#[inline]
pub fn mean_and_norm(inv: &Sym2, h: &Sym2) -> (f64, f64) {
    let mean = contract(inv, h);
    let gh = matmul(inv, h);
    let a2 = contract(&gh, &transpose(&gh));
    (mean, a2)
}

#[inline]
fn transpose(m: &Sym2) -> Sym2 {
    let mut t = *m;
    for i in 0..DIM {
        for j in 0..DIM {
            t[i][j] = m[j][i];
        }
    }
    t
}

/// `|∇A|² = g^{ij} g^{kl} g^{pq} ∇_i h_{kp} ∇_j h_{lq}` at one node.
#[inline]
pub fn grad_norm2(inv: &Sym2, t: &crate::field::Rank3) -> f64 {
    let mut s = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                for l in 0..DIM {
                    let w = inv[i][j] * inv[k][l];
                    if w == 0.0 {
                        continue;
                    }
                    for p in 0..DIM {
                        for q in 0..DIM {
                            s += w * inv[p][q] * t[i][k][p] * t[j][l][q];
                        }
                    }
                }
            }
        }
    }
    s
}

/// Connection, `∇h` and the derived scalars of one state, computed once.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub conn: Connection,
    pub grad: ThirdOrderField,
    pub scalars: DerivedScalars,
}

impl Analysis {
    pub fn new(state: &SpacelikeState) -> Result<Self> {
        let conn = state.connection()?;
        let grad = covariant_gradient_with(&state.grid, &conn, &state.h)?;
        let n = DIM as f64;
        let len = state.grid.len();
        let mut mean = Vec::with_capacity(len);
        let mut a2 = Vec::with_capacity(len);
        let mut grad_a2 = Vec::with_capacity(len);
        let mut traceless2 = Vec::with_capacity(len);
        for node in 0..len {
            let inv = &conn.inverse[node];
            let (hm, an) = mean_and_norm(inv, &state.h.values[node]);
            mean.push(hm);
            a2.push(an);
            grad_a2.push(grad_norm2(inv, &grad.values[node]));
            traceless2.push((an - hm * hm / n).max(0.0));
        }
        Ok(Self {
            conn,
            grad,
            scalars: DerivedScalars {
                mean: ScalarField::new(mean),
                a2: ScalarField::new(a2),
                grad_a2: ScalarField::new(grad_a2),
                traceless2: ScalarField::new(traceless2),
            },
        })
    }
}

pub fn derived_scalars(state: &SpacelikeState) -> Result<DerivedScalars> {
    Ok(Analysis::new(state)?.scalars)
}

/// Sup norm of `R_{ijkl} + (h_{ik}h_{jl} − h_{il}h_{jk})` and its node-wise max-component field.
pub fn gauss_residual(state: &SpacelikeState) -> Result<(f64, ScalarField)> {
    let conn = state.connection()?;
    Ok(gauss_residual_with(state, &conn))
}

pub(crate) fn gauss_residual_with(state: &SpacelikeState, conn: &Connection) -> (f64, ScalarField) {
    let curv = riemann_with(&state.grid, &state.g, conn);
    let values: Vec<f64> = curv
        .values
        .iter()
        .zip(&state.h.values)
        .map(|(r, h)| {
            let mut m: f64 = 0.0;
            for i in 0..DIM {
                for j in 0..DIM {
                    for k in 0..DIM {
                        for l in 0..DIM {
                            let e = r[i][j][k][l] + (h[i][k] * h[j][l] - h[i][l] * h[j][k]);
                            m = m.max(e.abs());
                        }
                    }
                }
            }
            m
        })
        .collect();
    let sup = values.iter().copied().fold(0.0, f64::max);
    (sup, ScalarField::new(values))
}

/// `sup |∇_i h_{jk} − ∇_j h_{ik}|` over nodes and index triples.
pub fn codazzi_residual(state: &SpacelikeState) -> Result<f64> {
    let conn = state.connection()?;
    let grad = covariant_gradient_with(&state.grid, &conn, &state.h)?;
    Ok(codazzi_from_gradient(&grad))
}

pub(crate) fn codazzi_from_gradient(grad: &ThirdOrderField) -> f64 {
    let mut m: f64 = 0.0;
    for t in &grad.values {
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    m = m.max((t[i][j][k] - t[j][i][k]).abs());
                }
            }
        }
    }
    m
}

/// Induced geometry of the space-like graph `x_{n+1} = u(x)` in Minkowski space.
///
/// `g = δ − du⊗du` and `h = Hess u / sqrt(1 − |du|²)`. The sign of `h` is a
/// convention: the flow and `det h` (n even) are invariant under `h → −h`.
pub fn from_graph(grid: &GridChart, u: &ScalarField) -> Result<SpacelikeState> {
    u.validate(grid)?;
    let mut max_gradient: f64 = 0.0;
    let mut g = Vec::with_capacity(grid.len());
    let mut h = Vec::with_capacity(grid.len());
    for node in 0..grid.len() {
        let du: [f64; DIM] = std::array::from_fn(|a| grid.d1(&u.values, node, a));
        let grad2: f64 = du.iter().map(|x| x * x).sum();
        max_gradient = max_gradient.max(grad2.sqrt());
        let w = (1.0 - grad2).max(0.0).sqrt();
        let mut gm = [[0.0; DIM]; DIM];
        let mut hm = [[0.0; DIM]; DIM];
        for i in 0..DIM {
            for j in 0..DIM {
                gm[i][j] = if i == j { 1.0 } else { 0.0 } - du[i] * du[j];
                hm[i][j] = grid.d2(&u.values, node, i, j) / w;
            }
        }
        g.push(gm);
        h.push(hm);
    }
    if max_gradient >= 1.0 {
        return Err(Error::NotSpacelike { max_gradient });
    }
    SpacelikeState::new(
        *grid,
        SymTensorField::covariant(g),
        SymTensorField::covariant(h),
        0.0,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionalBound {
    /// `sup |det h| / det g`, the Gauss-equation closed form.
    pub from_h: f64,
    /// `sup |R_{1212}| / det g` from the finite-difference curvature.
    pub from_curvature: f64,
}

pub fn sectional_bound(state: &SpacelikeState) -> Result<SectionalBound> {
    let conn = state.connection()?;
    let curv = riemann_with(&state.grid, &state.g, &conn);
    Ok(SectionalBound {
        from_h: sup_sectional_from_h(state),
        from_curvature: curv
            .values
            .iter()
            .zip(&conn.det)
            .fold(0.0, |m, (r, d)| m.max(r[0][1][0][1].abs() / d)),
    })
}

pub(crate) fn sup_sectional_from_h(state: &SpacelikeState) -> f64 {
    state
        .h
        .values
        .iter()
        .zip(&state.g.values)
        .fold(0.0, |m, (h, g)| m.max(det2(h).abs() / det2(g)))
}

// ---------------------------------------------------------------------------
// Homogeneous space forms

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseForm {
    /// Compact quotient of hyperbolic space, sectional curvature −1 for `g₀`.
    Hyperbolic,
    /// Flat torus.
    Flat,
}

/// `g = φ g₀`, `h = ψ g₀` over a compact space form `(N, g₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousState {
    pub n: usize,
    pub phi: f64,
    pub psi: f64,
    pub t: f64,
    pub base_volume: f64,
    pub base_euler: i64,
    pub base: BaseForm,
}

/// Relative tolerance for the base volume / Euler characteristic consistency check.
pub const BASE_CONSISTENCY_TOL: f64 = 1e-9;

/// `Vol(N, g₀)` of a hyperbolic space form with the given Euler characteristic.
pub fn hyperbolic_base_volume(n: usize, euler: i64) -> f64 {
    euler as f64 / euler_prefactor(n)
}

fn check_even(n: usize) -> Result<()> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::OddDimension(n));
    }
    Ok(())
}

pub fn homogeneous_hyperbolic(
    n: usize,
    phi0: f64,
    base_volume: f64,
    base_euler: i64,
) -> Result<HomogeneousState> {
    check_even(n)?;
    if !(phi0 > 0.0 && base_volume > 0.0) {
        return Err(Error::InvalidInput(
            "phi0 and base_volume must be positive".into(),
        ));
    }
    let implied = euler_prefactor(n) * base_volume;
    if (implied - base_euler as f64).abs()
        > BASE_CONSISTENCY_TOL * (base_euler as f64).abs().max(1.0)
    {
        return Err(Error::InconsistentBase {
            base_volume,
            base_euler,
            implied,
        });
    }
    Ok(HomogeneousState {
        n,
        phi: phi0,
        psi: phi0.sqrt(),
        t: 0.0,
        base_volume,
        base_euler,
        base: BaseForm::Hyperbolic,
    })
}

pub fn homogeneous_flat(n: usize, phi0: f64, base_volume: f64) -> Result<HomogeneousState> {
    check_even(n)?;
    if !(phi0 > 0.0 && base_volume > 0.0) {
        return Err(Error::InvalidInput(
            "phi0 and base_volume must be positive".into(),
        ));
    }
    Ok(HomogeneousState {
        n,
        phi: phi0,
        psi: 0.0,
        t: 0.0,
        base_volume,
        base_euler: 0,
        base: BaseForm::Flat,
    })
}

impl HomogeneousState {
    pub fn mean_curvature(&self) -> f64 {
        self.n as f64 * self.psi / self.phi
    }

    pub fn a2(&self) -> f64 {
        self.n as f64 * (self.psi / self.phi).powi(2)
    }

    pub fn volume(&self) -> f64 {
        self.phi.powf(self.n as f64 / 2.0) * self.base_volume
    }

    /// Sectional curvature of `g₀` (−1 or 0).
    pub fn base_curvature(&self) -> f64 {
        match self.base {
            BaseForm::Hyperbolic => -1.0,
            BaseForm::Flat => 0.0,
        }
    }

    /// `sup |K|` computed from `h`: every plane has `K = −ψ²/φ²`.
    pub fn sup_sectional(&self) -> f64 {
        (self.psi / self.phi).powi(2)
    }

    /// Gauss residual in a `g`-orthonormal frame: `|K₀/φ + ψ²/φ²|`.
    pub fn gauss_residual(&self) -> f64 {
        (self.base_curvature() / self.phi + (self.psi / self.phi).powi(2)).abs()
    }

    /// `φ − ψ²` for the hyperbolic base, `ψ` for the flat one.
    pub fn constraint_defect(&self) -> f64 {
        match self.base {
            BaseForm::Hyperbolic => self.phi - self.psi * self.psi,
            BaseForm::Flat => self.psi,
        }
    }

    pub fn euler_characteristic(&self) -> f64 {
        let n = self.n as i32;
        euler_prefactor(self.n)
            * (self.psi / self.phi).powi(n)
            * self.phi.powf(self.n as f64 / 2.0)
            * self.base_volume
    }
}

/// `χ` by integrating the closed-form Euler density over the grid.
pub fn euler_characteristic(state: &SpacelikeState) -> Result<f64> {
    let density: Vec<f64> = state
        .h
        .values
        .iter()
        .zip(&state.g.values)
        .map(|(h, g)| det2(h) / det2(g))
        .collect();
    let det: Vec<f64> = state.g.values.iter().map(det2).collect();
    Ok(euler_prefactor(DIM) * crate::tensor::integrate_with_det(&state.grid, &det, &density)?)
}

/// Either kind of state, for the operations that accept both.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyState {
    Grid(SpacelikeState),
    Homogeneous(HomogeneousState),
}

impl AnyState {
    pub fn t(&self) -> f64 {
        match self {
            AnyState::Grid(s) => s.t,
            AnyState::Homogeneous(s) => s.t,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            AnyState::Grid(_) => DIM,
            AnyState::Homogeneous(s) => s.n,
        }
    }

    pub fn euler_characteristic(&self) -> Result<f64> {
        match self {
            AnyState::Grid(s) => euler_characteristic(s),
            AnyState::Homogeneous(s) => Ok(s.euler_characteristic()),
        }
    }
}

/// The sign `(−1)^{n/2}` appearing in the Euler-characteristic inequalities.
pub fn euler_sign(n: usize) -> f64 {
    parity_sign(n)
}

/// `2 / vol(Sⁿ)`.
pub fn gbc_scale(n: usize) -> f64 {
    2.0 / sphere_volume(n)
}

/// Builds `(g, h)` fields from closures, symmetrizing each node value.
pub fn state_from_fn(
    grid: GridChart,
    g: impl Fn(f64, f64) -> Sym2,
    h: impl Fn(f64, f64) -> Sym2,
) -> Result<SpacelikeState> {
    let gf = SymTensorField::from_fn(grid.len(), Variance::Covariant, |k| {
        let [x, y] = grid.position(k);
        g(x, y)
    });
    let hf = SymTensorField::from_fn(grid.len(), Variance::Covariant, |k| {
        let [x, y] = grid.position(k);
        h(x, y)
    });
    SpacelikeState::new(grid, gf, hf, 0.0)
}
