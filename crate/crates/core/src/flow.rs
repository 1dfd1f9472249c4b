//! Intrinsic mean curvature flow.
//!
//! General form:
//! ```text
//! ∂g/∂t = −2 Ric + 2 h g⁻¹ h
//! ∂h/∂t = Δh − Ric g⁻¹ h − (Ric g⁻¹ h)ᵀ + 2 h g⁻¹ h g⁻¹ h − |A|² h
//! ```
//! and, on states satisfying the Gauss equation, the simplified form
//! ```text
//! ∂g/∂t = 2 H h
//! ∂h/∂t = Δh + 2 H h g⁻¹ h − |A|² h
//! ```
//! Both are integrated with the classical four-stage Runge–Kutta scheme.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Sym2, SymTensorField};
use crate::grid::DIM;
use crate::monitor::{self, DenseSample, MonitorRecord};
use crate::spacelike::{mean_and_norm, AnyState, BaseForm, HomogeneousState, SpacelikeState};
use crate::tensor::{
    covariant_gradient_with, det2, matmul, max_eigenvalue2, riemann_with, rough_laplacian_with,
    scalar_laplacian_with,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FlowForm {
    General,
    #[default]
    Simplified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub form: FlowForm,
    pub cfl_constant: f64,
    pub t_end: f64,
    /// First checkpoint; later ones double: `t₀ · 2^k`.
    pub checkpoint_t0: f64,
    pub max_steps: usize,
    pub det_floor: f64,
    /// Gauss residual ceiling is `residual_factor · initial + residual_offset`.
    pub residual_factor: f64,
    pub residual_offset: f64,
    /// Steps between Gauss residual checks (also checked at every checkpoint).
    pub residual_check_interval: usize,
    /// Fixed step for the homogeneous ODE reduction.
    pub ode_dt: f64,
    pub keep_snapshots: bool,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            form: FlowForm::Simplified,
            cfl_constant: 0.2,
            t_end: 1.0,
            checkpoint_t0: 0.125,
            max_steps: 2_000_000,
            det_floor: 1e-10,
            residual_factor: 10.0,
            residual_offset: 1e-4,
            residual_check_interval: 16,
            ode_dt: 1e-3,
            keep_snapshots: false,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.cfl_constant > 0.0 && self.cfl_constant <= 1.0) {
            return bad("cfl_constant must lie in (0, 1]");
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be positive");
        }
        if !(self.checkpoint_t0 > 0.0) {
            return bad("checkpoint_t0 must be positive");
        }
        if !(self.ode_dt > 0.0) {
            return bad("ode_dt must be positive");
        }
        if self.max_steps == 0 || self.residual_check_interval == 0 {
            return bad("max_steps and residual_check_interval must be nonzero");
        }
        Ok(())
    }

    /// `t₀ · 2^k` up to and including `t_end`, then `t_end` itself if it is not one of them.
    pub fn checkpoint_times(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut t = self.checkpoint_t0;
        while t <= self.t_end * (1.0 + 1e-12) {
            out.push(t.min(self.t_end));
            t *= 2.0;
        }
        if out.last().is_none_or(|&last| last < self.t_end) {
            out.push(self.t_end);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowTendency {
    pub dg: SymTensorField,
    pub dh: SymTensorField,
}

fn transpose(m: &Sym2) -> Sym2 {
    std::array::from_fn(|i| std::array::from_fn(|j| m[j][i]))
}

fn axpy(a: &Sym2, c: f64, b: &Sym2) -> Sym2 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j] + c * b[i][j]))
}

pub fn tendency(state: &SpacelikeState, form: FlowForm) -> Result<FlowTendency> {
    let conn = state.connection()?;
    let grad = covariant_gradient_with(&state.grid, &conn, &state.h)?;
    let lap = rough_laplacian_with(&state.grid, &conn, &state.h, &grad);
    let ricci: Option<Vec<Sym2>> = match form {
        FlowForm::Simplified => None,
        FlowForm::General => {
            let curv = riemann_with(&state.grid, &state.g, &conn);
            Some(
                curv.values
                    .par_iter()
                    .zip(&conn.inverse)
                    .map(|(r, inv)| {
                        std::array::from_fn(|j| {
                            std::array::from_fn(|l| {
                                let mut s = 0.0;
                                for i in 0..DIM {
                                    for k in 0..DIM {
                                        s += inv[i][k] * r[i][j][k][l];
                                    }
                                }
                                s
                            })
                        })
                    })
                    .collect(),
            )
        }
    };
    let (dg, dh): (Vec<Sym2>, Vec<Sym2>) = (0..state.grid.len())
        .into_par_iter()
        .map(|node| {
            let inv = &conn.inverse[node];
            let h = &state.h.values[node];
            let (mean, a2) = mean_and_norm(inv, h);
            let hgh = matmul(&matmul(h, inv), h);
            let l = &lap.values[node];
            match &ricci {
                None => {
                    let dg = std::array::from_fn(|i| std::array::from_fn(|j| 2.0 * mean * h[i][j]));
                    let dh = std::array::from_fn(|i| {
                        std::array::from_fn(|j| l[i][j] + 2.0 * mean * hgh[i][j] - a2 * h[i][j])
                    });
                    (dg, dh)
                }
                Some(ric) => {
                    let rc = &ric[node];
                    let rgh = matmul(&matmul(rc, inv), h);
                    let rght = transpose(&rgh);
                    let hghgh = matmul(&matmul(&hgh, inv), h);
                    let dg = std::array::from_fn(|i| {
                        std::array::from_fn(|j| -2.0 * rc[i][j] + 2.0 * hgh[i][j])
                    });
                    let dh = std::array::from_fn(|i| {
                        std::array::from_fn(|j| {
                            l[i][j] - rgh[i][j] - rght[i][j] + 2.0 * hghgh[i][j] - a2 * h[i][j]
                        })
                    });
                    (dg, dh)
                }
            }
        })
        .unzip();
    Ok(FlowTendency {
        dg: SymTensorField::covariant(dg),
        dh: SymTensorField::covariant(dh),
    })
}

pub fn tendency_general(state: &SpacelikeState) -> Result<FlowTendency> {
    tendency(state, FlowForm::General)
}

pub fn tendency_simplified(state: &SpacelikeState) -> Result<FlowTendency> {
    tendency(state, FlowForm::Simplified)
}

/// Relative tolerance on `|φ − ψ²| / φ` accepted by [`tendency_homogeneous`].
pub const HOMOGENEOUS_CONSTRAINT_TOL: f64 = 1e-8;
/// Steps ending this close to a checkpoint (relative to the step) land on it.
const LANDING_SLACK: f64 = 1e-6;

/// `(dφ/dt, dψ/dt) = (2nψ²/φ, nψ³/φ²)`.
pub fn tendency_homogeneous(state: &HomogeneousState) -> Result<(f64, f64)> {
    let defect = state.constraint_defect().abs();
    let scale = match state.base {
        BaseForm::Hyperbolic => state.phi,
        BaseForm::Flat => 1.0,
    };
    if defect > HOMOGENEOUS_CONSTRAINT_TOL * scale {
        return Err(Error::ConstraintViolation(defect));
    }
    Ok(homogeneous_rhs(
        state.n,
        state.phi,
        state.psi,
        state.base,
        FlowForm::Simplified,
    ))
}

fn homogeneous_rhs(n: usize, phi: f64, psi: f64, base: BaseForm, form: FlowForm) -> (f64, f64) {
    let n = n as f64;
    match form {
        FlowForm::Simplified => (2.0 * n * psi * psi / phi, n * psi.powi(3) / (phi * phi)),
        FlowForm::General => {
            // Ric(φ g₀) = K₀ (n − 1) g₀
            let ric = match base {
                BaseForm::Hyperbolic => -(n - 1.0),
                BaseForm::Flat => 0.0,
            };
            let dphi = -2.0 * ric + 2.0 * psi * psi / phi;
            let dpsi = -2.0 * ric * psi / phi + 2.0 * psi.powi(3) / (phi * phi)
                - n * psi.powi(3) / (phi * phi);
            (dphi, dpsi)
        }
    }
}

/// `cfl · spacing² / (2n · sup λ_max(g⁻¹)) / (1 + sup |A|²)`.
pub fn stable_timestep(state: &SpacelikeState, config: &FlowConfig) -> Result<f64> {
    let mut lam: f64 = 0.0;
    let mut amax: f64 = 0.0;
    for (node, (g, h)) in state.g.values.iter().zip(&state.h.values).enumerate() {
        let inv = crate::tensor::inv_spd2(g).ok_or(Error::NotPositiveDefinite { node })?;
        lam = lam.max(max_eigenvalue2(&inv));
        amax = amax.max(mean_and_norm(&inv, h).1);
    }
    let dx = state.grid.spacing();
    Ok(config.cfl_constant * dx * dx / (2.0 * DIM as f64 * lam) / (1.0 + amax))
}

fn combine(base: &SpacelikeState, stages: &[(f64, &FlowTendency)]) -> SpacelikeState {
    let len = base.grid.len();
    let mut g = base.g.values.clone();
    let mut h = base.h.values.clone();
    for (c, k) in stages {
        for node in 0..len {
            g[node] = axpy(&g[node], *c, &k.dg.values[node]);
            h[node] = axpy(&h[node], *c, &k.dh.values[node]);
        }
    }
    SpacelikeState {
        grid: base.grid,
        g: SymTensorField::covariant(g),
        h: SymTensorField::covariant(h),
        t: base.t,
    }
}

/// One RK4 step of size `dt` (negative `dt` steps backward).
pub fn step(state: &SpacelikeState, dt: f64, form: FlowForm) -> Result<SpacelikeState> {
    let k1 = tendency(state, form)?;
    let s2 = combine(state, &[(0.5 * dt, &k1)]);
    let k2 = tendency(&s2, form)?;
    let s3 = combine(state, &[(0.5 * dt, &k2)]);
    let k3 = tendency(&s3, form)?;
    let s4 = combine(state, &[(dt, &k3)]);
    let k4 = tendency(&s4, form)?;
    let mut next = combine(
        state,
        &[
            (dt / 6.0, &k1),
            (dt / 3.0, &k2),
            (dt / 3.0, &k3),
            (dt / 6.0, &k4),
        ],
    );
    next.t = state.t + dt;
    if let Some(node) = next
        .g
        .values
        .iter()
        .position(|m| crate::tensor::inv_spd2(m).is_none())
    {
        return Err(Error::NotPositiveDefinite { node });
    }
    Ok(next)
}

pub fn step_homogeneous(state: &HomogeneousState, dt: f64, form: FlowForm) -> HomogeneousState {
    let f = |phi: f64, psi: f64| homogeneous_rhs(state.n, phi, psi, state.base, form);
    let (p, q) = (state.phi, state.psi);
    let k1 = f(p, q);
    let k2 = f(p + 0.5 * dt * k1.0, q + 0.5 * dt * k1.1);
    let k3 = f(p + 0.5 * dt * k2.0, q + 0.5 * dt * k2.1);
    let k4 = f(p + dt * k3.0, q + dt * k3.1);
    HomogeneousState {
        phi: p + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        psi: q + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        t: state.t + dt,
        ..*state
    }
}

// ---------------------------------------------------------------------------
// Trajectories

/// A state the trajectory driver can advance and monitor.
pub trait Flowable: Clone {
    fn time(&self) -> f64;
    fn set_time(&mut self, t: f64);
    fn dimension(&self) -> usize;
    fn stable_dt(&self, config: &FlowConfig) -> Result<f64>;
    fn advance(&self, dt: f64, form: FlowForm) -> Result<Self>;
    fn min_det(&self) -> f64;
    fn gauss_sup(&self) -> Result<f64>;
    /// Grid spacing, or `None` for states without a grid.
    fn spacing(&self) -> Option<f64>;
    fn initial_amax2(&self) -> Result<f64>;
    fn record(&self, amax2_initial: f64, dt: f64) -> Result<MonitorRecord>;
    fn dense(&self) -> Result<DenseSample>;
    fn to_any(&self) -> AnyState;
}

impl Flowable for SpacelikeState {
    fn time(&self) -> f64 {
        self.t
    }
    fn set_time(&mut self, t: f64) {
        self.t = t;
    }
    fn dimension(&self) -> usize {
        DIM
    }
    fn stable_dt(&self, config: &FlowConfig) -> Result<f64> {
        stable_timestep(self, config)
    }
    fn advance(&self, dt: f64, form: FlowForm) -> Result<Self> {
        step(self, dt, form)
    }
    fn min_det(&self) -> f64 {
        self.g.values.iter().map(det2).fold(f64::INFINITY, f64::min)
    }
    fn gauss_sup(&self) -> Result<f64> {
        Ok(crate::spacelike::gauss_residual(self)?.0)
    }
    fn spacing(&self) -> Option<f64> {
        Some(self.grid.spacing())
    }
    fn initial_amax2(&self) -> Result<f64> {
        let mut m: f64 = 0.0;
        for (node, (g, h)) in self.g.values.iter().zip(&self.h.values).enumerate() {
            let inv = crate::tensor::inv_spd2(g).ok_or(Error::NotPositiveDefinite { node })?;
            m = m.max(mean_and_norm(&inv, h).1);
        }
        Ok(m)
    }
    fn record(&self, amax2_initial: f64, dt: f64) -> Result<MonitorRecord> {
        monitor::record_grid(self, amax2_initial, dt)
    }
    fn dense(&self) -> Result<DenseSample> {
        monitor::dense_grid(self)
    }
    fn to_any(&self) -> AnyState {
        AnyState::Grid(self.clone())
    }
}

impl Flowable for HomogeneousState {
    fn time(&self) -> f64 {
        self.t
    }
    fn set_time(&mut self, t: f64) {
        self.t = t;
    }
    fn dimension(&self) -> usize {
        self.n
    }
    fn stable_dt(&self, config: &FlowConfig) -> Result<f64> {
        Ok(config.ode_dt)
    }
    fn advance(&self, dt: f64, form: FlowForm) -> Result<Self> {
        let next = step_homogeneous(self, dt, form);
        if !(next.phi > 0.0 && next.phi.is_finite() && next.psi.is_finite()) {
            return Err(Error::NotPositiveDefinite { node: 0 });
        }
        Ok(next)
    }
    fn min_det(&self) -> f64 {
        self.phi.powi(self.n as i32)
    }
    fn gauss_sup(&self) -> Result<f64> {
        Ok(self.gauss_residual())
    }
    fn spacing(&self) -> Option<f64> {
        None
    }
    fn initial_amax2(&self) -> Result<f64> {
        Ok(self.a2())
    }
    fn record(&self, amax2_initial: f64, dt: f64) -> Result<MonitorRecord> {
        Ok(monitor::record_homogeneous(self, amax2_initial, dt))
    }
    fn dense(&self) -> Result<DenseSample> {
        Ok(monitor::dense_homogeneous(self))
    }
    fn to_any(&self) -> AnyState {
        AnyState::Homogeneous(*self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub dimension: usize,
    pub spacing: Option<f64>,
    /// Initial record, one per checkpoint, strictly increasing in `t`.
    pub records: Vec<MonitorRecord>,
    /// One sample per accepted step, for time-resolved checks.
    pub dense: Vec<DenseSample>,
    pub snapshots: Vec<AnyState>,
    pub steps: usize,
    pub abort: Option<String>,
}

impl TrajectoryRecord {
    pub fn last(&self) -> Option<&MonitorRecord> {
        self.records.last()
    }
}

/// Integrates `initial` to `config.t_end`, landing exactly on every checkpoint.
///
/// Step failures end the trajectory early with `abort` set; everything
/// recorded up to that point is kept.
pub fn evolve<S: Flowable>(
    initial: &S,
    config: &FlowConfig,
    sink: &mut dyn FnMut(&MonitorRecord),
) -> Result<TrajectoryRecord> {
    config.validate()?;
    let amax0 = initial.initial_amax2()?;
    let res0 = initial.gauss_sup()?;
    let ceiling = config.residual_factor * res0 + config.residual_offset;

    let mut traj = TrajectoryRecord {
        dimension: initial.dimension(),
        spacing: initial.spacing(),
        records: Vec::new(),
        dense: vec![initial.dense()?],
        snapshots: Vec::new(),
        steps: 0,
        abort: None,
    };
    let first_dt = initial.stable_dt(config)?;
    let rec = initial.record(amax0, first_dt)?;
    sink(&rec);
    traj.records.push(rec);
    if config.keep_snapshots {
        traj.snapshots.push(initial.to_any());
    }

    let mut cur = initial.clone();
    let mut last_dt = first_dt;
    'targets: for target in config.checkpoint_times() {
        if target <= cur.time() {
            continue;
        }
        while cur.time() < target {
            let mut dt = match cur.stable_dt(config) {
                Ok(dt) => dt,
                Err(e) => {
                    traj.abort = Some(e.to_string());
                    break 'targets;
                }
            };
            let landing = cur.time() + dt * (1.0 + LANDING_SLACK) >= target;
            if landing {
                dt = target - cur.time();
            }
            let mut next = match cur.advance(dt, config.form) {
                Ok(next) => next,
                Err(e) => {
                    traj.abort = Some(format!("{e} at t = {}", cur.time()));
                    break 'targets;
                }
            };
            next.set_time(if landing { target } else { cur.time() + dt });
            traj.steps += 1;
            last_dt = dt;

            let det = next.min_det();
            if !(det >= config.det_floor) {
                traj.abort = Some(
                    Error::DegenerateMetric {
                        t: next.time(),
                        det,
                        floor: config.det_floor,
                    }
                    .to_string(),
                );
                break 'targets;
            }
            if landing || traj.steps.is_multiple_of(config.residual_check_interval) {
                let residual = next.gauss_sup()?;
                if !(residual <= ceiling) {
                    traj.abort = Some(
                        Error::ResidualBlowup {
                            t: next.time(),
                            residual,
                            ceiling,
                        }
                        .to_string(),
                    );
                    break 'targets;
                }
            }
            traj.dense.push(next.dense()?);
            cur = next;
            if traj.steps >= config.max_steps && cur.time() < config.t_end {
                traj.abort = Some(format!(
                    "max_steps {} reached at t = {}",
                    config.max_steps,
                    cur.time()
                ));
                break 'targets;
            }
        }
        let rec = cur.record(amax0, last_dt)?;
        sink(&rec);
        traj.records.push(rec);
        if config.keep_snapshots {
            traj.snapshots.push(cur.to_any());
        }
    }
    Ok(traj)
}

/// Sup-norm residuals of the scalar evolution equations
/// `∂H/∂t = ΔH − H|A|²` and `∂|A|²/∂t = Δ|A|² − 2|∇A|² − 2|A|⁴`,
/// with time derivatives from centered steps `±dt` of the simplified flow.
pub fn scalar_evolution_residual(state: &AnyState, dt: f64) -> Result<(f64, f64)> {
    match state {
        AnyState::Grid(s) => {
            let fwd = step(s, dt, FlowForm::Simplified)?;
            let bwd = step(s, -dt, FlowForm::Simplified)?;
            let scalars = |st: &SpacelikeState| -> Result<(Vec<f64>, Vec<f64>)> {
                let conn = st.connection()?;
                Ok(st
                    .h
                    .values
                    .iter()
                    .zip(&conn.inverse)
                    .map(|(h, inv)| mean_and_norm(inv, h))
                    .unzip())
            };
            let (hp, ap) = scalars(&fwd)?;
            let (hm, am) = scalars(&bwd)?;
            let a = crate::spacelike::Analysis::new(s)?;
            let lap_h = scalar_laplacian_with(&s.grid, &a.conn, &a.scalars.mean);
            let lap_a = scalar_laplacian_with(&s.grid, &a.conn, &a.scalars.a2);
            let mut res_h: f64 = 0.0;
            let mut res_a: f64 = 0.0;
            for node in 0..s.grid.len() {
                let hv = a.scalars.mean.values[node];
                let av = a.scalars.a2.values[node];
                let dh = (hp[node] - hm[node]) / (2.0 * dt);
                let da = (ap[node] - am[node]) / (2.0 * dt);
                res_h = res_h.max((dh - (lap_h.values[node] - hv * av)).abs());
                let rhs = lap_a.values[node] - 2.0 * a.scalars.grad_a2.values[node] - 2.0 * av * av;
                res_a = res_a.max((da - rhs).abs());
            }
            Ok((res_h, res_a))
        }
        AnyState::Homogeneous(s) => {
            // Richardson-extrapolated centered differences
            let centered = |d: f64| {
                let fwd = step_homogeneous(s, d, FlowForm::Simplified);
                let bwd = step_homogeneous(s, -d, FlowForm::Simplified);
                (
                    (fwd.mean_curvature() - bwd.mean_curvature()) / (2.0 * d),
                    (fwd.a2() - bwd.a2()) / (2.0 * d),
                )
            };
            let (coarse, fine) = (centered(dt), centered(0.5 * dt));
            let dh = (4.0 * fine.0 - coarse.0) / 3.0;
            let da = (4.0 * fine.1 - coarse.1) / 3.0;
            let (hv, av) = (s.mean_curvature(), s.a2());
            Ok(((dh + hv * av).abs(), (da + 2.0 * av * av).abs()))
        }
    }
}
