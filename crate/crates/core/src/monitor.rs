//! Functionals, inequalities and certificates evaluated along a flow.
//!
//! Every check keeps the raw measured value next to its threshold, and every
//! threshold carries its discretization allowance explicitly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::TrajectoryRecord;
use crate::gbc::{parity_sign, sphere_volume};
use crate::grid::DIM;
use crate::spacelike::{
    codazzi_from_gradient, gauss_residual_with, sup_sectional_from_h, Analysis, AnyState,
    HomogeneousState, SpacelikeState,
};
use crate::tensor::{det2, integrate_with_det};

pub const CSV_COLUMNS: [&str; 14] = [
    "t",
    "dt",
    "vol",
    "MH",
    "MA",
    "pinch",
    "amax2",
    "bound24",
    "gauss_res",
    "codazzi_res",
    "chi",
    "gbc_gap",
    "cs_bound",
    "cert",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorRecord {
    pub t: f64,
    /// Step size of the step that landed on this record.
    pub dt: f64,
    pub vol: f64,
    /// `∫ Hⁿ dv`
    pub mh: f64,
    /// `∫ |A|ⁿ dv`
    pub ma: f64,
    /// `∫ |A|ⁿ |h − (H/n) g|² dv`
    pub pinch: f64,
    pub amax2: f64,
    /// `1 / (2t + 1/|A|²_max(0))`, zero when `|A|²_max(0) = 0`.
    pub bound24: f64,
    pub gauss_res: f64,
    pub codazzi_res: f64,
    pub chi: f64,
    /// `∫ |det h / det g − (H/n)ⁿ| dv`
    pub gbc_gap: f64,
    /// `n · sqrt(pinch) · sqrt(∫ |A|^{n−2} dv)`
    pub cs_bound: f64,
    /// `sup|K|^{n/2} · vol`: volume of the rescaled metric `sup|K| · g`.
    pub cert: f64,
}

impl MonitorRecord {
    pub fn values(&self) -> [f64; 14] {
        [
            self.t,
            self.dt,
            self.vol,
            self.mh,
            self.ma,
            self.pinch,
            self.amax2,
            self.bound24,
            self.gauss_res,
            self.codazzi_res,
            self.chi,
            self.gbc_gap,
            self.cs_bound,
            self.cert,
        ]
    }

    pub fn from_values(v: &[f64]) -> Result<Self> {
        if v.len() != CSV_COLUMNS.len() {
            return Err(Error::InvalidInput(format!(
                "expected 14 columns, got {}",
                v.len()
            )));
        }
        Ok(Self {
            t: v[0],
            dt: v[1],
            vol: v[2],
            mh: v[3],
            ma: v[4],
            pinch: v[5],
            amax2: v[6],
            bound24: v[7],
            gauss_res: v[8],
            codazzi_res: v[9],
            chi: v[10],
            gbc_gap: v[11],
            cs_bound: v[12],
            cert: v[13],
        })
    }
}

/// Cheap per-step sample for time-resolved volume checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenseSample {
    pub t: f64,
    pub vol: f64,
    /// `∫ H² dv`
    pub int_h2: f64,
    /// `∫ Hⁿ dv`
    pub mh: f64,
    /// `∫ |A|^{n−2} dv`
    pub int_a_nm2: f64,
}

pub const DENSE_COLUMNS: [&str; 5] = ["t", "vol", "int_h2", "MH", "int_a_nm2"];

pub fn decay_bound(t: f64, amax2_initial: f64) -> f64 {
    if amax2_initial > 0.0 {
        1.0 / (2.0 * t + 1.0 / amax2_initial)
    } else {
        0.0
    }
}

fn pow_half(a2: f64, n: usize) -> f64 {
    // (|A|²)^{n/2} for even n
    a2.powi((n / 2) as i32)
}

pub fn record_grid(state: &SpacelikeState, amax2_initial: f64, dt: f64) -> Result<MonitorRecord> {
    let n = DIM;
    let a = Analysis::new(state)?;
    let grid = &state.grid;
    let det = &a.conn.det;
    let s = &a.scalars;
    let integrate = |f: &dyn Fn(usize) -> f64| -> Result<f64> {
        let vals: Vec<f64> = (0..grid.len()).map(f).collect();
        integrate_with_det(grid, det, &vals)
    };
    let vol = integrate(&|_| 1.0)?;
    let mh = integrate(&|k| s.mean.values[k].powi(n as i32))?;
    let ma = integrate(&|k| pow_half(s.a2.values[k], n))?;
    let pinch = integrate(&|k| pow_half(s.a2.values[k], n) * s.traceless2.values[k])?;
    let int_a_nm2 = integrate(&|k| pow_half(s.a2.values[k], n - 2))?;
    let ratio = |k: usize| det2(&state.h.values[k]) / det[k];
    let gbc_gap = integrate(&|k| (ratio(k) - (s.mean.values[k] / n as f64).powi(n as i32)).abs())?;
    let chi = crate::gbc::euler_prefactor(n) * integrate(&ratio)?;
    let (gauss_res, _) = gauss_residual_with(state, &a.conn);
    let sup_k = sup_sectional_from_h(state);
    Ok(MonitorRecord {
        t: state.t,
        dt,
        vol,
        mh,
        ma,
        pinch,
        amax2: s.a2.max(),
        bound24: decay_bound(state.t, amax2_initial),
        gauss_res,
        codazzi_res: codazzi_from_gradient(&a.grad),
        chi,
        gbc_gap,
        cs_bound: n as f64 * pinch.sqrt() * int_a_nm2.sqrt(),
        cert: sup_k.powi((n / 2) as i32) * vol,
    })
}

pub fn record_homogeneous(state: &HomogeneousState, amax2_initial: f64, dt: f64) -> MonitorRecord {
    let n = state.n;
    let vol = state.volume();
    let mean = state.mean_curvature();
    let a2 = state.a2();
    let ratio = (state.psi / state.phi).powi(n as i32);
    let gap = (ratio - (mean / n as f64).powi(n as i32)).abs() * vol;
    MonitorRecord {
        t: state.t,
        dt,
        vol,
        mh: mean.powi(n as i32) * vol,
        ma: pow_half(a2, n) * vol,
        // h = (ψ/φ) g is umbilic
        pinch: 0.0,
        amax2: a2,
        bound24: decay_bound(state.t, amax2_initial),
        gauss_res: state.gauss_residual(),
        codazzi_res: 0.0,
        chi: state.euler_characteristic(),
        gbc_gap: gap,
        cs_bound: 0.0,
        cert: state.sup_sectional().powi((n / 2) as i32) * vol,
    }
}

pub fn dense_grid(state: &SpacelikeState) -> Result<DenseSample> {
    let n = DIM;
    let mut det = Vec::with_capacity(state.grid.len());
    let mut h2 = Vec::with_capacity(state.grid.len());
    let mut hn = Vec::with_capacity(state.grid.len());
    let mut anm2 = Vec::with_capacity(state.grid.len());
    for (node, (g, h)) in state.g.values.iter().zip(&state.h.values).enumerate() {
        let inv = crate::tensor::inv_spd2(g).ok_or(Error::NotPositiveDefinite { node })?;
        let (mean, a2) = crate::spacelike::mean_and_norm(&inv, h);
        det.push(det2(g));
        h2.push(mean * mean);
        hn.push(mean.powi(n as i32));
        anm2.push(pow_half(a2, n - 2));
    }
    let ones = vec![1.0; det.len()];
    Ok(DenseSample {
        t: state.t,
        vol: integrate_with_det(&state.grid, &det, &ones)?,
        int_h2: integrate_with_det(&state.grid, &det, &h2)?,
        mh: integrate_with_det(&state.grid, &det, &hn)?,
        int_a_nm2: integrate_with_det(&state.grid, &det, &anm2)?,
    })
}

pub fn dense_homogeneous(state: &HomogeneousState) -> DenseSample {
    let vol = state.volume();
    let mean = state.mean_curvature();
    DenseSample {
        t: state.t,
        vol,
        int_h2: mean * mean * vol,
        mh: mean.powi(state.n as i32) * vol,
        int_a_nm2: pow_half(state.a2(), state.n - 2) * vol,
    }
}

fn record_any(state: &AnyState) -> Result<MonitorRecord> {
    match state {
        AnyState::Grid(s) => record_grid(s, 0.0, 0.0),
        AnyState::Homogeneous(s) => Ok(record_homogeneous(s, 0.0, 0.0)),
    }
}

/// `(∫ Hⁿ dv, ∫ |A|ⁿ dv)`.
pub fn monotone_functionals(state: &AnyState) -> Result<(f64, f64)> {
    let r = record_any(state)?;
    Ok((r.mh, r.ma))
}

/// `∫ |A|ⁿ |h − (H/n) g|² dv`.
pub fn pinching_integral(state: &AnyState) -> Result<f64> {
    Ok(record_any(state)?.pinch)
}

/// `(gap, cs_bound)` of the determinant-versus-mean-curvature chain.
pub fn gbc_approx_chain(state: &AnyState) -> Result<(f64, f64)> {
    let r = record_any(state)?;
    Ok((r.gbc_gap, r.cs_bound))
}

/// `(1/vol Sⁿ) ∫ |H|ⁿ dv − (−1)^{n/2} (nⁿ/2) χ`.
pub fn corollary_energy_gap(state: &AnyState, chi: f64) -> Result<f64> {
    let r = record_any(state)?;
    Ok(energy_gap(state.dimension(), r.mh, chi))
}

/// Energy gap from `∫ Hⁿ dv` (equal to `∫ |H|ⁿ` for even `n`) and `χ`.
pub fn energy_gap(n: usize, mh: f64, chi: f64) -> f64 {
    let nn = (n as f64).powi(n as i32);
    mh / sphere_volume(n) - parity_sign(n) * nn / 2.0 * chi
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetInequality {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `|Π λ − (Σλ/n)ⁿ| ≤ n |λ|^{n−1} |λ − (Σλ/n)|` for the principal curvatures `λ`.
pub fn pointwise_det_inequality(eigenvalues: &[f64]) -> Result<DetInequality> {
    let n = eigenvalues.len();
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::OddDimension(n));
    }
    let nf = n as f64;
    let mean = eigenvalues.iter().sum::<f64>() / nf;
    let prod: f64 = eigenvalues.iter().product();
    let norm2: f64 = eigenvalues.iter().map(|l| l * l).sum();
    let traceless: f64 = eigenvalues
        .iter()
        .map(|l| (l - mean).powi(2))
        .sum::<f64>()
        .sqrt();
    let lhs = (prod - mean.powi(n as i32)).abs();
    let rhs = nf * norm2.powf((nf - 1.0) / 2.0) * traceless;
    Ok(DetInequality {
        lhs,
        rhs,
        holds: lhs <= rhs,
    })
}

/// Largest `amax2 − bound24` over the records.
pub fn amax_bound_check(records: &[MonitorRecord]) -> f64 {
    records
        .iter()
        .map(|r| r.amax2 - r.bound24)
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeGrowthReport {
    /// `max |ΔVol/Δt − ∫H²dv|` over steps, trapezoid in time.
    pub rate_residual: f64,
    /// `max [Vol^{2/n}(t) − Vol^{2/n}(0) − (2/n) ∫₀ᵗ MH^{2/n} ds]`; positive means violated.
    pub integrated_violation: f64,
    /// `Vol(T) / (1+T)^{n/2}` at the final sample.
    pub ratio: f64,
    /// `(2/n)^{n/2} · MH(T)`.
    pub ratio_reference: f64,
}

pub fn volume_growth_check(n: usize, dense: &[DenseSample]) -> Result<VolumeGrowthReport> {
    let first = dense.first().ok_or(Error::EmptyTrajectory)?;
    let last = dense.last().unwrap();
    let nf = n as f64;
    let mut rate_residual: f64 = 0.0;
    let mut violation: f64 = 0.0;
    let mut integral = 0.0;
    let base = first.vol.powf(2.0 / nf);
    for w in dense.windows(2) {
        let dt = w[1].t - w[0].t;
        if dt <= 0.0 {
            continue;
        }
        let rate = (w[1].vol - w[0].vol) / dt;
        rate_residual = rate_residual.max((rate - 0.5 * (w[0].int_h2 + w[1].int_h2)).abs());
        integral += 0.5 * dt * (w[0].mh.max(0.0).powf(2.0 / nf) + w[1].mh.max(0.0).powf(2.0 / nf));
        let lhs = w[1].vol.powf(2.0 / nf) - base;
        violation = violation.max(lhs - 2.0 / nf * integral);
    }
    Ok(VolumeGrowthReport {
        rate_residual,
        integrated_violation: violation,
        ratio: last.vol / (1.0 + last.t).powf(nf / 2.0),
        ratio_reference: (2.0 / nf).powf(nf / 2.0) * last.mh,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub t: f64,
    pub sup_k: f64,
    pub rescaled_volume: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateOutcome {
    /// Rescaled volumes fall below 0.2× the first checkpoint's (or vanish).
    Collapse,
    /// Rescaled volumes stay at a positive constant.
    Obstructed,
    Inconclusive,
}

pub const COLLAPSE_RATIO: f64 = 0.2;
pub const OBSTRUCTION_REL_TOL: f64 = 1e-6;

/// Certificate entries at the checkpoints (`t > 0`) of a trajectory.
pub fn minvol_certificate(n: usize, records: &[MonitorRecord]) -> Result<Vec<CertificateEntry>> {
    let entries: Vec<CertificateEntry> = records
        .iter()
        .filter(|r| r.t > 0.0)
        .map(|r| CertificateEntry {
            t: r.t,
            sup_k: if r.vol > 0.0 {
                (r.cert / r.vol).powf(2.0 / n as f64)
            } else {
                0.0
            },
            rescaled_volume: r.cert,
        })
        .collect();
    if entries.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    Ok(entries)
}

pub fn classify_certificate(entries: &[CertificateEntry]) -> CertificateOutcome {
    let (Some(first), Some(last)) = (entries.first(), entries.last()) else {
        return CertificateOutcome::Inconclusive;
    };
    let v0 = first.rescaled_volume;
    if entries.iter().all(|e| e.rescaled_volume == 0.0) {
        return CertificateOutcome::Collapse;
    }
    if entries.len() >= 2 && last.rescaled_volume < COLLAPSE_RATIO * v0 {
        return CertificateOutcome::Collapse;
    }
    if v0 > 0.0
        && entries
            .iter()
            .all(|e| (e.rescaled_volume - v0).abs() <= OBSTRUCTION_REL_TOL * v0)
    {
        return CertificateOutcome::Obstructed;
    }
    CertificateOutcome::Inconclusive
}

// ---------------------------------------------------------------------------
// Named checks

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// Measured value compared against `threshold`.
    pub value: f64,
    pub threshold: f64,
    pub note: String,
}

fn check(name: &str, pass: bool, value: f64, threshold: f64, note: impl Into<String>) -> Check {
    Check {
        name: name.to_string(),
        pass,
        value,
        threshold,
        note: note.into(),
    }
}

/// Names of every check produced by [`evaluate_checks`], in order.
pub const CHECK_NAMES: [&str; 17] = [
    "flow_completed",
    "monotone_MH",
    "monotone_MA",
    "decay_bound",
    "pinching_decay",
    "c1_witness",
    "volume_rate",
    "volume_growth",
    "volume_ratio",
    "gbc_chain",
    "chi_limit_surrogate",
    "corollary_energy",
    "euler_sign",
    "chi_constant",
    "gauss_preservation",
    "codazzi_preservation",
    "minvol_certificate",
];

/// Context a set of records needs to be judged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub dimension: usize,
    /// `None` for homogeneous states.
    pub spacing: Option<f64>,
    pub steps: usize,
    pub abort: Option<String>,
}

impl TrajectoryMeta {
    pub fn of(traj: &TrajectoryRecord) -> Self {
        Self {
            dimension: traj.dimension,
            spacing: traj.spacing,
            steps: traj.steps,
            abort: traj.abort.clone(),
        }
    }

    /// `|χ|` tolerance: quadrature error on grids, round-off for closed forms.
    pub fn chi_tol(&self) -> f64 {
        if self.spacing.is_some() {
            1e-3
        } else {
            1e-9
        }
    }

    /// Discretization allowance `c · spacing²`, or a round-off floor without a grid.
    fn allowance(&self, c: f64) -> f64 {
        match self.spacing {
            Some(dx) => c * dx * dx,
            None => 1e-10,
        }
    }
}

/// Monotonicity slack: `1e-6` absolute plus `1e-4` relative.
pub const MONO_ABS: f64 = 1e-6;
pub const MONO_REL: f64 = 1e-4;

fn max_increase(values: impl Iterator<Item = f64>) -> (f64, bool) {
    let v: Vec<f64> = values.collect();
    let mut worst = f64::NEG_INFINITY;
    let mut ok = true;
    for w in v.windows(2) {
        let inc = w[1] - w[0];
        worst = worst.max(inc);
        if inc > MONO_ABS + MONO_REL * w[0].abs() {
            ok = false;
        }
    }
    (if v.len() < 2 { 0.0 } else { worst }, ok)
}

pub fn evaluate_checks(
    meta: &TrajectoryMeta,
    records: &[MonitorRecord],
    dense: &[DenseSample],
) -> Result<Vec<Check>> {
    let first = records.first().ok_or(Error::EmptyTrajectory)?;
    let n = meta.dimension;
    let nf = n as f64;
    let gbc = 2.0 / sphere_volume(n);
    let sign = parity_sign(n);
    let chi_tol = meta.chi_tol();
    let mut out = Vec::with_capacity(CHECK_NAMES.len());

    out.push(check(
        "flow_completed",
        meta.abort.is_none(),
        meta.steps as f64,
        0.0,
        meta.abort.clone().unwrap_or_else(|| "reached t_end".into()),
    ));

    let (inc, ok) = max_increase(records.iter().map(|r| r.mh));
    out.push(check(
        "monotone_MH",
        ok,
        inc,
        MONO_ABS,
        "max increase of ∫Hⁿdv between records; slack 1e-6 + 1e-4·|MH|",
    ));
    let (inc, ok) = max_increase(records.iter().map(|r| r.ma));
    out.push(check(
        "monotone_MA",
        ok,
        inc,
        MONO_ABS,
        "max increase of ∫|A|ⁿdv between records; slack 1e-6 + 1e-4·|MA|",
    ));

    let violation = amax_bound_check(records);
    let tol = 1e-6 + meta.spacing.map_or(0.0, |dx| 0.01 * dx * dx);
    out.push(check(
        "decay_bound",
        violation <= tol,
        violation,
        tol,
        "max(amax2 − bound24); allowance 1e-6 + 0.01·spacing²",
    ));

    let cps: Vec<&MonitorRecord> = records.iter().filter(|r| r.t > 0.0).collect();
    let (pass, value, threshold, note) = match (cps.first(), cps.last()) {
        (Some(a), Some(b)) if b.t >= 4.0 * a.t => {
            let (fa, fb) = (a.t * a.pinch, b.t * b.pinch);
            (
                fb <= fa,
                fb,
                fa,
                "t·pinch at last checkpoint vs first checkpoint",
            )
        }
        _ => (
            true,
            0.0,
            0.0,
            "horizon shorter than two checkpoint doublings; trend not assessed",
        ),
    };
    out.push(check("pinching_decay", pass, value, threshold, note));

    // C₁ witness: Hölder plus the integrated volume inequality give
    // ∫|A|^{n−2} / (1+t) ≤ MA(0)^{(n−2)/n} · max(Vol(0)^{2/n}, (2/n) MH(0)^{2/n}).
    let c1 = {
        let d0 = dense.first().ok_or(Error::EmptyTrajectory)?;
        first.ma.powf((nf - 2.0) / nf)
            * d0.vol
                .powf(2.0 / nf)
                .max(2.0 / nf * d0.mh.max(0.0).powf(2.0 / nf))
    };
    let witness = dense
        .iter()
        .map(|d| d.int_a_nm2 / (1.0 + d.t))
        .fold(0.0, f64::max);
    let c1_tol = c1 * (1.0 + MONO_REL) + MONO_ABS;
    out.push(check(
        "c1_witness",
        witness <= c1_tol,
        witness,
        c1_tol,
        "sup ∫|A|^{n−2}dv/(1+t) against the Hölder bound from initial data",
    ));

    let vg = volume_growth_check(n, dense)?;
    let scale = dense.iter().map(|d| d.int_h2.abs()).fold(1.0, f64::max);
    let rate_tol = 1e-6 * scale;
    out.push(check(
        "volume_rate",
        vg.rate_residual <= rate_tol,
        vg.rate_residual,
        rate_tol,
        "max |ΔVol/Δt − ∫H²dv| per step",
    ));
    out.push(check(
        "volume_growth",
        vg.integrated_violation <= 1e-4,
        vg.integrated_violation,
        1e-4,
        "max violation of the integrated Vol^{2/n} growth inequality",
    ));
    out.push(check(
        "volume_ratio",
        vg.ratio.is_finite() && vg.ratio_reference.is_finite(),
        vg.ratio,
        vg.ratio_reference,
        "finite-horizon Vol/(1+t)^{n/2} against (2/n)^{n/2}·MH(T); limsup not asserted",
    ));

    let chain = records
        .iter()
        .map(|r| r.gbc_gap - r.cs_bound)
        .fold(f64::NEG_INFINITY, f64::max);
    let chain_ok = records
        .iter()
        .all(|r| r.gbc_gap <= r.cs_bound + 1e-9 * r.cs_bound.max(1.0));
    out.push(check(
        "gbc_chain",
        chain_ok,
        chain,
        0.0,
        "max(gbc_gap − cs_bound); slack 1e-9·max(1, cs_bound)",
    ));

    let mut surrogate = f64::NEG_INFINITY;
    let mut surrogate_ok = true;
    for r in records {
        let lhs = (sign * r.chi - gbc * r.mh / nf.powi(n as i32)).abs();
        let rhs = gbc * r.gbc_gap;
        surrogate = surrogate.max(lhs - rhs);
        surrogate_ok &= lhs <= rhs + 1e-9 * r.chi.abs().max(1.0);
    }
    out.push(check(
        "chi_limit_surrogate",
        surrogate_ok,
        surrogate,
        0.0,
        "max(|(−1)^{n/2}χ − (2/vol Sⁿ)∫(H/n)ⁿ| − (2/vol Sⁿ)·gap)",
    ));

    let mut energy = f64::INFINITY;
    let mut energy_ok = true;
    for r in records {
        let e = energy_gap(n, r.mh, r.chi);
        energy = energy.min(e);
        let scale = (r.mh / sphere_volume(n)).abs().max(1.0);
        energy_ok &= e >= -1e-9 * scale;
    }
    out.push(check(
        "corollary_energy",
        energy_ok,
        energy,
        -1e-9,
        "min over records of the energy gap",
    ));

    let signed = records
        .iter()
        .map(|r| sign * r.chi)
        .fold(f64::INFINITY, f64::min);
    out.push(check(
        "euler_sign",
        signed >= -chi_tol,
        signed,
        -chi_tol,
        "min (−1)^{n/2}χ; non-strict inequality",
    ));

    let drift = records
        .iter()
        .map(|r| (r.chi - first.chi).abs())
        .fold(0.0, f64::max);
    out.push(check(
        "chi_constant",
        drift <= chi_tol,
        drift,
        chi_tol,
        "max |χ(t) − χ(0)|",
    ));

    let g_tol = 3.0 * first.gauss_res + meta.allowance(5.0);
    let g_max = records.iter().map(|r| r.gauss_res).fold(0.0, f64::max);
    out.push(check(
        "gauss_preservation",
        g_max <= g_tol,
        g_max,
        g_tol,
        "3·initial + 5·spacing²",
    ));
    let c_tol = 3.0 * first.codazzi_res + meta.allowance(5.0);
    let c_max = records.iter().map(|r| r.codazzi_res).fold(0.0, f64::max);
    out.push(check(
        "codazzi_preservation",
        c_max <= c_tol,
        c_max,
        c_tol,
        "3·initial + 5·spacing²",
    ));

    let cert = match minvol_certificate(n, records) {
        Ok(entries) => {
            let outcome = classify_certificate(&entries);
            let expected = if first.chi.abs() <= chi_tol {
                CertificateOutcome::Collapse
            } else {
                CertificateOutcome::Obstructed
            };
            let (a, b) = (
                entries[0].rescaled_volume,
                entries.last().unwrap().rescaled_volume,
            );
            let ratio = if a > 0.0 { b / a } else { 0.0 };
            check(
                "minvol_certificate",
                outcome == expected,
                ratio,
                COLLAPSE_RATIO,
                format!("{outcome:?}, expected {expected:?}; value is last/first rescaled volume"),
            )
        }
        Err(_) => check(
            "minvol_certificate",
            false,
            f64::NAN,
            COLLAPSE_RATIO,
            "no checkpoints",
        ),
    };
    out.push(cert);
    debug_assert_eq!(out.len(), CHECK_NAMES.len());
    Ok(out)
}

pub fn evaluate_trajectory(traj: &TrajectoryRecord) -> Result<Vec<Check>> {
    evaluate_checks(&TrajectoryMeta::of(traj), &traj.records, &traj.dense)
}
