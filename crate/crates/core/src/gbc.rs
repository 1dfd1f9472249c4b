//! Gauss–Bonnet–Chern integrand for space-like manifolds.
//!
//! Two independent evaluations of the Euler form density per unit volume:
//! the closed form `(−1)^{n/2} (2 / vol Sⁿ) det h / det g`, and a literal
//! ε-contraction of curvature 2-forms built from `R = −(h∧h)`. The second
//! exists to check the first.

use std::f64::consts::PI;

use itertools::Itertools;
use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// `vol(Sⁿ) = 2π^{(n+1)/2} / Γ((n+1)/2)`, via `vol Sⁿ = 2π/(n−1) · vol Sⁿ⁻²`.
pub fn sphere_volume(n: usize) -> f64 {
    match n {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 1.0) * sphere_volume(n - 2),
    }
}

/// `(−1)^{n/2}` for even `n`.
pub fn parity_sign(n: usize) -> f64 {
    if (n / 2).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `(−1)^{n/2} · 2 / vol(Sⁿ)`, the factor turning `det h / det g` into the Euler density.
pub fn euler_prefactor(n: usize) -> f64 {
    parity_sign(n) * 2.0 / sphere_volume(n)
}

fn check_pair(g: &DMatrix<f64>, h: &DMatrix<f64>, n: usize) -> Result<()> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::OddDimension(n));
    }
    if g.shape() != (n, n) || h.shape() != (n, n) {
        return Err(Error::InvalidInput(format!(
            "expected {n}x{n} matrices, got {:?} and {:?}",
            g.shape(),
            h.shape()
        )));
    }
    Ok(())
}

fn spd_determinant(g: &DMatrix<f64>) -> Result<f64> {
    let det = g.determinant();
    if g.clone().cholesky().is_none() || !(det > 0.0) {
        return Err(Error::SingularMetric(det));
    }
    Ok(det)
}

/// Euler form density per unit volume from the determinant closed form.
pub fn chern_density_closed_form(g: &DMatrix<f64>, h: &DMatrix<f64>, n: usize) -> Result<f64> {
    check_pair(g, h, n)?;
    let det_g = spd_determinant(g)?;
    Ok(euler_prefactor(n) * h.determinant() / det_g)
}

/// Euler form density per unit volume from the Pfaffian of the curvature forms.
///
/// With `R_{ijkl} = −(h_{ik}h_{jl} − h_{il}h_{jk})` and 2-forms
/// `Ω_{ij} = Σ_{k<l} R_{ijkl} dx^k∧dx^l`, the top form
/// `Σ ε^{i_1…i_n} Ω_{i_1i_2}∧…∧Ω_{i_{n−1}i_n} / (2ⁿ π^{n/2} (n/2)!)`
/// is expanded term by term. Upper indices carry the tensor ε, so its
/// coefficient on `dx¹∧…∧dxⁿ` is divided by `sqrt(det g)` once more to
/// give a density per unit `dv`.
pub fn chern_density_pfaffian(g: &DMatrix<f64>, h: &DMatrix<f64>, n: usize) -> Result<f64> {
    check_pair(g, h, n)?;
    if !matches!(n, 2 | 4 | 6) {
        return Err(Error::UnsupportedDimension(n));
    }
    let det_g = spd_determinant(g)?;
    let r =
        |i: usize, j: usize, k: usize, l: usize| -(h[(i, k)] * h[(j, l)] - h[(i, l)] * h[(j, k)]);

    let perms: Vec<(Vec<usize>, f64)> = (0..n)
        .permutations(n)
        .map(|p| {
            let s = permutation_sign(&p);
            (p, s)
        })
        .collect();

    // Wedge of n/2 two-forms: summing over ordered index pairs with weight
    // 1/2 each is the same as summing Ω's k<l components.
    let mut total = 0.0;
    for (sigma, s_sigma) in &perms {
        let mut inner = 0.0;
        for (tau, s_tau) in &perms {
            let mut prod = *s_tau;
            for pair in 0..n / 2 {
                let (a, b) = (sigma[2 * pair], sigma[2 * pair + 1]);
                let (c, d) = (tau[2 * pair], tau[2 * pair + 1]);
                prod *= 0.5 * r(a, b, c, d);
                if prod == 0.0 {
                    break;
                }
            }
            inner += prod;
        }
        total += s_sigma * inner;
    }
    let half = n / 2;
    let factorial: f64 = (1..=half).map(|k| k as f64).product();
    let norm = 2f64.powi(n as i32) * PI.powi(half as i32) * factorial;
    // one 1/sqrt(det g) from ε^{i...}, one from dx¹∧…∧dxⁿ = dv / sqrt(det g)
    Ok(total / norm / det_g)
}

fn permutation_sign(p: &[usize]) -> f64 {
    let mut inversions = 0usize;
    for i in 0..p.len() {
        for j in (i + 1)..p.len() {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}
