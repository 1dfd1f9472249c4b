//! Finite-difference tensor calculus on the periodic chart.
//!
//! First derivatives are second-order central differences. Second
//! derivatives of fields use the compact stencils from [`GridChart::d2`], so
//! principal parts of curvature and Laplacians damp the grid-scale mode.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{
    identity2, CurvatureField, Rank3, Rank4, ScalarField, Sym2, SymTensorField, ThirdOrderField,
    Variance,
};
use crate::grid::{GridChart, DIM};

#[inline]
pub fn det2(m: &Sym2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Inverse of a symmetric positive-definite 2×2 matrix, `None` otherwise.
#[inline]
pub fn inv_spd2(m: &Sym2) -> Option<Sym2> {
    let d = det2(m);
    if !(m[0][0] > 0.0 && d > 0.0 && d.is_finite()) {
        return None;
    }
    let off = -0.5 * (m[0][1] + m[1][0]) / d;
    Some([[m[1][1] / d, off], [off, m[0][0] / d]])
}

#[inline]
pub fn matmul(a: &Sym2, b: &Sym2) -> Sym2 {
    let mut out = [[0.0; DIM]; DIM];
    for i in 0..DIM {
        for j in 0..DIM {
            out[i][j] = (0..DIM).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// `Σ a^{ij} b_{ij}`.
#[inline]
pub fn contract(a: &Sym2, b: &Sym2) -> f64 {
    let mut s = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            s += a[i][j] * b[i][j];
        }
    }
    s
}

/// Largest eigenvalue of a symmetric 2×2 matrix.
#[inline]
pub fn max_eigenvalue2(m: &Sym2) -> f64 {
    let mean = 0.5 * (m[0][0] + m[1][1]);
    let half = 0.5 * (m[0][0] - m[1][1]);
    mean + (half * half + m[0][1] * m[1][0]).sqrt()
}

pub fn metric_inverse(g: &SymTensorField) -> Result<SymTensorField> {
    let values = g
        .values
        .par_iter()
        .enumerate()
        .map(|(node, m)| inv_spd2(m).ok_or(Error::NotPositiveDefinite { node }))
        .collect::<Result<Vec<_>>>()?;
    Ok(SymTensorField {
        values,
        variance: Variance::Contravariant,
    })
}

pub fn metric_determinant(g: &SymTensorField) -> ScalarField {
    ScalarField::new(g.values.iter().map(det2).collect())
}

/// Per-node metric data shared by the differential operators.
#[derive(Debug, Clone)]
pub struct Connection {
    pub inverse: Vec<Sym2>,
    pub det: Vec<f64>,
    /// `gamma[node][k][i][j] = Γ^k_{ij}`.
    pub gamma: Vec<Rank3>,
}

impl Connection {
    pub fn new(grid: &GridChart, g: &SymTensorField) -> Result<Self> {
        g.validate(grid)?;
        let inverse = metric_inverse(g)?.values;
        let det = g.values.iter().map(det2).collect();
        let dgc = first_derivatives(grid, &components(g));
        let gamma = (0..grid.len())
            .into_par_iter()
            .map(|node| {
                // dg[l][i][j] = ∂_l g_{ij}
                let dg: Rank3 = std::array::from_fn(|l| {
                    std::array::from_fn(|i| std::array::from_fn(|j| dgc[l][i][j][node]))
                });
                let inv = &inverse[node];
                let mut out = [[[0.0; DIM]; DIM]; DIM];
                for k in 0..DIM {
                    for i in 0..DIM {
                        for j in i..DIM {
                            let mut s = 0.0;
                            for l in 0..DIM {
                                s += inv[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
                            }
                            out[k][i][j] = 0.5 * s;
                            out[k][j][i] = 0.5 * s;
                        }
                    }
                }
                out
            })
            .collect();
        Ok(Self {
            inverse,
            det,
            gamma,
        })
    }
}

pub(crate) fn components(f: &SymTensorField) -> [[Vec<f64>; DIM]; DIM] {
    std::array::from_fn(|i| std::array::from_fn(|j| f.component(i, j)))
}

/// `out[l][i][j] = ∂_l f_{ij}` for a symmetric component array.
pub(crate) fn first_derivatives(
    grid: &GridChart,
    comps: &[[Vec<f64>; DIM]; DIM],
) -> [[[Vec<f64>; DIM]; DIM]; DIM] {
    std::array::from_fn(|l| {
        let d01 = grid.d1_all(&comps[0][1], l);
        [
            [grid.d1_all(&comps[0][0], l), d01.clone()],
            [d01, grid.d1_all(&comps[1][1], l)],
        ]
    })
}

/// `out[i][j][a][b] = ∂_a ∂_b f_{ij}` for a symmetric component array.
pub(crate) fn second_derivatives(
    grid: &GridChart,
    comps: &[[Vec<f64>; DIM]; DIM],
) -> [[[[Vec<f64>; DIM]; DIM]; DIM]; DIM] {
    let all = |c: &Vec<f64>| {
        let cross = grid.d2_all(c, 0, 1);
        [
            [grid.d2_all(c, 0, 0), cross.clone()],
            [cross, grid.d2_all(c, 1, 1)],
        ]
    };
    let off = all(&comps[0][1]);
    [[all(&comps[0][0]), off.clone()], [off, all(&comps[1][1])]]
}

pub fn christoffel(grid: &GridChart, g: &SymTensorField) -> Result<ThirdOrderField> {
    Ok(ThirdOrderField {
        values: Connection::new(grid, g)?.gamma,
    })
}

pub fn riemann_curvature(grid: &GridChart, g: &SymTensorField) -> Result<CurvatureField> {
    let conn = Connection::new(grid, g)?;
    Ok(riemann_with(grid, g, &conn))
}

pub(crate) fn riemann_with(
    grid: &GridChart,
    g: &SymTensorField,
    conn: &Connection,
) -> CurvatureField {
    let dd = second_derivatives(grid, &components(g));
    let raw: Vec<(Rank4, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|node| {
            let d2 = |i: usize, j: usize, a: usize, b: usize| dd[i][j][a][b][node];
            let gam = &conn.gamma[node];
            let gm = &g.values[node];
            let mut r = [[[[0.0; DIM]; DIM]; DIM]; DIM];
            for a in 0..DIM {
                for b in 0..DIM {
                    for c in 0..DIM {
                        for d in 0..DIM {
                            let second = 0.5
                                * (d2(a, d, b, c) + d2(b, c, a, d)
                                    - d2(b, d, a, c)
                                    - d2(a, c, b, d));
                            let mut quad = 0.0;
                            for m in 0..DIM {
                                for n in 0..DIM {
                                    quad += gm[m][n]
                                        * (gam[m][b][c] * gam[n][a][d]
                                            - gam[m][b][d] * gam[n][a][c]);
                                }
                            }
                            r[a][b][c][d] = second + quad;
                        }
                    }
                }
            }
            symmetrize_curvature(&r)
        })
        .collect();
    let raw_asymmetry = raw.iter().fold(0.0, |m: f64, (_, e)| m.max(*e));
    CurvatureField {
        values: raw.into_iter().map(|(r, _)| r).collect(),
        raw_asymmetry,
    }
}

/// Projects onto the algebraic curvature symmetries. Every entry is copied
/// (with sign) from one canonical representative, so the symmetries hold
/// exactly. Returns the projected tensor and the largest raw deviation.
pub fn symmetrize_curvature(r: &Rank4) -> (Rank4, f64) {
    let avg = |a: usize, b: usize, c: usize, d: usize| {
        (r[a][b][c][d] - r[b][a][c][d] - r[a][b][d][c] + r[b][a][d][c] + r[c][d][a][b]
            - r[d][c][a][b]
            - r[c][d][b][a]
            + r[d][c][b][a])
            / 8.0
    };
    let mut out = [[[[0.0; DIM]; DIM]; DIM]; DIM];
    let mut dev: f64 = 0.0;
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                for d in 0..DIM {
                    let v = if a == b || c == d {
                        0.0
                    } else {
                        let (p, s1) = if a < b { ((a, b), 1.0) } else { ((b, a), -1.0) };
                        let (q, s2) = if c < d { ((c, d), 1.0) } else { ((d, c), -1.0) };
                        let (x, y) = if p <= q { (p, q) } else { (q, p) };
                        s1 * s2 * avg(x.0, x.1, y.0, y.1)
                    };
                    out[a][b][c][d] = v;
                    dev = dev.max((r[a][b][c][d] - v).abs());
                }
            }
        }
    }
    (out, dev)
}

/// `∇_i h_{jk} = ∂_i h_{jk} − Γ^m_{ij} h_{mk} − Γ^m_{ik} h_{jm}`.
pub fn covariant_gradient_sym2(
    grid: &GridChart,
    g: &SymTensorField,
    h: &SymTensorField,
) -> Result<ThirdOrderField> {
    let conn = Connection::new(grid, g)?;
    covariant_gradient_with(grid, &conn, h)
}

pub(crate) fn covariant_gradient_with(
    grid: &GridChart,
    conn: &Connection,
    h: &SymTensorField,
) -> Result<ThirdOrderField> {
    h.validate(grid)?;
    let dh = first_derivatives(grid, &components(h));
    let values = (0..grid.len())
        .into_par_iter()
        .map(|node| {
            let gam = &conn.gamma[node];
            let hv = &h.values[node];
            let mut out = [[[0.0; DIM]; DIM]; DIM];
            for i in 0..DIM {
                for j in 0..DIM {
                    for k in j..DIM {
                        let mut v = dh[i][j][k][node];
                        for m in 0..DIM {
                            v -= gam[m][i][j] * hv[m][k] + gam[m][i][k] * hv[j][m];
                        }
                        out[i][j][k] = v;
                        out[i][k][j] = v;
                    }
                }
            }
            out
        })
        .collect();
    Ok(ThirdOrderField { values })
}

/// Rough Laplacian `Δh_{ij} = g^{kl} ∇_k ∇_l h_{ij}`.
pub fn rough_laplacian_sym2(
    grid: &GridChart,
    g: &SymTensorField,
    h: &SymTensorField,
) -> Result<SymTensorField> {
    let conn = Connection::new(grid, g)?;
    let grad = covariant_gradient_with(grid, &conn, h)?;
    Ok(rough_laplacian_with(grid, &conn, h, &grad))
}

/// Expands `∇_k(∇h)_{lij}` as `∂_k ∂_l h_{ij} − ∂_k P_{lij}` minus the
/// connection terms acting on `∇h`, where `P_{lij} = Γ^m_{li} h_{mj} + Γ^m_{lj} h_{im}`.
/// The flat part `∂_k ∂_l h` uses the compact stencil.
pub(crate) fn rough_laplacian_with(
    grid: &GridChart,
    conn: &Connection,
    h: &SymTensorField,
    grad: &ThirdOrderField,
) -> SymTensorField {
    let ddh = second_derivatives(grid, &components(h));
    // p[l][i][j] as node arrays
    let p: Vec<Rank3> = (0..grid.len())
        .into_par_iter()
        .map(|node| {
            let gam = &conn.gamma[node];
            let hv = &h.values[node];
            let mut out = [[[0.0; DIM]; DIM]; DIM];
            for l in 0..DIM {
                for i in 0..DIM {
                    for j in 0..DIM {
                        let mut s = 0.0;
                        for m in 0..DIM {
                            s += gam[m][l][i] * hv[m][j] + gam[m][l][j] * hv[i][m];
                        }
                        out[l][i][j] = s;
                    }
                }
            }
            out
        })
        .collect();
    let dp: [[[[Vec<f64>; DIM]; DIM]; DIM]; DIM] = std::array::from_fn(|l| {
        let pl: [[Vec<f64>; DIM]; DIM] = std::array::from_fn(|i| {
            std::array::from_fn(|j| p.iter().map(|v| v[l][i][j]).collect())
        });
        std::array::from_fn(|k| {
            let d01 = grid.d1_all(&pl[0][1], k);
            [
                [grid.d1_all(&pl[0][0], k), d01.clone()],
                [d01, grid.d1_all(&pl[1][1], k)],
            ]
        })
    });
    let values = (0..grid.len())
        .into_par_iter()
        .map(|node| {
            let gam = &conn.gamma[node];
            let inv = &conn.inverse[node];
            let t = &grad.values[node];
            let mut out = [[0.0; DIM]; DIM];
            for i in 0..DIM {
                for j in i..DIM {
                    let mut s = 0.0;
                    for k in 0..DIM {
                        for l in 0..DIM {
                            if inv[k][l] == 0.0 {
                                continue;
                            }
                            let mut v = ddh[i][j][k][l][node] - dp[l][k][i][j][node];
                            for m in 0..DIM {
                                v -= gam[m][k][l] * t[m][i][j]
                                    + gam[m][k][i] * t[l][m][j]
                                    + gam[m][k][j] * t[l][i][m];
                            }
                            s += inv[k][l] * v;
                        }
                    }
                    out[i][j] = s;
                    out[j][i] = s;
                }
            }
            out
        })
        .collect();
    SymTensorField {
        values,
        variance: Variance::Covariant,
    }
}

/// Laplace–Beltrami operator on a scalar field.
pub fn scalar_laplacian(
    grid: &GridChart,
    g: &SymTensorField,
    f: &ScalarField,
) -> Result<ScalarField> {
    let conn = Connection::new(grid, g)?;
    f.validate(grid)?;
    Ok(scalar_laplacian_with(grid, &conn, f))
}

pub(crate) fn scalar_laplacian_with(
    grid: &GridChart,
    conn: &Connection,
    f: &ScalarField,
) -> ScalarField {
    let d1: [Vec<f64>; DIM] = std::array::from_fn(|m| grid.d1_all(&f.values, m));
    let d2: [[Vec<f64>; DIM]; DIM] =
        std::array::from_fn(|k| std::array::from_fn(|l| grid.d2_all(&f.values, k, l)));
    let values = (0..grid.len())
        .into_par_iter()
        .map(|node| {
            let inv = &conn.inverse[node];
            let gam = &conn.gamma[node];
            let df: [f64; DIM] = std::array::from_fn(|m| d1[m][node]);
            let mut s = 0.0;
            for k in 0..DIM {
                for l in 0..DIM {
                    let mut v = d2[k][l][node];
                    for m in 0..DIM {
                        v -= gam[m][k][l] * df[m];
                    }
                    s += inv[k][l] * v;
                }
            }
            s
        })
        .collect();
    ScalarField::new(values)
}

/// `Σ_nodes f · sqrt(det g) · cell volume`.
pub fn integrate_density(grid: &GridChart, g: &SymTensorField, f: &ScalarField) -> Result<f64> {
    f.validate(grid)?;
    g.validate(grid)?;
    let det = metric_determinant(g);
    integrate_with_det(grid, &det.values, &f.values)
}

pub(crate) fn integrate_with_det(grid: &GridChart, det: &[f64], f: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for (node, (&d, &v)) in det.iter().zip(f).enumerate() {
        if !(d > 0.0) {
            return Err(Error::NegativeDeterminant { node, det: d });
        }
        sum += v * d.sqrt();
    }
    Ok(sum * grid.cell_volume())
}

pub fn identity_field(grid: &GridChart) -> SymTensorField {
    SymTensorField::covariant(vec![identity2(); grid.len()])
}

/// Conformal metric `e^{2φ} δ`.
pub fn conformal_metric(grid: &GridChart, phi: &[f64]) -> SymTensorField {
    SymTensorField::from_fn(grid.len(), Variance::Covariant, |k| {
        let s = (2.0 * phi[k]).exp();
        [[s, 0.0], [0.0, s]]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    fn max_err(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn inverse_examples() {
        let g = SymTensorField::covariant(vec![[[4.0, 0.0], [0.0, 1.0]], identity2()]);
        let inv = metric_inverse(&g).unwrap();
        assert_eq!(inv.values[0], [[0.25, 0.0], [0.0, 1.0]]);
        assert_eq!(inv.values[1], identity2());
        assert_eq!(inv.variance, Variance::Contravariant);
    }

    #[test]
    fn inverse_rejects_indefinite() {
        let g = SymTensorField::covariant(vec![identity2(), [[1.0, 2.0], [2.0, 1.0]]]);
        assert!(matches!(
            metric_inverse(&g),
            Err(Error::NotPositiveDefinite { node: 1 })
        ));
    }

    #[test]
    fn determinant_examples() {
        let g = SymTensorField::covariant(vec![
            identity2(),
            [[4.0, 0.0], [0.0, 1.0]],
            [[2.0, 1.0], [1.0, 2.0]],
        ]);
        assert_eq!(metric_determinant(&g).values, vec![1.0, 4.0, 3.0]);
    }

    #[test]
    fn flat_metric_has_no_connection_or_curvature() {
        let grid = GridChart::torus(16).unwrap();
        let g = SymTensorField::covariant(vec![[[2.0, 0.3], [0.3, 1.0]]; grid.len()]);
        assert_eq!(christoffel(&grid, &g).unwrap().max_abs(), 0.0);
        let r = riemann_curvature(&grid, &g).unwrap();
        assert!(r
            .values
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .flatten()
            .all(|x| *x == 0.0));
    }

    #[test]
    fn constant_h_flat_metric_is_parallel() {
        let grid = GridChart::torus(16).unwrap();
        let g = identity_field(&grid);
        let h = SymTensorField::covariant(vec![[[1.0, -0.5], [-0.5, 3.0]]; grid.len()]);
        assert_eq!(
            covariant_gradient_sym2(&grid, &g, &h).unwrap().max_abs(),
            0.0
        );
        assert_eq!(rough_laplacian_sym2(&grid, &g, &h).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn integrate_examples() {
        let unit = GridChart::new(2, 16, 1.0).unwrap();
        let one = ScalarField::constant(unit.len(), 1.0);
        let v = integrate_density(&unit, &identity_field(&unit), &one).unwrap();
        assert!((v - 1.0).abs() < 1e-14);

        let grid = GridChart::torus(32).unwrap();
        let one = ScalarField::constant(grid.len(), 1.0);
        // sqrt det = 2 for g = 2δ; g = 4δ scales the volume by 4^{n/2} = 4
        let g2 = SymTensorField::covariant(vec![[[2.0, 0.0], [0.0, 2.0]]; grid.len()]);
        let v = integrate_density(&grid, &g2, &one).unwrap();
        assert!((v - 2.0 * TAU * TAU).abs() < 1e-11);
        let g4 = SymTensorField::covariant(vec![[[4.0, 0.0], [0.0, 4.0]]; grid.len()]);
        let v = integrate_density(&grid, &g4, &one).unwrap();
        assert!((v - 4.0 * TAU * TAU).abs() < 1e-11);

        let f = ScalarField::new(grid.sample(|x, _| x.sin().powi(2)));
        let v = integrate_density(&grid, &identity_field(&grid), &f).unwrap();
        assert!((v - 2.0 * PI * PI).abs() < 1e-12, "{v}");
    }

    #[test]
    fn integrate_rejects_negative_determinant() {
        let grid = GridChart::torus(8).unwrap();
        let mut g = identity_field(&grid);
        g.values[3] = [[1.0, 2.0], [2.0, 1.0]];
        let one = ScalarField::constant(grid.len(), 1.0);
        assert!(matches!(
            integrate_density(&grid, &g, &one),
            Err(Error::NegativeDeterminant { node: 3, .. })
        ));
    }

    #[test]
    fn laplacian_of_sine_component() {
        let grid = GridChart::torus(64).unwrap();
        let s = grid.sample(|x, _| x.sin());
        let h = SymTensorField::from_fn(grid.len(), Variance::Covariant, |k| {
            [[s[k], 0.0], [0.0, 0.0]]
        });
        let lap = rough_laplacian_sym2(&grid, &identity_field(&grid), &h).unwrap();
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        assert!(max_err(&lap.component(0, 0), &neg) < 1e-3);
        assert_eq!(lap.component(0, 1), vec![0.0; grid.len()]);
    }
}
