#![allow(clippy::needless_range_loop)]

use std::f64::consts::{PI, TAU};

use imcf::field::identity2;
use imcf::tensor::*;
use imcf::{GridChart, ScalarField, SymTensorField, Variance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sup(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn assert_second_order(errs: &[f64]) {
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!(
            (3.2..=4.8).contains(&ratio),
            "errors {errs:?}, ratio {ratio}"
        );
    }
}

#[test]
fn inverse_and_determinant_examples() {
    let grid = GridChart::torus(8).unwrap();
    let g = SymTensorField::covariant(vec![[[4.0, 0.0], [0.0, 1.0]]; grid.len()]);
    let inv = metric_inverse(&g).unwrap();
    assert_eq!(inv.variance, Variance::Contravariant);
    assert_eq!(inv.values[3], [[0.25, 0.0], [0.0, 1.0]]);
    assert_eq!(metric_determinant(&g).values[0], 4.0);
    assert_eq!(
        metric_inverse(&identity_field(&grid)).unwrap().values[5],
        identity2()
    );
    assert!((det2(&[[2.0, 1.0], [1.0, 2.0]]) - 3.0).abs() < 1e-15);
}

#[test]
fn inverse_multiplies_back() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let grid = GridChart::torus(16).unwrap();
    let values = (0..grid.len())
        .map(|_| {
            let a: [[f64; 2]; 2] = [
                [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
            ];
            let mut m = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] =
                        a[i][0] * a[j][0] + a[i][1] * a[j][1] + if i == j { 0.3 } else { 0.0 };
                }
            }
            m
        })
        .collect();
    let g = SymTensorField::covariant(values);
    let inv = metric_inverse(&g).unwrap();
    let dev = sup(g.values.iter().zip(&inv.values).flat_map(|(a, b)| {
        let p = matmul(a, b);
        [p[0][0] - 1.0, p[0][1], p[1][0], p[1][1] - 1.0]
    }));
    assert!(dev < 1e-12, "{dev}");
}

#[test]
fn inverse_rejects_indefinite() {
    let g = SymTensorField::covariant(vec![[[1.0, 0.0], [0.0, -1.0]]; 64]);
    assert!(metric_inverse(&g).is_err());
}

fn conformal_christoffel_error(nodes: usize) -> f64 {
    let grid = GridChart::torus(nodes).unwrap();
    let phi = grid.sample(|x, _| 0.1 * x.sin());
    let gamma = christoffel(&grid, &conformal_metric(&grid, &phi)).unwrap();
    let mut err: f64 = 0.0;
    for node in 0..grid.len() {
        let [x, _] = grid.position(node);
        let dphi = [0.1 * x.cos(), 0.0];
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                    let exact = d(k, i) * dphi[j] + d(k, j) * dphi[i] - d(i, j) * dphi[k];
                    err = err.max((gamma.values[node][k][i][j] - exact).abs());
                }
            }
        }
    }
    err
}

#[test]
fn christoffel_conformal_second_order() {
    let grid = GridChart::torus(16).unwrap();
    let flat = christoffel(
        &grid,
        &SymTensorField::covariant(vec![[[2.0, 0.5], [0.5, 1.0]]; grid.len()]),
    )
    .unwrap();
    assert!(sup(flat.values.iter().flatten().flatten().flatten().copied()) < 1e-14);
    let errs: Vec<f64> = [32, 64, 128].map(conformal_christoffel_error).to_vec();
    assert!(errs[1] < 1e-3);
    assert_second_order(&errs);
}

fn conformal_gauss_curvature_error(nodes: usize) -> f64 {
    let grid = GridChart::torus(nodes).unwrap();
    let phi = grid.sample(|x, y| 0.1 * x.sin() * y.sin());
    let g = conformal_metric(&grid, &phi);
    let r = riemann_curvature(&grid, &g).unwrap();
    let mut err: f64 = 0.0;
    for node in 0..grid.len() {
        // Δφ = −0.2 sin x sin y, K = −e^{−2φ} Δφ
        let exact = (-2.0 * phi[node]).exp() * 2.0 * phi[node];
        let k = r.values[node][0][1][0][1] / det2(&g.values[node]);
        err = err.max((k - exact).abs());
    }
    err
}

#[test]
fn riemann_conformal_gauss_curvature() {
    let grid = GridChart::torus(16).unwrap();
    let flat = riemann_curvature(&grid, &identity_field(&grid)).unwrap();
    assert!(
        sup(flat
            .values
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .flatten()
            .copied())
            < 1e-14
    );
    let errs: Vec<f64> = [32, 64, 128].map(conformal_gauss_curvature_error).to_vec();
    assert_second_order(&errs);
}

#[test]
fn riemann_has_curvature_symmetries() {
    let grid = GridChart::torus(32).unwrap();
    let g = SymTensorField::from_fn(grid.len(), Variance::Covariant, |k| {
        let [x, y] = grid.position(k);
        [
            [1.0 + 0.2 * x.sin(), 0.1 * (x + y).cos()],
            [0.1 * (x + y).cos(), 1.0 + 0.1 * y.cos()],
        ]
    });
    let r = riemann_curvature(&grid, &g).unwrap();
    for v in &r.values {
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        assert_eq!(v[a][b][c][d], -v[b][a][c][d]);
                        assert_eq!(v[a][b][c][d], -v[a][b][d][c]);
                        assert_eq!(v[a][b][c][d], v[c][d][a][b]);
                    }
                }
            }
        }
    }
}

#[test]
fn gradient_of_hessian_is_codazzi_symmetric() {
    let errs: Vec<f64> = [32, 64, 128]
        .map(|n| {
            let grid = GridChart::torus(n).unwrap();
            let h = SymTensorField::from_fn(grid.len(), Variance::Covariant, |k| {
                let [x, y] = grid.position(k);
                let (sx, cx, sy, cy) = (x.sin(), x.cos(), y.sin(), y.cos());
                [
                    [-0.1 * sx * sy, 0.1 * cx * cy],
                    [0.1 * cx * cy, -0.1 * sx * sy],
                ]
            });
            let grad = covariant_gradient_sym2(&grid, &identity_field(&grid), &h).unwrap();
            sup(grad
                .values
                .iter()
                .map(|t| t[0][1][0] - t[1][0][0])
                .chain(grad.values.iter().map(|t| t[0][1][1] - t[1][0][1])))
        })
        .to_vec();
    let grid = GridChart::torus(16).unwrap();
    let zero =
        covariant_gradient_sym2(&grid, &identity_field(&grid), &identity_field(&grid)).unwrap();
    assert!(sup(zero.values.iter().flatten().flatten().flatten().copied()) == 0.0);
    // The analytic third derivatives of a Hessian commute, so only truncation error remains.
    assert!(errs.iter().all(|e| *e < 1e-12), "{errs:?}");
}

#[test]
fn rough_laplacian_fourier_mode() {
    let errs: Vec<f64> = [32, 64, 128]
        .map(|n| {
            let grid = GridChart::torus(n).unwrap();
            let h = SymTensorField::from_fn(grid.len(), Variance::Covariant, |k| {
                [[grid.position(k)[0].sin(), 0.0], [0.0, 0.0]]
            });
            let lap = rough_laplacian_sym2(&grid, &identity_field(&grid), &h).unwrap();
            sup(lap
                .values
                .iter()
                .zip(&h.values)
                .map(|(l, hv)| l[0][0] + hv[0][0]))
        })
        .to_vec();
    assert_second_order(&errs);
    let grid = GridChart::torus(16).unwrap();
    let c = SymTensorField::covariant(vec![[[0.3, 0.1], [0.1, -0.2]]; grid.len()]);
    let lap = rough_laplacian_sym2(&grid, &identity_field(&grid), &c).unwrap();
    assert!(sup(lap.values.iter().flatten().flatten().copied()) < 1e-14);
}

#[test]
fn rough_laplacian_self_convergence_on_curved_metric() {
    // Compare on the nodes shared by all three grids.
    let fields: Vec<(usize, Vec<[[f64; 2]; 2]>)> = [32usize, 64, 128]
        .into_iter()
        .map(|n| {
            let grid = GridChart::torus(n).unwrap();
            let phi = grid.sample(|x, y| 0.1 * x.sin() * y.cos());
            let g = conformal_metric(&grid, &phi);
            let h = SymTensorField::from_fn(grid.len(), Variance::Covariant, |k| {
                let [x, y] = grid.position(k);
                [
                    [x.cos(), 0.2 * (x + y).sin()],
                    [0.2 * (x + y).sin(), y.sin()],
                ]
            });
            (n, rough_laplacian_sym2(&grid, &g, &h).unwrap().values)
        })
        .collect();
    let at = |level: usize, i0: usize, i1: usize| {
        let (n, v) = &fields[level];
        let s = n / 32;
        v[i0 * s * n + i1 * s]
    };
    let mut d = [0.0f64; 2];
    for i0 in 0..32 {
        for i1 in 0..32 {
            for a in 0..2 {
                for b in 0..2 {
                    d[0] = d[0].max((at(0, i0, i1)[a][b] - at(1, i0, i1)[a][b]).abs());
                    d[1] = d[1].max((at(1, i0, i1)[a][b] - at(2, i0, i1)[a][b]).abs());
                }
            }
        }
    }
    let ratio = d[0] / d[1];
    assert!((3.2..=4.8).contains(&ratio), "{d:?}");
}

#[test]
fn scalar_laplacian_conformal_oracle() {
    let errs: Vec<f64> = [32, 64, 128]
        .map(|n| {
            let grid = GridChart::torus(n).unwrap();
            let phi = grid.sample(|x, y| 0.1 * (x + y).sin());
            let g = conformal_metric(&grid, &phi);
            let f = ScalarField::new(grid.sample(|x, y| x.sin() * (2.0 * y).cos()));
            let lap = scalar_laplacian(&grid, &g, &f).unwrap();
            // in two dimensions Δ_{e^{2φ}δ} f = e^{−2φ} Δ_δ f
            sup((0..grid.len())
                .map(|k| lap.values[k] - (-2.0 * phi[k]).exp() * (-5.0 * f.values[k])))
        })
        .to_vec();
    assert_second_order(&errs);
}

#[test]
fn integration_examples() {
    let unit = GridChart::new(2, 16, 1.0).unwrap();
    let one = ScalarField::constant(unit.len(), 1.0);
    assert!((integrate_density(&unit, &identity_field(&unit), &one).unwrap() - 1.0).abs() < 1e-12);

    let grid = GridChart::torus(32).unwrap();
    let one = ScalarField::constant(grid.len(), 1.0);
    let four = SymTensorField::covariant(vec![[[4.0, 0.0], [0.0, 4.0]]; grid.len()]);
    let v = integrate_density(&grid, &four, &one).unwrap();
    assert!((v - 4.0 * TAU * TAU).abs() < 1e-9, "{v}");

    let s2 = ScalarField::new(grid.sample(|x, _| x.sin().powi(2)));
    let v = integrate_density(&grid, &identity_field(&grid), &s2).unwrap();
    assert!((v - 2.0 * PI * PI).abs() < 1e-12, "{v}");

    let bad = SymTensorField::covariant(vec![[[1.0, 0.0], [0.0, -1.0]]; grid.len()]);
    assert!(integrate_density(&grid, &bad, &one).is_err());
}
